#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "homcl/banded.hpp"
#include "homcl/errors.hpp"
#include "homcl/floquet.hpp"
#include "homcl/grid.hpp"
#include "homcl/model.hpp"

namespace homcl {

enum class BcKind {
    projection,      // endpoint values confined to the decaying subspaces
    dirichlet_half,  // first N state components forced to zero at each end
};

/// The N x 2N row blocks that close the truncated boundary-value problem:
/// rows annihilating x(-L) exactly when it lies in the subspace of solutions
/// decaying backward in time, and likewise for x(+L) forward in time.
struct ClosureRows {
    Eigen::MatrixXd left;   // N x 2N, unit rows
    Eigen::MatrixXd right;  // N x 2N, unit rows
};

/// Builds closure rows for the model's asymptotic systems at parameter
/// lambda. For projection conditions the rows are orthonormal bases of the
/// orthogonal complements of the admissible subspaces (unstable at -L,
/// stable at +L), obtained from the constant spectrum or from the monodromy
/// anchored at the truncation endpoint, per the declared asymptotic kind.
/// Throws NotHyperbolic(side) when a margin is at most tol_axis.
ClosureRows boundary_closures(const HamiltonianModel& m, double lambda, const Grid& grid,
                              BcKind bc, double tol_axis = 1e-8,
                              const FloquetOptions& fl = {});

/// Coefficient matrix of one interior cell: called with the cell index and
/// the midpoint time, must return the 2N x 2N symmetric matrix A used in the
/// one-step relation J (x_{i+1} - x_i) / h = A (x_i + x_{i+1}) / 2.
using CellMatrixCallback = std::function<Eigen::MatrixXd(int cell, double t_mid)>;

/// The discretized operator. Row layout keeps the matrix banded: the N left
/// closure rows come first, then 2N rows per cell of the midpoint scheme,
/// then the N right closure rows; each row touches at most two adjacent
/// 2N-blocks of unknowns, i.e. a column span of 4N - 1 beyond the first.
struct BandedOperator {
    BandedMatrix matrix;
    Grid grid;
    int block = 2;  // 2N
    BcKind bc = BcKind::projection;
    int bandwidth = 3;  // widest per-row column span minus one: 4N - 1
    Eigen::MatrixXd left_rows, right_rows;

    int dim() const { return matrix.dim(); }
};

/// Low-level assembly from an arbitrary cell coefficient callback (used both
/// for the linearization at zero and for Newton systems along a branch).
BandedOperator assemble_with(const SymplecticStructure& S, const Grid& grid,
                             const CellMatrixCallback& cell_matrix,
                             const ClosureRows& closures, BcKind bc);

/// Discretization of u -> J u' - D^2_xi H(t, 0, lambda) u with the requested
/// boundary closure. Throws NotHyperbolic when projection conditions are
/// requested and an asymptotic system has spectrum within tol_axis of the
/// critical set.
BandedOperator assemble(const HamiltonianModel& m, double lambda, const Grid& grid,
                        BcKind bc, double tol_axis = 1e-8);

/// The operator rescaled into the weighted-L2 geometry, D_r * M * D_c^{-1}:
/// interior rows are multiplied by sqrt(h) (so their squared sum approximates
/// the L2 norm of J x' - A x), closure rows stay pointwise, and column j is
/// divided by sqrt(w) with w the trapezoid weight of its node. Singular
/// values of this matrix are generalized singular values of the discrete
/// operator measured L2-to-L2; unlike the raw matrix ones (whose minimum is a
/// boundary quasi-mode artifact of size ~ sqrt(2 gamma h)) they converge
/// under grid refinement.
BandedMatrix l2_scaled_matrix(const BandedOperator& op);

/// The `count` smallest generalized (weighted-L2, see l2_scaled_matrix)
/// singular values of the operator, ascending. Uses a Krylov iteration on the
/// inverse of the normal matrix via the banded factorization; throws
/// FactorizationFailure when the matrix is exactly singular to working
/// precision (callers treat that as sigma_min ~ 0).
std::vector<double> smallest_singular_values(const BandedOperator& op, int count,
                                             std::uint64_t seed = 0xB1F0);

struct SingularPairs {
    std::vector<double> values;   // ascending
    Eigen::MatrixXd vectors;      // right singular vectors, one column per value
};

/// Same iteration, also returning the right singular vectors mapped back to
/// node values (columns of D_c^{-1} V, so each comes out L2-normalized).
SingularPairs smallest_singular_pairs(const BandedOperator& op, int count,
                                      std::uint64_t seed = 0xB1F0);

/// Median generalized singular value, computed from the full spectrum of the
/// scaled normal matrix in symmetric-band form; the scale reference for rank
/// decisions.
double median_singular_value(const BandedOperator& op);

struct ScanPoint {
    double lambda = 0.0;
    double sigma_min = 0.0;
};

struct ScanCandidate {
    double lambda0 = 0.0;
    double sigma_min = 0.0;
};

struct ScanOptions {
    double threshold_dip = 1e-2;  // refined sigma_min below this flags a candidate
    double refine_tol = 1e-6;     // golden-section window width in lambda
    double tol_axis = 1e-8;
    int jobs = 1;
    std::uint64_t seed = 0xB1F0;
};

struct ScanResult {
    std::vector<ScanPoint> profile;        // sigma_min at the n_scan+1 sample points
    std::vector<ScanCandidate> candidates;  // refined dips, ascending in lambda
};

/// Samples sigma_min(lambda) on a uniform grid over [lambda_lo, lambda_hi]
/// (n_scan cells, n_scan >= 10), refines every interior local minimum by
/// golden-section search, and keeps the refined points whose sigma_min falls
/// below threshold_dip. Exactly singular factorizations count as dips.
ScanResult scan_bifurcations(const HamiltonianModel& m, double lambda_lo,
                             double lambda_hi, int n_scan, const Grid& grid,
                             BcKind bc = BcKind::projection, const ScanOptions& opts = {});

struct KernelData {
    double lambda0 = 0.0;
    int dimension = 0;
    std::vector<Eigen::VectorXd> basis;  // L2-orthonormal w.r.t. trapezoid weights
    std::vector<double> singular_values;  // the smallest ones, ascending
    double sigma_ref = 0.0;               // median singular value
    std::vector<ScanPoint> sigma_min_profile;
    std::vector<double> tail_ratios;  // max(||u(-L)||,||u(+L)||) / max_t ||u(t)||
};

/// Kernel dimension and basis at a candidate parameter: counts singular
/// values below rank_tol * sigma_ref, takes the matching right singular
/// vectors, re-orthonormalizes them in the weighted L2 inner product, and
/// fixes signs (the dominant component is positive at its first extremum).
/// Throws RankAmbiguous when a singular value lands within a factor of two
/// of the threshold, making the count grid-dependent.
KernelData kernel_basis(const HamiltonianModel& m, double lambda0, const Grid& grid,
                        BcKind bc, double rank_tol = 1e-5, double tol_axis = 1e-8,
                        std::uint64_t seed = 0xB1F0);

struct GroundState {
    double lambda0 = 0.0;
    Eigen::VectorXd phi;  // on all grid nodes, zero at the ends, L2-normalized
};

/// Ground state of the scalar operator -phi'' - a(t) phi with zero boundary
/// values, via the 3-point second-difference matrix and shifted inverse
/// iteration (shift strictly below the spectrum). Throws NoNegativeEigenvalue
/// when the smallest eigenvalue is not below -tol.
GroundState rayleigh_lambda0(const std::function<double(double)>& a_profile,
                             const Grid& grid, double tol = 1e-10);

struct DecayRates {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
};

/// Exponential decay rates of a discrete solution, from least-squares slopes
/// of log ||x(t)|| over the outermost tail_fraction of each half-interval.
/// Throws TailUnderflow when fewer than 20 tail nodes sit above the noise
/// floor of 1e-13.
DecayRates decay_rate(const Eigen::VectorXd& x, const Grid& grid, int block,
                      double tail_fraction = 0.2);

}  // namespace homcl
