#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "homcl/errors.hpp"
#include "homcl/floquet.hpp"
#include "homcl/grid.hpp"
#include "homcl/linop.hpp"
#include "homcl/model.hpp"

namespace homcl {

struct TransversalityData {
    Eigen::MatrixXd G;           // G_ij = integral <T(t) u_i, u_j> dt
    Eigen::MatrixXd image_gram;  // Gram matrix of {T u_i} in weighted L2
    bool g_nonsingular = false;
    double condition_number = 0.0;  // sigma_max(G) / sigma_min(G)
    int image_rank = 0;
    int parity = 1;  // (-1)^k
};

/// Crossing-form data at a candidate: the pairing matrix of the kernel under
/// T(t) = d/dlambda D^2_xi H(t, 0, lambda), its conditioning, the rank of the
/// image {T u_i}, and the parity sign. Nondegeneracy of G and full image rank
/// are the checkable forms of the transversality conditions; both use the
/// relative threshold tol_G. Throws DegenerateKernel if a basis vector has
/// L2 norm below 1e-12.
TransversalityData transversality(const KernelData& kernel, const HamiltonianModel& m,
                                  const Grid& grid, double tol_G = 1e-6);

/// det of T(t0) at the candidate; a nonzero value certifies full image rank
/// without the Gram computation (zero is inconclusive, not a failure).
double det_shortcut(const HamiltonianModel& m, double lambda0, double t0);

enum class RegularityMode {
    positivity,  // (a): <g(t, xi), J C xi> > 0 away from 0
    linear,      // (b): g coincides with its linearization
    autonomous,  // (c): g is t-independent and its potential has an isolated zero
};

struct RegularitySamples {
    int n_t = 16;               // t samples per period
    int n_dirs = 16;            // directions per sphere
    std::vector<double> radii_positivity = {0.01, 0.1, 1.0, 10.0};
    std::vector<double> radii_autonomous = {0.01, 0.05, 0.1};
    double tol_lin = 1e-10;       // allowance for mode (b)
    double tol_autonomy = 1e-10;  // t-variation allowed by mode (c)
    std::uint64_t seed = 0xB1F0;
};

struct RegularityResult {
    RegularityMode mode = RegularityMode::positivity;
    double margin = 0.0;
    bool passed = false;
};

/// Samples one no-homoclinic criterion for the requested asymptotic bundle.
///   positivity: margin = min <g(t, xi), J C xi> / ||xi||^2 over t, directions,
///     and radii; passes iff positive. C must be symmetric.
///   linear: margin = -max ||g(t, xi) - D g(t, 0) xi|| / ||xi||; passes iff
///     greater than -tol_lin.
///   autonomous: requires g t-independent to tol_autonomy (else ModeMismatch);
///     margin = min |V(xi)| / ||xi||^2 over small spheres, where V is the
///     bundle's potential recovered by radial quadrature; passes iff positive.
RegularityResult check_regularity(const HamiltonianModel& m, Side side, double lambda,
                                  RegularityMode mode, const Eigen::MatrixXd& C,
                                  const RegularitySamples& samples = {});

struct AdmissibilityReport {
    std::vector<double> lambda_grid;
    std::vector<double> hyperbolicity_margins_plus;
    std::vector<double> hyperbolicity_margins_minus;
    RegularityMode regularity_mode_plus = RegularityMode::positivity;
    RegularityMode regularity_mode_minus = RegularityMode::positivity;
    std::vector<double> regularity_margins_plus;
    std::vector<double> regularity_margins_minus;
    bool admissible = false;
};

struct AdmissibilityOptions {
    int n_grid = 21;
    RegularityMode mode_plus = RegularityMode::positivity;
    RegularityMode mode_minus = RegularityMode::positivity;
    Eigen::MatrixXd C;  // defaults to the exchange matrix [[0,1],[1,0]] pattern
    RegularitySamples samples;
    FloquetOptions floquet;
    double tol_axis = 1e-8;
    int jobs = 1;
};

/// Checks the admissibility conditions over a uniform lambda grid: both
/// asymptotic systems hyperbolic (constant shortcut for constant kinds,
/// monodromy route for periodic ones) and both regularity criteria passing.
/// Non-hyperbolic parameters are recorded through their margins, never as
/// exceptions. The interval is admissible iff every sampled check passes.
AdmissibilityReport admissibility(const HamiltonianModel& m, double lambda_lo,
                                  double lambda_hi, const AdmissibilityOptions& opts = {});

struct BifurcationReport {
    double lambda0 = 0.0;
    int k = 0;
    bool k_odd = false;
    Eigen::MatrixXd transversality_matrix;
    bool g_nonsingular = false;
    double condition_number = 0.0;
    Eigen::MatrixXd image_gram;
    int image_rank = 0;
    double det_shortcut_value = 0.0;
    double det_shortcut_t0 = 0.0;
    int parity = 1;
    bool all_hypotheses_met = false;
    std::string note;  // caveats, e.g. the k > 1 pairing subtlety
};

/// Bundles the kernel-level hypothesis checks at one candidate into a single
/// report: odd kernel dimension, nondegenerate pairing, full image rank.
BifurcationReport bifurcation_report(const KernelData& kernel, const HamiltonianModel& m,
                                     const Grid& grid, double tol_G = 1e-6,
                                     double det_t0 = 0.0);

}  // namespace homcl
