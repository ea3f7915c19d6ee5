#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

#include "homcl/errors.hpp"
#include "homcl/model.hpp"

namespace homcl {

/// Time-dependent coefficient matrix t -> A(t) of a linear Hamiltonian system
/// J u' = A(t) u, i.e. u' = -J A(t) u.
using MatrixCallback = std::function<Eigen::MatrixXd(double t)>;

/// Spectral data of one asymptotic linear system.
struct FloquetData {
    Eigen::MatrixXd monodromy;                   // identity map for constant systems
    std::vector<std::complex<double>> multipliers;  // sorted by modulus, descending
    bool hyperbolic = false;
    double margin = 0.0;           // min over multipliers of | |rho| - 1 |
    Eigen::MatrixXd stable_basis;    // orthonormal, dim x N
    Eigen::MatrixXd unstable_basis;  // orthonormal, dim x N
    double period_used = 0.0;
    double symplectic_defect = 0.0;  // max over steps of the relative defect
                                     // ||Phi^T J Phi - J||_F / max(1, ||Phi||_F^2)
};

/// Fundamental solution Phi(T) of u' = -J A(t) u, Phi(0) = I, by fixed-step
/// RK4 with `steps` subintervals (at least 100). Tracks the worst relative
/// defect of the symplectic invariant Phi^T J Phi = J along the way (scaled
/// by ||Phi||_F^2, the natural size of the product) and throws
/// SymplecticDriftExceeded when it passes tol_symp.
Eigen::MatrixXd monodromy(const MatrixCallback& A, double T, int steps,
                          const SymplecticStructure& S, double tol_symp = 1e-6,
                          double* defect_out = nullptr);

/// Eigenvalues of M sorted by modulus, descending (ties broken by real part,
/// then imaginary part, descending). Throws EigenSolverFailure if the solver
/// does not converge.
std::vector<std::complex<double>> multipliers(const Eigen::MatrixXd& M);

/// Eigenvalues of -J A0 (the exponents of a constant-coefficient system),
/// sorted by real part descending.
std::vector<std::complex<double>> constant_spectrum(const Eigen::MatrixXd& A0,
                                                    const SymplecticStructure& S);

enum class SubspaceKind {
    stable_multipliers,    // |rho| < 1 for a monodromy matrix
    unstable_multipliers,  // |rho| > 1
    stable_exponents,      // Re mu < 0 for a constant-coefficient matrix -J A0
    unstable_exponents,    // Re mu > 0
};

struct SubspacePair {
    Eigen::MatrixXd basis;       // orthonormal basis of the invariant subspace
    Eigen::MatrixXd complement;  // orthonormal basis of its orthogonal complement
};

/// Orthonormal basis of the invariant subspace of M for the selected part of
/// the spectrum, via a sorted real Schur decomposition. Throws NotHyperbolic
/// (with the given side tag) when the subspace dimension is not exactly N,
/// and EigenSolverFailure when the decomposition fails. Column signs are
/// canonicalized so the result is deterministic.
SubspacePair invariant_subspace(const Eigen::MatrixXd& M, SubspaceKind kind,
                                const SymplecticStructure& S, Side side);

struct FloquetOptions {
    int steps = 4000;        // RK4 subintervals per period
    double tol_symp = 1e-6;  // symplectic drift guard
    double tol_hyp = 1e-8;   // margin below which a system counts as non-hyperbolic
};

/// Full analysis of a periodic linear system given its coefficient callback
/// and period: monodromy, multipliers, hyperbolicity margin, and the stable /
/// unstable invariant subspaces of the monodromy.
FloquetData analyze_periodic(const MatrixCallback& A, double T,
                             const SymplecticStructure& S,
                             const FloquetOptions& opts = {}, Side side = Side::plus);

/// Same analysis for a constant-coefficient system J u' = A0 u: multipliers
/// are the eigenvalues of -J A0 (exponents), hyperbolicity means no exponent
/// on the imaginary axis, and the bases span the stable / unstable eigenspaces.
FloquetData analyze_constant(const Eigen::MatrixXd& A0, const SymplecticStructure& S,
                             const FloquetOptions& opts = {}, Side side = Side::plus);

/// Routes one side of a model to the constant or periodic analysis according
/// to its declared asymptotic kind, evaluating the bundle linearization at 0.
FloquetData analyze_side(const HamiltonianModel& m, Side side, double lambda,
                         const FloquetOptions& opts = {});

}  // namespace homcl
