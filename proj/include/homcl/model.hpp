#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "homcl/errors.hpp"

namespace homcl {

/// The antisymmetric orthogonal matrix J of the system J x' = grad H(t, x, l).
struct SymplecticStructure {
    int half_dim = 1;  // N; states live in R^{2N}
    Eigen::MatrixXd J;

    /// Standard structure: the 2x2 block [[0,-1],[1,0]] replicated N times
    /// down the diagonal.
    static SymplecticStructure standard(int half_dim);

    int dim() const { return 2 * half_dim; }

    /// Checks J^T = -J and J^T J = I to 1e-12; throws ValidationFailed.
    void validate() const;
};

/// Time dependence of an asymptotic bundle g^+/g^-.
enum class AsymptoticKind {
    constant,              // g linear with a t-independent matrix
    periodic,              // genuinely t-periodic bundle
    autonomous_nonlinear,  // t-independent but nonlinear
};

enum class Side { plus, minus };

inline const char* side_name(Side s) { return s == Side::plus ? "+" : "-"; }

using GradCallback =
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& xi, double lambda)>;
using HessCallback =
    std::function<Eigen::MatrixXd(double t, const Eigen::VectorXd& xi, double lambda)>;
using ParamHessCallback = std::function<Eigen::MatrixXd(double t, double lambda)>;

/// A parametrized Hamiltonian system J x' = grad_xi H(t, x, lambda) together
/// with its asymptotic bundles g^{+/-}(t, xi, lambda) = lim_{t -> +/-inf} of
/// the nonlinearity, their periods, and their linearizations at xi = 0.
/// All callbacks must be pure; they are invoked concurrently.
struct HamiltonianModel {
    SymplecticStructure structure;

    GradCallback grad_h;                 // grad_xi H(t, xi, lambda)
    HessCallback hessian;                // D^2_xi H(t, xi, lambda)
    ParamHessCallback dlambda_hessian;   // d/dlambda D^2_xi H(t, 0, lambda)

    GradCallback g_plus, g_minus;        // asymptotic bundles
    HessCallback dxi_g_plus, dxi_g_minus;

    double period_plus = 0.0, period_minus = 0.0;
    AsymptoticKind kind_plus = AsymptoticKind::constant;
    AsymptoticKind kind_minus = AsymptoticKind::constant;

    int dim() const { return structure.dim(); }
};

/// Checked evaluation wrappers: reject NaN/inf outputs (NonFiniteOutput) and,
/// for the Hessian, asymmetry beyond 1e-10 (AsymmetryDetected).
Eigen::VectorXd eval_grad_h(const HamiltonianModel& m, double t, const Eigen::VectorXd& xi,
                            double lambda);
Eigen::MatrixXd eval_hessian(const HamiltonianModel& m, double t, const Eigen::VectorXd& xi,
                             double lambda);
Eigen::MatrixXd eval_dlambda_hessian(const HamiltonianModel& m, double t, double lambda);

/// A_lambda^{+/-}(t): linearization of the requested asymptotic bundle at 0.
Eigen::MatrixXd asymptotic_matrix(const HamiltonianModel& m, Side side, double t,
                                  double lambda);

struct ValidationOptions {
    std::vector<double> t_samples = {-7.3, -2.0, -0.5, 0.0, 0.4, 1.9, 6.1};
    std::vector<double> lambda_samples = {-2.5, -1.0, -0.3};
    std::vector<double> xi_radii = {1e-3, 1e-1, 1.0};
    int n_directions = 12;
    std::vector<double> R_list = {6.0, 10.0, 14.0, 18.0};
    int period_samples = 16;          // t points per period in asymptotic checks
    double tol = 1e-8;                // generic residual tolerance
    double tol_asymptotic = 1e-3;     // bound required of e(R_max)
    double fd_step = 1e-6;            // step for derivative cross-checks
    double fd_tol = 1e-4;             // tolerance for derivative cross-checks
    std::uint64_t seed = 0xB1F0;
};

struct HypothesisCheck {
    std::string tag;
    bool passed = false;
    double worst_residual = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    std::vector<std::pair<double, double>> e_profile;  // (R, e(R))
    bool all_passed = false;

    /// Throws ValidationFailed carrying the tag of the first failed check.
    void require() const;
};

/// Samples the structural hypotheses behind the bifurcation theory:
///   H1       grad H(t, 0, lambda) = 0 (trivial line of solutions),
///   H2-symmetry      Hessians symmetric,
///   H2-consistency   Hessian matches finite differences of the gradient,
///   H4-bounded       A_lambda, T_lambda finite on samples,
///   Hinf-1   g^{+/-}(t, 0, lambda) = 0,
///   Hinf-2   e(R) = max_{|t| >= R} ||D^2 H - D g^{+/-}|| nonincreasing and
///            small at R_max (the nonlinearity approaches its bundles),
///   Hinf-3   g^{+/-} periodic with the declared periods.
/// Smallness/equicontinuity-type hypotheses admit no finite check; only these
/// sampled consequences are verified, and the report says so.
ValidationReport validate_hypotheses(const HamiltonianModel& m,
                                     const ValidationOptions& opts = {});

}  // namespace homcl
