#pragma once

#include <Eigen/Dense>

#include <vector>

#include "homcl/errors.hpp"
#include "homcl/grid.hpp"
#include "homcl/linop.hpp"
#include "homcl/model.hpp"

namespace homcl {

/// Discrete residual of F(lambda, x) = J x' - grad H(t, x, lambda): N left
/// closure rows applied to x(-L), then per cell the midpoint relation
/// J (x_{i+1} - x_i)/h - grad H(t_{i+1/2}, (x_i + x_{i+1})/2, lambda), then
/// N right closure rows applied to x(+L).
Eigen::VectorXd residual(const HamiltonianModel& m, double lambda,
                         const Eigen::VectorXd& x, const Grid& grid,
                         const ClosureRows& closures);

/// Convenience overload that builds the closure rows for (lambda, bc) first.
Eigen::VectorXd residual(const HamiltonianModel& m, double lambda,
                         const Eigen::VectorXd& x, const Grid& grid, BcKind bc,
                         double tol_axis = 1e-8);

/// Jacobian of the discrete residual at state x: the midpoint scheme with
/// cell matrices D^2_xi H evaluated at the averaged node states.
BandedOperator jacobian(const HamiltonianModel& m, double lambda,
                        const Eigen::VectorXd& x, const Grid& grid,
                        const ClosureRows& closures, BcKind bc);

BandedOperator jacobian(const HamiltonianModel& m, double lambda,
                        const Eigen::VectorXd& x, const Grid& grid, BcKind bc,
                        double tol_axis = 1e-8);

struct NewtonOptions {
    double tol = 1e-10;    // max-norm residual target
    int max_iters = 25;
    int max_halvings = 8;  // damping line search depth
};

struct NewtonResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Damped Newton at fixed lambda. Throws NoConvergence (with the final
/// residual) when the tolerance is not reached, SingularJacobian when the
/// linearization cannot be factored or the line search stalls completely.
NewtonResult newton_correct(const HamiltonianModel& m, double lambda,
                            const Eigen::VectorXd& x_init, const Grid& grid, BcKind bc,
                            const NewtonOptions& opts = {}, double tol_axis = 1e-8);

struct BranchPoint {
    double lambda = 0.0;
    Eigen::VectorXd x;
    double sup_norm = 0.0;
    double l2_norm = 0.0;
    double h1_norm = 0.0;
    double residual = 0.0;  // max norm of the discrete residual
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    int newton_iters = 0;
};

/// First nontrivial point of the bifurcating branch: solves the augmented
/// system { residual(lambda, x) = 0, <u0, x>_{L2} = epsilon } for (x, lambda)
/// by bordered Newton from (epsilon * u0, lambda0). epsilon = 0 returns the
/// trivial point. Requires a simple kernel (KernelNotSimple otherwise).
BranchPoint branch_switch(const HamiltonianModel& m, double lambda0,
                          const KernelData& kernel, const Grid& grid, BcKind bc,
                          double epsilon, const NewtonOptions& opts = {},
                          double tol_axis = 1e-8, double tail_fraction = 0.2);

enum class Termination {
    norm_cap_reached,   // H1 norm exceeded the cap (unbounded-branch proxy)
    left_interval,      // lambda exited the admissible window
    returned_to_zero,   // amplitude collapsed at a parameter away from lambda0
    step_failure,       // step shrank below step_min without progress
    max_steps_reached,  // step budget exhausted with none of the above
};

const char* termination_name(Termination t);

struct ContinuationOptions {
    double step0 = 1e-2;
    double step_min = 1e-6;
    double step_max = 0.02;  // fine enough that the default run resolves >= 50 points
    double norm_cap = 1e3;
    int max_steps = 50;
    double lambda_lo = -1e300;
    double lambda_hi = 1e300;
    NewtonOptions newton;
    double tol_axis = 1e-8;
    double tail_fraction = 0.2;
};

struct Branch {
    std::vector<BranchPoint> points;
    double origin_lambda0 = 0.0;
    Termination termination = Termination::max_steps_reached;
};

/// Pseudo-arclength continuation from a switch point: secant predictor
/// normalized so ||dx||_{L2}^2 + dlambda^2 = step^2, bordered Newton
/// corrector on the hyperplane through the predictor, step halved on failure
/// and grown 1.3x after three consecutive successes. The first tangent runs
/// from the trivial point (lambda0, 0) to `start`. Failures are encoded in
/// the termination tag, never thrown.
Branch continue_branch(const HamiltonianModel& m, const BranchPoint& start,
                       double lambda0, const Grid& grid, BcKind bc,
                       const ContinuationOptions& opts = {});

struct DecayReport {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
    double expected_plus = 0.0;
    double expected_minus = 0.0;
    double mismatch_plus = 0.0;   // relative gap |fit - expected| / expected
    double mismatch_minus = 0.0;
};

/// Compares fitted tail decay rates against the rates implied by the
/// asymptotic spectra at the point's parameter (slowest stable exponent, or
/// slowest multiplier rate |log|rho|| / T in the periodic case).
DecayReport verify_decay(const BranchPoint& point, const HamiltonianModel& m,
                         const Grid& grid, double tail_fraction = 0.2,
                         const FloquetOptions& fl = {});

}  // namespace homcl
