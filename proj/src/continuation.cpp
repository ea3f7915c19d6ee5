#include "homcl/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace homcl {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_state_dim(const Grid& grid, int block, const Eigen::VectorXd& x) {
    if (x.size() != grid.dim(block))
        throw std::invalid_argument("continuation: state vector has wrong dimension");
}

}  // namespace

Eigen::VectorXd residual(const HamiltonianModel& m, double lambda,
                         const Eigen::VectorXd& x, const Grid& grid,
                         const ClosureRows& closures) {
    const int N = m.structure.half_dim;
    const int block = 2 * N;
    check_state_dim(grid, block, x);
    const double h = grid.step();
    const Eigen::MatrixXd& J = m.structure.J;

    Eigen::VectorXd r(grid.dim(block));
    r.head(N) = closures.left * x.head(block);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double t_mid = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
        const Eigen::VectorXd xl = x.segment(i * block, block);
        const Eigen::VectorXd xr = x.segment((i + 1) * block, block);
        const Eigen::VectorXd mid = 0.5 * (xl + xr);
        r.segment(N + i * block, block) =
            J * ((xr - xl) / h) - eval_grad_h(m, t_mid, mid, lambda);
    }
    r.tail(N) = closures.right * x.tail(block);
    return r;
}

Eigen::VectorXd residual(const HamiltonianModel& m, double lambda,
                         const Eigen::VectorXd& x, const Grid& grid, BcKind bc,
                         double tol_axis) {
    return residual(m, lambda, x, grid, boundary_closures(m, lambda, grid, bc, tol_axis));
}

BandedOperator jacobian(const HamiltonianModel& m, double lambda,
                        const Eigen::VectorXd& x, const Grid& grid,
                        const ClosureRows& closures, BcKind bc) {
    const int block = m.dim();
    check_state_dim(grid, block, x);
    auto cell = [&](int i, double t_mid) {
        const Eigen::VectorXd mid = 0.5 * (x.segment(i * block, block) +
                                           x.segment((i + 1) * block, block));
        return eval_hessian(m, t_mid, mid, lambda);
    };
    return assemble_with(m.structure, grid, cell, closures, bc);
}

BandedOperator jacobian(const HamiltonianModel& m, double lambda,
                        const Eigen::VectorXd& x, const Grid& grid, BcKind bc,
                        double tol_axis) {
    return jacobian(m, lambda, x, grid, boundary_closures(m, lambda, grid, bc, tol_axis),
                    bc);
}

NewtonResult newton_correct(const HamiltonianModel& m, double lambda,
                            const Eigen::VectorXd& x_init, const Grid& grid, BcKind bc,
                            const NewtonOptions& opts, double tol_axis) {
    const ClosureRows closures = boundary_closures(m, lambda, grid, bc, tol_axis);
    Eigen::VectorXd x = x_init;
    Eigen::VectorXd r = residual(m, lambda, x, grid, closures);
    double rn = sup_norm(r);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        if (rn < opts.tol) return {std::move(x), rn, iter};
        BandedOperator op = jacobian(m, lambda, x, grid, closures, bc);
        BandedLU lu = [&] {
            try {
                return op.matrix.factor();
            } catch (const FactorizationFailure& e) {
                throw SingularJacobian(std::string("newton_correct: ") + e.what());
            }
        }();
        Eigen::VectorXd dx = lu.solve(-r);
        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            Eigen::VectorXd x_try = x + alpha * dx;
            Eigen::VectorXd r_try = residual(m, lambda, x_try, grid, closures);
            const double rn_try = sup_norm(r_try);
            if (rn_try < rn) {
                x = std::move(x_try);
                r = std::move(r_try);
                rn = rn_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw NoConvergence("newton_correct: damped step found no descent", rn);
    }
    if (rn < opts.tol) return {std::move(x), rn, opts.max_iters};
    throw NoConvergence("newton_correct: residual tolerance not reached", rn);
}

namespace {

/// One solve of the bordered system
///   A dx + b dlam = -r,   <c, dx>_W + d dlam = -s
/// through the factored A, with one pass of iterative refinement on the
/// augmented linear residual. Returns false when the bordering pivots to
/// (numerically) zero.
bool solve_bordered(const BandedOperator& op, const BandedLU& lu,
                    const Eigen::VectorXd& b, const Eigen::VectorXd& c, double d,
                    const Eigen::VectorXd& r, double s, const Grid& grid, int block,
                    Eigen::VectorXd& dx_out, double& dlam_out) {
    const Eigen::VectorXd p = lu.solve(b);
    const double denom = d - l2_inner(grid, block, c, p);
    if (!std::isfinite(denom) || std::abs(denom) < 1e-300) return false;

    Eigen::VectorXd q = lu.solve(r);
    double dlam = (l2_inner(grid, block, c, q) - s) / denom;
    Eigen::VectorXd dx = -q - dlam * p;

    const Eigen::VectorXd r1 = op.matrix.apply(dx) + b * dlam + r;
    const double s1 = l2_inner(grid, block, c, dx) + d * dlam + s;
    q = lu.solve(r1);
    const double dlam1 = (l2_inner(grid, block, c, q) - s1) / denom;
    dx += -q - dlam1 * p;
    dlam += dlam1;

    if (!dx.allFinite() || !std::isfinite(dlam)) return false;
    dx_out = std::move(dx);
    dlam_out = dlam;
    return true;
}

/// dF/dlambda at fixed closure rows, by central differences in lambda. The
/// closure rows do not move, so the boundary components vanish identically.
Eigen::VectorXd dlambda_residual(const HamiltonianModel& m, double lambda,
                                 const Eigen::VectorXd& x, const Grid& grid,
                                 const ClosureRows& closures) {
    const double delta = 1e-6 * std::max(1.0, std::abs(lambda));
    Eigen::VectorXd b = (residual(m, lambda + delta, x, grid, closures) -
                         residual(m, lambda - delta, x, grid, closures)) /
                        (2.0 * delta);
    const int N = m.structure.half_dim;
    b.head(N).setZero();
    b.tail(N).setZero();
    return b;
}

struct AugmentedState {
    Eigen::VectorXd x;
    double lambda = 0.0;
    int iterations = 0;
};

/// Bordered Newton for { F(lambda, x) = 0, <c, x>_W + d*lambda = rhs } with
/// closure rows frozen at the starting parameter. Throws NoConvergence /
/// SingularJacobian like newton_correct.
AugmentedState bordered_newton(const HamiltonianModel& m, double lambda0_rows,
                               Eigen::VectorXd x, double lambda, const Grid& grid,
                               BcKind bc, const Eigen::VectorXd& c, double d,
                               double rhs, const NewtonOptions& opts,
                               double tol_axis) {
    const int block = m.dim();
    const ClosureRows closures = boundary_closures(m, lambda0_rows, grid, bc, tol_axis);

    auto constraint = [&](const Eigen::VectorXd& xv, double lv) {
        return l2_inner(grid, block, c, xv) + d * lv - rhs;
    };

    Eigen::VectorXd r = residual(m, lambda, x, grid, closures);
    double s = constraint(x, lambda);
    double rn = std::max(sup_norm(r), std::abs(s));
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        if (rn < opts.tol) break;
        BandedOperator op = jacobian(m, lambda, x, grid, closures, bc);
        BandedLU lu = [&] {
            try {
                return op.matrix.factor();
            } catch (const FactorizationFailure& e) {
                throw SingularJacobian(std::string("bordered Newton: ") + e.what());
            }
        }();
        const Eigen::VectorXd b = dlambda_residual(m, lambda, x, grid, closures);
        Eigen::VectorXd dx;
        double dlam = 0.0;
        if (!solve_bordered(op, lu, b, c, d, r, s, grid, block, dx, dlam))
            throw SingularJacobian("bordered Newton: singular bordered system");

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving) {
            Eigen::VectorXd x_try = x + alpha * dx;
            const double l_try = lambda + alpha * dlam;
            Eigen::VectorXd r_try = residual(m, l_try, x_try, grid, closures);
            const double s_try = constraint(x_try, l_try);
            const double rn_try = std::max(sup_norm(r_try), std::abs(s_try));
            if (rn_try < rn) {
                x = std::move(x_try);
                lambda = l_try;
                r = std::move(r_try);
                s = s_try;
                rn = rn_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw NoConvergence("bordered Newton: damped step found no descent", rn);
    }
    if (rn >= opts.tol)
        throw NoConvergence("bordered Newton: residual tolerance not reached", rn);
    return {std::move(x), lambda, iter};
}

/// Fills the norm / decay / residual report fields of a branch point whose
/// (lambda, x) are already set.
void finish_point(BranchPoint& pt, const HamiltonianModel& m, const Grid& grid,
                  BcKind bc, double tol_axis, double tail_fraction) {
    const int block = m.dim();
    pt.sup_norm = sup_norm(pt.x);
    pt.l2_norm = l2_norm(grid, block, pt.x);
    pt.h1_norm = h1_norm(grid, block, pt.x);
    pt.residual = sup_norm(residual(m, pt.lambda, pt.x, grid, bc, tol_axis));
    try {
        const DecayRates rates = decay_rate(pt.x, grid, block, tail_fraction);
        pt.gamma_plus = rates.gamma_plus;
        pt.gamma_minus = rates.gamma_minus;
    } catch (const TailUnderflow&) {
        pt.gamma_plus = kNan;
        pt.gamma_minus = kNan;
    }
}

}  // namespace

BranchPoint branch_switch(const HamiltonianModel& m, double lambda0,
                          const KernelData& kernel, const Grid& grid, BcKind bc,
                          double epsilon, const NewtonOptions& opts, double tol_axis,
                          double tail_fraction) {
    if (kernel.dimension != 1)
        throw KernelNotSimple("branch_switch: kernel is not one-dimensional",
                              kernel.dimension);
    const int block = m.dim();
    const Eigen::VectorXd& u0 = kernel.basis.at(0);
    check_state_dim(grid, block, u0);

    BranchPoint pt;
    if (epsilon == 0.0) {
        pt.lambda = lambda0;
        pt.x = Eigen::VectorXd::Zero(grid.dim(block));
        finish_point(pt, m, grid, bc, tol_axis, tail_fraction);
        return pt;
    }

    // Solve { F(lambda, x) = 0, <u0, x>_W = epsilon } from the tangent guess.
    AugmentedState sol = bordered_newton(m, lambda0, epsilon * u0, lambda0, grid, bc,
                                         u0, 0.0, epsilon, opts, tol_axis);
    // Re-correct at the final parameter with fresh closure rows so the
    // reported point satisfies the canonical residual definition.
    NewtonResult nr = newton_correct(m, sol.lambda, sol.x, grid, bc, opts, tol_axis);

    pt.lambda = sol.lambda;
    pt.x = std::move(nr.x);
    pt.newton_iters = sol.iterations + nr.iterations;
    finish_point(pt, m, grid, bc, tol_axis, tail_fraction);
    return pt;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::norm_cap_reached: return "norm_cap_reached";
        case Termination::left_interval: return "left_interval";
        case Termination::returned_to_zero: return "returned_to_zero";
        case Termination::step_failure: return "step_failure";
        case Termination::max_steps_reached: return "max_steps_reached";
    }
    return "unknown";
}

Branch continue_branch(const HamiltonianModel& m, const BranchPoint& start,
                       double lambda0, const Grid& grid, BcKind bc,
                       const ContinuationOptions& opts) {
    const int block = m.dim();
    check_state_dim(grid, block, start.x);

    Branch branch;
    branch.origin_lambda0 = lambda0;
    branch.points.push_back(start);
    branch.termination = Termination::max_steps_reached;

    // Virtual previous point: the trivial solution at the bifurcation value,
    // so the first secant points away from zero amplitude.
    Eigen::VectorXd x_prev = Eigen::VectorXd::Zero(grid.dim(block));
    double lambda_prev = lambda0;

    double step = std::clamp(opts.step0, opts.step_min, opts.step_max);
    int successes = 0;

    for (int step_count = 0; step_count < opts.max_steps; ++step_count) {
        const BranchPoint& cur = branch.points.back();

        Eigen::VectorXd tau_x = cur.x - x_prev;
        double tau_l = cur.lambda - lambda_prev;
        const double tau_norm =
            std::sqrt(l2_inner(grid, block, tau_x, tau_x) + tau_l * tau_l);
        if (!(tau_norm > 0.0) || !std::isfinite(tau_norm)) {
            branch.termination = Termination::step_failure;
            break;
        }
        tau_x /= tau_norm;
        tau_l /= tau_norm;

        bool advanced = false;
        while (true) {
            const Eigen::VectorXd pred_x = cur.x + step * tau_x;
            const double pred_l = cur.lambda + step * tau_l;
            // Corrector hyperplane through the predictor, normal to the
            // secant: <tau_x, x - pred_x>_W + tau_l (lambda - pred_l) = 0.
            const double rhs =
                l2_inner(grid, block, tau_x, pred_x) + tau_l * pred_l;
            try {
                AugmentedState sol =
                    bordered_newton(m, pred_l, pred_x, pred_l, grid, bc, tau_x, tau_l,
                                    rhs, opts.newton, opts.tol_axis);
                NewtonResult nr = newton_correct(m, sol.lambda, sol.x, grid, bc,
                                                 opts.newton, opts.tol_axis);
                BranchPoint next;
                next.lambda = sol.lambda;
                next.x = std::move(nr.x);
                next.newton_iters = sol.iterations + nr.iterations;
                finish_point(next, m, grid, bc, opts.tol_axis, opts.tail_fraction);

                x_prev = cur.x;
                lambda_prev = cur.lambda;
                branch.points.push_back(std::move(next));
                advanced = true;
                if (++successes >= 3) {
                    step = std::min(step * 1.3, opts.step_max);
                    successes = 0;
                }
                break;
            } catch (const Error&) {
                successes = 0;
                step *= 0.5;
                if (step < opts.step_min) break;
            }
        }
        if (!advanced) {
            branch.termination = Termination::step_failure;
            break;
        }

        const BranchPoint& latest = branch.points.back();
        if (latest.sup_norm < 1e-6) {
            branch.termination = std::abs(latest.lambda - lambda0) > 1e-3
                                     ? Termination::returned_to_zero
                                     : Termination::step_failure;
            break;
        }
        if (latest.h1_norm > opts.norm_cap) {
            branch.termination = Termination::norm_cap_reached;
            break;
        }
        if (latest.lambda < opts.lambda_lo || latest.lambda > opts.lambda_hi) {
            branch.termination = Termination::left_interval;
            break;
        }
    }
    return branch;
}

DecayReport verify_decay(const BranchPoint& point, const HamiltonianModel& m,
                         const Grid& grid, double tail_fraction,
                         const FloquetOptions& fl) {
    const DecayRates rates = decay_rate(point.x, grid, m.dim(), tail_fraction);

    auto expected_rate = [&](Side side) {
        const FloquetData data = analyze_side(m, side, point.lambda, fl);
        double best = 0.0;
        if (data.period_used > 0.0) {
            for (const auto& rho : data.multipliers) {
                const double mod = std::abs(rho);
                if (mod >= 1.0) continue;
                const double rate = -std::log(mod) / data.period_used;
                if (best == 0.0 || rate < best) best = rate;
            }
        } else {
            for (const auto& mu : data.multipliers) {
                if (mu.real() >= 0.0) continue;
                const double rate = -mu.real();
                if (best == 0.0 || rate < best) best = rate;
            }
        }
        return best;  // 0.0 when no stable direction exists (non-hyperbolic)
    };

    DecayReport rep;
    rep.gamma_plus = rates.gamma_plus;
    rep.gamma_minus = rates.gamma_minus;
    rep.expected_plus = expected_rate(Side::plus);
    rep.expected_minus = expected_rate(Side::minus);
    rep.mismatch_plus =
        rep.expected_plus > 0.0
            ? std::abs(rep.gamma_plus - rep.expected_plus) / rep.expected_plus
            : std::numeric_limits<double>::infinity();
    rep.mismatch_minus =
        rep.expected_minus > 0.0
            ? std::abs(rep.gamma_minus - rep.expected_minus) / rep.expected_minus
            : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace homcl
