#include "homcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace homcl {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }
bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::vector<Eigen::VectorXd> unit_directions(int dim, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::VectorXd> dirs;
    dirs.reserve(count);
    while (static_cast<int>(dirs.size()) < count) {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = gauss(rng);
        double n = d.norm();
        if (n > 1e-8) dirs.push_back(d / n);
    }
    return dirs;
}

const GradCallback& bundle(const HamiltonianModel& m, Side side) {
    return side == Side::plus ? m.g_plus : m.g_minus;
}

const HessCallback& bundle_jacobian(const HamiltonianModel& m, Side side) {
    return side == Side::plus ? m.dxi_g_plus : m.dxi_g_minus;
}

AsymptoticKind bundle_kind(const HamiltonianModel& m, Side side) {
    return side == Side::plus ? m.kind_plus : m.kind_minus;
}

double bundle_period(const HamiltonianModel& m, Side side) {
    return side == Side::plus ? m.period_plus : m.period_minus;
}

}  // namespace

SymplecticStructure SymplecticStructure::standard(int half_dim) {
    if (half_dim < 1) throw ConfigInvalid("half_dim must be at least 1", "half_dim");
    SymplecticStructure s;
    s.half_dim = half_dim;
    s.J = Eigen::MatrixXd::Zero(2 * half_dim, 2 * half_dim);
    for (int b = 0; b < half_dim; ++b) {
        s.J(2 * b, 2 * b + 1) = -1.0;
        s.J(2 * b + 1, 2 * b) = 1.0;
    }
    return s;
}

void SymplecticStructure::validate() const {
    if (J.rows() != dim() || J.cols() != dim())
        throw ValidationFailed("J has wrong dimensions", "structure");
    const double anti = (J + J.transpose()).cwiseAbs().maxCoeff();
    const double orth =
        (J.transpose() * J - Eigen::MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    if (anti > 1e-12 || orth > 1e-12)
        throw ValidationFailed("J is not antisymmetric orthogonal", "structure");
}

Eigen::VectorXd eval_grad_h(const HamiltonianModel& m, double t, const Eigen::VectorXd& xi,
                            double lambda) {
    Eigen::VectorXd g = m.grad_h(t, xi, lambda);
    if (g.size() != m.dim())
        throw ValidationFailed("gradient callback returned wrong dimension", "H2");
    if (!finite(g)) throw NonFiniteOutput("gradient of H produced a non-finite value");
    return g;
}

Eigen::MatrixXd eval_hessian(const HamiltonianModel& m, double t, const Eigen::VectorXd& xi,
                             double lambda) {
    Eigen::MatrixXd h = m.hessian(t, xi, lambda);
    if (h.rows() != m.dim() || h.cols() != m.dim())
        throw ValidationFailed("Hessian callback returned wrong dimensions", "H2");
    if (!finite(h)) throw NonFiniteOutput("Hessian of H produced a non-finite value");
    const double defect = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-10) throw AsymmetryDetected("Hessian of H is not symmetric", defect);
    return h;
}

Eigen::MatrixXd eval_dlambda_hessian(const HamiltonianModel& m, double t, double lambda) {
    Eigen::MatrixXd h = m.dlambda_hessian(t, lambda);
    if (h.rows() != m.dim() || h.cols() != m.dim())
        throw ValidationFailed("parameter derivative callback returned wrong dimensions",
                               "H4");
    if (!finite(h))
        throw NonFiniteOutput("parameter derivative of the Hessian is non-finite");
    const double defect = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-10)
        throw AsymmetryDetected("parameter derivative of the Hessian is not symmetric",
                                defect);
    return h;
}

Eigen::MatrixXd asymptotic_matrix(const HamiltonianModel& m, Side side, double t,
                                  double lambda) {
    const auto& dg = bundle_jacobian(m, side);
    Eigen::MatrixXd a = dg(t, Eigen::VectorXd::Zero(m.dim()), lambda);
    if (a.rows() != m.dim() || a.cols() != m.dim())
        throw ValidationFailed("asymptotic linearization has wrong dimensions", "Hinf");
    if (!finite(a)) throw NonFiniteOutput("asymptotic linearization is non-finite");
    return a;
}

void ValidationReport::require() const {
    for (const auto& c : checks)
        if (!c.passed)
            throw ValidationFailed("hypothesis check failed: " + c.tag + " (" + c.detail + ")",
                                   c.tag);
}

ValidationReport validate_hypotheses(const HamiltonianModel& m,
                                     const ValidationOptions& opts) {
    m.structure.validate();
    ValidationReport report;
    const int dim = m.dim();
    const auto dirs = unit_directions(dim, opts.n_directions, opts.seed);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);

    auto push = [&report](const std::string& tag, bool passed, double worst,
                          const std::string& detail) {
        report.checks.push_back({tag, passed, worst, detail});
    };

    // H1: the zero section solves the system for every parameter value.
    {
        double worst = 0.0;
        for (double t : opts.t_samples)
            for (double l : opts.lambda_samples)
                worst = std::max(worst, eval_grad_h(m, t, zero, l).norm());
        push("H1", worst <= opts.tol, worst,
             "gradient at the zero section, sampled in t and lambda");
    }

    // H2: symmetric Hessian, consistent with finite differences of the gradient.
    {
        double worst_sym = 0.0, worst_fd = 0.0;
        const double h = opts.fd_step;
        for (double t : opts.t_samples)
            for (double l : opts.lambda_samples)
                for (double r : opts.xi_radii)
                    for (const auto& d : dirs) {
                        const Eigen::VectorXd xi = r * d;
                        Eigen::MatrixXd hess = m.hessian(t, xi, l);
                        if (!finite(hess))
                            throw NonFiniteOutput("Hessian of H produced a non-finite value");
                        worst_sym = std::max(
                            worst_sym, (hess - hess.transpose()).cwiseAbs().maxCoeff());
                        const Eigen::VectorXd dv = dirs[0];
                        const Eigen::VectorXd fd =
                            (eval_grad_h(m, t, xi + h * dv, l) -
                             eval_grad_h(m, t, xi - h * dv, l)) /
                            (2.0 * h);
                        const double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
                        worst_fd =
                            std::max(worst_fd, (fd - hess * dv).norm() / scale);
                    }
        push("H2-symmetry", worst_sym <= 1e-10, worst_sym,
             "max asymmetry of the Hessian over the sample set");
        push("H2-consistency", worst_fd <= opts.fd_tol, worst_fd,
             "relative gap between the Hessian and differenced gradients");
    }

    // H4: linearization data stays bounded over the sampled window.
    {
        double worst = 0.0;
        bool ok = true;
        for (double t : opts.t_samples)
            for (double l : opts.lambda_samples) {
                const Eigen::MatrixXd a = eval_hessian(m, t, zero, l);
                const Eigen::MatrixXd tl = eval_dlambda_hessian(m, t, l);
                ok = ok && finite(a) && finite(tl);
                worst = std::max({worst, a.cwiseAbs().maxCoeff(), tl.cwiseAbs().maxCoeff()});
            }
        for (Side side : {Side::plus, Side::minus})
            for (double t : opts.t_samples)
                for (double l : opts.lambda_samples) {
                    const Eigen::MatrixXd a = asymptotic_matrix(m, side, t, l);
                    ok = ok && finite(a);
                    worst = std::max(worst, a.cwiseAbs().maxCoeff());
                }
        push("H4-bounded", ok && std::isfinite(worst), worst,
             "largest entry of the sampled linearization matrices");
    }

    // Hinf-1: the asymptotic bundles vanish at the zero section.
    {
        double worst = 0.0;
        for (Side side : {Side::plus, Side::minus}) {
            const auto& g = bundle(m, side);
            for (double t : opts.t_samples)
                for (double l : opts.lambda_samples) {
                    Eigen::VectorXd v = g(t, zero, l);
                    if (!finite(v))
                        throw NonFiniteOutput("asymptotic bundle produced a non-finite value");
                    worst = std::max(worst, v.norm());
                }
        }
        push("Hinf-1", worst <= opts.tol, worst,
             "asymptotic bundles evaluated at the zero section");
    }

    // Hinf-2: the nonlinearity approaches its bundles; e(R) is recorded and
    // must be nonincreasing with a small terminal value.
    {
        for (double R : opts.R_list) {
            double e_of_R = 0.0;
            for (Side side : {Side::plus, Side::minus}) {
                const double sgn = side == Side::plus ? 1.0 : -1.0;
                const auto& dg = bundle_jacobian(m, side);
                for (double off : {0.0, 0.37, 1.13, 2.71})
                    for (double l : opts.lambda_samples)
                        for (double r : opts.xi_radii)
                            for (const auto& d : dirs) {
                                const double t = sgn * (R + off);
                                const Eigen::VectorXd xi = r * d;
                                const Eigen::MatrixXd gap =
                                    m.hessian(t, xi, l) - dg(t, xi, l);
                                e_of_R = std::max(e_of_R, gap.norm());
                            }
            }
            report.e_profile.emplace_back(R, e_of_R);
        }
        bool monotone = true;
        for (std::size_t i = 1; i < report.e_profile.size(); ++i)
            monotone = monotone && report.e_profile[i].second <=
                                       report.e_profile[i - 1].second + opts.tol;
        const double tail = report.e_profile.empty() ? 0.0 : report.e_profile.back().second;
        std::ostringstream detail;
        detail << "e(R) profile over R in {";
        for (std::size_t i = 0; i < report.e_profile.size(); ++i)
            detail << (i ? ", " : "") << report.e_profile[i].first;
        detail << "}, terminal value " << tail;
        push("Hinf-2", monotone && tail <= opts.tol_asymptotic, tail, detail.str());
    }

    // Hinf-3: declared time structure of the bundles (periodic with the stated
    // period, or t-independent for constant / autonomous kinds).
    {
        double worst = 0.0;
        for (Side side : {Side::plus, Side::minus}) {
            const auto& g = bundle(m, side);
            const auto& dg = bundle_jacobian(m, side);
            const AsymptoticKind kind = bundle_kind(m, side);
            const double T = bundle_period(m, side);
            for (double l : opts.lambda_samples)
                for (double r : opts.xi_radii)
                    for (const auto& d : dirs) {
                        const Eigen::VectorXd xi = r * d;
                        for (int i = 0; i < opts.period_samples; ++i) {
                            const double t =
                                (kind == AsymptoticKind::periodic ? T : 8.0) *
                                (static_cast<double>(i) / opts.period_samples - 0.5);
                            double gap;
                            if (kind == AsymptoticKind::periodic) {
                                gap = (g(t + T, xi, l) - g(t, xi, l)).norm() +
                                      (dg(t + T, xi, l) - dg(t, xi, l)).norm();
                            } else {
                                gap = (g(t, xi, l) - g(0.0, xi, l)).norm() +
                                      (dg(t, xi, l) - dg(0.0, xi, l)).norm();
                            }
                            worst = std::max(worst, gap);
                        }
                    }
        }
        push("Hinf-3", worst <= opts.tol, worst,
             "periodicity (or t-independence) defect of the bundles");
    }

    report.all_passed =
        std::all_of(report.checks.begin(), report.checks.end(),
                    [](const HypothesisCheck& c) { return c.passed; });
    return report;
}

}  // namespace homcl
