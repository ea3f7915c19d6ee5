#include "homcl/section6.hpp"

#include <cmath>
#include <utility>

namespace homcl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double sech(double t) { return 1.0 / std::cosh(t); }

// 1 / (1 + e^{-t}) and 1 / (1 + e^{t}); both safe at large |t| since an
// overflowing exponential yields +inf and the quotient floors at zero.
double ramp_up(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double ramp_down(double t) { return 1.0 / (1.0 + std::exp(t)); }

using ScalarQ = std::function<double(double, double, double)>;

ScalarQ or_zero(ScalarQ f) {
    if (f) return f;
    return [](double, double, double) { return 0.0; };
}

}  // namespace

HamiltonianModel make_section6_model(const Section6Params& p) {
    if (p.A > 0.0)
        throw ConfigInvalid("coefficient A must be nonpositive", "model.A");
    if (p.sigma < 1.0)
        throw ConfigInvalid("exponent sigma must be at least 1", "model.sigma");

    const double A = p.A, B = p.B, sigma = p.sigma, omega = p.omega;
    const auto a_of = p.a_profile
                          ? p.a_profile
                          : [](double t) { return 2.0 * sech(t) * sech(t); };
    const auto r_of = p.r_profile ? p.r_profile : [](double) { return 0.0; };
    const ScalarQ q_du = or_zero(p.q.du), q_dv = or_zero(p.q.dv);
    const ScalarQ q_duu = or_zero(p.q.duu), q_duv = or_zero(p.q.duv);
    const ScalarQ q_dvv = or_zero(p.q.dvv);

    HamiltonianModel m;
    m.structure = SymplecticStructure::standard(1);

    m.grad_h = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0], v = xi[1];
        const double cpl = A * (2.0 + std::cos(t)) * ramp_up(t);
        const double cmb = B * (2.0 + std::cos(omega * t)) * ramp_down(t);
        const double r = r_of(t);
        Eigen::VectorXd g(2);
        g[0] = l * u + a_of(t) * u + cpl * std::pow(std::abs(u), sigma) * u +
               cmb * u * v * v + r * q_du(t, u, v);
        g[1] = v + cmb * u * u * v + r * q_dv(t, u, v);
        return g;
    };

    m.hessian = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0], v = xi[1];
        const double cpl = A * (2.0 + std::cos(t)) * ramp_up(t);
        const double cmb = B * (2.0 + std::cos(omega * t)) * ramp_down(t);
        const double r = r_of(t);
        Eigen::MatrixXd h(2, 2);
        h(0, 0) = l + a_of(t) + cpl * (sigma + 1.0) * std::pow(std::abs(u), sigma) +
                  cmb * v * v + r * q_duu(t, u, v);
        h(0, 1) = 2.0 * cmb * u * v + r * q_duv(t, u, v);
        h(1, 0) = h(0, 1);
        h(1, 1) = 1.0 + cmb * u * u + r * q_dvv(t, u, v);
        return h;
    };

    m.dlambda_hessian = [](double, double) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        h(0, 0) = 1.0;
        return h;
    };

    m.g_plus = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0], v = xi[1];
        Eigen::VectorXd g(2);
        g[0] = l * u + A * (2.0 + std::cos(t)) * std::pow(std::abs(u), sigma) * u;
        g[1] = v;
        return g;
    };
    m.dxi_g_plus = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0];
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        h(0, 0) = l + A * (2.0 + std::cos(t)) * (sigma + 1.0) *
                          std::pow(std::abs(u), sigma);
        h(1, 1) = 1.0;
        return h;
    };

    m.g_minus = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0], v = xi[1];
        const double c = B * (2.0 + std::cos(omega * t));
        Eigen::VectorXd g(2);
        g[0] = l * u + c * u * v * v;
        g[1] = v + c * u * u * v;
        return g;
    };
    m.dxi_g_minus = [=](double t, const Eigen::VectorXd& xi, double l) {
        const double u = xi[0], v = xi[1];
        const double c = B * (2.0 + std::cos(omega * t));
        Eigen::MatrixXd h(2, 2);
        h(0, 0) = l + c * v * v;
        h(0, 1) = 2.0 * c * u * v;
        h(1, 0) = h(0, 1);
        h(1, 1) = 1.0 + c * u * u;
        return h;
    };

    m.kind_plus = A == 0.0 ? AsymptoticKind::constant : AsymptoticKind::periodic;
    m.period_plus = kTwoPi;
    if (B == 0.0) {
        m.kind_minus = AsymptoticKind::constant;
        m.period_minus = kTwoPi;
    } else if (omega == 0.0) {
        m.kind_minus = AsymptoticKind::autonomous_nonlinear;
        m.period_minus = kTwoPi;
    } else {
        m.kind_minus = AsymptoticKind::periodic;
        m.period_minus = kTwoPi / std::abs(omega);
    }
    return m;
}

}  // namespace homcl
