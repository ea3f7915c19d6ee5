#pragma once

#include <functional>

#include "homcl/model.hpp"

namespace homcl {

/// Optional quadratic correction Q(t, u, v) entering the planar family below
/// through r(t) Q; all five callbacks default to zero.
struct QCallbacks {
    std::function<double(double t, double u, double v)> du;
    std::function<double(double t, double u, double v)> dv;
    std::function<double(double t, double u, double v)> duu;
    std::function<double(double t, double u, double v)> duv;
    std::function<double(double t, double u, double v)> dvv;
};

/// Parameters of the planar (N = 1) Hamiltonian family
///   H = 1/2 ( v^2 + lambda u^2 + a(t) u^2 )
///     + A (2 + cos t) |u|^{sigma+2} / ((sigma+2)(1 + e^{-t}))
///     + B (2 + cos(omega t)) u^2 v^2 / (2 (1 + e^{t}))
///     + r(t) Q(t, u, v),
/// whose nonlinearity interpolates between a 2*pi-periodic bundle as
/// t -> +inf and a bundle driven by B as t -> -inf.
struct Section6Params {
    double A = -1.0;      // must be <= 0
    double B = 0.0;
    double sigma = 2.0;   // must be >= 1
    double omega = 1.0;
    std::function<double(double)> a_profile;  // default 2 sech^2(t)
    std::function<double(double)> r_profile;  // default 0
    QCallbacks q;                             // default all-zero
};

/// Builds the HamiltonianModel for the family above, with asymptotic bundles
///   g^+ = (lambda u + A (2 + cos t) |u|^sigma u, v),
///   g^- = (lambda u + B (2 + cos(omega t)) u v^2,
///          v + B (2 + cos(omega t)) u^2 v),
/// their exact linearizations, periods 2*pi (resp. 2*pi/omega), and kinds
///   plus:  constant if A = 0, else periodic;
///   minus: constant if B = 0, autonomous_nonlinear if omega = 0, else
///          periodic.
/// Throws ConfigInvalid for A > 0 or sigma < 1.
HamiltonianModel make_section6_model(const Section6Params& p = {});

}  // namespace homcl
