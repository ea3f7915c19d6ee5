#include <doctest.h>

#include <cmath>
#include <limits>

#include "homcl/model.hpp"
#include "homcl/section6.hpp"

using namespace homcl;

TEST_CASE("standard symplectic structure validates and squares to -I") {
    const auto S = SymplecticStructure::standard(2);
    CHECK(S.dim() == 4);
    S.validate();
    CHECK((S.J * S.J + Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-14);
    CHECK((S.J + S.J.transpose()).norm() == 0.0);

    SymplecticStructure bad = S;
    bad.J(0, 1) = 0.25;  // breaks antisymmetry against J(1, 0)
    CHECK_THROWS_AS(bad.validate(), ValidationFailed);
}

TEST_CASE("checked evaluation wrappers reject NaN and asymmetry") {
    HamiltonianModel m = make_section6_model();

    CHECK(eval_grad_h(m, 0.3, Eigen::Vector2d(0.2, -0.1), -1.0).allFinite());

    HamiltonianModel poisoned = m;
    poisoned.grad_h = [](double, const Eigen::VectorXd& xi, double) {
        Eigen::VectorXd v = xi;
        v[0] = std::numeric_limits<double>::quiet_NaN();
        return v;
    };
    CHECK_THROWS_AS(eval_grad_h(poisoned, 0.0, Eigen::Vector2d(1.0, 0.0), -1.0),
                    NonFiniteOutput);

    HamiltonianModel skew = m;
    skew.hessian = [](double, const Eigen::VectorXd&, double) {
        Eigen::MatrixXd H(2, 2);
        H << 1.0, 0.5, -0.5, 1.0;
        return H;
    };
    CHECK_THROWS_AS(eval_hessian(skew, 0.0, Eigen::Vector2d(1.0, 0.0), -1.0),
                    AsymmetryDetected);
}

TEST_CASE("section6 parameter guardrails") {
    Section6Params p;
    p.A = 0.5;
    CHECK_THROWS_AS(make_section6_model(p), ConfigInvalid);
    p.A = -1.0;
    p.sigma = 0.5;
    CHECK_THROWS_AS(make_section6_model(p), ConfigInvalid);
}

TEST_CASE("section6 gradient matches the closed-form equations of motion") {
    HamiltonianModel m = make_section6_model();  // A=-1, B=0, sigma=2, a=2sech^2
    const double t = 0.7, lambda = -1.3;
    const double u = 0.4, v = -0.2;
    const Eigen::Vector2d xi(u, v);

    const double sech = 1.0 / std::cosh(t);
    const double a = 2.0 * sech * sech;
    const double n_plus = (2.0 + std::cos(t)) / (1.0 + std::exp(-t));
    // dH/du = (lambda + a) u + A n(t) |u|^sigma u, dH/dv = v  (B = 0, Q = 0)
    const double expect_u = (lambda + a) * u + (-1.0) * n_plus * u * u * u;

    const Eigen::VectorXd g = eval_grad_h(m, t, xi, lambda);
    CHECK(g[0] == doctest::Approx(expect_u).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("hessian agrees with finite differences of the gradient") {
    Section6Params p;
    p.B = 0.7;  // activate the mixed u^2 v^2 term as well
    HamiltonianModel m = make_section6_model(p);
    const double t = -1.1, lambda = -0.8, delta = 1e-6;
    const Eigen::Vector2d xi(0.35, 0.15);

    const Eigen::MatrixXd H = eval_hessian(m, t, xi, lambda);
    for (int d = 0; d < 2; ++d) {
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        e[d] = delta;
        const Eigen::VectorXd col =
            (eval_grad_h(m, t, xi + e, lambda) - eval_grad_h(m, t, xi - e, lambda)) /
            (2.0 * delta);
        CHECK((H.col(d) - col).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("dlambda hessian of section6 is the paper's [[1,0],[0,0]]") {
    HamiltonianModel m = make_section6_model();
    const Eigen::MatrixXd T = eval_dlambda_hessian(m, 0.3, -1.0);
    Eigen::MatrixXd expect(2, 2);
    expect << 1.0, 0.0, 0.0, 0.0;
    CHECK((T - expect).norm() < 1e-12);
}

TEST_CASE("asymptotic matrices and declared kinds") {
    HamiltonianModel m = make_section6_model();  // A=-1 -> periodic plus side
    CHECK(m.kind_plus == AsymptoticKind::periodic);
    CHECK(m.kind_minus == AsymptoticKind::constant);  // B = 0
    CHECK(m.period_plus == doctest::Approx(2.0 * std::acos(-1.0)));

    // A_lambda^-(t) at 0 is diag(lambda, 1) when B = 0.
    const Eigen::MatrixXd Am = asymptotic_matrix(m, Side::minus, 0.9, -1.7);
    Eigen::MatrixXd expect(2, 2);
    expect << -1.7, 0.0, 0.0, 1.0;
    CHECK((Am - expect).norm() < 1e-12);

    // The plus side linearization at 0 is the same matrix (|u|^sigma u has
    // zero second derivative at 0 for sigma = 2).
    const Eigen::MatrixXd Ap = asymptotic_matrix(m, Side::plus, 0.9, -1.7);
    CHECK((Ap - expect).norm() < 1e-12);

    Section6Params pb;
    pb.A = 0.0;
    HamiltonianModel mb = make_section6_model(pb);
    CHECK(mb.kind_plus == AsymptoticKind::constant);

    Section6Params pw;
    pw.B = 0.5;
    pw.omega = 0.0;
    HamiltonianModel mw = make_section6_model(pw);
    CHECK(mw.kind_minus == AsymptoticKind::autonomous_nonlinear);
}

TEST_CASE("hypothesis validator passes section6 and flags violations") {
    HamiltonianModel m = make_section6_model();
    const ValidationReport report = validate_hypotheses(m);
    CHECK(report.all_passed);
    CHECK(report.checks.size() == 7);
    CHECK_NOTHROW(report.require());
    // e(R) profile is nonincreasing and small at the largest R
    REQUIRE(!report.e_profile.empty());
    for (std::size_t i = 1; i < report.e_profile.size(); ++i)
        CHECK(report.e_profile[i].second <= report.e_profile[i - 1].second + 1e-12);
    CHECK(report.e_profile.back().second < 1e-3);

    // Break H1: a gradient that does not vanish on the trivial line.
    HamiltonianModel broken = m;
    broken.grad_h = [g = m.grad_h](double t, const Eigen::VectorXd& xi, double lambda) {
        Eigen::VectorXd v = g(t, xi, lambda);
        v[0] += 1e-3;
        return v;
    };
    const ValidationReport bad = validate_hypotheses(broken);
    CHECK(!bad.all_passed);
    CHECK_THROWS_AS(bad.require(), ValidationFailed);
    bool h1_failed = false;
    for (const auto& c : bad.checks)
        if (!c.passed && c.tag == "H1") h1_failed = true;
    CHECK(h1_failed);
}
