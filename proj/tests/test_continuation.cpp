#include <doctest.h>

#include <cmath>
#include <random>

#include "homcl/continuation.hpp"
#include "homcl/section6.hpp"

using namespace homcl;

namespace {

const double kLambda0 = -1.0;

Grid test_grid() { return Grid::uniform(14.0, 1400); }

KernelData test_kernel(const Grid& grid) {
    return kernel_basis(make_section6_model(), kLambda0, grid, BcKind::projection);
}

Eigen::VectorXd smooth_state(const Grid& grid) {
    Eigen::VectorXd x(grid.dim(2));
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.nodes[i];
        const double s = 1.0 / std::cosh(0.7 * t);
        x[2 * i] = 0.3 * s * std::cos(0.5 * t);
        x[2 * i + 1] = -0.2 * s * std::sin(0.9 * t);
    }
    return x;
}

}  // namespace

TEST_CASE("residual vanishes identically on the trivial solution") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.dim(2));
    const Eigen::VectorXd r = residual(m, kLambda0, zero, grid, BcKind::projection);
    CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("interior residual at epsilon u0 is cubic in epsilon") {
    // Subtracting the residual of the linearized model (A = 0) isolates the
    // nonlinear term A n(t) u^3 of section 6, which must scale as epsilon^3.
    HamiltonianModel full = make_section6_model();
    Section6Params lin_params;
    lin_params.A = 0.0;
    lin_params.B = 0.0;
    HamiltonianModel lin = make_section6_model(lin_params);

    const Grid grid = test_grid();
    const KernelData kd = test_kernel(grid);
    REQUIRE(kd.dimension == 1);
    const Eigen::VectorXd& u0 = kd.basis[0];

    auto interior_cubic_norm = [&](double eps) {
        const Eigen::VectorXd x = eps * u0;
        const Eigen::VectorXd rf = residual(full, kLambda0, x, grid, BcKind::projection);
        const Eigen::VectorXd rl = residual(lin, kLambda0, x, grid, BcKind::projection);
        double worst = 0.0;
        for (int i = 2; i < rf.size() - 2; ++i)  // skip the 2N closure rows per end
            worst = std::max(worst, std::abs(rf[i] - rl[i]));
        return worst;
    };

    const double big = interior_cubic_norm(1e-2);
    const double small = interior_cubic_norm(1e-3);
    CHECK(big > 0.0);
    CHECK(big / small == doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("jacobian at the trivial solution reproduces the linearization") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(8.0, 80);
    const ClosureRows closures =
        boundary_closures(m, kLambda0, grid, BcKind::projection);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.dim(2));

    const Eigen::MatrixXd from_state =
        jacobian(m, kLambda0, zero, grid, closures, BcKind::projection).matrix.dense();
    const Eigen::MatrixXd from_assembly =
        assemble(m, kLambda0, grid, BcKind::projection).matrix.dense();
    CHECK((from_state - from_assembly).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("jacobian matches central finite differences of the residual") {
    HamiltonianModel m = make_section6_model();
    Section6Params coupled;
    coupled.B = 0.4;  // exercise the u^2 v^2 coupling too
    HamiltonianModel mc = make_section6_model(coupled);

    const Grid grid = Grid::uniform(8.0, 160);
    const ClosureRows closures =
        boundary_closures(m, kLambda0, grid, BcKind::projection);
    const Eigen::VectorXd x = smooth_state(grid);

    std::mt19937_64 rng(0xB1F0);
    std::normal_distribution<double> gauss;
    for (const HamiltonianModel* model : {&m, &mc}) {
        BandedOperator op =
            jacobian(*model, kLambda0, x, grid, closures, BcKind::projection);
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::VectorXd v(x.size());
            for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
            v /= v.lpNorm<Eigen::Infinity>();
            const double delta = 1e-6;
            const Eigen::VectorXd fd =
                (residual(*model, kLambda0, x + delta * v, grid, closures) -
                 residual(*model, kLambda0, x - delta * v, grid, closures)) /
                (2.0 * delta);
            const Eigen::VectorXd an = op.matrix.apply(v);
            const double rel = (fd - an).lpNorm<Eigen::Infinity>() /
                               std::max(1.0, an.lpNorm<Eigen::Infinity>());
            CHECK(rel < 1e-6);
        }
    }
}

TEST_CASE("newton correction leaves the trivial solution alone") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.dim(2));
    NewtonResult res = newton_correct(m, -1.7, zero, grid, BcKind::projection);
    CHECK(res.iterations == 0);
    CHECK(res.residual_norm == 0.0);
    CHECK(res.x.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("branch switch amplitudes scale linearly in epsilon") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const KernelData kd = test_kernel(grid);

    const BranchPoint p1 = branch_switch(m, kLambda0, kd, grid, BcKind::projection, 1e-2);
    const BranchPoint p2 = branch_switch(m, kLambda0, kd, grid, BcKind::projection, 5e-3);

    // ||u0||_sup = sup sech / ||(sech, -sech tanh)||_L2 = sqrt(3/8)
    CHECK(p1.sup_norm == doctest::Approx(1e-2 * std::sqrt(3.0 / 8.0)).epsilon(0.02));
    CHECK(p1.sup_norm / p2.sup_norm == doctest::Approx(2.0).epsilon(0.05));

    // A < 0 pushes the branch to the right of lambda0
    CHECK(p1.lambda > kLambda0);
    CHECK(p2.lambda > kLambda0);
    CHECK(std::abs(p1.lambda - kLambda0) > std::abs(p2.lambda - kLambda0));

    CHECK(p1.residual < 1e-9);
    CHECK(p1.newton_iters >= 1);
    CHECK(p1.gamma_plus == doctest::Approx(1.0).epsilon(0.1));
    CHECK(p1.gamma_minus == doctest::Approx(1.0).epsilon(0.1));

    // epsilon = 0 is the trivial point
    const BranchPoint p0 = branch_switch(m, kLambda0, kd, grid, BcKind::projection, 0.0);
    CHECK(p0.sup_norm == 0.0);
    CHECK(p0.lambda == kLambda0);

    // epsilon < 0 lands on the antipodal solution at the same parameter
    const BranchPoint pm =
        branch_switch(m, kLambda0, kd, grid, BcKind::projection, -1e-2);
    CHECK(pm.lambda == doctest::Approx(p1.lambda).epsilon(1e-10));
    CHECK((pm.x + p1.x).lpNorm<Eigen::Infinity>() <
          1e-12 * p1.x.lpNorm<Eigen::Infinity>());
}

TEST_CASE("branch switch insists on a simple kernel") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(8.0, 80);
    KernelData fake;
    fake.lambda0 = kLambda0;
    fake.dimension = 2;
    fake.basis = {Eigen::VectorXd::Zero(grid.dim(2)), Eigen::VectorXd::Zero(grid.dim(2))};
    CHECK_THROWS_AS(
        branch_switch(m, kLambda0, fake, grid, BcKind::projection, 1e-2),
        KernelNotSimple);
}

TEST_CASE("newton reconverges from a perturbed branch point") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const BranchPoint p =
        branch_switch(m, kLambda0, test_kernel(grid), grid, BcKind::projection, 1e-2);
    NewtonResult res =
        newton_correct(m, p.lambda, 1.05 * p.x, grid, BcKind::projection);
    CHECK(res.residual_norm < 1e-10);
    CHECK(res.iterations >= 1);
    // So close to the bifurcation point the fixed-lambda jacobian has
    // sigma_min = O(epsilon^2), so a 1e-10 residual pins x only to ~1e-5.
    const double rel = (res.x - p.x).lpNorm<Eigen::Infinity>() /
                       p.x.lpNorm<Eigen::Infinity>();
    CHECK(rel < 1e-3);
}

TEST_CASE("continuation walks right with small residuals") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const BranchPoint start =
        branch_switch(m, kLambda0, test_kernel(grid), grid, BcKind::projection, 1e-2);

    ContinuationOptions opts;
    opts.max_steps = 8;
    Branch branch = continue_branch(m, start, kLambda0, grid, BcKind::projection, opts);

    CHECK(branch.termination == Termination::max_steps_reached);
    CHECK(branch.origin_lambda0 == kLambda0);
    REQUIRE(branch.points.size() == 9);  // the start point plus 8 accepted steps
    CHECK(branch.points.front().lambda == start.lambda);
    for (const BranchPoint& p : branch.points) {
        CHECK(p.residual < 1e-8);
        CHECK(std::isfinite(p.gamma_plus));
    }
    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        CHECK(branch.points[i].lambda > branch.points[i - 1].lambda);
        CHECK(branch.points[i].sup_norm > branch.points[i - 1].sup_norm);
    }
}

TEST_CASE("continuation termination tags") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const BranchPoint start =
        branch_switch(m, kLambda0, test_kernel(grid), grid, BcKind::projection, 1e-2);

    SUBCASE("norm cap below the branch trips immediately") {
        ContinuationOptions opts;
        opts.norm_cap = start.h1_norm * 0.5;
        Branch b = continue_branch(m, start, kLambda0, grid, BcKind::projection, opts);
        CHECK(b.termination == Termination::norm_cap_reached);
        CHECK(b.points.size() <= 2);
    }

    SUBCASE("tight lambda window is left on the first step") {
        ContinuationOptions opts;
        opts.lambda_hi = start.lambda;  // branch moves right, so any step exits
        Branch b = continue_branch(m, start, kLambda0, grid, BcKind::projection, opts);
        CHECK(b.termination == Termination::left_interval);
        CHECK(b.points.size() <= 2);
    }

    SUBCASE("unreachable newton tolerance degrades into step failure") {
        ContinuationOptions opts;
        opts.newton.tol = 1e-18;  // below attainable roundoff
        opts.newton.max_iters = 4;
        opts.step_min = opts.step0;
        Branch b = continue_branch(m, start, kLambda0, grid, BcKind::projection, opts);
        CHECK(b.termination == Termination::step_failure);
        CHECK(b.points.size() == 1);
    }

    SUBCASE("amplitude collapse away from lambda0 reads as return to zero") {
        BranchPoint trivial_far;  // lambda0 - 1 keeps both asymptotic systems hyperbolic
        trivial_far.lambda = kLambda0 - 1.0;
        trivial_far.x = Eigen::VectorXd::Zero(grid.dim(2));
        ContinuationOptions opts;
        opts.max_steps = 2;
        Branch b =
            continue_branch(m, trivial_far, kLambda0, grid, BcKind::projection, opts);
        CHECK(b.termination == Termination::returned_to_zero);
    }
}

TEST_CASE("decay verification against the asymptotic spectra") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = test_grid();
    const BranchPoint start =
        branch_switch(m, kLambda0, test_kernel(grid), grid, BcKind::projection, 1e-2);

    DecayReport rep = verify_decay(start, m, grid);
    CHECK(rep.expected_minus == doctest::Approx(std::sqrt(-start.lambda)).epsilon(1e-8));
    CHECK(rep.mismatch_plus < 0.05);
    CHECK(rep.mismatch_minus < 0.05);
    CHECK(rep.gamma_plus == start.gamma_plus);
}

TEST_CASE("termination names are stable strings") {
    CHECK(std::string(termination_name(Termination::norm_cap_reached)) ==
          "norm_cap_reached");
    CHECK(std::string(termination_name(Termination::left_interval)) == "left_interval");
    CHECK(std::string(termination_name(Termination::returned_to_zero)) ==
          "returned_to_zero");
    CHECK(std::string(termination_name(Termination::step_failure)) == "step_failure");
    CHECK(std::string(termination_name(Termination::max_steps_reached)) ==
          "max_steps_reached");
}
