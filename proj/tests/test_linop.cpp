#include <doctest.h>

#include <cmath>

#include "homcl/linop.hpp"
#include "homcl/section6.hpp"

using namespace homcl;

namespace {

Section6Params linear_params(double a_scale = 2.0) {
    Section6Params p;
    p.A = 0.0;  // kills the |u|^sigma u term: the model is exactly linear
    p.B = 0.0;
    p.a_profile = [a_scale](double t) {
        const double s = 1.0 / std::cosh(t);
        return a_scale * s * s;
    };
    return p;
}

Eigen::VectorXd sampled_sech_pair(const Grid& grid) {
    Eigen::VectorXd x(grid.dim(2));
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.nodes[i];
        const double s = 1.0 / std::cosh(t);
        x[2 * i] = s;
        x[2 * i + 1] = -s * std::tanh(t);
    }
    return x;
}

}  // namespace

TEST_CASE("projection closures annihilate exactly the decaying directions") {
    HamiltonianModel m = make_section6_model();  // minus side constant diag(l, 1)
    const Grid grid = Grid::uniform(12.0, 300);
    const ClosureRows rows = boundary_closures(m, -1.0, grid, BcKind::projection);
    REQUIRE(rows.left.rows() == 1);
    REQUIRE(rows.left.cols() == 2);

    // At -L the admissible solutions decay backward: they lie in the
    // unstable direction (1,1)/sqrt(2) of u' = [[0,1],[1,0]] u.
    Eigen::Vector2d unstable(1.0, 1.0), stable(1.0, -1.0);
    unstable.normalize();
    stable.normalize();
    CHECK(std::abs((rows.left * unstable)(0)) < 1e-10);
    CHECK(std::abs((rows.left * stable)(0)) == doctest::Approx(1.0).epsilon(1e-10));

    // Right end: admissible = stable subspace of the periodic plus system.
    // Its closure row annihilates that subspace's basis vector.
    const FloquetData plus = analyze_side(m, Side::plus, -1.0);
    CHECK((rows.right * plus.stable_basis).cwiseAbs().maxCoeff() < 1e-8);

    CHECK_THROWS_AS(boundary_closures(m, 1.0, grid, BcKind::projection),
                    NotHyperbolic);
}

TEST_CASE("dirichlet closures pin the first half components") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(12.0, 300);
    const ClosureRows rows = boundary_closures(m, -1.0, grid, BcKind::dirichlet_half);
    CHECK(rows.left(0, 0) == 1.0);
    CHECK(rows.left(0, 1) == 0.0);
    CHECK(rows.right(0, 0) == 1.0);
    CHECK(rows.right(0, 1) == 0.0);
}

TEST_CASE("the sampled Poeschl-Teller kernel nearly annihilates the operator") {
    // With A = B = 0 the model is the linear system J x' = A_lambda(t) x and
    // (sech, -sech tanh) solves it exactly at lambda = -1; the discrete
    // operator applied to its samples is O(h^2) in the interior and
    // O(e^{-2L}) in the closure rows.
    HamiltonianModel m = make_section6_model(linear_params());
    const Grid grid = Grid::uniform(14.0, 1400);  // h = 0.02
    BandedOperator op = assemble(m, -1.0, grid, BcKind::projection);
    const Eigen::VectorXd r = op.matrix.apply(sampled_sech_pair(grid));
    CHECK(r.cwiseAbs().maxCoeff() < 5e-4);

    // refining the grid by 2 shrinks the residual by ~4 (O(h^2) scheme)
    const Grid fine = Grid::uniform(14.0, 2800);
    BandedOperator op2 = assemble(m, -1.0, fine, BcKind::projection);
    const Eigen::VectorXd r2 = op2.matrix.apply(sampled_sech_pair(fine));
    const double ratio = r.cwiseAbs().maxCoeff() / r2.cwiseAbs().maxCoeff();
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.6);
}

TEST_CASE("smallest singular values and vectors match a dense SVD") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(8.0, 120);
    BandedOperator op = assemble(m, -0.7, grid, BcKind::projection);

    // reference: dense SVD of the weighted-L2 scaled matrix the library uses
    const Eigen::MatrixXd scaled = l2_scaled_matrix(op).dense();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    const auto& all = svd.singularValues();

    const auto three = smallest_singular_values(op, 3);
    REQUIRE(three.size() == 3);
    for (int i = 0; i < 3; ++i) {
        const double exact = all[all.size() - 1 - i];
        CHECK(std::abs(three[i] - exact) < 1e-6 * all[0]);
    }
    CHECK(three[0] <= three[1]);
    CHECK(three[1] <= three[2]);

    const SingularPairs pairs = smallest_singular_pairs(op, 2);
    for (int i = 0; i < 2; ++i) {
        // vectors come back as node values, L2-normalized; mapping them into
        // the scaled coordinates must reproduce the singular value
        const Eigen::VectorXd v = pairs.vectors.col(i);
        CHECK(std::abs(l2_norm(grid, 2, v) - 1.0) < 1e-10);
        Eigen::VectorXd v_scaled(v.size());
        for (int j = 0; j < v.size(); ++j)
            v_scaled[j] = v[j] * std::sqrt(grid.weight(j / 2));
        CHECK(std::abs((scaled * v_scaled).norm() - pairs.values[i]) <
              1e-8 * all[0]);
    }

    // median against the dense spectrum (ascending-rank n/2 convention)
    const double med = median_singular_value(op);
    const double exact_med = all[all.size() - 1 - all.size() / 2];
    CHECK(std::abs(med - exact_med) < 1e-6 * all[0]);
}

TEST_CASE("scan finds the Poeschl-Teller crossing and nothing else") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(14.0, 700);

    ScanResult scan = scan_bifurcations(m, -1.4, -0.6, 16, grid, BcKind::projection);
    CHECK(scan.profile.size() == 17);
    REQUIRE(scan.candidates.size() == 1);
    CHECK(std::abs(scan.candidates[0].lambda0 + 1.0) < 5e-3);
    CHECK(scan.candidates[0].sigma_min < 1e-4);

    ScanResult empty = scan_bifurcations(m, -2.6, -1.4, 12, grid, BcKind::projection);
    CHECK(empty.candidates.empty());

    CHECK_THROWS_AS(scan_bifurcations(m, -1.4, -0.6, 5, grid, BcKind::projection),
                    ConfigInvalid);

    // parallel scan agrees with the sequential one bit-for-bit
    ScanOptions par;
    par.jobs = 4;
    ScanResult scan4 =
        scan_bifurcations(m, -1.4, -0.6, 16, grid, BcKind::projection, par);
    REQUIRE(scan4.profile.size() == scan.profile.size());
    for (std::size_t i = 0; i < scan.profile.size(); ++i) {
        CHECK(scan4.profile[i].lambda == scan.profile[i].lambda);
        CHECK(scan4.profile[i].sigma_min == scan.profile[i].sigma_min);
    }
    REQUIRE(scan4.candidates.size() == 1);
    CHECK(scan4.candidates[0].lambda0 == scan.candidates[0].lambda0);
}

TEST_CASE("kernel basis is simple, normalized, and matches sech analytics") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(14.0, 700);
    ScanResult scan = scan_bifurcations(m, -1.4, -0.6, 16, grid, BcKind::projection);
    REQUIRE(!scan.candidates.empty());
    const double lambda0 = scan.candidates[0].lambda0;

    KernelData kd = kernel_basis(m, lambda0, grid, BcKind::projection);
    CHECK(kd.dimension == 1);
    REQUIRE(kd.basis.size() == 1);
    CHECK(std::abs(l2_norm(grid, 2, kd.basis[0]) - 1.0) < 1e-10);
    REQUIRE(!kd.tail_ratios.empty());
    CHECK(kd.tail_ratios[0] < 1e-4);
    CHECK(kd.sigma_ref > 1.0);
    CHECK(kd.singular_values[0] < 1e-5 * kd.sigma_ref);

    Eigen::VectorXd exact = sampled_sech_pair(grid);
    exact /= l2_norm(grid, 2, exact);
    // sign convention makes the comparison direct (no +- ambiguity)
    CHECK(l2_norm(grid, 2, kd.basis[0] - exact) < 5e-3);
}

TEST_CASE("rayleigh route reproduces both Poeschl-Teller ground states") {
    const Grid grid = Grid::uniform(14.0, 1400);
    const auto sech2 = [](double t) {
        const double s = 1.0 / std::cosh(t);
        return s * s;
    };
    GroundState g2 = rayleigh_lambda0([&](double t) { return 2.0 * sech2(t); }, grid);
    CHECK(std::abs(g2.lambda0 + 1.0) < 1e-3);
    GroundState g6 = rayleigh_lambda0([&](double t) { return 6.0 * sech2(t); }, grid);
    CHECK(std::abs(g6.lambda0 + 4.0) < 5e-3);

    // ground state data: vanishing ends, unit discrete L2 norm, single sign
    CHECK(g2.phi[0] == 0.0);
    CHECK(g2.phi[grid.n_cells] == 0.0);
    double norm2 = 0.0;
    for (int i = 0; i <= grid.n_cells; ++i)
        norm2 += grid.weight(i) * g2.phi[i] * g2.phi[i];
    CHECK(std::abs(norm2 - 1.0) < 1e-10);
    CHECK(g2.phi.minCoeff() > -1e-12);  // sign-normalized nonnegative

    CHECK_THROWS_AS(rayleigh_lambda0([](double) { return 0.0; }, grid),
                    NoNegativeEigenvalue);
}

TEST_CASE("decay rates recover synthetic exponential tails") {
    const Grid grid = Grid::uniform(20.0, 2000);
    Eigen::VectorXd x(grid.dim(2));
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.nodes[i];
        // gamma = 1.3 forward, 0.8 backward
        const double amp = t >= 0.0 ? std::exp(-1.3 * t) : std::exp(0.8 * t);
        x[2 * i] = amp;
        x[2 * i + 1] = 0.5 * amp;
    }
    const DecayRates rates = decay_rate(x, grid, 2);
    CHECK(std::abs(rates.gamma_plus - 1.3) / 1.3 < 0.02);
    CHECK(std::abs(rates.gamma_minus - 0.8) / 0.8 < 0.02);

    CHECK_THROWS_AS(decay_rate(Eigen::VectorXd::Zero(grid.dim(2)), grid, 2),
                    TailUnderflow);

    // a constant profile has slope ~ 0: the mismatch is visible, not hidden
    const DecayRates flat = decay_rate(Eigen::VectorXd::Ones(grid.dim(2)), grid, 2);
    CHECK(std::abs(flat.gamma_plus) < 0.05);
    CHECK(std::abs(flat.gamma_minus) < 0.05);
}
