#include <doctest.h>

#include <cmath>
#include <random>

#include "homcl/bifurcation.hpp"
#include "homcl/section6.hpp"

using namespace homcl;

namespace {

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

KernelData synthetic_kernel(const Grid& grid, bool normalized) {
    KernelData kd;
    kd.lambda0 = -1.0;
    kd.dimension = 1;
    Eigen::VectorXd x = sampled_sech_pair(grid);
    if (normalized) x /= l2_norm(grid, 2, x);
    kd.basis = {x};
    return kd;
}

Eigen::MatrixXd exchange2() {
    Eigen::MatrixXd C(2, 2);
    C << 0.0, 1.0, 1.0, 0.0;
    return C;
}

}  // namespace

TEST_CASE("transversality pairing for the section 6 kernel") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(16.0, 1600);

    // Unnormalized x0 = (sech, -sech tanh): G11 = integral sech^2 = 2.
    TransversalityData raw = transversality(synthetic_kernel(grid, false), m, grid);
    CHECK(raw.G(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(raw.g_nonsingular);
    CHECK(raw.image_rank == 1);
    CHECK(raw.parity == -1);

    // Normalized basis: G11 = (integral phi0^2) / ||x0||^2 = 2 / (8/3) = 3/4.
    TransversalityData norm = transversality(synthetic_kernel(grid, true), m, grid);
    CHECK(norm.G(0, 0) == doctest::Approx(0.75).epsilon(1e-6));

    // T_lambda == 0 kills condition (ii): G = 0 and the pairing is singular.
    HamiltonianModel zeroed = m;
    zeroed.dlambda_hessian = [](double, double) { return Eigen::MatrixXd::Zero(2, 2); };
    TransversalityData dead = transversality(synthetic_kernel(grid, true), zeroed, grid);
    CHECK(dead.G(0, 0) == 0.0);
    CHECK(!dead.g_nonsingular);
    CHECK(dead.image_rank == 0);

    KernelData degenerate;
    degenerate.lambda0 = -1.0;
    degenerate.dimension = 1;
    degenerate.basis = {Eigen::VectorXd::Zero(grid.dim(2))};
    CHECK_THROWS_AS(transversality(degenerate, m, grid), DegenerateKernel);
}

TEST_CASE("det shortcut: forced zero for section 6, products otherwise") {
    HamiltonianModel m = make_section6_model();
    CHECK(det_shortcut(m, -1.0, 0.0) == 0.0);  // T = [[1,0],[0,0]]

    HamiltonianModel ident = m;
    ident.dlambda_hessian = [](double, double) {
        return Eigen::MatrixXd::Identity(2, 2);
    };
    CHECK(det_shortcut(ident, -1.0, 0.0) == doctest::Approx(1.0));

    HamiltonianModel diag = m;
    diag.dlambda_hessian = [](double, double) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(2, 2);
        T(0, 0) = 2.0;
        T(1, 1) = 3.0;
        return T;
    };
    CHECK(det_shortcut(diag, -1.0, 0.0) == doctest::Approx(6.0));
}

TEST_CASE("regularity criterion (a): positivity of the section 6 form") {
    HamiltonianModel m = make_section6_model();  // A = -1

    RegularityResult good =
        check_regularity(m, Side::plus, -1.0, RegularityMode::positivity, exchange2());
    CHECK(good.passed);
    CHECK(good.margin > 0.0);

    // lambda = +1 admits -lambda u^2 - A n(t) u^2 <= 0 at xi = (1, 0)
    RegularityResult bad =
        check_regularity(m, Side::plus, 1.0, RegularityMode::positivity, exchange2());
    CHECK(!bad.passed);
    CHECK(bad.margin <= 0.0);
}

TEST_CASE("regularity criterion (b): exact linearity of g_minus with B = 0") {
    HamiltonianModel m = make_section6_model();
    RegularityResult lin =
        check_regularity(m, Side::minus, -1.0, RegularityMode::linear, exchange2());
    CHECK(lin.passed);
    CHECK(lin.margin >= -1e-10);

    // the genuinely nonlinear plus bundle fails the same criterion
    RegularityResult nonlin =
        check_regularity(m, Side::plus, -1.0, RegularityMode::linear, exchange2());
    CHECK(!nonlin.passed);
}

TEST_CASE("regularity criterion (c): autonomy guard and definite potentials") {
    HamiltonianModel m = make_section6_model();
    // the plus bundle is genuinely 2pi-periodic in t
    CHECK_THROWS_AS(check_regularity(m, Side::plus, -1.0, RegularityMode::autonomous,
                                     exchange2()),
                    ModeMismatch);

    // a custom autonomous bundle with definite Hamiltonian H = u^2 + u^4/4
    // + 3 v^2 / 2 passes: 0 is an isolated zero of H.
    HamiltonianModel custom = m;
    custom.kind_minus = AsymptoticKind::autonomous_nonlinear;
    custom.period_minus = 0.0;
    custom.g_minus = [](double, const Eigen::VectorXd& xi, double) {
        Eigen::VectorXd g(2);
        g[0] = 2.0 * xi[0] + xi[0] * xi[0] * xi[0];
        g[1] = 3.0 * xi[1];
        return g;
    };
    custom.dxi_g_minus = [](double, const Eigen::VectorXd& xi, double) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
        D(0, 0) = 2.0 + 3.0 * xi[0] * xi[0];
        D(1, 1) = 3.0;
        return D;
    };
    RegularityResult definite =
        check_regularity(custom, Side::minus, -1.0, RegularityMode::autonomous,
                         exchange2());
    CHECK(definite.passed);
    CHECK(definite.margin > 0.0);
}

TEST_CASE("section 6 positivity integrand is even under xi -> -xi") {
    HamiltonianModel m = make_section6_model();
    const Eigen::MatrixXd JC = m.structure.J * exchange2();
    std::mt19937_64 rng(0xB1F0);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd xi(2);
        xi << gauss(rng), gauss(rng);
        const double t = 3.0 * gauss(rng);
        const double plus = m.g_plus(t, xi, -1.0).dot(JC * xi);
        const double minus = m.g_plus(t, -xi, -1.0).dot(JC * -xi);
        CHECK(std::abs(plus - minus) < 1e-12 * std::max(1.0, std::abs(plus)));
    }
}

TEST_CASE("admissibility verdicts over lambda windows") {
    HamiltonianModel m = make_section6_model();
    AdmissibilityOptions opts;
    opts.n_grid = 7;
    opts.C = exchange2();

    AdmissibilityReport good = admissibility(m, -3.0, -0.1, opts);
    CHECK(good.admissible);
    REQUIRE(good.lambda_grid.size() == 7);
    for (double v : good.hyperbolicity_margins_plus) CHECK(v > 0.0);
    for (double v : good.hyperbolicity_margins_minus) CHECK(v > 0.0);
    for (double v : good.regularity_margins_plus) CHECK(v > 0.0);
    for (double v : good.regularity_margins_minus) CHECK(v > 0.0);

    // sub-interval monotonicity
    AdmissibilityOptions sub = opts;
    sub.n_grid = 5;
    CHECK(admissibility(m, -2.0, -1.0, sub).admissible);

    // [1, 2]: spectrum {+-i sqrt(lambda)} sits on the axis at every lambda
    AdmissibilityReport bad = admissibility(m, 1.0, 2.0, opts);
    CHECK(!bad.admissible);
    for (double v : bad.hyperbolicity_margins_minus) CHECK(v <= 0.0);

    // a window crossing lambda = 0 records margins instead of throwing
    AdmissibilityReport axis = admissibility(m, -0.2, 0.2, opts);
    CHECK(!axis.admissible);
}

TEST_CASE("bifurcation report bundles the kernel-level hypotheses") {
    HamiltonianModel m = make_section6_model();
    const Grid grid = Grid::uniform(14.0, 700);
    ScanResult scan = scan_bifurcations(m, -1.4, -0.6, 16, grid, BcKind::projection);
    REQUIRE(!scan.candidates.empty());
    KernelData kd = kernel_basis(m, scan.candidates[0].lambda0, grid, BcKind::projection);

    BifurcationReport report = bifurcation_report(kd, m, grid);
    CHECK(report.lambda0 == kd.lambda0);
    CHECK(report.k == 1);
    CHECK(report.k_odd);
    CHECK(report.g_nonsingular);
    CHECK(report.image_rank == 1);
    CHECK(report.parity == -1);
    CHECK(report.det_shortcut_value == 0.0);
    CHECK(report.all_hypotheses_met);
    CHECK(report.note.empty());
}
