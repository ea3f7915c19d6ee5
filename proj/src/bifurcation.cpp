#include "homcl/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace homcl {

namespace {

// Coordinate axes first (so exact extremal directions are always sampled),
// then deterministic random fill.
std::vector<Eigen::VectorXd> sphere_directions(int dim, int count, std::uint64_t seed) {
    std::vector<Eigen::VectorXd> dirs;
    for (int c = 0; c < dim && static_cast<int>(dirs.size()) < count; ++c) {
        dirs.push_back(Eigen::VectorXd::Unit(dim, c));
        if (static_cast<int>(dirs.size()) < count)
            dirs.push_back(-Eigen::VectorXd::Unit(dim, c));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (static_cast<int>(dirs.size()) < count) {
        Eigen::VectorXd d(dim);
        for (int i = 0; i < dim; ++i) d[i] = gauss(rng);
        const double n = d.norm();
        if (n > 1e-8) dirs.push_back(d / n);
    }
    return dirs;
}

Eigen::VectorXd checked_bundle(const GradCallback& g, double t, const Eigen::VectorXd& xi,
                               double lambda) {
    Eigen::VectorXd v = g(t, xi, lambda);
    if (!v.allFinite())
        throw NonFiniteOutput("asymptotic bundle produced a non-finite value");
    return v;
}

Eigen::MatrixXd default_exchange(int dim) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(dim, dim);
    for (int b = 0; b + 1 < dim; b += 2) {
        C(b, b + 1) = 1.0;
        C(b + 1, b) = 1.0;
    }
    return C;
}

}  // namespace

TransversalityData transversality(const KernelData& kernel, const HamiltonianModel& m,
                                  const Grid& grid, double tol_G) {
    const int k = kernel.dimension;
    if (k < 1) throw std::invalid_argument("transversality needs a nonzero kernel");
    const int block = m.dim();
    const int n_nodes = grid.n_nodes();

    for (const auto& u : kernel.basis)
        if (l2_norm(grid, block, u) < 1e-12)
            throw DegenerateKernel("kernel basis vector has numerically zero L2 norm");

    std::vector<Eigen::VectorXd> tu(k, Eigen::VectorXd::Zero(block * n_nodes));
    for (int j = 0; j < n_nodes; ++j) {
        const Eigen::MatrixXd T = eval_dlambda_hessian(m, grid.nodes[j], kernel.lambda0);
        for (int i = 0; i < k; ++i)
            tu[i].segment(j * block, block) =
                T * kernel.basis[i].segment(j * block, block);
    }

    TransversalityData data;
    data.G.resize(k, k);
    data.image_gram.resize(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            data.G(i, j) = l2_inner(grid, block, tu[i], kernel.basis[j]);
            data.image_gram(i, j) = l2_inner(grid, block, tu[i], tu[j]);
        }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.G);
    const double s_max = svd.singularValues()[0];
    const double s_min = svd.singularValues()[k - 1];
    data.g_nonsingular = s_max > 0.0 && s_min > tol_G * s_max;
    data.condition_number =
        s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data.image_gram);
    if (es.info() != Eigen::Success)
        throw EigenSolverFailure("Gram eigensolver did not converge");
    const double e_max = es.eigenvalues().maxCoeff();
    data.image_rank = 0;
    if (e_max > 0.0)
        for (int i = 0; i < k; ++i)
            if (es.eigenvalues()[i] > tol_G * e_max) ++data.image_rank;

    data.parity = (k % 2 == 1) ? -1 : 1;
    return data;
}

double det_shortcut(const HamiltonianModel& m, double lambda0, double t0) {
    return eval_dlambda_hessian(m, t0, lambda0).determinant();
}

RegularityResult check_regularity(const HamiltonianModel& m, Side side, double lambda,
                                  RegularityMode mode, const Eigen::MatrixXd& C,
                                  const RegularitySamples& samples) {
    const int dim = m.dim();
    const auto& g = side == Side::plus ? m.g_plus : m.g_minus;
    const auto& dg = side == Side::plus ? m.dxi_g_plus : m.dxi_g_minus;
    const double period = side == Side::plus ? m.period_plus : m.period_minus;
    const double T = period > 0.0 ? period : 1.0;
    const auto dirs = sphere_directions(dim, samples.n_dirs, samples.seed);

    std::vector<double> t_grid(samples.n_t);
    for (int i = 0; i < samples.n_t; ++i) t_grid[i] = T * i / samples.n_t;

    RegularityResult result;
    result.mode = mode;

    if (mode == RegularityMode::positivity) {
        if (C.rows() != dim || C.cols() != dim)
            throw ConfigInvalid("matrix C has wrong dimensions", "regularity.C_matrix");
        if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigInvalid("matrix C must be symmetric", "regularity.C_matrix");
        const Eigen::MatrixXd JC = m.structure.J * C;
        double margin = std::numeric_limits<double>::infinity();
        for (double t : t_grid)
            for (double r : samples.radii_positivity)
                for (const auto& d : dirs) {
                    const Eigen::VectorXd xi = r * d;
                    const double val =
                        checked_bundle(g, t, xi, lambda).dot(JC * xi) / (r * r);
                    margin = std::min(margin, val);
                }
        result.margin = margin;
        result.passed = margin > 0.0;
        return result;
    }

    if (mode == RegularityMode::linear) {
        double worst = 0.0;
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
        for (double t : t_grid) {
            const Eigen::MatrixXd D = dg(t, zero, lambda);
            if (!D.allFinite())
                throw NonFiniteOutput("bundle linearization is non-finite");
            for (double r : samples.radii_positivity)
                for (const auto& d : dirs) {
                    const Eigen::VectorXd xi = r * d;
                    const double res =
                        (checked_bundle(g, t, xi, lambda) - D * xi).norm() / r;
                    worst = std::max(worst, res);
                }
        }
        result.margin = -worst;
        result.passed = result.margin > -samples.tol_lin;
        return result;
    }

    // autonomous: the bundle must not actually depend on t.
    double t_variation = 0.0;
    for (double t : t_grid)
        for (double r : samples.radii_autonomous)
            for (const auto& d : dirs) {
                const Eigen::VectorXd xi = r * d;
                t_variation = std::max(t_variation,
                                       (checked_bundle(g, t, xi, lambda) -
                                        checked_bundle(g, 0.0, xi, lambda))
                                           .norm());
            }
    if (t_variation > samples.tol_autonomy)
        throw ModeMismatch(
            "autonomous regularity criterion requested for a time-dependent bundle");

    // Potential recovered along rays: V(xi) = int_0^1 <g(s xi), xi> ds,
    // composite Simpson quadrature.
    auto potential = [&](const Eigen::VectorXd& xi) {
        const int panels = 128;
        double sum = 0.0;
        for (int i = 0; i <= panels; ++i) {
            const double s = static_cast<double>(i) / panels;
            const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            sum += w * checked_bundle(g, 0.0, s * xi, lambda).dot(xi);
        }
        return sum / (3.0 * panels);
    };
    double margin = std::numeric_limits<double>::infinity();
    for (double r : samples.radii_autonomous)
        for (const auto& d : dirs) {
            const Eigen::VectorXd xi = r * d;
            margin = std::min(margin, std::abs(potential(xi)) / (r * r));
        }
    result.margin = margin;
    result.passed = margin > 0.0;
    return result;
}

AdmissibilityReport admissibility(const HamiltonianModel& m, double lambda_lo,
                                  double lambda_hi, const AdmissibilityOptions& opts) {
    if (!(lambda_lo < lambda_hi))
        throw ConfigInvalid("admissibility window is empty", "lambda_window");
    if (opts.n_grid < 2)
        throw ConfigInvalid("admissibility grid needs at least 2 points", "n_grid");

    const Eigen::MatrixXd C = opts.C.size() > 0 ? opts.C : default_exchange(m.dim());

    AdmissibilityReport report;
    report.regularity_mode_plus = opts.mode_plus;
    report.regularity_mode_minus = opts.mode_minus;
    const int points = opts.n_grid;
    report.lambda_grid.resize(points);
    report.hyperbolicity_margins_plus.resize(points);
    report.hyperbolicity_margins_minus.resize(points);
    report.regularity_margins_plus.resize(points);
    report.regularity_margins_minus.resize(points);
    std::vector<char> pass(points, 0);

    FloquetOptions fl = opts.floquet;
    fl.tol_hyp = opts.tol_axis;

    auto eval_point = [&](int i) {
        const double l = lambda_lo + (lambda_hi - lambda_lo) * i / (points - 1);
        report.lambda_grid[i] = l;
        bool ok = true;
        for (Side side : {Side::plus, Side::minus}) {
            double margin;
            bool hyperbolic;
            try {
                const FloquetData data = analyze_side(m, side, l, fl);
                margin = data.margin;
                hyperbolic = data.hyperbolic;
            } catch (const NotHyperbolic&) {
                margin = 0.0;
                hyperbolic = false;
            }
            const RegularityResult reg = check_regularity(
                m, side, l, side == Side::plus ? opts.mode_plus : opts.mode_minus, C,
                opts.samples);
            if (side == Side::plus) {
                report.hyperbolicity_margins_plus[i] = margin;
                report.regularity_margins_plus[i] = reg.margin;
            } else {
                report.hyperbolicity_margins_minus[i] = margin;
                report.regularity_margins_minus[i] = reg.margin;
            }
            ok = ok && hyperbolic && reg.passed;
        }
        pass[i] = ok ? 1 : 0;
    };

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        for (int i = 0; i < points; ++i) eval_point(i);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr first_error;
        std::mutex error_lock;
        auto worker = [&]() {
            for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1)) {
                try {
                    eval_point(i);
                } catch (...) {
                    std::lock_guard<std::mutex> hold(error_lock);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    report.admissible = std::all_of(pass.begin(), pass.end(), [](char c) { return c; });
    return report;
}

BifurcationReport bifurcation_report(const KernelData& kernel, const HamiltonianModel& m,
                                     const Grid& grid, double tol_G, double det_t0) {
    BifurcationReport report;
    report.lambda0 = kernel.lambda0;
    report.k = kernel.dimension;
    report.k_odd = kernel.dimension % 2 == 1;
    report.det_shortcut_t0 = det_t0;
    report.det_shortcut_value = det_shortcut(m, kernel.lambda0, det_t0);

    const TransversalityData data = transversality(kernel, m, grid, tol_G);
    report.transversality_matrix = data.G;
    report.g_nonsingular = data.g_nonsingular;
    report.condition_number = data.condition_number;
    report.image_gram = data.image_gram;
    report.image_rank = data.image_rank;
    report.parity = data.parity;
    report.all_hypotheses_met =
        report.k_odd && data.g_nonsingular && data.image_rank == kernel.dimension;
    if (kernel.dimension > 1)
        report.note =
            "kernel dimension exceeds 1: the matrix form of the pairing condition is "
            "a finite-dimensional surrogate; interpret with care";
    return report;
}

}  // namespace homcl
