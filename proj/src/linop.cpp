#include "homcl/linop.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace homcl {

namespace {

Eigen::MatrixXd dirichlet_half_rows(int half_dim) {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(half_dim, 2 * half_dim);
    for (int r = 0; r < half_dim; ++r) rows(r, r) = 1.0;
    return rows;
}

double hyperbolicity_margin_unit_circle(const std::vector<std::complex<double>>& rho) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& r : rho) margin = std::min(margin, std::abs(std::abs(r) - 1.0));
    return margin;
}

double hyperbolicity_margin_imaginary_axis(const std::vector<std::complex<double>>& mu) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& m : mu) margin = std::min(margin, std::abs(m.real()));
    return margin;
}

Eigen::VectorXd seeded_unit_vector(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    const double norm = v.norm();
    return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(n, 0);
}

// Dominant-component sign convention: the state component with the largest
// amplitude must be positive at its first interior extremum (tail noise is
// excluded by a 1% amplitude floor).
void fix_kernel_sign(Eigen::VectorXd& u, int block, int n_nodes) {
    int dominant = 0;
    double best = -1.0;
    for (int c = 0; c < block; ++c) {
        double amp = 0.0;
        for (int i = 0; i < n_nodes; ++i) amp = std::max(amp, std::abs(u[i * block + c]));
        if (amp > best) {
            best = amp;
            dominant = c;
        }
    }
    if (best <= 0.0) return;
    auto w = [&](int i) { return u[i * block + dominant]; };
    int pick = -1;
    for (int i = 1; i + 1 < n_nodes; ++i) {
        const double a = std::abs(w(i));
        if (a >= std::abs(w(i - 1)) && a >= std::abs(w(i + 1)) && a > 1e-2 * best) {
            pick = i;
            break;
        }
    }
    if (pick < 0) {
        double top = -1.0;
        for (int i = 0; i < n_nodes; ++i)
            if (std::abs(w(i)) > top) {
                top = std::abs(w(i));
                pick = i;
            }
    }
    if (w(pick) < 0.0) u = -u;
}

struct LanczosResult {
    std::vector<double> theta;  // Ritz values of the inverse normal matrix, descending
    Eigen::MatrixXd vectors;    // matching Ritz vectors
};

// Lanczos with full reorthogonalization on (A^T A)^{-1}, applied through the
// banded factorization: z -> A^{-1} A^{-T} z. The largest Ritz pairs give the
// smallest singular values of A and their right singular vectors.
LanczosResult inverse_normal_lanczos(const BandedLU& lu, int n, int want,
                                     std::uint64_t seed) {
    const int kmax = std::min(n, 80);
    Eigen::MatrixXd V(n, kmax);
    std::vector<double> alpha, beta;
    alpha.reserve(kmax);
    beta.reserve(kmax);
    V.col(0) = seeded_unit_vector(n, seed);

    auto apply = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd y = lu.solve(z, /*transpose=*/true);
        return lu.solve(y, /*transpose=*/false);
    };
    auto top_ritz = [&](int m, Eigen::MatrixXd* vecs_out) {
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        if (es.info() != Eigen::Success)
            throw EigenSolverFailure("tridiagonal eigensolver did not converge");
        const int take = std::min(want + 1, m);
        std::vector<double> top(take);
        for (int j = 0; j < take; ++j) top[j] = es.eigenvalues()[m - 1 - j];
        if (vecs_out) {
            vecs_out->resize(m, std::min(want, m));
            for (int j = 0; j < vecs_out->cols(); ++j)
                vecs_out->col(j) = es.eigenvectors().col(m - 1 - j);
        }
        return top;
    };

    std::vector<double> prev;
    int stable = 0;
    int m = 0;
    std::uint64_t reseed = seed;
    for (int k = 0; k < kmax; ++k) {
        m = k + 1;
        Eigen::VectorXd w = apply(V.col(k));
        const double a = V.col(k).dot(w);
        alpha.push_back(a);
        w -= a * V.col(k);
        if (k > 0) w -= beta[k - 1] * V.col(k - 1);
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(m) * (V.leftCols(m).transpose() * w);
        double b = w.norm();

        const auto top = top_ritz(m, nullptr);
        bool settled = m > want && prev.size() == top.size();
        if (settled)
            for (std::size_t j = 0; j < top.size(); ++j)
                settled = settled && std::abs(top[j] - prev[j]) <=
                                         1e-10 * std::max(std::abs(top[0]), 1e-300);
        stable = settled ? stable + 1 : 0;
        prev = top;
        if (stable >= 2 || k + 1 == kmax) break;

        if (b < 1e-13 * std::max(1.0, std::abs(a))) {
            // Invariant subspace found; continue from a fresh direction so the
            // block-diagonal tridiagonal keeps the Lanczos relation valid.
            if (m >= want + 1) break;
            Eigen::VectorXd fresh = seeded_unit_vector(n, ++reseed);
            fresh -= V.leftCols(m) * (V.leftCols(m).transpose() * fresh);
            const double fn = fresh.norm();
            if (fn < 1e-8) break;
            V.col(k + 1) = fresh / fn;
            beta.push_back(0.0);
        } else {
            V.col(k + 1) = w / b;
            beta.push_back(b);
        }
    }

    Eigen::MatrixXd s;
    const auto top = top_ritz(m, &s);
    LanczosResult out;
    out.theta.assign(top.begin(), top.begin() + std::min<std::size_t>(top.size(), want));
    out.vectors = V.leftCols(m) * s;
    for (int j = 0; j < out.vectors.cols(); ++j) {
        const double nrm = out.vectors.col(j).norm();
        if (nrm > 0) out.vectors.col(j) /= nrm;
    }
    return out;
}

}  // namespace

ClosureRows boundary_closures(const HamiltonianModel& m, double lambda, const Grid& grid,
                              BcKind bc, double tol_axis, const FloquetOptions& fl) {
    const int N = m.structure.half_dim;
    ClosureRows rows;
    if (bc == BcKind::dirichlet_half) {
        rows.left = dirichlet_half_rows(N);
        rows.right = rows.left;
        return rows;
    }
    for (Side side : {Side::minus, Side::plus}) {
        const AsymptoticKind kind =
            side == Side::plus ? m.kind_plus : m.kind_minus;
        const double anchor =
            side == Side::plus ? grid.half_length : -grid.half_length;
        SubspacePair pair;
        if (kind == AsymptoticKind::periodic) {
            const double T = side == Side::plus ? m.period_plus : m.period_minus;
            auto cb = [&m, side, lambda, anchor](double t) {
                return asymptotic_matrix(m, side, anchor + t, lambda);
            };
            const Eigen::MatrixXd M =
                monodromy(cb, T, fl.steps, m.structure, fl.tol_symp);
            if (hyperbolicity_margin_unit_circle(multipliers(M)) <= tol_axis)
                throw NotHyperbolic("asymptotic system has a multiplier on the unit circle",
                                    side_name(side));
            pair = invariant_subspace(M,
                                      side == Side::plus
                                          ? SubspaceKind::stable_multipliers
                                          : SubspaceKind::unstable_multipliers,
                                      m.structure, side);
        } else {
            const Eigen::MatrixXd A0 = asymptotic_matrix(m, side, 0.0, lambda);
            if (hyperbolicity_margin_imaginary_axis(
                    constant_spectrum(A0, m.structure)) <= tol_axis)
                throw NotHyperbolic(
                    "asymptotic system has spectrum on the imaginary axis",
                    side_name(side));
            pair = invariant_subspace(-m.structure.J * A0,
                                      side == Side::plus
                                          ? SubspaceKind::stable_exponents
                                          : SubspaceKind::unstable_exponents,
                                      m.structure, side);
        }
        // Rows annihilate exactly the admissible subspace's complement-free
        // part: row * x = 0 iff x lies in the decaying subspace.
        if (side == Side::plus)
            rows.right = pair.complement.transpose();
        else
            rows.left = pair.complement.transpose();
    }
    return rows;
}

BandedOperator assemble_with(const SymplecticStructure& S, const Grid& grid,
                             const CellMatrixCallback& cell_matrix,
                             const ClosureRows& closures, BcKind bc) {
    const int N = S.half_dim;
    const int block = 2 * N;
    const int n = grid.n_cells;
    const int dim = (n + 1) * block;
    const int band = 3 * N - 1;
    const double h = grid.step();
    BandedMatrix mat(dim, band, band);

    for (int r = 0; r < N; ++r)
        for (int c = 0; c < block; ++c) mat.at(r, c) = closures.left(r, c);

    for (int i = 0; i < n; ++i) {
        const double t_mid = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
        const Eigen::MatrixXd A = cell_matrix(i, t_mid);
        const Eigen::MatrixXd lower = -S.J / h - 0.5 * A;
        const Eigen::MatrixXd upper = S.J / h - 0.5 * A;
        const int row0 = N + block * i;
        for (int r = 0; r < block; ++r)
            for (int c = 0; c < block; ++c) {
                mat.at(row0 + r, block * i + c) = lower(r, c);
                mat.at(row0 + r, block * (i + 1) + c) = upper(r, c);
            }
    }

    const int row0 = N + block * n;
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < block; ++c)
            mat.at(row0 + r, block * n + c) = closures.right(r, c);

    return BandedOperator{std::move(mat), grid,          block,
                          bc,             4 * N - 1,     closures.left,
                          closures.right};
}

BandedOperator assemble(const HamiltonianModel& m, double lambda, const Grid& grid,
                        BcKind bc, double tol_axis) {
    const ClosureRows closures = boundary_closures(m, lambda, grid, bc, tol_axis);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.dim());
    auto cell = [&m, &zero, lambda](int, double t_mid) {
        return eval_hessian(m, t_mid, zero, lambda);
    };
    return assemble_with(m.structure, grid, cell, closures, bc);
}

BandedMatrix l2_scaled_matrix(const BandedOperator& op) {
    const int n = op.dim();
    const int N = op.block / 2;
    const int closure_lo = N;                 // first interior row
    const int closure_hi = n - N;             // one past the last interior row
    const double sqrt_h = std::sqrt(op.grid.step());
    BandedMatrix scaled(n, op.matrix.lower(), op.matrix.upper());
    for (int i = 0; i < n; ++i) {
        const double row_w = (i >= closure_lo && i < closure_hi) ? sqrt_h : 1.0;
        const int j_lo = std::max(0, i - op.matrix.lower());
        const int j_hi = std::min(n - 1, i + op.matrix.upper());
        for (int j = j_lo; j <= j_hi; ++j) {
            const double col_w = std::sqrt(op.grid.weight(j / op.block));
            scaled.at(i, j) = row_w * op.matrix.get(i, j) / col_w;
        }
    }
    return scaled;
}

SingularPairs smallest_singular_pairs(const BandedOperator& op, int count,
                                      std::uint64_t seed) {
    const int n = op.dim();
    count = std::min(count, n);
    if (count < 1) throw ConfigInvalid("singular value count must be positive", "count");
    const BandedLU lu = l2_scaled_matrix(op).factor();
    const LanczosResult lanczos = inverse_normal_lanczos(lu, n, count, seed);
    SingularPairs out;
    const int got = static_cast<int>(lanczos.theta.size());
    out.values.resize(got);
    out.vectors.resize(n, got);
    for (int j = 0; j < got; ++j) {
        const double theta = std::max(lanczos.theta[j], 0.0);
        out.values[j] = theta > 0 ? 1.0 / std::sqrt(theta)
                                  : std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            out.vectors(i, j) = lanczos.vectors(i, j) /
                                std::sqrt(op.grid.weight(i / op.block));
    }
    return out;
}

std::vector<double> smallest_singular_values(const BandedOperator& op, int count,
                                             std::uint64_t seed) {
    return smallest_singular_pairs(op, count, seed).values;
}

double median_singular_value(const BandedOperator& op) {
    const int n = op.dim();
    const int kl = 3 * (op.block / 2) - 1;
    const int kd = 2 * kl;  // bandwidth of the normal matrix A^T A
    std::vector<double> ab(static_cast<std::size_t>(kd + 1) * n, 0.0);
    const BandedMatrix A = l2_scaled_matrix(op);
    for (int j = 0; j < n; ++j)
        for (int r = 0; r <= kd && j + r < n; ++r) {
            const int i = j + r;
            const int k_lo = std::max(0, std::max(i, j) - kl);
            const int k_hi = std::min(n - 1, std::min(i, j) + kl);
            double sum = 0.0;
            for (int k = k_lo; k <= k_hi; ++k) sum += A.get(k, i) * A.get(k, j);
            ab[static_cast<std::size_t>(j) * (kd + 1) + r] = sum;
        }
    std::vector<double> w(n);
    const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'L', n, kd, ab.data(),
                                          kd + 1, w.data(), nullptr, 1);
    if (info != 0)
        throw EigenSolverFailure("symmetric band eigensolver failed on the normal matrix");
    const double mid = std::max(w[static_cast<std::size_t>(n) / 2], 0.0);
    return std::sqrt(mid);
}

namespace {

double sigma_min_at(const HamiltonianModel& m, double lambda, const Grid& grid,
                    BcKind bc, const ScanOptions& opts) {
    try {
        const BandedOperator op = assemble(m, lambda, grid, bc, opts.tol_axis);
        return smallest_singular_values(op, 1, opts.seed)[0];
    } catch (const FactorizationFailure&) {
        return 0.0;  // exactly singular: the strongest possible dip
    }
}

}  // namespace

ScanResult scan_bifurcations(const HamiltonianModel& m, double lambda_lo,
                             double lambda_hi, int n_scan, const Grid& grid, BcKind bc,
                             const ScanOptions& opts) {
    if (n_scan < 10)
        throw ConfigInvalid("scan needs at least 10 subintervals", "lambda_window.n_scan");
    if (!(lambda_lo < lambda_hi))
        throw ConfigInvalid("scan window is empty", "lambda_window");

    ScanResult result;
    const int points = n_scan + 1;
    result.profile.resize(points);
    const double width = lambda_hi - lambda_lo;
    auto lambda_at = [&](int i) { return lambda_lo + width * i / n_scan; };

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        for (int i = 0; i < points; ++i)
            result.profile[i] = {lambda_at(i), sigma_min_at(m, lambda_at(i), grid, bc, opts)};
    } else {
        std::atomic<int> next{0};
        std::exception_ptr first_error;
        std::mutex error_lock;
        auto worker = [&]() {
            for (int i = next.fetch_add(1); i < points; i = next.fetch_add(1)) {
                try {
                    result.profile[i] = {lambda_at(i),
                                         sigma_min_at(m, lambda_at(i), grid, bc, opts)};
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

    // Refine every sampled local minimum that is either decisively V-shaped or
    // already near the dip threshold; the threshold test applies to the
    // refined value, since a thin dip can fall between coarse samples.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 1; i + 1 < points; ++i) {
        const double s = result.profile[i].sigma_min;
        const double sl = result.profile[i - 1].sigma_min;
        const double sr = result.profile[i + 1].sigma_min;
        if (s > sl || s > sr) continue;
        const bool v_shaped = sl > s + 1e-7 && sr > s + 1e-7;
        const bool deep = s < 10.0 * opts.threshold_dip;
        if (!v_shaped && !deep) continue;

        double a = result.profile[i - 1].lambda, b = result.profile[i + 1].lambda;
        double best_lambda = result.profile[i].lambda, best_sigma = s;
        auto probe = [&](double l) {
            const double val = sigma_min_at(m, l, grid, bc, opts);
            if (val < best_sigma) {
                best_sigma = val;
                best_lambda = l;
            }
            return val;
        };
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = probe(x1), f2 = probe(x2);
        while (b - a > opts.refine_tol) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = probe(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = probe(x2);
            }
        }
        if (best_sigma < opts.threshold_dip)
            result.candidates.push_back({best_lambda, best_sigma});
    }

    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const ScanCandidate& a, const ScanCandidate& b) {
                  return a.lambda0 < b.lambda0;
              });
    std::vector<ScanCandidate> merged;
    const double merge_window = std::max(10.0 * opts.refine_tol, 1e-5);
    for (const auto& c : result.candidates) {
        if (!merged.empty() && std::abs(c.lambda0 - merged.back().lambda0) < merge_window) {
            if (c.sigma_min < merged.back().sigma_min) merged.back() = c;
        } else {
            merged.push_back(c);
        }
    }
    result.candidates = std::move(merged);
    return result;
}

KernelData kernel_basis(const HamiltonianModel& m, double lambda0, const Grid& grid,
                        BcKind bc, double rank_tol, double tol_axis, std::uint64_t seed) {
    const BandedOperator op = assemble(m, lambda0, grid, bc, tol_axis);
    const int probe = std::min(op.dim(), 2 * m.structure.half_dim + 3);
    const SingularPairs pairs = smallest_singular_pairs(op, probe, seed);
    const double sigma_ref = median_singular_value(op);
    const double threshold = rank_tol * sigma_ref;

    for (double s : pairs.values)
        if (s >= 0.5 * threshold && s <= 2.0 * threshold)
            throw RankAmbiguous(
                "a singular value sits within a factor of two of the rank threshold; "
                "refine the grid");

    int k = 0;
    while (k < static_cast<int>(pairs.values.size()) && pairs.values[k] < threshold) ++k;
    if (k == probe && probe < op.dim())
        throw RankAmbiguous("kernel dimension reached the probe window; refine the grid");

    KernelData data;
    data.lambda0 = lambda0;
    data.dimension = k;
    data.singular_values = pairs.values;
    data.sigma_ref = sigma_ref;
    data.sigma_min_profile = {{lambda0, pairs.values.empty() ? 0.0 : pairs.values[0]}};

    const int block = op.block;
    const int n_nodes = grid.n_nodes();
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd v = pairs.vectors.col(j);
        for (const auto& u : data.basis) v -= l2_inner(grid, block, u, v) * u;
        const double norm = l2_norm(grid, block, v);
        if (norm < 1e-10)
            throw RankAmbiguous("kernel candidates are numerically dependent in L2");
        v /= norm;
        fix_kernel_sign(v, block, n_nodes);
        data.basis.push_back(std::move(v));
    }

    for (const auto& u : data.basis) {
        double peak = 0.0;
        for (int i = 0; i < n_nodes; ++i)
            peak = std::max(peak, u.segment(i * block, block).norm());
        const double ends = std::max(u.segment(0, block).norm(),
                                     u.segment((n_nodes - 1) * block, block).norm());
        data.tail_ratios.push_back(peak > 0 ? ends / peak : 0.0);
    }
    return data;
}

GroundState rayleigh_lambda0(const std::function<double(double)>& a_profile,
                             const Grid& grid, double tol) {
    const int interior = grid.n_cells - 1;
    if (interior < 2)
        throw ConfigInvalid("ground-state solve needs at least 3 cells", "grid.n_cells");
    const double h = grid.step();
    std::vector<double> pot(interior);
    double a_max = 0.0;
    for (int i = 0; i < interior; ++i) {
        pot[i] = a_profile(grid.nodes[i + 1]);
        if (!std::isfinite(pot[i]))
            throw NonFiniteOutput("potential profile produced a non-finite value");
        a_max = std::max(a_max, pot[i]);
    }
    const double shift = -a_max - 1.0;  // strictly below the spectrum

    std::vector<double> diag(interior), off(std::max(interior - 1, 0), -1.0 / (h * h));
    for (int i = 0; i < interior; ++i) diag[i] = 2.0 / (h * h) - pot[i] - shift;
    std::vector<double> d = diag, e = off;
    if (LAPACKE_dpttrf(interior, d.data(), e.data()) != 0)
        throw FactorizationFailure("shifted second-difference matrix is not positive definite");

    auto apply_T = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd w(interior);
        for (int i = 0; i < interior; ++i) {
            double s = (2.0 / (h * h) - pot[i]) * v[i];
            if (i > 0) s -= v[i - 1] / (h * h);
            if (i + 1 < interior) s -= v[i + 1] / (h * h);
            w[i] = s;
        }
        return w;
    };

    Eigen::VectorXd v = Eigen::VectorXd::Ones(interior);
    v /= v.norm();
    double rayleigh = 0.0, prev = std::numeric_limits<double>::infinity();
    int settled = 0;
    for (int iter = 0; iter < 500; ++iter) {
        Eigen::VectorXd w = v;
        if (LAPACKE_dpttrs(LAPACK_COL_MAJOR, interior, 1, d.data(), e.data(), w.data(),
                           interior) != 0)
            throw FactorizationFailure("tridiagonal solve failed in the ground-state iteration");
        w /= w.norm();
        rayleigh = w.dot(apply_T(w));
        v = w;
        if (std::abs(rayleigh - prev) <= 1e-13 * std::max(1.0, std::abs(rayleigh))) {
            if (++settled >= 2) break;
        } else {
            settled = 0;
        }
        prev = rayleigh;
    }

    if (rayleigh >= -tol)
        throw NoNegativeEigenvalue(
            "the potential has no negative bound state on this grid", rayleigh);

    GroundState out;
    out.lambda0 = rayleigh;
    out.phi = Eigen::VectorXd::Zero(grid.n_nodes());
    out.phi.segment(1, interior) = v;
    if (out.phi.sum() < 0) out.phi = -out.phi;
    const double norm = l2_norm(grid, 1, out.phi);
    if (norm > 0) out.phi /= norm;
    return out;
}

DecayRates decay_rate(const Eigen::VectorXd& x, const Grid& grid, int block,
                      double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 0.5))
        throw ConfigInvalid("tail fraction must lie in (0, 0.5)", "tail_fraction");
    const int n_nodes = grid.n_nodes();
    if (x.size() != static_cast<Eigen::Index>(n_nodes) * block)
        throw ConfigInvalid("solution vector does not match the grid", "solution");
    const double cut = (1.0 - tail_fraction) * grid.half_length;

    auto fit = [&](bool plus_side) {
        std::vector<double> ts, logs;
        for (int i = 0; i < n_nodes; ++i) {
            const double t = grid.nodes[i];
            if (plus_side ? t < cut : t > -cut) continue;
            const double r = x.segment(i * block, block).norm();
            if (r > 1e-13) {
                ts.push_back(t);
                logs.push_back(std::log(r));
            }
        }
        if (ts.size() < 20)
            throw TailUnderflow("tail has fewer than 20 nodes above the noise floor");
        const double n = static_cast<double>(ts.size());
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            st += ts[i];
            sl += logs[i];
            stt += ts[i] * ts[i];
            stl += ts[i] * logs[i];
        }
        const double denom = n * stt - st * st;
        if (std::abs(denom) < 1e-300)
            throw TailUnderflow("tail nodes are degenerate");
        return (n * stl - st * sl) / denom;
    };

    DecayRates rates;
    rates.gamma_plus = -fit(true);
    rates.gamma_minus = fit(false);
    return rates;
}

}  // namespace homcl
