#include "homcl/floquet.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace homcl {

namespace {

// Plain-function spectral selectors for the sorted Schur decomposition.
extern "C" {
lapack_logical select_inside_circle(const double* wr, const double* wi) {
    return (*wr) * (*wr) + (*wi) * (*wi) < 1.0;
}
lapack_logical select_outside_circle(const double* wr, const double* wi) {
    return (*wr) * (*wr) + (*wi) * (*wi) > 1.0;
}
lapack_logical select_left_halfplane(const double* wr, const double*) {
    return *wr < 0.0;
}
lapack_logical select_right_halfplane(const double* wr, const double*) {
    return *wr > 0.0;
}
}

void sort_by_modulus(std::vector<std::complex<double>>& v) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

void sort_by_real_part(std::vector<std::complex<double>>& v) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

std::vector<std::complex<double>> eigenvalues_of(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw EigenSolverFailure("dense eigensolver did not converge");
    std::vector<std::complex<double>> out(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) out[i] = solver.eigenvalues()[i];
    return out;
}

// Flip column signs so the largest-magnitude entry (first index on ties) is
// positive; makes Schur-derived bases deterministic up to the factorization.
void canonicalize_columns(Eigen::MatrixXd& B) {
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < B.rows(); ++i)
            if (std::abs(B(i, j)) > best) {
                best = std::abs(B(i, j));
                arg = i;
            }
        if (B(arg, j) < 0.0) B.col(j) = -B.col(j);
    }
}

}  // namespace

Eigen::MatrixXd monodromy(const MatrixCallback& A, double T, int steps,
                          const SymplecticStructure& S, double tol_symp,
                          double* defect_out) {
    if (T <= 0.0) throw ConfigInvalid("period must be positive", "period");
    if (steps < 100) throw ConfigInvalid("monodromy needs at least 100 steps", "steps");
    const int dim = S.dim();
    const double h = T / steps;
    const Eigen::MatrixXd& J = S.J;

    auto field = [&](double t) -> Eigen::MatrixXd {
        Eigen::MatrixXd a = A(t);
        if (a.rows() != dim || a.cols() != dim)
            throw ValidationFailed("coefficient callback has wrong dimensions", "floquet");
        if (!a.allFinite())
            throw NonFiniteOutput("coefficient matrix is non-finite");
        return -J * a;
    };

    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd b0 = field(0.0);
    double worst_defect = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const Eigen::MatrixXd b_half = field(t + 0.5 * h);
        const Eigen::MatrixXd b_full = field(t + h);
        const Eigen::MatrixXd k1 = b0 * phi;
        const Eigen::MatrixXd k2 = b_half * (phi + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = b_half * (phi + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = b_full * (phi + h * k3);
        phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        b0 = b_full;
        // Relative defect: Phi^T J Phi has entries of size ||Phi||^2, so an
        // absolute comparison would reject every strongly hyperbolic system
        // on roundoff alone.
        const double scale = std::max(1.0, phi.squaredNorm());
        const double defect = (phi.transpose() * J * phi - J).norm() / scale;
        worst_defect = std::max(worst_defect, defect);
        if (defect > tol_symp)
            throw SymplecticDriftExceeded(
                "fundamental solution lost the symplectic invariant; increase steps",
                defect);
    }
    if (!phi.allFinite())
        throw NonFiniteOutput("fundamental solution overflowed during integration");
    if (defect_out) *defect_out = worst_defect;
    return phi;
}

std::vector<std::complex<double>> multipliers(const Eigen::MatrixXd& M) {
    if (!M.allFinite())
        throw NonFiniteOutput("monodromy matrix is non-finite");
    auto v = eigenvalues_of(M);
    sort_by_modulus(v);
    return v;
}

std::vector<std::complex<double>> constant_spectrum(const Eigen::MatrixXd& A0,
                                                    const SymplecticStructure& S) {
    if (A0.rows() != S.dim() || A0.cols() != S.dim())
        throw ValidationFailed("constant coefficient matrix has wrong dimensions",
                               "floquet");
    const double defect = (A0 - A0.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-10)
        throw AsymmetryDetected("constant coefficient matrix is not symmetric", defect);
    auto v = eigenvalues_of(S.J * A0);
    sort_by_real_part(v);
    return v;
}

SubspacePair invariant_subspace(const Eigen::MatrixXd& M, SubspaceKind kind,
                                const SymplecticStructure& S, Side side) {
    const lapack_int n = static_cast<lapack_int>(M.rows());
    Eigen::MatrixXd a = M;  // overwritten with the Schur form
    Eigen::MatrixXd z(n, n);
    std::vector<double> wr(n), wi(n);
    lapack_int sdim = 0;
    LAPACK_D_SELECT2 select = nullptr;
    switch (kind) {
        case SubspaceKind::stable_multipliers: select = select_inside_circle; break;
        case SubspaceKind::unstable_multipliers: select = select_outside_circle; break;
        case SubspaceKind::stable_exponents: select = select_left_halfplane; break;
        case SubspaceKind::unstable_exponents: select = select_right_halfplane; break;
    }
    const lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select, n, a.data(), n, &sdim,
                      wr.data(), wi.data(), z.data(), n);
    // info == n+2 flags harmless post-reordering rounding; anything else
    // nonzero is a genuine failure.
    if (info != 0 && info != n + 2)
        throw EigenSolverFailure("sorted Schur decomposition failed");
    if (sdim != S.half_dim)
        throw NotHyperbolic("invariant subspace does not have half dimension",
                            side_name(side));
    SubspacePair pair;
    pair.basis = z.leftCols(sdim);
    pair.complement = z.rightCols(n - sdim);
    canonicalize_columns(pair.basis);
    canonicalize_columns(pair.complement);
    return pair;
}

FloquetData analyze_periodic(const MatrixCallback& A, double T,
                             const SymplecticStructure& S, const FloquetOptions& opts,
                             Side side) {
    FloquetData data;
    data.period_used = T;
    data.monodromy = monodromy(A, T, opts.steps, S, opts.tol_symp, &data.symplectic_defect);
    data.multipliers = multipliers(data.monodromy);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& rho : data.multipliers)
        margin = std::min(margin, std::abs(std::abs(rho) - 1.0));
    data.margin = margin;
    data.hyperbolic = margin > opts.tol_hyp;
    if (data.hyperbolic) {
        data.stable_basis =
            invariant_subspace(data.monodromy, SubspaceKind::stable_multipliers, S, side)
                .basis;
        data.unstable_basis =
            invariant_subspace(data.monodromy, SubspaceKind::unstable_multipliers, S, side)
                .basis;
    }
    return data;
}

FloquetData analyze_constant(const Eigen::MatrixXd& A0, const SymplecticStructure& S,
                             const FloquetOptions& opts, Side side) {
    const double defect = (A0 - A0.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-10)
        throw AsymmetryDetected("constant coefficient matrix is not symmetric", defect);
    const Eigen::MatrixXd B = -S.J * A0;  // generator of x' = -J A0 x
    FloquetData data;
    data.monodromy = Eigen::MatrixXd::Identity(S.dim(), S.dim());
    data.period_used = 0.0;
    data.symplectic_defect = 0.0;
    data.multipliers = eigenvalues_of(B);  // exponents, not multipliers proper
    sort_by_real_part(data.multipliers);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& mu : data.multipliers)
        margin = std::min(margin, std::abs(mu.real()));
    data.margin = margin;
    data.hyperbolic = margin > opts.tol_hyp;
    if (data.hyperbolic) {
        data.stable_basis =
            invariant_subspace(B, SubspaceKind::stable_exponents, S, side).basis;
        data.unstable_basis =
            invariant_subspace(B, SubspaceKind::unstable_exponents, S, side).basis;
    }
    return data;
}

FloquetData analyze_side(const HamiltonianModel& m, Side side, double lambda,
                         const FloquetOptions& opts) {
    const AsymptoticKind kind =
        side == Side::plus ? m.kind_plus : m.kind_minus;
    if (kind == AsymptoticKind::periodic) {
        const double T = side == Side::plus ? m.period_plus : m.period_minus;
        auto cb = [&m, side, lambda](double t) {
            return asymptotic_matrix(m, side, t, lambda);
        };
        return analyze_periodic(cb, T, m.structure, opts, side);
    }
    return analyze_constant(asymptotic_matrix(m, side, 0.0, lambda), m.structure, opts,
                            side);
}

}  // namespace homcl
