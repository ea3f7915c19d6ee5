#include "homcl/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <string>

#include "homcl/errors.hpp"

namespace homcl {

BandedMatrix::BandedMatrix(int dim, int lower, int upper)
    : dim_(dim), lower_(lower), upper_(upper), ldab_(2 * lower + upper + 1) {
    if (dim < 1) throw std::invalid_argument("BandedMatrix: dim must be positive");
    if (lower < 0 || upper < 0)
        throw std::invalid_argument("BandedMatrix: bandwidths must be nonnegative");
    ab_.assign(static_cast<size_t>(ldab_) * dim_, 0.0);
}

// LAPACK band layout: entry (i, j) lives at ab[ldab*j + kl + ku + i - j].
double& BandedMatrix::at(int i, int j) {
    if (i < 0 || i >= dim_ || j < 0 || j >= dim_ || !in_band(i, j))
        throw std::out_of_range("BandedMatrix: entry (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") outside the band");
    return ab_[static_cast<size_t>(ldab_) * j + (lower_ + upper_ + i - j)];
}

double BandedMatrix::get(int i, int j) const {
    if (i < 0 || i >= dim_ || j < 0 || j >= dim_)
        throw std::out_of_range("BandedMatrix: index outside the matrix");
    if (!in_band(i, j)) return 0.0;
    return ab_[static_cast<size_t>(ldab_) * j + (lower_ + upper_ + i - j)];
}

void BandedMatrix::set_zero() { std::fill(ab_.begin(), ab_.end(), 0.0); }

Eigen::VectorXd BandedMatrix::apply(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("BandedMatrix::apply: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);
    for (int j = 0; j < dim_; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const int ilo = std::max(0, j - upper_);
        const int ihi = std::min(dim_ - 1, j + lower_);
        const double* col = &ab_[static_cast<size_t>(ldab_) * j];
        for (int i = ilo; i <= ihi; ++i) y[i] += col[lower_ + upper_ + i - j] * xj;
    }
    return y;
}

Eigen::VectorXd BandedMatrix::apply_transpose(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
        throw std::invalid_argument("BandedMatrix::apply_transpose: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);
    for (int j = 0; j < dim_; ++j) {
        const int ilo = std::max(0, j - upper_);
        const int ihi = std::min(dim_ - 1, j + lower_);
        const double* col = &ab_[static_cast<size_t>(ldab_) * j];
        double s = 0.0;
        for (int i = ilo; i <= ihi; ++i) s += col[lower_ + upper_ + i - j] * x[i];
        y[j] += s;
    }
    return y;
}

Eigen::MatrixXd BandedMatrix::dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
        const int ilo = std::max(0, j - upper_);
        const int ihi = std::min(dim_ - 1, j + lower_);
        for (int i = ilo; i <= ihi; ++i)
            d(i, j) = ab_[static_cast<size_t>(ldab_) * j + (lower_ + upper_ + i - j)];
    }
    return d;
}

BandedLU BandedMatrix::factor() const {
    std::vector<double> ab = ab_;
    std::vector<int> ipiv(dim_);
    const lapack_int info =
        LAPACKE_dgbtrf(LAPACK_COL_MAJOR, dim_, dim_, lower_, upper_, ab.data(), ldab_,
                       ipiv.data());
    if (info < 0)
        throw std::logic_error("dgbtrf: illegal argument " + std::to_string(-info));
    if (info > 0)
        throw FactorizationFailure("banded LU hit an exactly singular pivot at index " +
                                   std::to_string(info));
    BandedLU lu(dim_, lower_, upper_, ldab_, std::move(ab));
    lu.ipiv_ = std::move(ipiv);
    return lu;
}

BandedLU::BandedLU(int dim, int lower, int upper, int ldab, std::vector<double> ab)
    : dim_(dim), lower_(lower), upper_(upper), ldab_(ldab), ab_(std::move(ab)) {}

void BandedLU::solve_in_place(Eigen::VectorXd& rhs, bool transpose) const {
    if (rhs.size() != dim_) throw std::invalid_argument("BandedLU::solve: size mismatch");
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, transpose ? 'T' : 'N', dim_,
                                           lower_, upper_, 1, ab_.data(), ldab_,
                                           ipiv_.data(), rhs.data(), dim_);
    if (info != 0)
        throw std::logic_error("dgbtrs: illegal argument " + std::to_string(-info));
}

Eigen::VectorXd BandedLU::solve(const Eigen::VectorXd& rhs, bool transpose) const {
    Eigen::VectorXd x = rhs;
    solve_in_place(x, transpose);
    return x;
}

}  // namespace homcl
