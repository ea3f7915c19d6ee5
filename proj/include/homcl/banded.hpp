#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace homcl {

class BandedLU;

/// Square real matrix stored in LAPACK general-band layout (column-major,
/// with kl extra super-rows reserved for factorization fill-in), so that
/// factor() is a single dgbtrf call without copying into a new layout.
class BandedMatrix {
public:
    BandedMatrix(int dim, int lower, int upper);

    int dim() const { return dim_; }
    int lower() const { return lower_; }
    int upper() const { return upper_; }

    bool in_band(int i, int j) const {
        return i - j <= lower_ && j - i <= upper_;
    }

    /// Mutable access to an in-band entry (throws std::out_of_range otherwise).
    double& at(int i, int j);
    /// Value of entry (i, j); zero outside the band.
    double get(int i, int j) const;

    void set_zero();

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;

    /// Dense copy, intended for small instances (tests, oracles).
    Eigen::MatrixXd dense() const;

    /// LU factorization with partial pivoting (LAPACK dgbtrf).
    /// Throws FactorizationFailure on an exactly singular pivot.
    BandedLU factor() const;

private:
    int dim_, lower_, upper_, ldab_;
    std::vector<double> ab_;
    friend class BandedLU;
};

/// Factored form of a BandedMatrix; solves A x = b and A^T x = b (dgbtrs).
class BandedLU {
public:
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs, bool transpose = false) const;
    void solve_in_place(Eigen::VectorXd& rhs, bool transpose = false) const;
    int dim() const { return dim_; }

private:
    BandedLU(int dim, int lower, int upper, int ldab, std::vector<double> ab);
    int dim_, lower_, upper_, ldab_;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    friend class BandedMatrix;
};

}  // namespace homcl
