#include <doctest.h>

#include <Eigen/Dense>

#include <random>

#include "homcl/banded.hpp"
#include "homcl/errors.hpp"

using namespace homcl;

namespace {

// Random banded matrix with entries in [-1, 1], diagonally dominated so the
// factorization stays benign.
BandedMatrix random_banded(int dim, int lower, int upper, std::uint64_t seed,
                           Eigen::MatrixXd* dense_out) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BandedMatrix mat(dim, lower, upper);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (mat.in_band(i, j)) {
                double v = u(rng);
                if (i == j) v += 4.0;
                mat.at(i, j) = v;
                dense(i, j) = v;
            }
    if (dense_out) *dense_out = dense;
    return mat;
}

}  // namespace

TEST_CASE("banded entry access and band predicate") {
    BandedMatrix mat(6, 2, 1);
    CHECK(mat.in_band(3, 1));
    CHECK(!mat.in_band(3, 0));
    CHECK(mat.in_band(2, 3));
    CHECK(!mat.in_band(2, 4));

    mat.at(3, 1) = 2.5;
    CHECK(mat.get(3, 1) == 2.5);
    CHECK(mat.get(3, 0) == 0.0);            // outside the band reads as zero
    CHECK_THROWS_AS(mat.at(3, 0), std::out_of_range);
}

TEST_CASE("apply and apply_transpose match the dense product") {
    Eigen::MatrixXd dense;
    BandedMatrix mat = random_banded(40, 3, 2, 7, &dense);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(40);
    for (int i = 0; i < 40; ++i) x[i] = gauss(rng);

    CHECK((mat.apply(x) - dense * x).norm() < 1e-13 * dense.norm() * x.norm());
    CHECK((mat.apply_transpose(x) - dense.transpose() * x).norm() <
          1e-13 * dense.norm() * x.norm());
    CHECK((mat.dense() - dense).norm() == 0.0);
}

TEST_CASE("factor/solve reproduces dense solutions, including transpose") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Eigen::MatrixXd dense;
        BandedMatrix mat = random_banded(50, 4, 3, seed, &dense);
        BandedLU lu = mat.factor();

        std::mt19937_64 rng(seed + 100);
        std::normal_distribution<double> gauss;
        Eigen::VectorXd b(50);
        for (int i = 0; i < 50; ++i) b[i] = gauss(rng);

        const Eigen::VectorXd x = lu.solve(b);
        CHECK((dense * x - b).norm() < 1e-10 * b.norm());

        const Eigen::VectorXd xt = lu.solve(b, /*transpose=*/true);
        CHECK((dense.transpose() * xt - b).norm() < 1e-10 * b.norm());

        Eigen::VectorXd in_place = b;
        lu.solve_in_place(in_place);
        CHECK((in_place - x).norm() == 0.0);
    }
}

TEST_CASE("exactly singular pivot raises FactorizationFailure") {
    BandedMatrix mat(4, 1, 1);
    // Second row identically zero makes the matrix exactly singular.
    mat.at(0, 0) = 1.0;
    mat.at(2, 2) = 1.0;
    mat.at(3, 3) = 1.0;
    CHECK_THROWS_AS(mat.factor(), FactorizationFailure);
}

TEST_CASE("tridiagonal Toeplitz eigenproblem solved through the band solver") {
    // A = tridiag(-1, 2, -1) of size n has inverse-power iteration fixed
    // points at the known eigenvectors; check the solve against a known
    // right-hand side instead: A x = e_1 has x_i = (n - i) / (n + 1) * (i+1)...
    // Simplest exact identity: x = ones => (A x)_interior = 0, ends = 1.
    const int n = 64;
    BandedMatrix mat(n, 1, 1);
    for (int i = 0; i < n; ++i) {
        mat.at(i, i) = 2.0;
        if (i > 0) mat.at(i, i - 1) = -1.0;
        if (i + 1 < n) mat.at(i, i + 1) = -1.0;
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd y = mat.apply(ones);
    CHECK(y[0] == 1.0);
    CHECK(y[n - 1] == 1.0);
    CHECK(y.segment(1, n - 2).cwiseAbs().maxCoeff() == 0.0);

    // and the solver inverts it: solve(A, y) == ones.
    BandedLU lu = mat.factor();
    CHECK((lu.solve(y) - ones).cwiseAbs().maxCoeff() < 1e-12);
}
