#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace homcl {

/// Uniform time grid on [-L, L] with n_cells cells (n_cells + 1 nodes).
/// Discrete states are stored node-major: the block of `block` components of
/// x(t_i) occupies entries [i*block, (i+1)*block).
struct Grid {
    double half_length = 0.0;
    int n_cells = 0;
    std::vector<double> nodes;

    static Grid uniform(double half_length, int n_cells) {
        if (!(half_length > 0.0))
            throw std::invalid_argument("Grid: half_length must be positive");
        if (n_cells < 1)
            throw std::invalid_argument("Grid: n_cells must be at least 1");
        Grid g;
        g.half_length = half_length;
        g.n_cells = n_cells;
        g.nodes.resize(n_cells + 1);
        const double h = 2.0 * half_length / n_cells;
        for (int i = 0; i <= n_cells; ++i) g.nodes[i] = -half_length + h * i;
        g.nodes.back() = half_length;  // kill accumulated roundoff at the right end
        return g;
    }

    double step() const { return 2.0 * half_length / n_cells; }
    int n_nodes() const { return n_cells + 1; }
    int dim(int block) const { return n_nodes() * block; }

    /// Trapezoid weight of node i (h/2 at the ends, h inside).
    double weight(int i) const {
        const double h = step();
        return (i == 0 || i == n_cells) ? 0.5 * h : h;
    }
};

/// Trapezoid-rule L^2 inner product of two block-valued grid functions.
inline double l2_inner(const Grid& grid, int block, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
    double s = 0.0;
    for (int i = 0; i < grid.n_nodes(); ++i)
        s += grid.weight(i) * x.segment(i * block, block).dot(y.segment(i * block, block));
    return s;
}

inline double l2_norm(const Grid& grid, int block, const Eigen::VectorXd& x) {
    return std::sqrt(l2_inner(grid, block, x, x));
}

inline double sup_norm(const Eigen::VectorXd& x) {
    return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

/// Discrete H^1 norm: trapezoid L^2 part plus the piecewise difference
/// quotients, ||x||^2 + sum_i h * ||(x_{i+1}-x_i)/h||^2.
inline double h1_norm(const Grid& grid, int block, const Eigen::VectorXd& x) {
    const double h = grid.step();
    double s = l2_inner(grid, block, x, x);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double d =
            (x.segment((i + 1) * block, block) - x.segment(i * block, block)).squaredNorm();
        s += d / h;
    }
    return std::sqrt(s);
}

}  // namespace homcl
