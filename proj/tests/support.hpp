#pragma once

#include <random>

#include "lsh/model.hpp"

namespace lsh::test {

inline MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(gen);
    }
    return m;
}

inline SymMatrix random_spd(std::mt19937_64& gen, Eigen::Index n, double shift = 0.3) {
    const MatrixXd g = random_matrix(gen, n, n);
    return SymMatrix(g.transpose() * g / static_cast<double>(n) +
                     shift * MatrixXd::Identity(n, n));
}

/// Random system satisfying the Theorem 1 hypotheses (K, M, F all SPD).
inline LshSystem random_system(std::mt19937_64& gen, Eigen::Index n, Eigen::Index m) {
    return LshSystem(random_spd(gen, n), random_spd(gen, n, 0.5), random_spd(gen, n),
                     random_matrix(gen, m, n));
}

/// Diagonal normalized instance (M = I), used for boundary-sharpness checks.
inline LshSystem random_diagonal_system(std::mt19937_64& gen, Eigen::Index n, Eigen::Index m) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    VectorXd k(n), f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i) = u(gen);
        f(i) = u(gen);
    }
    return LshSystem(SymMatrix(k.asDiagonal()), SymMatrix::identity(n), SymMatrix(f.asDiagonal()),
                     random_matrix(gen, m, n));
}

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline bool close_mat(const MatrixXd& a, const MatrixXd& b, double tol) {
    return (a - b).norm() <= tol * (1.0 + std::max(a.norm(), b.norm()));
}

}  // namespace lsh::test
