#include "lsh/numlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace lsh {

SymMatrix::SymMatrix(const MatrixXd& m) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw std::invalid_argument("SymMatrix: expected a square matrix of dimension >= 1");
    }
    m_ = 0.5 * (m + m.transpose());
}

double default_definiteness_tol(const SymMatrix& s) {
    return 1e-12 * (1.0 + s.mat().norm());
}

Spectrum sym_eig(const SymMatrix& s) {
    const Eigen::Index n = s.dim();
    MatrixXd a = s.mat();
    MatrixXd v = MatrixXd::Identity(n, n);

    const double scale = std::max(1.0, a.norm());
    auto off_norm = [&]() {
        double acc = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) acc += a(p, q) * a(p, q);
        return std::sqrt(2.0 * acc);
    };

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    while (off_norm() > 1e-14 * scale) {
        if (++sweep > kMaxSweeps) {
            throw NumericError("sym_eig: Jacobi iteration did not converge in 100 sweeps");
        }
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

    Spectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.eigenvectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

SpdSqrt spd_sqrt(const SymMatrix& s, double tol) {
    const Spectrum spec = sym_eig(s);
    if (spec.min() <= tol) {
        throw NotPositiveDefinite("spd_sqrt: matrix is not positive definite (lambda_min = " +
                                  std::to_string(spec.min()) + ")");
    }
    const VectorXd roots = spec.eigenvalues.array().sqrt();
    const MatrixXd& v = spec.eigenvectors;
    MatrixXd root = v * roots.asDiagonal() * v.transpose();
    MatrixXd inv_root = v * roots.cwiseInverse().asDiagonal() * v.transpose();
    return SpdSqrt{SymMatrix(root), SymMatrix(inv_root)};
}

SpdSqrt spd_sqrt(const SymMatrix& s) { return spd_sqrt(s, default_definiteness_tol(s)); }

bool is_positive_definite(const SymMatrix& s, double tol) {
    if (tol < 0.0) throw std::invalid_argument("is_positive_definite: tol must be >= 0");
    return sym_eig(s).min() > tol;
}

bool is_positive_definite(const SymMatrix& s) {
    return is_positive_definite(s, default_definiteness_tol(s));
}

SymMatrix solve_lyapunov(const MatrixXd& a, const SymMatrix& v) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || v.dim() != n) {
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    }

    // vec(AX + XA^T) = (I ox A + A ox I) vec(X), column-major stacking.
    MatrixXd kron = MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        kron.block(j * n, j * n, n, n) += a;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) {
                kron(j * n + i, k * n + i) += a(j, k);
            }
        }
    }

    VectorXd rhs(n * n);
    for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -v.mat().col(j);

    Eigen::FullPivLU<MatrixXd> lu(kron);
    if (!lu.isInvertible()) {
        throw NoUniqueSolution(
            "solve_lyapunov: singular Kronecker system (eigenvalue pair of A sums to zero)");
    }
    const VectorXd x = lu.solve(rhs);

    MatrixXd xm(n, n);
    for (Eigen::Index j = 0; j < n; ++j) xm.col(j) = x.segment(j * n, n);
    SymMatrix out(xm);

    const double residual = (a * out.mat() + out.mat() * a.transpose() + v.mat()).norm();
    if (residual > 1e-10 * (1.0 + v.mat().norm())) {
        throw NumericError("solve_lyapunov: residual " + std::to_string(residual) +
                           " exceeds tolerance");
    }
    return out;
}

double min_gen_eig(const SymMatrix& s, const SymMatrix& q) {
    if (s.dim() != q.dim()) throw std::invalid_argument("min_gen_eig: dimension mismatch");
    const SpdSqrt qr = spd_sqrt(q);
    const MatrixXd& w = qr.inv_root.mat();
    return sym_eig(SymMatrix(w * s.mat() * w)).min();
}

MatrixXd matrix_exponential(const MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exponential: square input required");
    const Eigen::Index n = a.rows();
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf-norm
    int squarings = 0;
    if (norm > 0.25) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    }
    const MatrixXd b = a / std::ldexp(1.0, squarings);

    MatrixXd term = MatrixXd::Identity(n, n);
    MatrixXd sum = term;
    for (int k = 1; k <= 60; ++k) {
        term = (term * b) / static_cast<double>(k);
        sum += term;
        if (term.norm() <= 1e-16 * sum.norm()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

}  // namespace lsh
