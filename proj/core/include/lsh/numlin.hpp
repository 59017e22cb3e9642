#pragma once

#include <Eigen/Dense>

#include "lsh/errors.hpp"

namespace lsh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense real symmetric matrix. Symmetry is enforced on construction by
/// averaging with the transpose, so entry(i,j) == entry(j,i) holds exactly.
class SymMatrix {
  public:
    explicit SymMatrix(const MatrixXd& m);

    static SymMatrix identity(Eigen::Index n) { return SymMatrix(MatrixXd::Identity(n, n)); }
    static SymMatrix zero(Eigen::Index n) { return SymMatrix(MatrixXd::Zero(n, n)); }

    const MatrixXd& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  private:
    MatrixXd m_;
};

/// Full real spectrum of a symmetric matrix: eigenvalues ascending,
/// eigenvectors orthonormal in the matching column order.
struct Spectrum {
    VectorXd eigenvalues;
    MatrixXd eigenvectors;

    double min() const { return eigenvalues(0); }
    double max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Result of a principal square root: root * root = S, inv_root = root^{-1}.
struct SpdSqrt {
    SymMatrix root;
    SymMatrix inv_root;
};

/// Definiteness threshold used when none is supplied: 1e-12 * (1 + ||S||_F).
double default_definiteness_tol(const SymMatrix& s);

/// Eigendecomposition by cyclic Jacobi rotations (cap 100 sweeps).
Spectrum sym_eig(const SymMatrix& s);

/// Principal square root and its inverse of an SPD matrix.
SpdSqrt spd_sqrt(const SymMatrix& s);
SpdSqrt spd_sqrt(const SymMatrix& s, double tol);

/// True iff lambda_min(S) > tol.
bool is_positive_definite(const SymMatrix& s, double tol);
bool is_positive_definite(const SymMatrix& s);

/// Solves A X + X A^T + V = 0 by Kronecker vectorization and a dense LU
/// solve. Throws NoUniqueSolution when A has an eigenvalue pair summing to
/// zero, and NumericError if the residual exceeds 1e-10 * (1 + ||V||_F).
SymMatrix solve_lyapunov(const MatrixXd& a, const SymMatrix& v);

/// lambda_min(Q^{-1/2} S Q^{-1/2}), which equals lambda_min(S Q^{-1}).
double min_gen_eig(const SymMatrix& s, const SymMatrix& q);

/// e^A by scaling-and-squaring with a truncated Taylor series.
MatrixXd matrix_exponential(const MatrixXd& a);

}  // namespace lsh
