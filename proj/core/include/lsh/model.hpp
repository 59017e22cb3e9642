#pragma once

#include <complex>

#include "lsh/numlin.hpp"

namespace lsh {

using Eigen::MatrixXcd;

/// Linear stochastic Hamiltonian system, given by the quadruple (K, M, F, N):
/// stiffness, mass (SPD), damping (PSD) and coupling. n degrees of freedom,
/// m force channels.
struct LshSystem {
    SymMatrix K;
    SymMatrix M;
    SymMatrix F;
    MatrixXd N;
    Eigen::Index n;
    Eigen::Index m;

    LshSystem(SymMatrix stiffness, SymMatrix mass, SymMatrix damping, MatrixXd coupling);

    static LshSystem from_scalars(double k, double mass, double f, double coupling);

    /// M^{-1}, symmetrized.
    SymMatrix mass_inverse() const;
};

/// Realization (A, B, C) of dimension 2n:
///   A = [[0, M^{-1}], [-K, -F M^{-1}]],  B = [0; N^T],  C = [N, 0].
struct StateSpace {
    MatrixXd A;
    MatrixXd B;
    MatrixXd C;
};

/// Quadruple with the identity mass matrix equivalent to the source system.
struct NormalizedSystem {
    SymMatrix Ktil;
    SymMatrix Ftil;
    MatrixXd Ntil;
};

/// Symplectic structure matrix J = [[0, I], [-I, 0]] of order 2n.
MatrixXd symplectic_matrix(Eigen::Index n);

/// Energy matrix R = diag(K, M^{-1}); the Hamiltonian is H(x) = x^T R x / 2.
SymMatrix energy_matrix(const LshSystem& sys);

/// Hamiltonian H(x) = (q^T K q + p^T M^{-1} p) / 2 at a state x = (q, p).
double hamiltonian(const LshSystem& sys, const VectorXd& x);

StateSpace realize(const LshSystem& sys);

NormalizedSystem normalize_mass(const LshSystem& sys);

/// Transfer function Phi(s) = Ntil (s^2 I + s Ftil + Ktil)^{-1} Ntil^T,
/// cross-checked against C (sI - A)^{-1} B when the resolvent exists.
MatrixXcd transfer(const LshSystem& sys, std::complex<double> s);

/// Static gain Phi(0) = N K^{-1} N^T (requires nonsingular K). When
/// condition_out is given it receives the spectral condition number of K.
MatrixXd static_gain(const LshSystem& sys, double* condition_out = nullptr);

/// Characteristic polynomial chi(s) = det(s^2 I + s Ftil + Ktil)
/// = det(s I_{2n} - A).
std::complex<double> char_poly_eval(const LshSystem& sys, std::complex<double> s);

}  // namespace lsh
