#pragma once

#include "lsh/model.hpp"

namespace lsh {

/// Admissible range for the deformation parameter eps: any
/// 0 < eps < min(eps1_bound, eps2_bound) certifies stability.
struct EpsWindow {
    double eps1_bound;  // sqrt(lambda_min(Ktil)), smallest undamped frequency
    double eps2_bound;  // lambda_min((I + Ftil Ktil^{-1} Ftil / 4)^{-1} Ftil) / 2

    double min() const { return eps1_bound < eps2_bound ? eps1_bound : eps2_bound; }
};

/// Quadratic Lyapunov certificate. Q = R + eps [[0,I],[I,0]] and Psi is the
/// certified dissipation budget
///   [[2 eps K, eps F M^{-1}], [eps M^{-1} F, M^{-1} F M^{-1} - 2 eps M^{-1}]];
/// the flow matrix -QA - A^T Q equals Psi + diag(0, M^{-1} F M^{-1}), so
/// Psi > 0 certifies strict decrease of the deformed Hamiltonian.
struct LyapunovCertificate {
    double eps;
    SymMatrix Q;
    SymMatrix Psi;
    bool valid;
};

struct HurwitzReport {
    bool hurwitz;
    /// True when the Lyapunov operator was singular (spectrum touches the
    /// imaginary axis), as opposed to a genuinely unstable solution.
    bool marginal;
};

/// Upper bounds of the eps window (requires K, F, M positive definite).
EpsWindow eps_bounds(const LshSystem& sys);

/// Interior default used when no eps is supplied: min(eps bounds) / 2.
double default_eps(const LshSystem& sys);

/// Certificate at a given eps > 0; never throws on an invalid certificate,
/// the `valid` flag reports definiteness of Q and Psi.
LyapunovCertificate certificate(const LshSystem& sys, double eps);

/// -QA - A^T Q, the exact dissipation rate matrix of the deformed
/// Hamiltonian along the drift flow.
SymMatrix dissipation_flow_matrix(const LshSystem& sys, double eps);

/// Hurwitz test via the Lyapunov route: solve A^T X + X A = -I and test
/// X > 0. No nonsymmetric eigensolver involved.
HurwitzReport analyze_hurwitz(const MatrixXd& a);
bool is_hurwitz(const MatrixXd& a);

/// Deformed Hamiltonian Ups(x) = x^T Q x / 2 = H(x) + eps q^T p.
double deformed_hamiltonian(const LshSystem& sys, double eps, const VectorXd& x);

}  // namespace lsh
