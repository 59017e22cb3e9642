#include "lsh/stability.hpp"

#include <cmath>

namespace lsh {

namespace {

SymMatrix assemble_q(const LshSystem& sys, double eps) {
    const Eigen::Index n = sys.n;
    MatrixXd q = MatrixXd::Zero(2 * n, 2 * n);
    q.topLeftCorner(n, n) = sys.K.mat();
    q.bottomRightCorner(n, n) = sys.M.mat().llt().solve(MatrixXd::Identity(n, n));
    q.topRightCorner(n, n) = eps * MatrixXd::Identity(n, n);
    q.bottomLeftCorner(n, n) = eps * MatrixXd::Identity(n, n);
    return SymMatrix(q);
}

}  // namespace

EpsWindow eps_bounds(const LshSystem& sys) {
    if (!is_positive_definite(sys.K)) {
        throw HypothesisNotMet("eps_bounds: stiffness K is not positive definite");
    }
    if (!is_positive_definite(sys.F)) {
        throw HypothesisNotMet("eps_bounds: damping F is not positive definite");
    }
    const NormalizedSystem ns = normalize_mass(sys);

    EpsWindow w;
    w.eps1_bound = std::sqrt(sym_eig(ns.Ktil).min());

    const MatrixXd kf = ns.Ktil.mat().llt().solve(ns.Ftil.mat());
    const SymMatrix weight(MatrixXd::Identity(sys.n, sys.n) + 0.25 * ns.Ftil.mat() * kf);
    w.eps2_bound = 0.5 * min_gen_eig(ns.Ftil, weight);
    return w;
}

double default_eps(const LshSystem& sys) { return 0.5 * eps_bounds(sys).min(); }

LyapunovCertificate certificate(const LshSystem& sys, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("certificate: eps must be > 0");
    const Eigen::Index n = sys.n;
    const MatrixXd minv = sys.mass_inverse().mat();
    const MatrixXd fminv = sys.F.mat() * minv;

    MatrixXd psi = MatrixXd::Zero(2 * n, 2 * n);
    psi.topLeftCorner(n, n) = 2.0 * eps * sys.K.mat();
    psi.topRightCorner(n, n) = eps * fminv;
    psi.bottomLeftCorner(n, n) = eps * fminv.transpose();
    psi.bottomRightCorner(n, n) = minv * sys.F.mat() * minv - 2.0 * eps * minv;

    LyapunovCertificate cert{eps, assemble_q(sys, eps), SymMatrix(psi), false};

    // -QA - A^T Q exceeds Psi exactly by the damping block diag(0, M^{-1}FM^{-1}).
    const SymMatrix flow = dissipation_flow_matrix(sys, eps);
    MatrixXd gap = flow.mat() - cert.Psi.mat();
    gap.bottomRightCorner(n, n) -= minv * sys.F.mat() * minv;
    if (gap.norm() > 1e-12 * (1.0 + flow.mat().norm())) {
        throw NumericError("certificate: Psi block form inconsistent with -QA - A^T Q");
    }

    cert.valid = is_positive_definite(cert.Q) && is_positive_definite(cert.Psi);
    return cert;
}

SymMatrix dissipation_flow_matrix(const LshSystem& sys, double eps) {
    const MatrixXd a = realize(sys).A;
    const MatrixXd q = assemble_q(sys, eps).mat();
    return SymMatrix(-(q * a) - (q * a).transpose());
}

HurwitzReport analyze_hurwitz(const MatrixXd& a) {
    try {
        const SymMatrix x =
            solve_lyapunov(a.transpose(), SymMatrix::identity(a.rows()));
        return HurwitzReport{is_positive_definite(x), false};
    } catch (const NoUniqueSolution&) {
        return HurwitzReport{false, true};
    } catch (const NumericError&) {
        return HurwitzReport{false, true};
    }
}

bool is_hurwitz(const MatrixXd& a) { return analyze_hurwitz(a).hurwitz; }

double deformed_hamiltonian(const LshSystem& sys, double eps, const VectorXd& x) {
    if (x.size() != 2 * sys.n) {
        throw std::invalid_argument("deformed_hamiltonian: state dimension mismatch");
    }
    const double quad = 0.5 * x.dot(assemble_q(sys, eps).mat() * x);
    const double direct =
        hamiltonian(sys, x) + eps * x.head(sys.n).dot(x.tail(sys.n));
    if (std::abs(quad - direct) > 1e-12 * (1.0 + std::abs(quad))) {
        throw NumericError("deformed_hamiltonian: quadratic form and H + eps q^T p disagree");
    }
    return quad;
}

}  // namespace lsh
