#include "lsh/model.hpp"

#include <cmath>

namespace lsh {

LshSystem::LshSystem(SymMatrix stiffness, SymMatrix mass, SymMatrix damping, MatrixXd coupling)
    : K(std::move(stiffness)),
      M(std::move(mass)),
      F(std::move(damping)),
      N(std::move(coupling)),
      n(K.dim()),
      m(N.rows()) {
    if (M.dim() != n || F.dim() != n) {
        throw std::invalid_argument("LshSystem: K, M, F must share one dimension");
    }
    if (N.cols() != n || N.rows() < 1) {
        throw std::invalid_argument("LshSystem: N must be m x n with m >= 1");
    }
    if (!is_positive_definite(M)) {
        throw NotPositiveDefinite("LshSystem: M is not positive definite");
    }
    if (sym_eig(F).min() < -default_definiteness_tol(F)) {
        throw std::invalid_argument("LshSystem: F is not positive semi-definite");
    }
}

LshSystem LshSystem::from_scalars(double k, double mass, double f, double coupling) {
    auto m1 = [](double v) { return MatrixXd::Constant(1, 1, v); };
    return LshSystem(SymMatrix(m1(k)), SymMatrix(m1(mass)), SymMatrix(m1(f)), m1(coupling));
}

SymMatrix LshSystem::mass_inverse() const {
    const MatrixXd inv = M.mat().llt().solve(MatrixXd::Identity(n, n));
    return SymMatrix(inv);
}

MatrixXd symplectic_matrix(Eigen::Index n) {
    MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = MatrixXd::Identity(n, n);
    j.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
    return j;
}

SymMatrix energy_matrix(const LshSystem& sys) {
    const Eigen::Index n = sys.n;
    MatrixXd r = MatrixXd::Zero(2 * n, 2 * n);
    r.topLeftCorner(n, n) = sys.K.mat();
    r.bottomRightCorner(n, n) = sys.mass_inverse().mat();
    return SymMatrix(r);
}

double hamiltonian(const LshSystem& sys, const VectorXd& x) {
    if (x.size() != 2 * sys.n) throw std::invalid_argument("hamiltonian: state dimension mismatch");
    return 0.5 * x.dot(energy_matrix(sys).mat() * x);
}

StateSpace realize(const LshSystem& sys) {
    const Eigen::Index n = sys.n;
    const MatrixXd minv = sys.mass_inverse().mat();

    StateSpace ss;
    ss.A = MatrixXd::Zero(2 * n, 2 * n);
    ss.A.topRightCorner(n, n) = minv;
    ss.A.bottomLeftCorner(n, n) = -sys.K.mat();
    ss.A.bottomRightCorner(n, n) = -sys.F.mat() * minv;

    ss.B = MatrixXd::Zero(2 * n, sys.m);
    ss.B.bottomRows(n) = sys.N.transpose();

    ss.C = MatrixXd::Zero(sys.m, 2 * n);
    ss.C.leftCols(n) = sys.N;

    // A also factors as (J - [[0,0],[0,1]] ox F) R.
    MatrixXd damp = MatrixXd::Zero(2 * n, 2 * n);
    damp.bottomRightCorner(n, n) = sys.F.mat();
    const MatrixXd a_alt = (symplectic_matrix(n) - damp) * energy_matrix(sys).mat();
    if ((ss.A - a_alt).norm() > 1e-12 * (1.0 + ss.A.norm())) {
        throw NumericError("realize: block assembly disagrees with (J - E ox F) R");
    }
    return ss;
}

NormalizedSystem normalize_mass(const LshSystem& sys) {
    const SpdSqrt ms = spd_sqrt(sys.M);
    const MatrixXd& mih = ms.inv_root.mat();
    NormalizedSystem out{SymMatrix(mih * sys.K.mat() * mih), SymMatrix(mih * sys.F.mat() * mih),
                         sys.N * mih};

    // The normalized realization is similar to the original one; trace and
    // determinant are similarity invariants.
    const MatrixXd a = realize(sys).A;
    const LshSystem normed(out.Ktil, SymMatrix::identity(sys.n), out.Ftil, out.Ntil);
    const MatrixXd a_norm = realize(normed).A;
    const double tr_rel = std::abs(a.trace() - a_norm.trace());
    const double det_a = a.determinant();
    const double det_rel = std::abs(det_a - a_norm.determinant());
    if (tr_rel > 1e-9 * (1.0 + std::abs(a.trace())) ||
        det_rel > 1e-9 * (1.0 + std::abs(det_a))) {
        throw NumericError("normalize_mass: similarity invariants not preserved");
    }
    return out;
}

MatrixXcd transfer(const LshSystem& sys, std::complex<double> s) {
    const NormalizedSystem ns = normalize_mass(sys);
    const Eigen::Index n = sys.n;

    MatrixXcd pencil = (s * s) * MatrixXcd::Identity(n, n);
    pencil += s * ns.Ftil.mat() + ns.Ktil.mat();

    Eigen::FullPivLU<MatrixXcd> lu(pencil);
    if (!lu.isInvertible()) {
        throw NoUniqueSolution("transfer: pencil s^2 I + s Ftil + Ktil is singular at s");
    }
    const MatrixXcd ntil = ns.Ntil;
    const MatrixXcd phi = ntil * lu.solve(ntil.transpose());

    // Resolvent route C (sI - A)^{-1} B gives the same value.
    const StateSpace ss = realize(sys);
    MatrixXcd res = s * MatrixXcd::Identity(2 * n, 2 * n) - ss.A;
    Eigen::FullPivLU<MatrixXcd> rlu(res);
    if (rlu.isInvertible()) {
        const MatrixXcd phi2 = ss.C * rlu.solve(MatrixXcd(ss.B));
        if ((phi - phi2).norm() > 1e-9 * (1.0 + phi.norm())) {
            throw NumericError("transfer: pencil and resolvent formulas disagree");
        }
    }
    return phi;
}

MatrixXd static_gain(const LshSystem& sys, double* condition_out) {
    const Spectrum spec = sym_eig(sys.K);
    const double lo = spec.eigenvalues.cwiseAbs().minCoeff();
    const double hi = spec.eigenvalues.cwiseAbs().maxCoeff();
    if (lo <= 1e-14 * (1.0 + hi)) {
        throw NoUniqueSolution("static_gain: stiffness matrix K is singular");
    }
    if (condition_out != nullptr) *condition_out = hi / lo;

    const MatrixXd gain = sys.N * Eigen::FullPivLU<MatrixXd>(sys.K.mat()).solve(sys.N.transpose());
    const double asym = (gain - gain.transpose()).norm();
    if (asym > 1e-12 * (1.0 + gain.norm())) {
        throw NumericError("static_gain: asymmetry above tolerance");
    }
    return SymMatrix(gain).mat();
}

std::complex<double> char_poly_eval(const LshSystem& sys, std::complex<double> s) {
    const NormalizedSystem ns = normalize_mass(sys);
    const Eigen::Index n = sys.n;
    MatrixXcd pencil = (s * s) * MatrixXcd::Identity(n, n);
    pencil += s * ns.Ftil.mat() + ns.Ktil.mat();
    return pencil.determinant();
}

}  // namespace lsh
