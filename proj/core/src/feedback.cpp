#include "lsh/feedback.hpp"

#include <cmath>

namespace lsh {

namespace {

MatrixXd block_diag(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

/// Largest eigenvalue of Phi1 Phi2 for symmetric PSD factors, computed as
/// lambda_max(S2 Phi1 S2) with S2 the PSD square root of Phi2.
double lambda_max_product(const SymMatrix& phi1, const SymMatrix& phi2) {
    const Spectrum spec = sym_eig(phi2);
    const VectorXd clamped = spec.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    const MatrixXd s2 = spec.eigenvectors * clamped.asDiagonal() * spec.eigenvectors.transpose();
    return sym_eig(SymMatrix(s2 * phi1.mat() * s2)).max();
}

double operator_norm(const SymMatrix& s) {
    const Spectrum spec = sym_eig(s);
    return std::max(std::abs(spec.min()), std::abs(spec.max()));
}

}  // namespace

ClosedLoop compose(const LshSystem& s1, const LshSystem& s2) {
    if (s1.n != s2.n || s1.m != s2.m) {
        throw std::invalid_argument("compose: subsystems must share (n, m)");
    }
    const Eigen::Index n = s1.n;

    MatrixXd k = block_diag(s1.K.mat(), s2.K.mat());
    k.topRightCorner(n, n) = -s1.N.transpose() * s2.N;
    k.bottomLeftCorner(n, n) = -s2.N.transpose() * s1.N;

    LshSystem loop(SymMatrix(k), SymMatrix(block_diag(s1.M.mat(), s2.M.mat())),
                   SymMatrix(block_diag(s1.F.mat(), s2.F.mat())), block_diag(s1.N, s2.N));

    // The composed realization must match the interconnected subsystem SDEs.
    const MatrixXd a_loop = realize(loop).A;
    const MatrixXd m1inv = s1.mass_inverse().mat();
    const MatrixXd m2inv = s2.mass_inverse().mat();
    MatrixXd a_direct = MatrixXd::Zero(4 * n, 4 * n);
    a_direct.block(0, 2 * n, n, n) = m1inv;
    a_direct.block(n, 3 * n, n, n) = m2inv;
    a_direct.block(2 * n, 0, n, n) = -s1.K.mat();
    a_direct.block(2 * n, n, n, n) = s1.N.transpose() * s2.N;
    a_direct.block(2 * n, 2 * n, n, n) = -s1.F.mat() * m1inv;
    a_direct.block(3 * n, 0, n, n) = s2.N.transpose() * s1.N;
    a_direct.block(3 * n, n, n, n) = -s2.K.mat();
    a_direct.block(3 * n, 3 * n, n, n) = -s2.F.mat() * m2inv;
    if ((a_loop - a_direct).norm() > 1e-12 * (1.0 + a_loop.norm())) {
        throw NumericError("compose: realization disagrees with the interconnected SDEs");
    }
    return ClosedLoop{std::move(loop), s1, s2};
}

SmallGainReport small_gain_check(const LshSystem& s1, const LshSystem& s2) {
    if (!is_positive_definite(s1.K) || !is_positive_definite(s2.K)) {
        throw HypothesisNotMet("small_gain_check: K1 and K2 must be positive definite");
    }
    const MatrixXd k1ih = spd_sqrt(s1.K).inv_root.mat();
    const MatrixXd k2ih = spd_sqrt(s2.K).inv_root.mat();
    const MatrixXd x = k1ih * s1.N.transpose() * s2.N * k2ih;

    SmallGainReport rep;
    const double sq = sym_eig(SymMatrix(x.transpose() * x)).max();
    rep.norm = std::sqrt(std::max(0.0, sq));
    rep.definite = rep.norm < 1.0;

    const SymMatrix phi1(static_gain(s1));
    const SymMatrix phi2(static_gain(s2));
    rep.sufficient_gain_product = operator_norm(phi1) * operator_norm(phi2);

    // norm^2 equals lambda_max(Phi1(0) Phi2(0)).
    const double lam = lambda_max_product(phi1, phi2);
    if (std::abs(rep.norm * rep.norm - lam) > 1e-9 * (1.0 + rep.norm * rep.norm)) {
        throw NumericError("small_gain_check: static-gain identity violated");
    }

    const bool direct = is_positive_definite(compose(s1, s2).loop.K);
    if (direct != rep.definite && std::abs(rep.norm - 1.0) > 1e-9) {
        throw NumericError("small_gain_check: norm test and direct definiteness disagree");
    }
    if (rep.sufficient_gain_product < 1.0 && !rep.definite) {
        throw NumericError("small_gain_check: submultiplicativity violated");
    }
    return rep;
}

ClosedLoopReport closed_loop_stability(const LshSystem& s1, const LshSystem& s2,
                                       const std::optional<UncertaintyClass>& uc,
                                       double second_moment_x0) {
    ClosedLoopReport rep{compose(s1, s2), std::nullopt, {}, false,
                         std::nullopt, std::nullopt, false, std::nullopt, std::nullopt};

    if (!is_positive_definite(rep.loop.loop.F)) {
        rep.failures.emplace_back(is_positive_definite(s1.F)
                                      ? "F2 not positive definite"
                                      : "F1 not positive definite");
    }
    bool k_ok = false;
    try {
        rep.small_gain = small_gain_check(s1, s2);
        k_ok = rep.small_gain->definite;
        if (!k_ok) rep.failures.emplace_back("closed-loop K not positive definite (norm >= 1)");
    } catch (const HypothesisNotMet&) {
        rep.failures.emplace_back(is_positive_definite(s1.K) ? "K2 not positive definite"
                                                             : "K1 not positive definite");
    }
    if (!rep.failures.empty()) return rep;

    rep.applicable = true;
    rep.window = eps_bounds(rep.loop.loop);
    const double eps = 0.5 * rep.window->min();
    rep.cert = certificate(rep.loop.loop, eps);
    rep.hurwitz = is_hurwitz(realize(rep.loop.loop).A);
    rep.invariant = invariant_covariance(rep.loop.loop);
    if (uc.has_value()) {
        rep.robust = robust_bound(rep.loop.loop, eps, *uc, second_moment_x0);
    }
    return rep;
}

}  // namespace lsh
