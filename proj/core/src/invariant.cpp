#include "lsh/invariant.hpp"

namespace lsh {

InvariantMeasure invariant_covariance(const LshSystem& sys) {
    const StateSpace ss = realize(sys);
    const HurwitzReport hr = analyze_hurwitz(ss.A);
    if (!hr.hurwitz) {
        throw HypothesisNotMet(hr.marginal
                                   ? "invariant_covariance: A is marginal, no invariant measure"
                                   : "invariant_covariance: A is not Hurwitz, no invariant measure");
    }

    const SymMatrix pi = solve_lyapunov(ss.A, SymMatrix(ss.B * ss.B.transpose()));
    const Eigen::Index n = sys.n;

    InvariantMeasure meas{pi, pi.mat().topLeftCorner(n, n), pi.mat().topRightCorner(n, n),
                          pi.mat().bottomRightCorner(n, n), MatrixXd(), 0.0};

    const MatrixXd xi_raw = meas.Pi12 * sys.mass_inverse().mat();
    meas.antisymmetry_defect = (xi_raw + xi_raw.transpose()).norm();
    meas.Xi = 0.5 * (xi_raw - xi_raw.transpose());
    return meas;
}

SylvesterResiduals sylvester_residuals(const LshSystem& sys, const InvariantMeasure& meas) {
    const Eigen::Index n = sys.n;
    if (meas.Pi11.rows() != n) throw std::invalid_argument("sylvester_residuals: dimension mismatch");
    const MatrixXd minv = sys.mass_inverse().mat();
    const MatrixXd pi21 = meas.Pi12.transpose();

    const MatrixXd r11 = minv * pi21 + meas.Pi12 * minv;
    const MatrixXd r12 = minv * meas.Pi22 - meas.Pi11 * sys.K.mat() - meas.Pi12 * minv * sys.F.mat();
    const MatrixXd r22 = -sys.F.mat() * minv * meas.Pi22 - meas.Pi22 * minv * sys.F.mat() -
                         sys.K.mat() * meas.Pi12 - pi21 * sys.K.mat() +
                         sys.N.transpose() * sys.N;
    return SylvesterResiduals{r11.norm(), r12.norm(), r22.norm()};
}

VirialReport virial_check(const LshSystem& sys, const InvariantMeasure& meas) {
    const MatrixXd minv = sys.mass_inverse().mat();
    VirialReport rep;
    rep.mean_kinetic = 0.5 * (minv * meas.Pi22).trace();
    // f = -Kq - F M^{-1} p, so E(q^T f) = -tr(K Pi11) - tr(F M^{-1} Pi21).
    rep.virial_rhs =
        -0.5 * (-(sys.K.mat() * meas.Pi11).trace() -
                (sys.F.mat() * minv * meas.Pi12.transpose()).trace());
    rep.trace_pi12 = meas.Pi12.trace();
    return rep;
}

ControllabilityBound controllability_bound(const LshSystem& sys) {
    const Eigen::Index n = sys.n;
    const MatrixXd minv = sys.mass_inverse().mat();
    const MatrixXd d = sys.N.transpose() * sys.N;
    const MatrixXd mdm = minv * d * minv;

    MatrixXd bound = MatrixXd::Zero(2 * n, 2 * n);
    bound.topLeftCorner(n, n) = mdm;
    bound.topRightCorner(n, n) = -mdm * sys.F.mat();
    bound.bottomLeftCorner(n, n) = -sys.F.mat() * mdm;
    bound.bottomRightCorner(n, n) = d + sys.F.mat() * mdm * sys.F.mat();

    const StateSpace ss = realize(sys);
    const MatrixXd bbt = ss.B * ss.B.transpose();
    const MatrixXd direct = bbt + ss.A * bbt * ss.A.transpose();
    if ((bound - direct).norm() > 1e-12 * (1.0 + direct.norm())) {
        throw NumericError("controllability_bound: block formula disagrees with BB^T + A BB^T A^T");
    }

    ControllabilityBound out{SymMatrix(bound), 0.0, is_positive_definite(SymMatrix(d))};
    out.min_eig = sym_eig(out.bound_matrix).min();
    return out;
}

}  // namespace lsh
