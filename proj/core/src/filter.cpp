#include "lsh/filter.hpp"

namespace lsh {

FilterSetup filter_setup(const LshSystem& sys, const InvariantMeasure& meas) {
    const SymMatrix d(sys.N.transpose() * sys.N);
    if (!is_positive_definite(d)) {
        throw HypothesisNotMet("filter_setup: N^T N is singular (coupling lacks full column rank)");
    }
    const SymMatrix pi22(meas.Pi22);
    if (!is_positive_definite(pi22)) {
        throw HypothesisNotMet("filter_setup: Pi22 is singular");
    }
    const MatrixXd pi22_inv = pi22.mat().llt().solve(MatrixXd::Identity(sys.n, sys.n));

    FilterSetup setup{meas.Pi12 * pi22_inv,
                      SymMatrix(meas.Pi11 - meas.Pi12 * pi22_inv * meas.Pi12.transpose()), d};
    if (!is_positive_definite(setup.P0)) {
        throw HypothesisNotMet("filter_setup: conditional covariance P0 is not positive definite");
    }
    return setup;
}

SymMatrix covariance_closed_form(const FilterSetup& setup, const SymMatrix& stiffness, double t) {
    if (t < 0.0) throw std::invalid_argument("covariance_closed_form: t must be >= 0");
    const Eigen::Index n = setup.P0.dim();
    const MatrixXd identity = MatrixXd::Identity(n, n);
    const MatrixXd p0_inv = setup.P0.mat().llt().solve(identity);
    const MatrixXd kdk =
        stiffness.mat() * setup.D.mat().llt().solve(stiffness.mat());
    const MatrixXd inv = p0_inv + t * kdk;
    return SymMatrix(Eigen::FullPivLU<MatrixXd>(inv).solve(identity));
}

FilterGrid filter_gains(const FilterSetup& setup, const LshSystem& sys,
                        const std::vector<double>& grid) {
    const MatrixXd kd_inv = setup.D.mat().llt().solve(sys.K.mat()).transpose();
    // gain(t) = P(t) K D^{-1}; K and D are symmetric.
    FilterGrid out;
    out.P.reserve(grid.size());
    out.gains.reserve(grid.size());
    for (double t : grid) {
        out.P.push_back(covariance_closed_form(setup, sys.K, t));
        out.gains.push_back(out.P.back().mat() * kd_inv);
    }
    return out;
}

FilterRun run_filter(const LshSystem& sys, const Trajectory& traj, const FilterSetup& setup,
                     const FilterGrid* shared, const VectorXd* qhat0_override) {
    const Eigen::Index n = sys.n;
    FilterGrid local;
    if (shared == nullptr) {
        local = filter_gains(setup, sys, traj.times);
        shared = &local;
    }
    if (shared->gains.size() != traj.times.size()) {
        throw std::invalid_argument("run_filter: gain grid does not match trajectory grid");
    }

    const MatrixXd minv = sys.mass_inverse().mat();
    const MatrixXd fminv = sys.F.mat() * minv;

    FilterRun run;
    run.times = traj.times;
    run.qhat.resize(n, traj.states.cols());
    run.error.resize(n, traj.states.cols());
    run.P = shared->P;

    VectorXd qhat = qhat0_override != nullptr
                        ? *qhat0_override
                        : (setup.qhat0_gain * traj.state(0).tail(n)).eval();
    run.qhat.col(0) = qhat;
    run.error.col(0) = traj.state(0).head(n) - qhat;

    for (std::size_t k = 0; k < traj.steps(); ++k) {
        const double dt = traj.times[k + 1] - traj.times[k];
        const VectorXd p = traj.state(k).tail(n);
        const VectorXd dp = traj.state(k + 1).tail(n) - p;
        const VectorXd fhat = -sys.K.mat() * qhat - fminv * p;
        qhat += minv * p * dt - shared->gains[k] * (dp - fhat * dt);
        run.qhat.col(static_cast<Eigen::Index>(k + 1)) = qhat;
        run.error.col(static_cast<Eigen::Index>(k + 1)) =
            traj.state(k + 1).head(n) - qhat;
    }
    return run;
}

}  // namespace lsh
