#pragma once

#include "lsh/sim.hpp"

namespace lsh {

/// Gains for estimating the position from the momentum history under
/// stationary Gaussian initialization.
struct FilterSetup {
    MatrixXd qhat0_gain;  // Pi12 Pi22^{-1}
    SymMatrix P0;         // Pi11 - Pi12 Pi22^{-1} Pi21
    SymMatrix D;          // N^T N
};

/// One filtered path: the estimate, the error against the simulated truth,
/// and the closed-form error covariance on the grid.
struct FilterRun {
    std::vector<double> times;
    MatrixXd qhat;             // n x (K+1)
    MatrixXd error;            // n x (K+1), q - qhat
    std::vector<SymMatrix> P;  // closed-form covariance at each grid time
};

FilterSetup filter_setup(const LshSystem& sys, const InvariantMeasure& meas);

/// P(t) = (P0^{-1} + t K D^{-1} K)^{-1}; P(0) = P0.
SymMatrix covariance_closed_form(const FilterSetup& setup, const SymMatrix& stiffness, double t);

/// Closed-form covariances P(t_k) and correction gains P(t_k) K D^{-1} on a
/// grid, shared across all paths of an ensemble.
struct FilterGrid {
    std::vector<SymMatrix> P;
    std::vector<MatrixXd> gains;
};
FilterGrid filter_gains(const FilterSetup& setup, const LshSystem& sys,
                        const std::vector<double>& grid);

/// Euler discretization of dqhat = M^{-1} p dt - P K D^{-1} (dp - fhat dt)
/// with fhat = -K qhat - F M^{-1} p, driven by the trajectory's momentum
/// increments. qhat(0) defaults to qhat0_gain * p(0) unless overridden.
FilterRun run_filter(const LshSystem& sys, const Trajectory& traj, const FilterSetup& setup,
                     const FilterGrid* shared = nullptr,
                     const VectorXd* qhat0_override = nullptr);

}  // namespace lsh
