#pragma once

#include <functional>

#include "lsh/sim.hpp"
#include "lsh/stability.hpp"

namespace lsh {

/// Quadratic uncertainty class (gamma, Delta); admissible for the bound when
/// Delta < Psi strictly.
struct UncertaintyClass {
    double gamma;
    SymMatrix Delta;

    UncertaintyClass(double g, SymMatrix delta);
};

/// Second-moment bound certified against every admissible force:
///   limsup E|x(t)|^2 <= gamma / (lambda_min(Q) mu),
///   E Ups(t) <= gamma/(2 mu) + e^{-mu t} (E Ups(0) - gamma/(2 mu)).
struct RobustBound {
    double eps;
    double mu;            // lambda_min((Psi - Delta) Q^{-1})
    double lambda_min_Q;
    double asymptotic_bound;
    double ups0_bound;    // bound (or exact value) of E Ups(0)

    double transient(double t) const;
};

/// Gamma = [eps I; M^{-1}] N^T.
MatrixXd gamma_matrix(const LshSystem& sys, double eps);

/// Bound from the worst-case estimate E Ups(0) <= lambda_max(Q) E|x(0)|^2 / 2.
RobustBound robust_bound(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                         double second_moment_x0);

/// Bound with the exact E Ups(0) = <Q, Cov(x0)>/2 + |mean|^2_Q / 2.
RobustBound robust_bound(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                         const VectorXd& mean_x0, const SymMatrix& cov_x0);

/// Pointwise margin of the class inequality along a realized path:
///   m_k = gamma + |x_k|^2_Delta - <Ntil Ntil^T, Sigma_k> - 2 x_k^T Gamma alpha_k.
struct AdmissibilityReport {
    bool pass;
    double worst_margin;
};
AdmissibilityReport admissibility_check(const LshSystem& sys, double eps,
                                        const UncertaintyClass& uc, const Trajectory& traj);

/// Pathwise defect of the discretized dissipation identity for the deformed
/// Hamiltonian, using the exact flow matrix -QA - A^T Q and the realized
/// quadratic-variation increment of W (matching the energy-balance audit).
double dissipation_audit(const LshSystem& sys, double eps, const Trajectory& traj);

/// Monotonicity of Zhat(t) = e^{mu t} (mean Ups(x(t)) - gamma/(2 mu)) over an
/// ensemble, accepted within 3 standard errors of each forward difference.
struct SupermartingaleReport {
    bool nonincreasing;
    double max_uptick;  // largest positive forward difference, in SE units
    bool low_power;     // too few paths for the statistical test
};
SupermartingaleReport supermartingale_check(const LshSystem& sys, double eps,
                                            const UncertaintyClass& uc, const Ensemble& ensemble);

/// Streaming Monte Carlo verification data for Theorem-2 style experiments:
/// per-grid mean/SE of Ups, forward differences of Zhat, terminal |x|^2
/// statistics and the worst admissibility margin. Generated blockwise so the
/// reduction order is fixed by path index.
struct EnvelopeStats {
    std::vector<double> times;
    std::vector<double> mean_ups;
    std::vector<double> se_ups;
    std::vector<double> zhat;           // from mean_ups
    std::vector<double> zdiff;          // mean of per-path Z forward differences
    std::vector<double> zdiff_se;
    double mean_terminal_sq = 0.0;      // E |x(T)|^2
    double se_terminal_sq = 0.0;
    double worst_margin = 0.0;
    std::size_t paths = 0;
};
EnvelopeStats monte_carlo_envelope(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                                   const ForceModel& model, const InitialCondition& init,
                                   const std::vector<double>& grid, std::uint64_t seed,
                                   std::size_t paths);

}  // namespace lsh
