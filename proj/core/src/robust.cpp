#include "lsh/robust.hpp"

#include <cmath>

#include "lsh/parallel.hpp"

namespace lsh {

namespace {

double strictness_margin(const SymMatrix& psi) { return 1e-10 * (1.0 + psi.mat().norm()); }

RobustBound bound_core(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                       double ups0_bound) {
    const LyapunovCertificate cert = certificate(sys, eps);
    if (!cert.valid) {
        throw HypothesisNotMet("robust_bound: certificate invalid at this eps");
    }
    if (uc.Delta.dim() != 2 * sys.n) {
        throw std::invalid_argument("robust_bound: Delta must have dimension 2n");
    }
    const SymMatrix slack(cert.Psi.mat() - uc.Delta.mat());
    if (sym_eig(slack).min() <= strictness_margin(cert.Psi)) {
        throw HypothesisNotMet("robust_bound: Delta is not strictly below Psi");
    }

    RobustBound out;
    out.eps = eps;
    out.mu = min_gen_eig(slack, cert.Q);
    out.lambda_min_Q = sym_eig(cert.Q).min();
    out.asymptotic_bound = uc.gamma / (out.lambda_min_Q * out.mu);
    out.ups0_bound = ups0_bound;
    return out;
}

}  // namespace

UncertaintyClass::UncertaintyClass(double g, SymMatrix delta) : gamma(g), Delta(std::move(delta)) {
    if (gamma < 0.0) throw std::invalid_argument("UncertaintyClass: gamma must be >= 0");
    if (sym_eig(Delta).min() < -default_definiteness_tol(Delta)) {
        throw std::invalid_argument("UncertaintyClass: Delta must be positive semi-definite");
    }
}

double RobustBound::transient(double t) const {
    const double floor = asymptotic_bound * lambda_min_Q / 2.0;  // gamma / (2 mu)
    return floor + std::exp(-mu * t) * (ups0_bound - floor);
}

MatrixXd gamma_matrix(const LshSystem& sys, double eps) {
    MatrixXd lift(2 * sys.n, sys.n);
    lift.topRows(sys.n) = eps * MatrixXd::Identity(sys.n, sys.n);
    lift.bottomRows(sys.n) = sys.mass_inverse().mat();
    return lift * sys.N.transpose();
}

RobustBound robust_bound(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                         double second_moment_x0) {
    if (!(second_moment_x0 >= 0.0) || !std::isfinite(second_moment_x0)) {
        throw std::invalid_argument("robust_bound: E|x(0)|^2 must be finite and >= 0");
    }
    RobustBound out = bound_core(sys, eps, uc, 0.0);
    const double lambda_max_q = sym_eig(certificate(sys, eps).Q).max();
    out.ups0_bound = 0.5 * lambda_max_q * second_moment_x0;
    return out;
}

RobustBound robust_bound(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                         const VectorXd& mean_x0, const SymMatrix& cov_x0) {
    const LyapunovCertificate cert = certificate(sys, eps);
    const double exact_ups0 = 0.5 * (cert.Q.mat() * cov_x0.mat()).trace() +
                              0.5 * mean_x0.dot(cert.Q.mat() * mean_x0);
    return bound_core(sys, eps, uc, exact_ups0);
}

AdmissibilityReport admissibility_check(const LshSystem& sys, double eps,
                                        const UncertaintyClass& uc, const Trajectory& traj) {
    if (!traj.force.has_value()) {
        throw std::invalid_argument("admissibility_check: trajectory has no realized force records");
    }
    const ForcePath& force = *traj.force;
    const NormalizedSystem ns = normalize_mass(sys);
    const MatrixXd nn = ns.Ntil * ns.Ntil.transpose();
    const MatrixXd gm = gamma_matrix(sys, eps);

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.steps(); ++k) {
        const VectorXd x = traj.state(k);
        const double margin = uc.gamma + x.dot(uc.Delta.mat() * x) -
                              (nn * force.sigmas[k]).trace() -
                              2.0 * x.dot(gm * force.alphas[k]);
        if (margin < worst) worst = margin;
    }
    return AdmissibilityReport{worst >= -1e-9, worst};
}

double dissipation_audit(const LshSystem& sys, double eps, const Trajectory& traj) {
    if (!traj.force.has_value()) {
        throw std::invalid_argument("dissipation_audit: trajectory has no force path");
    }
    const ForcePath& force = *traj.force;
    const NormalizedSystem ns = normalize_mass(sys);
    const MatrixXd nn = ns.Ntil * ns.Ntil.transpose();
    const MatrixXd gm = gamma_matrix(sys, eps);
    const MatrixXd psi_flow = dissipation_flow_matrix(sys, eps).mat();

    KahanSum flow;
    for (std::size_t k = 0; k < traj.steps(); ++k) {
        const double dt = force.dt(k);
        const VectorXd x = traj.state(k);
        const VectorXd zeta = force.betas[k] * force.wiener[k];
        const double drift_part =
            0.5 * (-x.dot(psi_flow * x) + 2.0 * x.dot(gm * force.alphas[k])) * dt;
        const double ito_part = 0.5 * zeta.dot(nn * zeta);
        const double martingale = x.dot(gm * zeta);
        flow.add(drift_part + ito_part + martingale);
    }
    return deformed_hamiltonian(sys, eps, traj.state(traj.steps())) -
           deformed_hamiltonian(sys, eps, traj.state(0)) - flow.sum;
}

SupermartingaleReport supermartingale_check(const LshSystem& sys, double eps,
                                            const UncertaintyClass& uc, const Ensemble& ensemble) {
    const std::size_t paths = ensemble.paths.size();
    if (paths == 0) throw std::invalid_argument("supermartingale_check: empty ensemble");
    for (const Trajectory& traj : ensemble.paths) {
        if (!admissibility_check(sys, eps, uc, traj).pass) {
            throw HypothesisNotMet("supermartingale_check: ensemble contains inadmissible paths");
        }
    }
    const RobustBound rb = robust_bound(sys, eps, uc, 0.0);
    const double floor = uc.gamma / (2.0 * rb.mu);

    const std::size_t steps = ensemble.times.size() - 1;
    const MatrixXd q = certificate(sys, eps).Q.mat();

    SupermartingaleReport rep{true, 0.0, paths < 2};
    for (std::size_t k = 0; k < steps; ++k) {
        KahanSum sum, sumsq;
        for (const Trajectory& traj : ensemble.paths) {
            const VectorXd x0 = traj.state(k);
            const VectorXd x1 = traj.state(k + 1);
            const double z0 =
                std::exp(rb.mu * ensemble.times[k]) * (0.5 * x0.dot(q * x0) - floor);
            const double z1 =
                std::exp(rb.mu * ensemble.times[k + 1]) * (0.5 * x1.dot(q * x1) - floor);
            const double d = z1 - z0;
            sum.add(d);
            sumsq.add(d * d);
        }
        const double mean = sum.sum / static_cast<double>(paths);
        if (rep.low_power) {
            if (mean > 1e-9) {
                rep.max_uptick = std::max(rep.max_uptick, mean);
            }
            continue;
        }
        const double var =
            std::max(0.0, (sumsq.sum - static_cast<double>(paths) * mean * mean) /
                              static_cast<double>(paths - 1));
        const double se = std::sqrt(var / static_cast<double>(paths));
        if (mean > 3.0 * se + 1e-9) rep.nonincreasing = false;
        if (se > 0.0 && mean / se > rep.max_uptick) rep.max_uptick = mean / se;
    }
    return rep;
}

EnvelopeStats monte_carlo_envelope(const LshSystem& sys, double eps, const UncertaintyClass& uc,
                                   const ForceModel& model, const InitialCondition& init,
                                   const std::vector<double>& grid, std::uint64_t seed,
                                   std::size_t paths) {
    if (paths == 0) throw std::invalid_argument("monte_carlo_envelope: paths must be >= 1");
    const RobustBound rb = robust_bound(sys, eps, uc, 0.0);
    const double floor = uc.gamma / (2.0 * rb.mu);
    const MatrixXd q = certificate(sys, eps).Q.mat();
    const std::size_t points = grid.size();

    struct Slot {
        VectorXd ups;
        VectorXd zdiff;
        double terminal_sq = 0.0;
        double margin = 0.0;
    };

    std::vector<KahanSum> ups_sum(points), ups_sq(points), zd_sum(points - 1), zd_sq(points - 1);
    KahanSum term_sum, term_sq;
    double worst = std::numeric_limits<double>::infinity();

    const PathRunner runner(sys, model, init, grid, seed, Scheme::euler_maruyama);
    const std::size_t block = 512;
    std::vector<Slot> slots(std::min(block, paths));
    for (std::size_t base = 0; base < paths; base += block) {
        const std::size_t count = std::min(block, paths - base);
        parallel_for(count, [&](std::size_t i) {
            const std::size_t p = base + i;
            const Trajectory traj = runner(p);
            Slot& slot = slots[i];
            slot.ups.resize(static_cast<Eigen::Index>(points));
            slot.zdiff.resize(static_cast<Eigen::Index>(points - 1));
            for (std::size_t k = 0; k < points; ++k) {
                const VectorXd x = traj.state(k);
                slot.ups(static_cast<Eigen::Index>(k)) = 0.5 * x.dot(q * x);
            }
            for (std::size_t k = 0; k + 1 < points; ++k) {
                const double z0 = std::exp(rb.mu * grid[k]) *
                                  (slot.ups(static_cast<Eigen::Index>(k)) - floor);
                const double z1 = std::exp(rb.mu * grid[k + 1]) *
                                  (slot.ups(static_cast<Eigen::Index>(k + 1)) - floor);
                slot.zdiff(static_cast<Eigen::Index>(k)) = z1 - z0;
            }
            slot.terminal_sq = traj.state(points - 1).squaredNorm();
            slot.margin = admissibility_check(sys, eps, uc, traj).worst_margin;
        });
        for (std::size_t i = 0; i < count; ++i) {
            const Slot& slot = slots[i];
            for (std::size_t k = 0; k < points; ++k) {
                const double u = slot.ups(static_cast<Eigen::Index>(k));
                ups_sum[k].add(u);
                ups_sq[k].add(u * u);
            }
            for (std::size_t k = 0; k + 1 < points; ++k) {
                const double d = slot.zdiff(static_cast<Eigen::Index>(k));
                zd_sum[k].add(d);
                zd_sq[k].add(d * d);
            }
            term_sum.add(slot.terminal_sq);
            term_sq.add(slot.terminal_sq * slot.terminal_sq);
            if (slot.margin < worst) worst = slot.margin;
        }
    }

    const auto np = static_cast<double>(paths);
    auto finalize = [np](const KahanSum& s, const KahanSum& sq, double& mean, double& se) {
        mean = s.sum / np;
        const double var = np > 1.0 ? std::max(0.0, (sq.sum - np * mean * mean) / (np - 1.0)) : 0.0;
        se = std::sqrt(var / np);
    };

    EnvelopeStats stats;
    stats.times = grid;
    stats.paths = paths;
    stats.worst_margin = worst;
    stats.mean_ups.resize(points);
    stats.se_ups.resize(points);
    stats.zhat.resize(points);
    for (std::size_t k = 0; k < points; ++k) {
        finalize(ups_sum[k], ups_sq[k], stats.mean_ups[k], stats.se_ups[k]);
        stats.zhat[k] = std::exp(rb.mu * grid[k]) * (stats.mean_ups[k] - floor);
    }
    stats.zdiff.resize(points - 1);
    stats.zdiff_se.resize(points - 1);
    for (std::size_t k = 0; k + 1 < points; ++k) {
        finalize(zd_sum[k], zd_sq[k], stats.zdiff[k], stats.zdiff_se[k]);
    }
    finalize(term_sum, term_sq, stats.mean_terminal_sq, stats.se_terminal_sq);
    return stats;
}

}  // namespace lsh
