#include "lsh/dispatch.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "lsh/feedback.hpp"
#include "lsh/filter.hpp"
#include "lsh/parallel.hpp"
#include "lsh/robust.hpp"

namespace lsh {

namespace {

std::uint64_t require_seed(const ExperimentConfig& cfg, const std::string& command) {
    if (!cfg.simulation.seed.has_value()) {
        throw ConfigError("seed required for '" + command + "'");
    }
    return *cfg.simulation.seed;
}

Scheme resolve_scheme(const ExperimentConfig& cfg) {
    if (cfg.simulation.scheme.has_value()) return *cfg.simulation.scheme;
    return cfg.force.kind == "standard_wiener" ? Scheme::exact_linear : Scheme::euler_maruyama;
}

double resolve_eps(const ExperimentConfig& cfg, const LshSystem& sys,
                   std::vector<std::string>& diagnostics) {
    if (cfg.robust.eps.has_value()) return *cfg.robust.eps;
    // "auto": grid search over the admissible window for the smallest bound.
    const EpsWindow window = eps_bounds(sys);
    const UncertaintyClass uc = cfg.robust.build(2 * sys.n);
    double best_eps = 0.5 * window.min();
    double best_bound = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 100; ++i) {
        const double eps = window.min() * static_cast<double>(i) / 101.0;
        try {
            const RobustBound rb = robust_bound(sys, eps, uc, cfg.robust.second_moment_x0);
            if (rb.asymptotic_bound < best_bound) {
                best_bound = rb.asymptotic_bound;
                best_eps = eps;
            }
        } catch (const HypothesisNotMet&) {
        }
    }
    if (!std::isfinite(best_bound)) {
        throw HypothesisNotMet("robust: no admissible eps in the window for this Delta");
    }
    diagnostics.push_back("eps auto-selected by 100-point grid search");
    return best_eps;
}

json sym_to_json(const SymMatrix& s) { return matrix_to_json(s.mat()); }

json complex_matrix_to_json(const MatrixXcd& m) {
    return json{{"re", matrix_to_json(m.real())}, {"im", matrix_to_json(m.imag())}};
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << body;
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- per-command handlers -------------------------------------------------

json cmd_stability(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics) {
    const LshSystem& sys = cfg.selected();
    const EpsWindow window = eps_bounds(sys);
    const double eps = cfg.robust.eps.value_or(0.5 * window.min());
    const LyapunovCertificate cert = certificate(sys, eps);
    const HurwitzReport hr = analyze_hurwitz(realize(sys).A);
    if (hr.marginal) diagnostics.emplace_back("Lyapunov operator singular: marginal spectrum");

    return json{{"eps_window", {{"eps1_bound", window.eps1_bound}, {"eps2_bound", window.eps2_bound}}},
                {"eps", eps},
                {"Q", sym_to_json(cert.Q)},
                {"Psi", sym_to_json(cert.Psi)},
                {"valid", cert.valid},
                {"hurwitz", hr.hurwitz},
                {"marginal", hr.marginal}};
}

json cmd_invariant(const ExperimentConfig& cfg, std::vector<std::string>&) {
    const LshSystem& sys = cfg.selected();
    const InvariantMeasure meas = invariant_covariance(sys);
    const VirialReport virial = virial_check(sys, meas);
    const SylvesterResiduals res = sylvester_residuals(sys, meas);
    const ControllabilityBound ctrl = controllability_bound(sys);

    return json{{"Pi", sym_to_json(meas.Pi)},
                {"Pi11", matrix_to_json(meas.Pi11)},
                {"Pi12", matrix_to_json(meas.Pi12)},
                {"Pi22", matrix_to_json(meas.Pi22)},
                {"Xi", matrix_to_json(meas.Xi)},
                {"antisymmetry_defect", meas.antisymmetry_defect},
                {"virial",
                 {{"mean_kinetic", virial.mean_kinetic},
                  {"virial_rhs", virial.virial_rhs},
                  {"trace_pi12", virial.trace_pi12}}},
                {"sylvester_residuals", {res.r11, res.r12, res.r22}},
                {"controllability",
                 {{"min_eig", ctrl.min_eig},
                  {"full_rank_coupling", ctrl.full_rank_coupling},
                  {"bound_matrix", sym_to_json(ctrl.bound_matrix)}}}};
}

std::string trajectory_csv(const LshSystem& sys, const Trajectory& traj) {
    std::string body = "t";
    for (Eigen::Index i = 0; i < sys.n; ++i) body += ",q" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < sys.n; ++i) body += ",p" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < sys.m; ++i) body += ",y" + std::to_string(i + 1);
    const bool with_force = traj.force.has_value();
    if (with_force) {
        for (Eigen::Index i = 0; i < sys.m; ++i) body += ",dW" + std::to_string(i + 1);
    }
    body += "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        body += csv_number(traj.times[k]);
        for (Eigen::Index i = 0; i < 2 * sys.n; ++i) {
            body += "," + csv_number(traj.states(i, static_cast<Eigen::Index>(k)));
        }
        for (Eigen::Index i = 0; i < sys.m; ++i) {
            body += "," + csv_number(traj.outputs(i, static_cast<Eigen::Index>(k)));
        }
        if (with_force) {
            for (Eigen::Index i = 0; i < sys.m; ++i) {
                // increments are per step; the final row repeats no increment
                body += "," + csv_number(k < traj.force->steps() ? traj.force->increments[k](i) : 0.0);
            }
        }
        body += "\n";
    }
    return body;
}

json cmd_simulate(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics) {
    const LshSystem& sys = cfg.selected();
    const std::uint64_t seed = require_seed(cfg, "simulate");
    const Scheme scheme = resolve_scheme(cfg);
    const ForceModel model = cfg.force.build(sys.m, 2 * sys.n);
    const InitialCondition init = cfg.simulation.x0.build(sys);
    const std::vector<double> grid = uniform_grid(cfg.simulation.T, cfg.simulation.dt);
    const std::size_t paths = cfg.simulation.paths;
    const std::size_t points = grid.size();
    const Eigen::Index dim = 2 * sys.n;

    std::vector<std::vector<KahanSum>> sum(points, std::vector<KahanSum>(dim));
    std::vector<std::vector<KahanSum>> sumsq(points, std::vector<KahanSum>(dim));
    std::vector<KahanSum> h_sum(points);

    const PathRunner runner(sys, model, init, grid, seed, scheme);
    const std::size_t block = 256;
    std::vector<Trajectory> slots(std::min(block, paths));
    for (std::size_t base = 0; base < paths; base += block) {
        const std::size_t count = std::min(block, paths - base);
        parallel_for(count, [&](std::size_t i) { slots[i] = runner(base + i); });
        for (std::size_t i = 0; i < count; ++i) {
            const Trajectory& traj = slots[i];
            for (std::size_t k = 0; k < points; ++k) {
                for (Eigen::Index c = 0; c < dim; ++c) {
                    const double v = traj.states(c, static_cast<Eigen::Index>(k));
                    sum[k][static_cast<std::size_t>(c)].add(v);
                    sumsq[k][static_cast<std::size_t>(c)].add(v * v);
                }
                h_sum[k].add(hamiltonian(sys, traj.state(k)));
            }
        }
    }

    const auto np = static_cast<double>(paths);
    json mean_state = json::array(), var_state = json::array(), mean_h = json::array();
    json times = json::array();
    for (std::size_t k = 0; k < points; ++k) {
        times.push_back(grid[k]);
        json mrow = json::array(), vrow = json::array();
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double m = sum[k][static_cast<std::size_t>(c)].sum / np;
            const double sq = sumsq[k][static_cast<std::size_t>(c)].sum / np;
            mrow.push_back(m);
            vrow.push_back(np > 1 ? (sq - m * m) * np / (np - 1.0) : 0.0);
        }
        mean_state.push_back(std::move(mrow));
        var_state.push_back(std::move(vrow));
        mean_h.push_back(h_sum[k].sum / np);
    }

    if (cfg.output.format == "csv" || !cfg.output.csv_path.empty()) {
        rng::PathStream stream(seed, 0);
        const Trajectory first = simulate(sys, model, init.draw(stream), grid, seed, scheme, 0);
        const std::string path = !cfg.output.csv_path.empty()
                                     ? cfg.output.csv_path
                                     : (cfg.output.path == "-" ? "trajectory.csv" : cfg.output.path);
        write_file(path, trajectory_csv(sys, first));
        diagnostics.push_back("trajectory CSV written to " + path);
    }

    return json{{"scheme", scheme == Scheme::exact_linear ? "exact_linear" : "euler_maruyama"},
                {"paths", paths},
                {"times", std::move(times)},
                {"mean_state", std::move(mean_state)},
                {"var_state", std::move(var_state)},
                {"mean_hamiltonian", std::move(mean_h)}};
}

json cmd_filter(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics) {
    const LshSystem& sys = cfg.selected();
    const std::uint64_t seed = require_seed(cfg, "filter");
    const InvariantMeasure meas = invariant_covariance(sys);
    const FilterSetup setup = filter_setup(sys, meas);

    double horizon = cfg.simulation.T;
    for (double t : cfg.filter.probe_times) horizon = std::max(horizon, t);
    const std::vector<double> grid = uniform_grid(horizon, cfg.simulation.dt);

    std::vector<std::size_t> probe_idx;
    for (double t : cfg.filter.probe_times) {
        const auto k = static_cast<std::size_t>(std::llround(t / cfg.simulation.dt));
        if (k >= grid.size() || std::abs(grid[k] - t) > 1e-9 * (1.0 + std::abs(t))) {
            throw ConfigError("filter.probe_times: " + std::to_string(t) + " is not on the grid");
        }
        probe_idx.push_back(k);
    }

    const FilterGrid gains = filter_gains(setup, sys, grid);
    const ForceModel model = ForceModel::standard_wiener(sys.m);
    const InitialCondition init = InitialCondition::stationary(sys);
    const std::size_t paths = cfg.simulation.paths;
    const Eigen::Index n = sys.n;

    std::vector<MatrixXd> err_sum(probe_idx.size(), MatrixXd::Zero(n, n));
    std::vector<MatrixXd> err_sumsq(probe_idx.size(), MatrixXd::Zero(n, n));

    std::vector<std::vector<MatrixXd>> slots(paths);
    for_each_path(sys, model, init, grid, seed, paths, Scheme::exact_linear,
                  [&](std::size_t p, const Trajectory& traj) {
                      const FilterRun run = run_filter(sys, traj, setup, &gains);
                      std::vector<MatrixXd> outer;
                      outer.reserve(probe_idx.size());
                      for (const std::size_t k : probe_idx) {
                          const VectorXd e = run.error.col(static_cast<Eigen::Index>(k));
                          outer.push_back(e * e.transpose());
                      }
                      slots[p] = std::move(outer);
                  });
    for (std::size_t p = 0; p < paths; ++p) {
        for (std::size_t t = 0; t < probe_idx.size(); ++t) {
            err_sum[t] += slots[p][t];
            err_sumsq[t] += slots[p][t].cwiseProduct(slots[p][t]);
        }
    }

    const auto np = static_cast<double>(paths);
    json table = json::array();
    std::string csv = "t";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::string suffix = std::to_string(i + 1) + std::to_string(j + 1);
            csv += ",P" + suffix;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::string suffix = std::to_string(i + 1) + std::to_string(j + 1);
            csv += ",emp" + suffix + ",se" + suffix;
        }
    }
    csv += "\n";

    for (std::size_t t = 0; t < probe_idx.size(); ++t) {
        const double time = grid[probe_idx[t]];
        const SymMatrix p_closed = covariance_closed_form(setup, sys.K, time);
        const MatrixXd emp = err_sum[t] / np;
        MatrixXd se(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double var = np > 1 ? std::max(0.0, (err_sumsq[t](i, j) / np - emp(i, j) * emp(i, j)) *
                                                              np / (np - 1.0))
                                          : 0.0;
                se(i, j) = std::sqrt(var / np);
            }
        }
        table.push_back(json{{"t", time},
                             {"P_closed", sym_to_json(p_closed)},
                             {"cov_empirical", matrix_to_json(emp)},
                             {"se", matrix_to_json(se)}});
        csv += csv_number(time);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) csv += "," + csv_number(p_closed(i, j));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                csv += "," + csv_number(emp(i, j)) + "," + csv_number(se(i, j));
            }
        }
        csv += "\n";
    }

    if (!cfg.output.csv_path.empty()) {
        write_file(cfg.output.csv_path, csv);
        diagnostics.push_back("filter covariance table written to " + cfg.output.csv_path);
    }

    return json{{"paths", paths},
                {"P0", sym_to_json(setup.P0)},
                {"qhat0_gain", matrix_to_json(setup.qhat0_gain)},
                {"D", sym_to_json(setup.D)},
                {"table", std::move(table)}};
}

json cmd_robust(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics) {
    const LshSystem& sys = cfg.selected();
    const std::uint64_t seed = require_seed(cfg, "robust");
    const UncertaintyClass uc = cfg.robust.build(2 * sys.n);
    const double eps = resolve_eps(cfg, sys, diagnostics);
    const RobustBound rb = robust_bound(sys, eps, uc, cfg.robust.second_moment_x0);

    const ForceModel model = cfg.force.build(sys.m, 2 * sys.n);
    const InitialCondition init = cfg.simulation.x0.build(sys);
    const std::vector<double> grid = uniform_grid(cfg.simulation.T, cfg.simulation.dt);
    const EnvelopeStats stats = monte_carlo_envelope(sys, eps, uc, model, init, grid, seed,
                                                     cfg.simulation.paths);

    if (stats.worst_margin < -1e-9) {
        diagnostics.push_back("warning: sampled force violates the uncertainty class");
    }
    if (stats.paths < 2) diagnostics.emplace_back("low-power supermartingale test (single path)");

    bool nonincreasing = true;
    double max_uptick = 0.0;
    for (std::size_t k = 0; k + 1 < stats.times.size(); ++k) {
        const double se = stats.zdiff_se[k];
        if (stats.zdiff[k] > 3.0 * se + 1e-9) nonincreasing = false;
        if (se > 0.0) max_uptick = std::max(max_uptick, stats.zdiff[k] / se);
    }

    double envelope_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
        envelope_excess = std::max(envelope_excess, stats.mean_ups[k] - rb.transient(stats.times[k]) -
                                                        3.0 * stats.se_ups[k]);
    }

    if (!cfg.output.csv_path.empty()) {
        std::string csv = "t,envelope,mean_ups,se_ups,zhat\n";
        for (std::size_t k = 0; k < stats.times.size(); ++k) {
            csv += csv_number(stats.times[k]) + "," + csv_number(rb.transient(stats.times[k])) + "," +
                   csv_number(stats.mean_ups[k]) + "," + csv_number(stats.se_ups[k]) + "," +
                   csv_number(stats.zhat[k]) + "\n";
        }
        write_file(cfg.output.csv_path, csv);
        diagnostics.push_back("transient envelope CSV written to " + cfg.output.csv_path);
    }

    return json{{"eps", rb.eps},
                {"mu", rb.mu},
                {"lambda_min_Q", rb.lambda_min_Q},
                {"asymptotic_bound", rb.asymptotic_bound},
                {"ups0_bound", rb.ups0_bound},
                {"monte_carlo",
                 {{"paths", stats.paths},
                  {"terminal_mean_sq", stats.mean_terminal_sq},
                  {"terminal_se", stats.se_terminal_sq},
                  {"worst_admissibility_margin", stats.worst_margin},
                  {"envelope_excess_over_3se", envelope_excess},
                  {"supermartingale_nonincreasing", nonincreasing},
                  {"supermartingale_max_uptick_se", max_uptick}}}};
}

json cmd_compose(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics,
                 int& exit_code) {
    if (cfg.pair.size() != 2) {
        throw ConfigError("compose: config must name two systems in 'pair'");
    }
    const LshSystem& s1 = cfg.named(cfg.pair[0]);
    const LshSystem& s2 = cfg.named(cfg.pair[1]);

    std::optional<UncertaintyClass> uc;
    try {
        uc = cfg.robust.build(4 * s1.n);
    } catch (const std::exception&) {
        diagnostics.emplace_back("robust section not applicable to the closed loop; skipped");
    }
    const ClosedLoopReport rep = closed_loop_stability(s1, s2, uc, cfg.robust.second_moment_x0);

    json out{{"loop", system_to_json(rep.loop.loop)}, {"applicable", rep.applicable}};
    if (rep.small_gain.has_value()) {
        out["small_gain"] = json{{"norm", rep.small_gain->norm},
                                 {"definite", rep.small_gain->definite},
                                 {"sufficient_gain_product", rep.small_gain->sufficient_gain_product}};
    }
    if (!rep.failures.empty()) out["failures"] = rep.failures;
    if (rep.applicable) {
        out["eps_window"] = json{{"eps1_bound", rep.window->eps1_bound},
                                 {"eps2_bound", rep.window->eps2_bound}};
        out["eps"] = rep.cert->eps;
        out["certificate_valid"] = rep.cert->valid;
        out["hurwitz"] = rep.hurwitz;
        out["Pi"] = sym_to_json(rep.invariant->Pi);
        if (rep.robust.has_value()) {
            out["robust"] = json{{"mu", rep.robust->mu},
                                 {"lambda_min_Q", rep.robust->lambda_min_Q},
                                 {"asymptotic_bound", rep.robust->asymptotic_bound}};
        }
    }
    if (!rep.applicable) {
        diagnostics.emplace_back("sufficient conditions not met; no stability claim made");
        exit_code = 2;
    }
    return out;
}

json cmd_transfer(const ExperimentConfig& cfg, std::vector<std::string>& diagnostics) {
    const LshSystem& sys = cfg.selected();
    double condition = 0.0;
    const MatrixXd gain = static_gain(sys, &condition);
    if (condition > 1e12) {
        diagnostics.push_back("warning: stiffness condition number " + std::to_string(condition));
    }

    json points = json::array();
    for (const auto& s : cfg.transfer.points) {
        points.push_back(json{{"s", {s.real(), s.imag()}},
                              {"Phi", complex_matrix_to_json(transfer(sys, s))},
                              {"char_poly",
                               {char_poly_eval(sys, s).real(), char_poly_eval(sys, s).imag()}}});
    }
    return json{{"static_gain", matrix_to_json(gain)},
                {"stiffness_condition", condition},
                {"points", std::move(points)}};
}

}  // namespace

json ResultEnvelope::to_json() const {
    json j{{"schema_version", schema_version},
           {"command", command},
           {"config_digest", config_digest},
           {"outputs", outputs},
           {"diagnostics", diagnostics},
           {"wall_time_s", wall_time_s}};
    if (seed.has_value()) j["seed"] = *seed;
    return j;
}

bool is_known_command(const std::string& command) {
    return command == "stability" || command == "invariant" || command == "simulate" ||
           command == "filter" || command == "robust" || command == "compose" ||
           command == "transfer";
}

ResultEnvelope dispatch(const std::string& command, const ExperimentConfig& cfg) {
    if (!is_known_command(command)) {
        throw ConfigError("unknown command '" + command + "'");
    }
    ResultEnvelope env;
    env.schema_version = cfg.schema_version;
    env.command = command;
    env.config_digest = lsh::config_digest(cfg.canonical);
    env.seed = cfg.simulation.seed;

    const auto start = std::chrono::steady_clock::now();
    if (command == "stability") {
        env.outputs = cmd_stability(cfg, env.diagnostics);
    } else if (command == "invariant") {
        env.outputs = cmd_invariant(cfg, env.diagnostics);
    } else if (command == "simulate") {
        env.outputs = cmd_simulate(cfg, env.diagnostics);
    } else if (command == "filter") {
        env.outputs = cmd_filter(cfg, env.diagnostics);
    } else if (command == "robust") {
        env.outputs = cmd_robust(cfg, env.diagnostics);
    } else if (command == "compose") {
        env.outputs = cmd_compose(cfg, env.diagnostics, env.exit_code);
    } else if (command == "transfer") {
        env.outputs = cmd_transfer(cfg, env.diagnostics);
    }
    env.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return env;
}

}  // namespace lsh
