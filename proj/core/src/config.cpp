#include "lsh/config.hpp"

#include <fstream>

namespace lsh {

namespace {

double require_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field + ": expected a number");
    return j.get<double>();
}

}  // namespace

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const json& j, const std::string& field) {
    if (j.is_number()) {
        return MatrixXd::Constant(1, 1, j.get<double>());
    }
    if (!j.is_array() || j.empty()) throw ConfigError(field + ": expected a nested array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ConfigError(field + ": expected a nested array");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(field + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = require_number(row[static_cast<std::size_t>(c)], field);
        }
    }
    return m;
}

json vector_to_json(const VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

VectorXd vector_from_json(const json& j, const std::string& field) {
    if (j.is_number()) return VectorXd::Constant(1, j.get<double>());
    if (!j.is_array()) throw ConfigError(field + ": expected an array");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = require_number(j[static_cast<std::size_t>(i)], field);
    }
    return v;
}

json system_to_json(const LshSystem& sys) {
    return json{{"K", matrix_to_json(sys.K.mat())},
                {"M", matrix_to_json(sys.M.mat())},
                {"F", matrix_to_json(sys.F.mat())},
                {"N", matrix_to_json(sys.N)}};
}

LshSystem system_from_json(const json& j, const std::string& name) {
    for (const char* key : {"K", "M", "F", "N"}) {
        if (!j.contains(key)) throw ConfigError("system '" + name + "': missing matrix " + key);
    }
    try {
        return LshSystem(SymMatrix(matrix_from_json(j["K"], name + ".K")),
                         SymMatrix(matrix_from_json(j["M"], name + ".M")),
                         SymMatrix(matrix_from_json(j["F"], name + ".F")),
                         matrix_from_json(j["N"], name + ".N"));
    } catch (const NotPositiveDefinite&) {
        throw ConfigError("system '" + name + "': M not positive definite");
    } catch (const std::invalid_argument& e) {
        throw ConfigError("system '" + name + "': " + e.what());
    }
}

ForceModel ForceConfig::build(Eigen::Index m, Eigen::Index state_dim) const {
    if (kind == "standard_wiener") return ForceModel::standard_wiener(m);
    if (kind == "affine_uncertain") {
        VectorXd a0 = alpha0.size() > 0 ? alpha0 : VectorXd::Zero(m);
        MatrixXd ax = alpha_x.size() > 0 ? alpha_x : MatrixXd::Zero(m, state_dim);
        MatrixXd b0 = beta0.size() > 0 ? beta0 : MatrixXd::Identity(m, m);
        return ForceModel::affine_uncertain(std::move(a0), std::move(ax), std::move(b0));
    }
    if (kind == "bounded_drift") {
        MatrixXd gain = drift_gain.size() > 0 ? drift_gain : MatrixXd::Zero(m, state_dim);
        return ForceModel::bounded_drift(a, sigma_max, std::move(gain));
    }
    throw ConfigError("force.kind: unknown kind '" + kind + "'");
}

InitialCondition InitSpec::build(const LshSystem& sys) const {
    if (kind == "zero") return InitialCondition::zero(2 * sys.n);
    if (kind == "point") {
        if (value.size() != 2 * sys.n) throw ConfigError("x0.value: expected dimension 2n");
        return InitialCondition::point(value);
    }
    if (kind == "stationary") return InitialCondition::stationary(sys);
    if (kind == "gaussian") {
        if (mean.size() != 2 * sys.n || cov.rows() != 2 * sys.n) {
            throw ConfigError("x0.gaussian: mean/cov must have dimension 2n");
        }
        return InitialCondition::gaussian(mean, SymMatrix(cov));
    }
    throw ConfigError("x0.kind: unknown kind '" + kind + "'");
}

UncertaintyClass RobustConfig::build(Eigen::Index state_dim) const {
    SymMatrix delta = SymMatrix::zero(state_dim);
    if (delta_matrix.has_value()) {
        if (delta_matrix->rows() != state_dim) throw ConfigError("robust.Delta: expected 2n x 2n");
        delta = SymMatrix(*delta_matrix);
    } else if (delta_scalar.has_value()) {
        delta = SymMatrix(*delta_scalar * MatrixXd::Identity(state_dim, state_dim));
    }
    return UncertaintyClass(gamma, std::move(delta));
}

const LshSystem& ExperimentConfig::selected() const { return named(system); }

const LshSystem& ExperimentConfig::named(const std::string& name) const {
    const auto it = systems.find(name);
    if (it == systems.end()) throw ConfigError("unknown system '" + name + "'");
    return it->second;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.canonical = j;
    cfg.schema_version = j.value("schema_version", 1);

    if (!j.contains("systems") || !j["systems"].is_object() || j["systems"].empty()) {
        throw ConfigError("config: 'systems' must be a non-empty object");
    }
    for (const auto& [name, body] : j["systems"].items()) {
        cfg.systems.emplace(name, system_from_json(body, name));
    }
    cfg.system = j.value("system", cfg.systems.begin()->first);
    if (cfg.systems.find(cfg.system) == cfg.systems.end()) {
        throw ConfigError("config: selected system '" + cfg.system + "' not defined");
    }
    if (j.contains("pair")) {
        for (const auto& name : j["pair"]) cfg.pair.push_back(name.get<std::string>());
        if (cfg.pair.size() != 2) throw ConfigError("config: 'pair' must name two systems");
        for (const auto& name : cfg.pair) {
            if (cfg.systems.find(name) == cfg.systems.end()) {
                throw ConfigError("config: pair system '" + name + "' not defined");
            }
        }
    }

    if (j.contains("force")) {
        const json& f = j["force"];
        cfg.force.kind = f.value("kind", std::string("standard_wiener"));
        if (f.contains("alpha0")) cfg.force.alpha0 = vector_from_json(f["alpha0"], "force.alpha0");
        if (f.contains("alpha_x")) {
            cfg.force.alpha_x = matrix_from_json(f["alpha_x"], "force.alpha_x");
        }
        if (f.contains("beta")) cfg.force.beta0 = matrix_from_json(f["beta"], "force.beta");
        cfg.force.a = f.value("a", 0.0);
        cfg.force.sigma_max = f.value("sigma_max", 1.0);
        if (f.contains("drift_gain")) {
            cfg.force.drift_gain = matrix_from_json(f["drift_gain"], "force.drift_gain");
        }
    }

    if (j.contains("simulation")) {
        const json& s = j["simulation"];
        cfg.simulation.T = s.value("T", 1.0);
        cfg.simulation.dt = s.value("dt", 1e-3);
        cfg.simulation.paths = s.value("paths", std::size_t{10000});
        if (s.contains("seed")) cfg.simulation.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("scheme")) {
            const std::string name = s["scheme"].get<std::string>();
            if (name == "euler_maruyama") {
                cfg.simulation.scheme = Scheme::euler_maruyama;
            } else if (name == "exact_linear") {
                cfg.simulation.scheme = Scheme::exact_linear;
            } else {
                throw ConfigError("simulation.scheme: unknown scheme '" + name + "'");
            }
        }
        if (s.contains("x0")) {
            const json& x0 = s["x0"];
            cfg.simulation.x0.kind = x0.value("kind", std::string("stationary"));
            if (x0.contains("value")) {
                cfg.simulation.x0.value = vector_from_json(x0["value"], "x0.value");
            }
            if (x0.contains("mean")) cfg.simulation.x0.mean = vector_from_json(x0["mean"], "x0.mean");
            if (x0.contains("cov")) cfg.simulation.x0.cov = matrix_from_json(x0["cov"], "x0.cov");
        }
        if (!(cfg.simulation.T > 0.0) || !(cfg.simulation.dt > 0.0)) {
            throw ConfigError("simulation: T and dt must be > 0");
        }
    }

    if (j.contains("robust")) {
        const json& r = j["robust"];
        if (r.contains("eps") && !(r["eps"].is_string() && r["eps"] == "auto")) {
            cfg.robust.eps = require_number(r["eps"], "robust.eps");
        }
        cfg.robust.gamma = r.value("gamma", 0.0);
        if (r.contains("Delta")) {
            if (r["Delta"].is_number()) {
                cfg.robust.delta_scalar = r["Delta"].get<double>();
            } else {
                cfg.robust.delta_matrix = matrix_from_json(r["Delta"], "robust.Delta");
            }
        }
        cfg.robust.second_moment_x0 = r.value("second_moment_x0", 0.0);
    }

    if (j.contains("filter") && j["filter"].contains("probe_times")) {
        cfg.filter.probe_times.clear();
        for (const auto& t : j["filter"]["probe_times"]) {
            cfg.filter.probe_times.push_back(require_number(t, "filter.probe_times"));
        }
        if (cfg.filter.probe_times.empty()) throw ConfigError("filter.probe_times: empty");
    }

    if (j.contains("transfer") && j["transfer"].contains("points")) {
        for (const auto& pt : j["transfer"]["points"]) {
            if (pt.is_number()) {
                cfg.transfer.points.emplace_back(pt.get<double>(), 0.0);
            } else if (pt.is_array() && pt.size() == 2) {
                cfg.transfer.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
            } else {
                throw ConfigError("transfer.points: entries must be numbers or [re, im] pairs");
            }
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        cfg.output.format = o.value("format", std::string("json"));
        cfg.output.path = o.value("path", std::string("-"));
        cfg.output.csv_path = o.value("csv_path", std::string());
        if (cfg.output.format != "json" && cfg.output.format != "csv") {
            throw ConfigError("output.format: expected 'json' or 'csv'");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_config(j);
}

std::string config_digest(const json& canonical) {
    const std::string dump = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace lsh
