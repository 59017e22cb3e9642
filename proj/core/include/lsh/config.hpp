#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsh/force.hpp"
#include "lsh/robust.hpp"
#include "lsh/sim.hpp"

namespace lsh {

using json = nlohmann::json;

struct ForceConfig {
    std::string kind = "standard_wiener";
    VectorXd alpha0;
    MatrixXd alpha_x;
    MatrixXd beta0;
    double a = 0.0;
    double sigma_max = 1.0;
    MatrixXd drift_gain;

    ForceModel build(Eigen::Index m, Eigen::Index state_dim) const;
};

struct InitSpec {
    std::string kind = "stationary";  // zero | point | stationary | gaussian
    VectorXd value;
    VectorXd mean;
    MatrixXd cov;

    InitialCondition build(const LshSystem& sys) const;
};

struct SimulationConfig {
    double T = 1.0;
    double dt = 1e-3;
    std::size_t paths = 10000;
    std::optional<std::uint64_t> seed;
    std::optional<Scheme> scheme;  // nullopt => exact_linear for standard Wiener
    InitSpec x0;
};

struct RobustConfig {
    std::optional<double> eps;  // nullopt => "auto" grid search
    double gamma = 0.0;
    std::optional<double> delta_scalar;  // Delta = s * I
    std::optional<MatrixXd> delta_matrix;
    double second_moment_x0 = 0.0;

    UncertaintyClass build(Eigen::Index state_dim) const;
};

struct FilterConfig {
    std::vector<double> probe_times = {0.5, 1.0, 2.0};
};

struct TransferConfig {
    std::vector<std::complex<double>> points;
};

struct OutputConfig {
    std::string format = "json";  // json | csv
    std::string path = "-";
    std::string csv_path;  // side table destination, empty => not written
};

struct ExperimentConfig {
    int schema_version = 1;
    std::map<std::string, LshSystem> systems;
    std::string system;              // selected system for single-system commands
    std::vector<std::string> pair;   // two names for `compose`
    ForceConfig force;
    SimulationConfig simulation;
    RobustConfig robust;
    FilterConfig filter;
    TransferConfig transfer;
    OutputConfig output;
    json canonical;  // parsed source, used for the config digest

    const LshSystem& selected() const;
    const LshSystem& named(const std::string& name) const;
};

/// Matrix <-> row-major nested JSON arrays.
json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j, const std::string& field);
json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j, const std::string& field);

json system_to_json(const LshSystem& sys);
LshSystem system_from_json(const json& j, const std::string& name);

ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a hash of the canonical config dump, as fixed-width hex.
std::string config_digest(const json& canonical);

}  // namespace lsh
