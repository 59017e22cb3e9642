#pragma once

#include "lsh/config.hpp"

namespace lsh {

/// Envelope around every command result. `outputs` carries all numeric
/// payload and is byte-deterministic for a fixed (config, seed); wall time
/// and diagnostics live outside it.
struct ResultEnvelope {
    int schema_version = 1;
    std::string command;
    std::string config_digest;
    std::optional<std::uint64_t> seed;
    json outputs;
    std::vector<std::string> diagnostics;
    double wall_time_s = 0.0;
    /// 0 on success, 2 when sufficient conditions are reported inapplicable.
    int exit_code = 0;

    json to_json() const;
};

/// Known commands: stability, invariant, simulate, filter, robust, compose,
/// transfer. Throws ConfigError for anything else.
ResultEnvelope dispatch(const std::string& command, const ExperimentConfig& cfg);

bool is_known_command(const std::string& command);

}  // namespace lsh
