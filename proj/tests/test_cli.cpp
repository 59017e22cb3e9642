#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "lsh/dispatch.hpp"
#include "lsh/feedback.hpp"
#include "support.hpp"

using namespace lsh;

namespace {

json canonical_config() {
    return json{{"schema_version", 1},
                {"systems", {{"plant", {{"K", 1.0}, {"M", 1.0}, {"F", 1.0}, {"N", 1.0}}}}},
                {"simulation", {{"T", 1.0}, {"dt", 0.01}, {"paths", 200}, {"seed", 7}}},
                {"robust", {{"eps", 0.2}, {"gamma", 1.0}, {"Delta", 0.0}}}};
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
    const json j = {{"systems", {{"osc", {{"K", 1.0}, {"M", 1.0}, {"F", 1.0}, {"N", 1.0}}}}}};
    const ExperimentConfig cfg = parse_config(j);
    CHECK(cfg.system == "osc");
    CHECK(cfg.simulation.dt == doctest::Approx(1e-3));
    CHECK(cfg.simulation.paths == 10000);
    CHECK_FALSE(cfg.simulation.seed.has_value());
    CHECK_FALSE(cfg.robust.eps.has_value());  // "auto"
    CHECK(cfg.selected().n == 1);
}

TEST_CASE("config validation names the failing matrix") {
    json j = canonical_config();
    j["systems"]["plant"]["M"] = json::array({json::array({-1.0})});
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("M not positive definite") != std::string::npos);
    }
}

TEST_CASE("stochastic commands require a seed") {
    json j = canonical_config();
    j["simulation"].erase("seed");
    const ExperimentConfig cfg = parse_config(j);
    try {
        dispatch("simulate", cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("seed required") != std::string::npos);
    }
    // deterministic commands do not
    CHECK_NOTHROW(dispatch("stability", cfg));
    CHECK_NOTHROW(dispatch("invariant", cfg));
}

TEST_CASE("unknown command is rejected") {
    CHECK_FALSE(is_known_command("explode"));
    CHECK_THROWS_AS(dispatch("explode", parse_config(canonical_config())), ConfigError);
}

TEST_CASE("stability command payload") {
    const ResultEnvelope env = dispatch("stability", parse_config(canonical_config()));
    CHECK(env.outputs["eps_window"]["eps1_bound"].get<double>() == doctest::Approx(1.0));
    CHECK(env.outputs["eps_window"]["eps2_bound"].get<double>() == doctest::Approx(0.4));
    CHECK(env.outputs["hurwitz"].get<bool>());
    CHECK(env.outputs["valid"].get<bool>());
    CHECK(env.exit_code == 0);
}

TEST_CASE("invariant command payload") {
    const ResultEnvelope env = dispatch("invariant", parse_config(canonical_config()));
    CHECK(env.outputs["Pi"][0][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(env.outputs["Pi"][1][1].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(env.outputs["virial"]["mean_kinetic"].get<double>() ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(env.outputs["virial"]["virial_rhs"].get<double>() ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("robust command payload") {
    const ResultEnvelope env = dispatch("robust", parse_config(canonical_config()));
    CHECK(env.outputs["mu"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(env.outputs["lambda_min_Q"].get<double>() == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(env.outputs["asymptotic_bound"].get<double>() == doctest::Approx(3.75).epsilon(1e-12));
    CHECK(env.outputs["monte_carlo"]["worst_admissibility_margin"].get<double>() >= -1e-9);
}

TEST_CASE("compose command payload and exit codes") {
    json j = canonical_config();
    j["systems"] = {{"plant", {{"K", 1.0}, {"M", 1.0}, {"F", 1.0}, {"N", 0.5}}},
                    {"ctrl", {{"K", 1.0}, {"M", 1.0}, {"F", 1.0}, {"N", 0.5}}}};
    j["pair"] = {"plant", "ctrl"};
    const ResultEnvelope env = dispatch("compose", parse_config(j));
    CHECK(env.exit_code == 0);
    CHECK(env.outputs["small_gain"]["norm"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(env.outputs["hurwitz"].get<bool>());

    // round-trip: the emitted loop reloads to an identical quadruple
    const json loop = env.outputs["loop"];
    const LshSystem reloaded = system_from_json(loop, "loop");
    const LshSystem direct = compose(parse_config(j).named("plant"),
                                     parse_config(j).named("ctrl")).loop;
    CHECK(reloaded.K.mat() == direct.K.mat());
    CHECK(reloaded.M.mat() == direct.M.mat());
    CHECK(reloaded.F.mat() == direct.F.mat());
    CHECK(reloaded.N == direct.N);

    // inapplicable pair reports exit code 2
    j["systems"]["plant"]["N"] = 1.5;
    j["systems"]["ctrl"]["N"] = 1.5;
    const ResultEnvelope bad = dispatch("compose", parse_config(j));
    CHECK(bad.exit_code == 2);
    CHECK_FALSE(bad.outputs["applicable"].get<bool>());
}

TEST_CASE("transfer command payload") {
    json j = canonical_config();
    j["transfer"] = {{"points", {json::array({0.0, 0.0}), json::array({0.0, 1.0})}}};
    const ResultEnvelope env = dispatch("transfer", parse_config(j));
    CHECK(env.outputs["static_gain"][0][0].get<double>() == doctest::Approx(1.0));
    CHECK(env.outputs["points"][0]["Phi"]["re"][0][0].get<double>() == doctest::Approx(1.0));
    CHECK(env.outputs["points"][1]["Phi"]["im"][0][0].get<double>() ==
          doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("filter command matches the closed form") {
    json j = canonical_config();
    j["simulation"]["paths"] = 2000;
    j["filter"] = {{"probe_times", {0.5, 1.0}}};
    const ResultEnvelope env = dispatch("filter", parse_config(j));
    const auto& table = env.outputs["table"];
    REQUIRE(table.size() == 2);
    for (const auto& row : table) {
        const double t = row["t"].get<double>();
        const double p_closed = row["P_closed"][0][0].get<double>();
        CHECK(p_closed == doctest::Approx(1.0 / (2.0 + t)).epsilon(1e-12));
        const double emp = row["cov_empirical"][0][0].get<double>();
        const double se = row["se"][0][0].get<double>();
        CHECK(std::abs(emp - p_closed) <= 5.0 * se);
    }
}

TEST_CASE("identical config and seed give byte-identical numeric output") {
    for (const std::string command : {"simulate", "filter", "robust"}) {
        const ExperimentConfig cfg = parse_config(canonical_config());
        const std::string a = dispatch(command, cfg).outputs.dump();
        const std::string b = dispatch(command, cfg).outputs.dump();
        CHECK(a == b);
    }
}

TEST_CASE("load_config reads files and reports parse errors") {
    const std::string path = "lsh_test_config.json";
    {
        std::ofstream out(path);
        out << canonical_config().dump();
    }
    const ExperimentConfig cfg = load_config(path);
    CHECK(cfg.selected().n == 1);
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config("does_not_exist.json"), ConfigError);
}

TEST_CASE("config digest is stable and content-sensitive") {
    const json a = canonical_config();
    json b = canonical_config();
    CHECK(config_digest(a) == config_digest(b));
    b["simulation"]["seed"] = 8;
    CHECK(config_digest(a) != config_digest(b));
}
