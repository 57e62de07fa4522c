#pragma once

#include "qmc/engine.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qmc {

/// Declarative experiment description. One document drives every subcommand;
/// unknown keys are rejected and all defaults are materialized back into the
/// canonical form that gets hashed and embedded in outputs.
struct ExperimentConfig {
    MarketModel model;
    TimeGrid grid;
    PayoffSpec payoff;
    std::vector<SchemeSpec> schemes;
    std::vector<GeneratorSpec> generators;
    std::uint64_t paths = 1 << 16;
    double fd_shift = 1e-3;
    unsigned workers = 1;
    std::string output_dir = "out";
    std::string emit = "both"; // csv | json | both
    std::vector<Estimand> targets;

    // convergence
    unsigned conv_p_min = 9;
    unsigned conv_p_max = 14;
    std::size_t conv_runs = 50;

    // gsa
    std::size_t gsa_samples = 8192;
    std::vector<double> gsa_shifts; // empty = just fd_shift

    struct MethodRef {
        GeneratorSpec generator;
        SchemeSpec scheme;
    };
    std::optional<MethodRef> speedup_a, speedup_b;
    std::vector<double> speedup_accuracies{0.01, 0.001};

    // stability
    std::uint64_t stab_n_min = 100, stab_n_max = 10000;
    std::size_t stab_points = 100, stab_windows = 10;

    // fixtures
    unsigned fixture_paths_log2 = 23;
    std::size_t fixture_seeds = 16;
    std::uint64_t fixture_seed0 = 9000;

    nlohmann::json canonical; // parsed config with defaults filled in
    std::string config_hash;  // hash of the canonical form

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig parse(const nlohmann::json& j);

    SimulationRun make_run(const SchemeSpec& scheme, const GeneratorSpec& gen) const;
};

} // namespace qmc
