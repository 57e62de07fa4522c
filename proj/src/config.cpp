#include "qmc/config.hpp"

#include "qmc/errors.hpp"
#include "qmc/reports.hpp"

#include <fstream>
#include <set>

namespace qmc {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    QMC_REQUIRE(j.is_object(), "config: '" + where + "' must be an object");
    for (const auto& [key, _] : j.items())
        QMC_REQUIRE(allowed.count(key) == 1, "config: unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& where) {
    QMC_REQUIRE(j.is_number(), "config: '" + where + "' must be a number");
    return j.get<double>();
}

MarketModel parse_model(const json& j) {
    check_keys(j, {"spots", "vols", "rate", "maturity", "correlation"}, "model");
    QMC_REQUIRE(j.contains("spots") && j.contains("vols"),
                "config: model requires 'spots' and 'vols'");
    MarketModel m;
    m.spots = j.at("spots").get<std::vector<double>>();
    m.vols = j.at("vols").get<std::vector<double>>();
    m.rate = j.value("rate", 0.0);
    m.maturity = j.value("maturity", 1.0);
    const std::size_t n = m.spots.size();
    if (!j.contains("correlation")) {
        m.correlation = Matrix::identity(n);
    } else if (j.at("correlation").is_number()) {
        const double rho = j.at("correlation").get<double>();
        m.correlation = Matrix::identity(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (i != k) m.correlation(i, k) = rho;
    } else {
        const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
        QMC_REQUIRE(rows.size() == n, "config: correlation matrix must be " +
                                          std::to_string(n) + "x" + std::to_string(n));
        m.correlation = Matrix(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            QMC_REQUIRE(rows[i].size() == n, "config: correlation rows must have equal length");
            for (std::size_t k = 0; k < n; ++k) m.correlation(i, k) = rows[i][k];
        }
    }
    m.validate();
    return m;
}

TimeGrid parse_grid(const json& j, double maturity) {
    check_keys(j, {"steps", "times"}, "grid");
    TimeGrid g;
    if (j.contains("times")) {
        g.times = j.at("times").get<std::vector<double>>();
    } else {
        QMC_REQUIRE(j.contains("steps"), "config: grid requires 'steps' or 'times'");
        g = TimeGrid::uniform(maturity, j.at("steps").get<std::size_t>());
    }
    g.validate();
    return g;
}

PayoffSpec parse_payoff(const json& j) {
    QMC_REQUIRE(j.is_object() && j.contains("type"),
                "config: payoff section with a 'type' field is required");
    const std::string type = j.at("type").get<std::string>();
    if (type == "asian") {
        check_keys(j, {"type", "strike"}, "payoff");
        QMC_REQUIRE(j.contains("strike"), "config: payoff 'strike' is required");
        return AsianCall{number(j.at("strike"), "strike")};
    }
    if (type == "double_ko") {
        check_keys(j, {"type", "strike", "lower_barrier", "upper_barrier"}, "payoff");
        QMC_REQUIRE(j.contains("strike") && j.contains("lower_barrier") &&
                        j.contains("upper_barrier"),
                    "config: double_ko needs 'strike', 'lower_barrier', 'upper_barrier'");
        return DoubleKnockOutCall{number(j.at("strike"), "strike"),
                                  number(j.at("lower_barrier"), "lower_barrier"),
                                  number(j.at("upper_barrier"), "upper_barrier")};
    }
    if (type == "cliquet") {
        check_keys(j, {"type", "local_cap", "global_floor"}, "payoff");
        QMC_REQUIRE(j.contains("local_cap") && j.contains("global_floor"),
                    "config: cliquet needs 'local_cap' and 'global_floor'");
        return CliquetOption{number(j.at("local_cap"), "local_cap"),
                             number(j.at("global_floor"), "global_floor")};
    }
    if (type == "euro_basket" || type == "asian_basket") {
        check_keys(j, {"type", "strike", "weights"}, "payoff");
        QMC_REQUIRE(j.contains("strike") && j.contains("weights"),
                    "config: basket payoffs need 'strike' and 'weights'");
        const auto w = j.at("weights").get<std::vector<double>>();
        if (type == "euro_basket")
            return EuropeanBasketCall{number(j.at("strike"), "strike"), w};
        return AsianBasketCall{number(j.at("strike"), "strike"), w};
    }
    throw ConfigError("config: unknown payoff type '" + type + "'");
}

GeneratorSpec parse_generator(const json& j) {
    check_keys(j, {"kind", "seed", "section"}, "generators[]");
    QMC_REQUIRE(j.contains("kind"), "config: generator needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "pseudo") {
        QMC_REQUIRE(!j.contains("section"), "config: pseudo generators take a 'seed' only");
        return GeneratorSpec::pseudo(j.value("seed", std::uint64_t(0)));
    }
    if (kind == "sobol") {
        QMC_REQUIRE(!j.contains("seed"), "config: sobol generators take a 'section' only");
        return GeneratorSpec::sobol(j.value("section", std::uint32_t(0)));
    }
    throw ConfigError("config: unknown generator kind '" + kind + "'");
}

ExperimentConfig::MethodRef parse_method(const json& j, const std::string& where) {
    check_keys(j, {"generator", "scheme"}, where);
    QMC_REQUIRE(j.contains("generator") && j.contains("scheme"),
                "config: " + where + " needs 'generator' and 'scheme'");
    ExperimentConfig::MethodRef m;
    m.generator = parse_generator(j.at("generator"));
    m.scheme = SchemeSpec::parse(j.at("scheme").get<std::string>());
    return m;
}

} // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    QMC_REQUIRE(in.good(), "config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse(j);
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
    check_keys(j,
               {"model", "grid", "payoff", "schemes", "generators", "paths", "fd_shift",
                "workers", "output_dir", "emit", "targets", "convergence", "gsa", "speedup",
                "stability", "fixtures"},
               "config");
    QMC_REQUIRE(j.contains("model"), "config: missing required section 'model'");
    QMC_REQUIRE(j.contains("grid"), "config: missing required section 'grid'");
    QMC_REQUIRE(j.contains("payoff"), "config: missing required section 'payoff'");

    ExperimentConfig c;
    c.model = parse_model(j.at("model"));
    c.grid = parse_grid(j.at("grid"), c.model.maturity);
    c.payoff = parse_payoff(j.at("payoff"));
    validate_payoff(c.payoff, c.model);

    for (const auto& s : j.value("schemes", std::vector<std::string>{"sd_chol"}))
        c.schemes.push_back(SchemeSpec::parse(s));

    if (j.contains("generators")) {
        QMC_REQUIRE(j.at("generators").is_array(), "config: 'generators' must be a list");
        for (const auto& g : j.at("generators")) c.generators.push_back(parse_generator(g));
    } else {
        c.generators.push_back(GeneratorSpec::sobol(0));
    }
    QMC_REQUIRE(!c.schemes.empty() && !c.generators.empty(),
                "config: need at least one scheme and one generator");

    c.paths = j.value("paths", std::uint64_t(1) << 16);
    c.fd_shift = j.value("fd_shift", 1e-3);
    QMC_REQUIRE(c.fd_shift > 0.0, "config: fd_shift must be positive");
    c.workers = j.value("workers", 1u);
    QMC_REQUIRE(c.workers >= 1, "config: workers must be at least 1");
    c.output_dir = j.value("output_dir", std::string("out"));
    c.emit = j.value("emit", std::string("both"));
    QMC_REQUIRE(c.emit == "csv" || c.emit == "json" || c.emit == "both",
                "config: emit must be csv, json or both");

    for (const auto& t : j.value("targets", std::vector<std::string>{"price"}))
        c.targets.push_back(Estimand::parse(t));

    if (j.contains("convergence")) {
        const auto& conv = j.at("convergence");
        check_keys(conv, {"n_min_log2", "n_max_log2", "runs"}, "convergence");
        c.conv_p_min = conv.value("n_min_log2", 9u);
        c.conv_p_max = conv.value("n_max_log2", 14u);
        c.conv_runs = conv.value("runs", std::size_t(50));
        QMC_REQUIRE(c.conv_p_min < c.conv_p_max && c.conv_p_max < 31,
                    "config: convergence range must satisfy n_min_log2 < n_max_log2 < 31");
    }

    if (j.contains("gsa")) {
        const auto& g = j.at("gsa");
        check_keys(g, {"samples", "shifts"}, "gsa");
        c.gsa_samples = g.value("samples", std::size_t(8192));
        if (g.contains("shifts")) c.gsa_shifts = g.at("shifts").get<std::vector<double>>();
    }

    if (j.contains("speedup")) {
        const auto& s = j.at("speedup");
        check_keys(s, {"method_a", "method_b", "accuracies"}, "speedup");
        QMC_REQUIRE(s.contains("method_a") && s.contains("method_b"),
                    "config: speedup needs 'method_a' and 'method_b'");
        c.speedup_a = parse_method(s.at("method_a"), "speedup.method_a");
        c.speedup_b = parse_method(s.at("method_b"), "speedup.method_b");
        if (s.contains("accuracies"))
            c.speedup_accuracies = s.at("accuracies").get<std::vector<double>>();
    }

    if (j.contains("stability")) {
        const auto& s = j.at("stability");
        check_keys(s, {"n_min", "n_max", "points", "windows"}, "stability");
        c.stab_n_min = s.value("n_min", std::uint64_t(100));
        c.stab_n_max = s.value("n_max", std::uint64_t(10000));
        c.stab_points = s.value("points", std::size_t(100));
        c.stab_windows = s.value("windows", std::size_t(10));
    }

    if (j.contains("fixtures")) {
        const auto& f = j.at("fixtures");
        check_keys(f, {"paths_log2", "seeds", "seed0"}, "fixtures");
        c.fixture_paths_log2 = f.value("paths_log2", 23u);
        c.fixture_seeds = f.value("seeds", std::size_t(16));
        c.fixture_seed0 = f.value("seed0", std::uint64_t(9000));
        QMC_REQUIRE(c.fixture_paths_log2 < 31, "config: fixtures.paths_log2 must be below 31");
    }

    // Canonical form: every effective value written back, defaults included.
    json canon;
    canon["model"] = to_json(c.model);
    canon["grid"] = to_json(c.grid);
    canon["payoff"] = to_json(c.payoff);
    {
        std::vector<std::string> scheme_labels;
        for (const auto& s : c.schemes) scheme_labels.push_back(s.label());
        canon["schemes"] = scheme_labels;
        json gens = json::array();
        for (const auto& g : c.generators) gens.push_back(to_json(g));
        canon["generators"] = gens;
        std::vector<std::string> target_labels;
        for (const auto& t : c.targets) target_labels.push_back(t.label());
        canon["targets"] = target_labels;
    }
    canon["paths"] = c.paths;
    canon["fd_shift"] = c.fd_shift;
    canon["emit"] = c.emit;
    canon["convergence"] = {{"n_min_log2", c.conv_p_min},
                            {"n_max_log2", c.conv_p_max},
                            {"runs", c.conv_runs}};
    canon["gsa"] = {{"samples", c.gsa_samples}, {"shifts", c.gsa_shifts}};
    if (c.speedup_a) {
        canon["speedup"] = {{"method_a",
                             {{"generator", to_json(c.speedup_a->generator)},
                              {"scheme", c.speedup_a->scheme.label()}}},
                            {"method_b",
                             {{"generator", to_json(c.speedup_b->generator)},
                              {"scheme", c.speedup_b->scheme.label()}}},
                            {"accuracies", c.speedup_accuracies}};
    }
    canon["stability"] = {{"n_min", c.stab_n_min},
                          {"n_max", c.stab_n_max},
                          {"points", c.stab_points},
                          {"windows", c.stab_windows}};
    canon["fixtures"] = {{"paths_log2", c.fixture_paths_log2},
                         {"seeds", c.fixture_seeds},
                         {"seed0", c.fixture_seed0}};
    // workers and output_dir affect where and how fast, never what: they stay
    // out of the canonical form so reruns hash identically.
    c.canonical = canon;
    c.config_hash = canonical_hash(canon);
    return c;
}

SimulationRun ExperimentConfig::make_run(const SchemeSpec& scheme,
                                         const GeneratorSpec& gen) const {
    SimulationRun run;
    run.model = model;
    run.grid = grid;
    run.payoff = payoff;
    run.scheme = scheme;
    run.generator = gen;
    run.n_paths = paths;
    run.fd_shift = fd_shift;
    run.workers = workers;
    return run;
}

} // namespace qmc
