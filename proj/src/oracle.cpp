#include "qmc/oracle.hpp"

#include "qmc/errors.hpp"
#include "qmc/normal.hpp"
#include "qmc/reports.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace qmc {

BsCall bs_call(double spot, double strike, double vol, double rate, double maturity) {
    QMC_REQUIRE(spot > 0.0 && strike > 0.0 && maturity > 0.0 && vol >= 0.0,
                "bs_call: inputs must be positive");
    BsCall out;
    const double disc = std::exp(-rate * maturity);
    const double stdev = vol * std::sqrt(maturity);
    if (stdev <= 0.0) {
        const double fwd = spot / disc;
        out.price = disc * std::max(fwd - strike, 0.0);
        out.delta = fwd > strike ? 1.0 : (fwd < strike ? 0.0 : 0.5);
        out.vega = 0.0;
        return out;
    }
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / stdev;
    const double d2 = d1 - stdev;
    out.price = spot * normal_cdf(d1) - strike * disc * normal_cdf(d2);
    out.delta = normal_cdf(d1);
    out.vega = spot * normal_pdf(d1) * std::sqrt(maturity);
    return out;
}

double geometric_asian_call(double spot, double strike, double vol, double rate,
                            const TimeGrid& grid) {
    grid.validate();
    QMC_REQUIRE(spot > 0.0 && strike > 0.0 && vol >= 0.0, "geometric_asian: bad inputs");
    const std::size_t n = grid.n_steps();
    const double maturity = grid.maturity();
    double tbar = 0.0;
    for (double t : grid.times) tbar += t;
    tbar /= static_cast<double>(n);
    double cov = 0.0;
    for (double ti : grid.times)
        for (double tj : grid.times) cov += std::min(ti, tj);
    const double var = vol * vol * cov / (static_cast<double>(n) * static_cast<double>(n));

    const double mean_log = std::log(spot) + (rate - 0.5 * vol * vol) * tbar;
    const double disc = std::exp(-rate * maturity);
    const double sd = std::sqrt(var);
    if (sd <= 0.0) return disc * std::max(std::exp(mean_log) - strike, 0.0);
    const double d2 = (mean_log - std::log(strike)) / sd;
    const double d1 = d2 + sd;
    return disc * (std::exp(mean_log + 0.5 * var) * normal_cdf(d1) - strike * normal_cdf(d2));
}

namespace {
std::string default_fixture_dir() {
    if (const char* env = std::getenv("QMC_DATA_DIR")) return std::string(env) + "/fixtures";
    return std::string(QMC_DATA_DIR) + "/fixtures";
}
} // namespace

FixtureStore::FixtureStore(std::string dir) : dir_(std::move(dir)) {}

FixtureStore FixtureStore::bundled() { return FixtureStore(default_fixture_dir()); }

std::optional<Fixture> FixtureStore::find(const std::string& key) const {
    const std::filesystem::path path = std::filesystem::path(dir_) / (key + ".json");
    std::ifstream in(path);
    if (!in.good()) return std::nullopt;
    nlohmann::json j;
    in >> j;
    Fixture f;
    f.key = j.at("key").get<std::string>();
    f.value = j.at("value").get<double>();
    f.std_error = j.at("std_error").get<double>();
    f.estimand = j.at("estimand").get<std::string>();
    f.payoff = j.at("payoff").get<std::string>();
    f.provenance_json = j.at("provenance").dump();
    return f;
}

void FixtureStore::save(const Fixture& fixture) const {
    std::filesystem::create_directories(dir_);
    nlohmann::json j{{"key", fixture.key},
                     {"value", fixture.value},
                     {"std_error", fixture.std_error},
                     {"estimand", fixture.estimand},
                     {"payoff", fixture.payoff},
                     {"provenance", nlohmann::json::parse(fixture.provenance_json)}};
    write_file((std::filesystem::path(dir_) / (fixture.key + ".json")).string(),
               j.dump(2) + "\n");
}

std::string fixture_key(const SimulationRun& run, const Estimand& estimand,
                        std::uint64_t /*n_paths*/, std::size_t /*n_seeds*/) {
    // The key identifies the estimand, not the build recipe: lookups must
    // find the committed reference no matter which scheme produced it.
    nlohmann::json j{{"model", to_json(run.model)},
                     {"grid", to_json(run.grid)},
                     {"payoff", to_json(run.payoff)},
                     {"estimand", estimand.label()}};
    if (estimand.target != Target::Price) j["fd_shift"] = run.fd_shift;
    return canonical_hash(j);
}

Fixture build_fixture(const SimulationRun& run_template, const Estimand& estimand,
                      std::uint64_t n_paths, std::size_t n_seeds) {
    QMC_REQUIRE(n_seeds >= 2, "fixture: need at least two seeds for a pooled error");
    std::vector<double> values(n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s) {
        SimulationRun run = run_template;
        run.n_paths = n_paths;
        run.generator = GeneratorSpec::pseudo(run_template.generator.seed + s);
        values[s] = evaluate_estimand(run, estimand).value;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_seeds);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_seeds - 1);

    Fixture f;
    f.key = fixture_key(run_template, estimand, n_paths, n_seeds);
    f.value = mean;
    f.std_error = std::sqrt(var / static_cast<double>(n_seeds));
    f.estimand = estimand.label();
    f.payoff = payoff_label(run_template.payoff);
    SimulationRun described = run_template;
    described.n_paths = n_paths;
    nlohmann::json prov{{"run", run_descriptor(described)},
                        {"seeds", n_seeds},
                        {"seed0", run_template.generator.seed},
                        {"paths_per_seed", n_paths},
                        {"engine_version", kEngineVersion}};
    f.provenance_json = prov.dump();
    return f;
}

} // namespace qmc
