#pragma once

#include "qmc/engine.hpp"
#include "qmc/market.hpp"

#include <optional>
#include <string>

namespace qmc {

struct BsCall {
    double price = 0.0;
    double delta = 0.0;
    double vega = 0.0;
};

/// Black-Scholes European call closed form, with delta and vega.
BsCall bs_call(double spot, double strike, double vol, double rate, double maturity);

/// Closed-form price of a call on the geometric mean of the fixings: the
/// geometric mean of a GBM path is lognormal with moments assembled from the
/// grid's pairwise minima.
double geometric_asian_call(double spot, double strike, double vol, double rate,
                            const TimeGrid& grid);

/// Simulated reference value with provenance. std_error is zero only for
/// closed forms.
struct Fixture {
    std::string key;
    double value = 0.0;
    double std_error = 0.0;
    std::string estimand;
    std::string payoff;
    std::string provenance_json; // run descriptor, serialized
};

/// One JSON document per fixture under <dir>/<key>.json.
class FixtureStore {
public:
    explicit FixtureStore(std::string dir);
    static FixtureStore bundled();

    std::optional<Fixture> find(const std::string& key) const;
    void save(const Fixture& fixture) const;
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
};

/// Canonical fixture key for (model, grid, payoff, estimand, n, seeds, shift).
std::string fixture_key(const SimulationRun& run, const Estimand& estimand,
                        std::uint64_t n_paths, std::size_t n_seeds);

/// Seed-averaged pseudo-random reference: n_seeds independent runs of
/// n_paths each, pooled mean with the standard error of the seed average.
Fixture build_fixture(const SimulationRun& run_template, const Estimand& estimand,
                      std::uint64_t n_paths = std::uint64_t(1) << 23,
                      std::size_t n_seeds = 16);

} // namespace qmc
