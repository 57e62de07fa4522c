#include <doctest.h>

#include "qmc/engine.hpp"
#include "qmc/errors.hpp"
#include "qmc/normal.hpp"
#include "qmc/oracle.hpp"
#include "qmc/paths.hpp"

#include <cmath>
#include <vector>

using namespace qmc;

namespace {

SimulationRun european_call_run(std::uint64_t n_paths) {
    SimulationRun run;
    run.model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 1);
    run.payoff = AsianCall{100.0}; // one fixing = plain European call
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::pseudo(424242);
    run.n_paths = n_paths;
    return run;
}

SimulationRun asian_run(std::uint64_t n_paths) {
    SimulationRun run;
    run.model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 32);
    run.payoff = AsianCall{100.0};
    run.scheme = {TimeScheme::BBD, Factorization::Cholesky};
    run.generator = GeneratorSpec::sobol(0);
    run.n_paths = n_paths;
    return run;
}

SimulationRun basket_run(std::uint64_t n_paths, double rho) {
    SimulationRun run;
    run.model = MarketModel::flat_correlation({80, 90, 100, 110, 120},
                                              {0.5, 0.4, 0.2, 0.3, 0.6}, rho, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 16);
    run.payoff = EuropeanBasketCall{100.0, {0.2, 0.2, 0.2, 0.2, 0.2}};
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::sobol(0);
    run.n_paths = n_paths;
    return run;
}

} // namespace

TEST_CASE("european call price and greeks match the closed form") {
    SimulationRun run = european_call_run(1 << 18);
    const BsCall ref = bs_call(100, 100, 0.3, 0.0, 1.0);

    const Estimate p = price(run);
    CHECK(std::fabs(p.value - ref.price) < 3.0 * p.std_error);

    const GreekReport g = fd_greeks(run);
    CHECK(g.price.value == p.value); // same pipeline, same points
    CHECK(std::fabs(g.delta[0].value - ref.delta) <
          3.0 * g.delta[0].std_error + 1e-4 * ref.delta);
    CHECK(std::fabs(g.vega[0].value - ref.vega) < 3.0 * g.vega[0].std_error + 1e-3);
    const double ref_gamma = normal_pdf(0.15) / (100.0 * 0.3);
    CHECK(std::fabs(g.gamma[0].value - ref_gamma) < 3.0 * g.gamma[0].std_error + 1e-4);
}

TEST_CASE("zero-volatility asian price is the discounted intrinsic value") {
    SimulationRun run;
    run.model = MarketModel::single_asset(110, 1e-12, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 8);
    run.payoff = AsianCall{100.0};
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::pseudo(1);
    run.n_paths = 1 << 10;
    CHECK(price(run).value == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("discounting applies the flat rate") {
    SimulationRun run;
    run.model = MarketModel::single_asset(110, 1e-12, 0.05, 1.0);
    run.grid = TimeGrid::uniform(1.0, 1);
    run.payoff = AsianCall{100.0};
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::pseudo(1);
    run.n_paths = 256;
    // deterministic forward growth at the rate, discounted back
    const double expect = 110.0 - 100.0 * std::exp(-0.05);
    CHECK(price(run).value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("results are invariant under the worker count") {
    SimulationRun run = asian_run(40000); // several chunks, non-aligned tail
    run.generator = GeneratorSpec::pseudo(7);
    run.workers = 1;
    const GreekReport a = fd_greeks(run);
    run.workers = 4;
    const GreekReport b = fd_greeks(run);
    CHECK(a.price.value == b.price.value);
    CHECK(a.delta[0].value == b.delta[0].value);
    CHECK(a.gamma[0].value == b.gamma[0].value);
    CHECK(a.vega[0].value == b.vega[0].value);
    CHECK(a.price.std_error == b.price.std_error);
}

TEST_CASE("fd legs recycle one uniform block per path") {
    SimulationRun run = asian_run(1 << 10);
    engine_counters().reset();
    fd_greeks(run);
    CHECK(engine_counters().uniform_rows.load() == (1 << 10));
    // base + 2 spot legs + 2 vol legs per path for one asset
    CHECK(engine_counters().path_builds.load() == 5ull * (1 << 10));
}

TEST_CASE("cliquet spot sensitivities vanish path by path") {
    SimulationRun run;
    run.model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 32);
    run.payoff = CliquetOption{0.08, 0.16};
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::sobol(0);
    run.n_paths = 1 << 12;

    PathEstimator delta(run, {Target::Delta, 0});
    PathEstimator gamma(run, {Target::Gamma, 0});
    PointGenerator gen = PointGenerator::sobol(delta.dimension(), 0, run.n_paths);
    Matrix u = gen.next_points(1 << 12);
    double worst_delta = 0.0, worst_gamma = 0.0;
    for (std::size_t k = 0; k < u.rows(); ++k) {
        worst_delta = std::max(worst_delta, std::fabs(delta.eval_uniforms(u.row(k))));
        worst_gamma = std::max(worst_gamma, std::fabs(gamma.eval_uniforms(u.row(k))));
    }
    // scale invariance: zero up to floating-point roundoff of the return ratios
    CHECK(worst_delta <= 1e-12);
    CHECK(worst_gamma <= 1e-10);
}

TEST_CASE("adjoint forward sweep reproduces the price bitwise") {
    SimulationRun run = asian_run(1 << 12);
    const Estimate p = price(run);
    const GreekReport g = aad_greeks(run);
    CHECK(g.price.value == p.value);
    CHECK(g.price.std_error == p.std_error);
    CHECK(g.gamma.empty());
}

TEST_CASE("adjoint delta matches the homogeneity closed form per run") {
    // For the Asian call, dY/dS0 = disc * 1{mean>K} * mean / S0, since every
    // path value is proportional to S0. Rebuild that average independently.
    SimulationRun run = asian_run(1 << 12);
    const GreekReport g = aad_greeks(run);

    const PathPlan plan = make_path_plan(run.model, run.grid, run.scheme);
    PointGenerator gen = PointGenerator::sobol(plan.dimension(), 0, run.n_paths);
    const Matrix z = gen.gaussian_block(run.n_paths);
    const PathBatch batch = gbm_paths(plan, run.model.spots, z);
    double acc = 0.0;
    for (std::size_t k = 0; k < batch.n_paths; ++k) {
        double mean = 0.0;
        for (std::size_t j = 0; j < 32; ++j) mean += batch.at(k, j, 0);
        mean /= 32.0;
        if (mean > 100.0) acc += mean / 100.0;
    }
    acc /= static_cast<double>(batch.n_paths);
    CHECK(g.delta[0].value == doctest::Approx(acc).epsilon(1e-10));
}

TEST_CASE("adjoint and finite differences agree on identical points") {
    SimulationRun run = basket_run(1 << 12, 0.3);
    const GreekReport fd = fd_greeks(run);
    const GreekReport ad = aad_greeks(run);
    REQUIRE(ad.vega_method == GreekMethod::AAD);
    const double eps2 = 10.0 * run.fd_shift * run.fd_shift;
    for (std::size_t i = 0; i < 5; ++i) {
        const double dtol = std::max(3.0 * std::hypot(fd.delta[i].std_error, ad.delta[i].std_error),
                                     eps2 * std::fabs(fd.delta[i].value));
        CHECK(std::fabs(fd.delta[i].value - ad.delta[i].value) <= dtol + 1e-12);
        const double vtol = std::max(3.0 * std::hypot(fd.vega[i].std_error, ad.vega[i].std_error),
                                     eps2 * std::fabs(fd.vega[i].value));
        CHECK(std::fabs(fd.vega[i].value - ad.vega[i].value) <= vtol + 1e-12);
    }
}

TEST_CASE("adjoint error scales quadratically in the shift") {
    // deep in the money the kink never bites, so the finite-difference error
    // is the pure second-order term and shrinks 100x per shift decade
    SimulationRun run = basket_run(1 << 12, 0.3);
    run.payoff = EuropeanBasketCall{20.0, {0.2, 0.2, 0.2, 0.2, 0.2}};
    const GreekReport ad = aad_greeks(run);
    run.fd_shift = 1e-2;
    const GreekReport fd_coarse = fd_greeks(run);
    run.fd_shift = 1e-3;
    const GreekReport fd_fine = fd_greeks(run);
    int banded = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double coarse = std::fabs(fd_coarse.vega[i].value - ad.vega[i].value);
        const double fine = std::fabs(fd_fine.vega[i].value - ad.vega[i].value);
        if (coarse < 1e-6) continue;
        if (fine < 1e-9) continue; // already at roundoff, quadratic a fortiori
        const double ratio = coarse / fine;
        CHECK(ratio > 100.0 / 3.0);
        CHECK(ratio < 100.0 * 3.0);
        ++banded;
    }
    CHECK(banded >= 2); // the check must actually bite on most assets
}

TEST_CASE("adjoint rejects discontinuous payoffs") {
    SimulationRun run;
    run.model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    run.grid = TimeGrid::uniform(1.0, 8);
    run.payoff = DoubleKnockOutCall{100.0, 50.0, 150.0};
    run.scheme = {TimeScheme::SD, Factorization::Cholesky};
    run.generator = GeneratorSpec::pseudo(1);
    run.n_paths = 64;
    CHECK_THROWS_AS(aad_greeks(run), NumericError);
    run.payoff = CliquetOption{0.08, 0.16};
    CHECK_THROWS_AS(aad_greeks(run), NumericError);
}

TEST_CASE("vol bumps that cross zero are rejected") {
    SimulationRun run = european_call_run(64);
    run.model.vols[0] = 5e-4; // below the absolute shift
    CHECK_THROWS_AS(fd_greeks(run), NumericError);
}

TEST_CASE("pca-factor schemes fall back to fd vegas in adjoint reports") {
    SimulationRun run = basket_run(1 << 10, 0.0);
    run.scheme = {TimeScheme::SD, Factorization::PCA};
    const GreekReport ad = aad_greeks(run);
    CHECK(ad.method == GreekMethod::AAD);
    CHECK(ad.vega_method == GreekMethod::FD);
    CHECK(ad.vega.size() == 5);
}

TEST_CASE("estimand evaluation equals the dedicated entry points") {
    SimulationRun run = asian_run(1 << 10);
    CHECK(evaluate_estimand(run, {Target::Price, 0}).value == price(run).value);
    const GreekReport g = fd_greeks(run);
    CHECK(evaluate_estimand(run, {Target::Delta, 0}).value == g.delta[0].value);
    CHECK(evaluate_estimand(run, {Target::Gamma, 0}).value == g.gamma[0].value);
    CHECK(evaluate_estimand(run, {Target::Vega, 0}).value == g.vega[0].value);
}

TEST_CASE("schemes agree in law at matched pseudo sampling") {
    const std::uint64_t n = 1 << 14;
    std::vector<Estimate> prices;
    for (TimeScheme ts : {TimeScheme::SD, TimeScheme::BBD, TimeScheme::PCA}) {
        SimulationRun run = asian_run(n);
        run.scheme = {ts, Factorization::Cholesky};
        run.generator = GeneratorSpec::pseudo(5);
        prices.push_back(price(run));
    }
    for (std::size_t a = 0; a < prices.size(); ++a)
        for (std::size_t b = a + 1; b < prices.size(); ++b) {
            const double se = std::hypot(prices[a].std_error, prices[b].std_error);
            CHECK(std::fabs(prices[a].value - prices[b].value) < 3.0 * se);
        }
}
