#pragma once

#include "qmc/generator.hpp"
#include "qmc/market.hpp"
#include "qmc/payoffs.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qmc {

/// One pricing task: contract, market, sampling strategy and path budget.
struct SimulationRun {
    MarketModel model;
    TimeGrid grid;
    PayoffSpec payoff;
    SchemeSpec scheme;
    GeneratorSpec generator;
    std::uint64_t n_paths = 1 << 16;
    double fd_shift = 1e-3; // relative for spot bumps, absolute for vol bumps
    unsigned workers = 1;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    /// Sample standard errors have a probabilistic reading only for pseudo
    /// random sampling; for Sobol' runs they are indicative.
    bool probabilistic_error = true;
};

enum class GreekMethod { FD, AAD };

struct GreekReport {
    Estimate price;
    std::vector<Estimate> delta;
    std::vector<Estimate> gamma; // empty for adjoint reports
    std::vector<Estimate> vega;
    GreekMethod method = GreekMethod::FD;
    GreekMethod vega_method = GreekMethod::FD;
    double fd_shift = 0.0;
};

/// Estimand selector used by the experiment harness.
enum class Target { Price, Delta, Gamma, Vega };

struct Estimand {
    Target target = Target::Price;
    std::size_t asset = 0;

    std::string label() const;
    static Estimand parse(const std::string& text);
};

/// Mean discounted payoff over n_paths with its sample standard error.
Estimate price(const SimulationRun& run);

/// Central finite differences with path recycling: every leg of every bump
/// consumes the identical uniform block. Spot bumps use h = shift*S_i(0) and
/// feed both delta and gamma; vol bumps use the absolute shift and propagate
/// through drift and a refactorized covariance root.
GreekReport fd_greeks(const SimulationRun& run);

/// Pathwise deltas and vegas by reverse-mode adjoint propagation through the
/// payoff, the exponential GBM recursion and the Cholesky factor root. Only
/// Lipschitz payoffs qualify. Under a PCA factorization the vega falls back
/// to finite differences (eigenvector derivatives are ill-conditioned near
/// degenerate eigenvalues) and the report marks it accordingly.
GreekReport aad_greeks(const SimulationRun& run);

/// Wall time of price plus all adjoint greeks over wall time of price alone.
double cost_ratio(const SimulationRun& run);

/// Same ratio with finite-difference greeks in the numerator.
double fd_cost_ratio(const SimulationRun& run);

/// Single estimand evaluated as a sweep (price directly, greeks by FD).
Estimate evaluate_estimand(const SimulationRun& run, const Estimand& estimand);

/// Per-path estimand evaluator over a fixed pipeline: maps one row of D
/// uniforms (or gaussians) to the path's contribution. Not thread-safe;
/// clone per worker.
class PathEstimator {
public:
    PathEstimator(const SimulationRun& run, const Estimand& estimand);
    PathEstimator(const PathEstimator&);
    PathEstimator& operator=(const PathEstimator&) = delete;
    ~PathEstimator();

    std::size_t dimension() const;
    double eval_uniforms(const double* u);
    double eval_gaussians(const double* z);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Instrumentation for tests: how many uniform rows were drawn and how many
/// paths were built by the last sweeps since reset().
struct EngineCounters {
    std::atomic<std::uint64_t> uniform_rows{0};
    std::atomic<std::uint64_t> path_builds{0};
    void reset() {
        uniform_rows = 0;
        path_builds = 0;
    }
};
EngineCounters& engine_counters();

} // namespace qmc
