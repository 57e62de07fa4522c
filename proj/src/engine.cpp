#include "qmc/engine.hpp"

#include "qmc/errors.hpp"
#include "qmc/factor.hpp"
#include "qmc/normal.hpp"
#include "qmc/paths.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace qmc {

namespace {

constexpr std::size_t kChunk = 16384;

struct LegDef {
    std::size_t plan_index = 0;
    std::vector<double> spots;
};

struct OutputTerm {
    std::size_t leg;
    double weight;
};

struct Pipeline {
    MarketModel model;
    PayoffSpec payoff;
    double discount = 1.0;
    std::size_t n_steps = 0, n_assets = 0, dim = 0;
    std::vector<std::shared_ptr<const PathPlan>> plans;
    std::vector<LegDef> legs;
    std::vector<std::vector<OutputTerm>> outputs;
};

Pipeline base_pipeline(const SimulationRun& run) {
    run.validate();
    Pipeline p;
    p.model = run.model;
    p.payoff = run.payoff;
    p.discount = std::exp(-run.model.rate * run.model.maturity);
    p.plans.push_back(
        std::make_shared<const PathPlan>(make_path_plan(run.model, run.grid, run.scheme)));
    p.n_steps = p.plans[0]->n_steps;
    p.n_assets = p.plans[0]->n_assets;
    p.dim = p.plans[0]->dimension();
    p.legs.push_back({0, run.model.spots});
    p.outputs.push_back({{0, 1.0}});
    return p;
}

// Spot bumps reuse the base plan (S(0) does not enter the Brownian
// construction); vol bumps rebuild the drift and refactorize the covariance.
std::size_t add_spot_leg(Pipeline& p, std::size_t asset, double bumped_spot) {
    LegDef leg{0, p.model.spots};
    leg.spots[asset] = bumped_spot;
    p.legs.push_back(std::move(leg));
    return p.legs.size() - 1;
}

std::size_t add_vol_leg(Pipeline& p, const SimulationRun& run, std::size_t asset, double h) {
    MarketModel bumped = run.model;
    bumped.vols[asset] += h;
    if (!(bumped.vols[asset] > 0.0))
        throw NumericError("fd: vol bump drives sigma_" + std::to_string(asset) +
                           " non-positive; reduce the shift");
    p.plans.push_back(
        std::make_shared<const PathPlan>(make_path_plan(bumped, run.grid, run.scheme)));
    p.legs.push_back({p.plans.size() - 1, run.model.spots});
    return p.legs.size() - 1;
}

Pipeline greeks_pipeline(const SimulationRun& run, bool want_delta_gamma, bool want_vega) {
    Pipeline p = base_pipeline(run);
    const std::size_t m = p.n_assets;
    if (want_delta_gamma) {
        for (std::size_t i = 0; i < m; ++i) {
            const double h = run.fd_shift * run.model.spots[i];
            const std::size_t up = add_spot_leg(p, i, run.model.spots[i] + h);
            const std::size_t dn = add_spot_leg(p, i, run.model.spots[i] - h);
            p.outputs.push_back({{up, 0.5 / h}, {dn, -0.5 / h}});
            p.outputs.push_back(
                {{up, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {dn, 1.0 / (h * h)}});
        }
    }
    if (want_vega) {
        const double h = run.fd_shift;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t up = add_vol_leg(p, run, i, h);
            const std::size_t dn = add_vol_leg(p, run, i, -h);
            p.outputs.push_back({{up, 0.5 / h}, {dn, -0.5 / h}});
        }
    }
    return p;
}

Pipeline estimand_pipeline(const SimulationRun& run, const Estimand& e) {
    Pipeline p = base_pipeline(run);
    if (e.target == Target::Price) return p;
    QMC_REQUIRE(e.asset < p.n_assets, "estimand: asset index out of range");
    p.outputs.clear();
    const std::size_t i = e.asset;
    if (e.target == Target::Delta || e.target == Target::Gamma) {
        const double h = run.fd_shift * run.model.spots[i];
        const std::size_t up = add_spot_leg(p, i, run.model.spots[i] + h);
        const std::size_t dn = add_spot_leg(p, i, run.model.spots[i] - h);
        if (e.target == Target::Delta)
            p.outputs.push_back({{up, 0.5 / h}, {dn, -0.5 / h}});
        else
            p.outputs.push_back(
                {{up, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {dn, 1.0 / (h * h)}});
    } else {
        const double h = run.fd_shift;
        const std::size_t up = add_vol_leg(p, run, i, h);
        const std::size_t dn = add_vol_leg(p, run, i, -h);
        p.outputs.push_back({{up, 0.5 / h}, {dn, -0.5 / h}});
    }
    return p;
}

struct EvalBuffers {
    PathWorkspace ws;
    std::vector<double> path;
    std::vector<double> leg_values;
};

void eval_legs(const Pipeline& p, const double* z, EvalBuffers& buf) {
    buf.path.resize(p.n_steps * p.n_assets);
    buf.leg_values.resize(p.legs.size());
    for (std::size_t l = 0; l < p.legs.size(); ++l) {
        const LegDef& leg = p.legs[l];
        gbm_path(*p.plans[leg.plan_index], leg.spots.data(), z, buf.path.data(), buf.ws);
        engine_counters().path_builds.fetch_add(1, std::memory_order_relaxed);
        buf.leg_values[l] = p.discount * payoff_value(p.payoff, buf.path.data(), p.n_steps,
                                                      p.n_assets, leg.spots.data());
    }
}

double combine(const std::vector<OutputTerm>& terms, const std::vector<double>& leg_values) {
    double v = 0.0;
    for (const auto& t : terms) v += t.weight * leg_values[t.leg];
    return v;
}

PointGenerator chunk_generator(const GeneratorSpec& gen, std::size_t dim,
                               std::uint64_t run_paths, std::uint64_t offset) {
    if (gen.kind == GeneratorSpec::Kind::Sobol)
        return PointGenerator::sobol_at(dim, std::uint64_t(gen.section) * run_paths + offset + 1);
    return PointGenerator::pseudo(derive_seed(gen.seed, offset / kChunk), dim);
}

void parallel_chunks(std::size_t n_chunks, unsigned workers,
                     const std::function<void(std::size_t)>& work) {
    if (workers <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) work(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const unsigned n_threads = std::min<std::size_t>(workers, n_chunks);
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks || failed.load()) return;
                try {
                    work(c);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct ChunkSums {
    std::vector<std::vector<double>> sum, sumsq;
    ChunkSums(std::size_t n_chunks, std::size_t n_out)
        : sum(n_chunks, std::vector<double>(n_out, 0.0)),
          sumsq(n_chunks, std::vector<double>(n_out, 0.0)) {}

    // Combine partials in chunk order; independent of worker count.
    std::vector<Estimate> finalize(std::uint64_t n_paths, bool probabilistic) const {
        const std::size_t n_out = sum.front().size();
        std::vector<Estimate> out(n_out);
        const double n = static_cast<double>(n_paths);
        for (std::size_t o = 0; o < n_out; ++o) {
            double s = 0.0, sq = 0.0;
            for (std::size_t c = 0; c < sum.size(); ++c) {
                s += sum[c][o];
                sq += sumsq[c][o];
            }
            const double mean = s / n;
            double var = 0.0;
            if (n_paths > 1) var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
            out[o].value = mean;
            out[o].std_error = std::sqrt(var / n);
            out[o].probabilistic_error = probabilistic;
        }
        return out;
    }
};

std::vector<Estimate> run_sweep(const Pipeline& p, const GeneratorSpec& gen,
                                std::uint64_t n_paths, unsigned workers) {
    const std::size_t n_out = p.outputs.size();
    const std::size_t n_chunks = static_cast<std::size_t>((n_paths + kChunk - 1) / kChunk);
    ChunkSums acc(n_chunks, n_out);

    parallel_chunks(n_chunks, workers, [&](std::size_t c) {
        const std::uint64_t offset = std::uint64_t(c) * kChunk;
        const std::size_t count =
            static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n_paths - offset));
        PointGenerator g = chunk_generator(gen, p.dim, n_paths, offset);
        Matrix block = g.next_points(count);
        engine_counters().uniform_rows.fetch_add(count, std::memory_order_relaxed);
        to_gaussian(block);
        EvalBuffers buf;
        auto& sum = acc.sum[c];
        auto& sumsq = acc.sumsq[c];
        for (std::size_t k = 0; k < count; ++k) {
            eval_legs(p, block.row(k), buf);
            for (std::size_t o = 0; o < n_out; ++o) {
                const double v = combine(p.outputs[o], buf.leg_values);
                sum[o] += v;
                sumsq[o] += v * v;
            }
        }
    });

    return acc.finalize(n_paths, gen.kind == GeneratorSpec::Kind::Pseudo);
}

template <class F>
double best_wall_time(F&& body, int reps) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

} // namespace

void SimulationRun::validate() const {
    model.validate();
    grid.validate();
    validate_payoff(payoff, model);
    QMC_REQUIRE(n_paths >= 1, "run: path count must be positive");
    QMC_REQUIRE(fd_shift > 0.0, "run: finite-difference shift must be positive");
}

std::string Estimand::label() const {
    switch (target) {
    case Target::Price: return "price";
    case Target::Delta: return "delta_" + std::to_string(asset);
    case Target::Gamma: return "gamma_" + std::to_string(asset);
    case Target::Vega: return "vega_" + std::to_string(asset);
    }
    return "?";
}

Estimand Estimand::parse(const std::string& text) {
    Estimand e;
    auto tail = [&](std::size_t prefix) -> std::size_t {
        if (text.size() == prefix) return 0;
        QMC_REQUIRE(text[prefix] == '_',
                    "estimand: expected '<greek>_<asset>' in '" + text + "'");
        return static_cast<std::size_t>(std::stoul(text.substr(prefix + 1)));
    };
    if (text == "price") {
        e.target = Target::Price;
    } else if (text.rfind("delta", 0) == 0) {
        e.target = Target::Delta;
        e.asset = tail(5);
    } else if (text.rfind("gamma", 0) == 0) {
        e.target = Target::Gamma;
        e.asset = tail(5);
    } else if (text.rfind("vega", 0) == 0) {
        e.target = Target::Vega;
        e.asset = tail(4);
    } else {
        throw ConfigError("estimand: unknown target '" + text + "'");
    }
    return e;
}

EngineCounters& engine_counters() {
    static EngineCounters counters;
    return counters;
}

Estimate price(const SimulationRun& run) {
    const Pipeline p = base_pipeline(run);
    return run_sweep(p, run.generator, run.n_paths, run.workers)[0];
}

GreekReport fd_greeks(const SimulationRun& run) {
    const Pipeline p = greeks_pipeline(run, true, true);
    const std::vector<Estimate> r = run_sweep(p, run.generator, run.n_paths, run.workers);
    GreekReport report;
    report.method = GreekMethod::FD;
    report.vega_method = GreekMethod::FD;
    report.fd_shift = run.fd_shift;
    const std::size_t m = p.n_assets;
    report.price = r[0];
    for (std::size_t i = 0; i < m; ++i) {
        report.delta.push_back(r[1 + 2 * i]);
        report.gamma.push_back(r[2 + 2 * i]);
        report.vega.push_back(r[1 + 2 * m + i]);
    }
    return report;
}

Estimate evaluate_estimand(const SimulationRun& run, const Estimand& estimand) {
    const Pipeline p = estimand_pipeline(run, estimand);
    return run_sweep(p, run.generator, run.n_paths, run.workers)[0];
}

GreekReport aad_greeks(const SimulationRun& run) {
    run.validate();
    if (!payoff_supports_pathwise(run.payoff))
        throw NumericError("aad: " + payoff_label(run.payoff) +
                           " has a discontinuous or kinked payoff; pathwise "
                           "differentiation is not applicable");

    const auto plan =
        std::make_shared<const PathPlan>(make_path_plan(run.model, run.grid, run.scheme));
    const std::size_t n = plan->n_steps, m = plan->n_assets;
    const double discount = std::exp(-run.model.rate * run.model.maturity);
    const bool aad_vega =
        !plan->scheme.joint_pca() && plan->scheme.factorization == Factorization::Cholesky;

    // dA/dsigma_q by forward differentiation of the factorization, once per run.
    std::vector<Matrix> droot;
    if (aad_vega) {
        const Matrix& a = plan->factor_root;
        for (std::size_t q = 0; q < m; ++q) {
            Matrix dsigma(m, m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                dsigma(q, i) += run.model.correlation(q, i) * run.model.vols[i];
                dsigma(i, q) += run.model.vols[i] * run.model.correlation(i, q);
            }
            droot.push_back(cholesky_root_derivative(a, dsigma));
        }
    }

    const std::size_t n_out = 1 + m + (aad_vega ? m : 0);
    const std::uint64_t n_paths = run.n_paths;
    const std::size_t n_chunks = static_cast<std::size_t>((n_paths + kChunk - 1) / kChunk);
    ChunkSums acc(n_chunks, n_out);

    parallel_chunks(n_chunks, run.workers, [&](std::size_t c) {
        const std::uint64_t offset = std::uint64_t(c) * kChunk;
        const std::size_t count =
            static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n_paths - offset));
        PointGenerator g = chunk_generator(run.generator, plan->dimension(), n_paths, offset);
        Matrix block = g.next_points(count);
        engine_counters().uniform_rows.fetch_add(count, std::memory_order_relaxed);
        to_gaussian(block);

        PathWorkspace ws, ws_comp;
        std::vector<double> path(n * m), sbar(n * m), dybar(n * m), dwc(n * m);
        std::vector<double> abar(m * m), out(n_out);
        auto& sum = acc.sum[c];
        auto& sumsq = acc.sumsq[c];

        for (std::size_t k = 0; k < count; ++k) {
            const double* z = block.row(k);
            // Forward sweep, arithmetically identical to price().
            gbm_path(*plan, run.model.spots.data(), z, path.data(), ws);
            engine_counters().path_builds.fetch_add(1, std::memory_order_relaxed);
            out[0] = discount *
                     payoff_value(run.payoff, path.data(), n, m, run.model.spots.data());

            // Backward sweep: payoff -> GBM exponent -> Brownian increments.
            std::fill(sbar.begin(), sbar.end(), 0.0);
            payoff_path_adjoint(run.payoff, path.data(), n, m, run.model.spots.data(),
                                discount, sbar.data());

            for (std::size_t i = 0; i < m; ++i) out[1 + i] = 0.0;
            if (aad_vega)
                for (std::size_t i = 0; i < m; ++i) out[1 + m + i] = 0.0;

            for (std::size_t j = n; j-- > 0;) {
                for (std::size_t i = 0; i < m; ++i) {
                    const double gb = sbar[j * m + i] * path[j * m + i];
                    dybar[j * m + i] = gb;
                    if (aad_vega)
                        out[1 + m + i] += gb * (-run.model.vols[i] * plan->dt[j]);
                    if (j > 0)
                        sbar[(j - 1) * m + i] +=
                            sbar[j * m + i] * (path[j * m + i] / path[(j - 1) * m + i]);
                }
            }
            for (std::size_t i = 0; i < m; ++i)
                out[1 + i] = sbar[i] * (path[i] / run.model.spots[i]);

            if (aad_vega) {
                // Independent component increments dW, recomputed from z.
                component_increments(*plan, z, dwc.data(), ws_comp);
                std::fill(abar.begin(), abar.end(), 0.0);
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t i = 0; i < m; ++i) {
                        const double dyb = dybar[j * m + i];
                        if (dyb == 0.0) continue;
                        for (std::size_t kk = 0; kk < m; ++kk)
                            abar[i * m + kk] += dyb * dwc[j * m + kk];
                    }
                for (std::size_t q = 0; q < m; ++q) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t kk = 0; kk <= i; ++kk)
                            v += abar[i * m + kk] * droot[q](i, kk);
                    out[1 + m + q] += v;
                }
            }

            for (std::size_t o = 0; o < n_out; ++o) {
                sum[o] += out[o];
                sumsq[o] += out[o] * out[o];
            }
        }
    });

    const std::vector<Estimate> est =
        acc.finalize(n_paths, run.generator.kind == GeneratorSpec::Kind::Pseudo);

    GreekReport report;
    report.method = GreekMethod::AAD;
    report.fd_shift = run.fd_shift;
    report.price = est[0];
    for (std::size_t i = 0; i < m; ++i) report.delta.push_back(est[1 + i]);
    if (aad_vega) {
        report.vega_method = GreekMethod::AAD;
        for (std::size_t i = 0; i < m; ++i) report.vega.push_back(est[1 + m + i]);
    } else {
        // Factor-root differentiation through a PCA eigensystem is out of
        // scope; vegas come from finite differences on the same points.
        report.vega_method = GreekMethod::FD;
        const Pipeline p = greeks_pipeline(run, false, true);
        const std::vector<Estimate> fd = run_sweep(p, run.generator, n_paths, run.workers);
        for (std::size_t i = 0; i < m; ++i) report.vega.push_back(fd[1 + i]);
    }
    return report;
}

double cost_ratio(const SimulationRun& run) {
    SimulationRun r = run;
    r.workers = 1;
    price(r); // warm the direction table and caches
    double sink = 0.0;
    const double t_price = best_wall_time([&] { sink += price(r).value; }, 3);
    const double t_all = best_wall_time([&] { sink += aad_greeks(r).price.value; }, 3);
    if (sink == std::numeric_limits<double>::infinity()) return -1.0; // keep sink alive
    return t_all / t_price;
}

double fd_cost_ratio(const SimulationRun& run) {
    SimulationRun r = run;
    r.workers = 1;
    price(r);
    double sink = 0.0;
    const double t_price = best_wall_time([&] { sink += price(r).value; }, 3);
    const double t_all = best_wall_time([&] { sink += fd_greeks(r).price.value; }, 3);
    if (sink == std::numeric_limits<double>::infinity()) return -1.0;
    return t_all / t_price;
}

struct PathEstimator::Impl {
    Pipeline pipeline;
    EvalBuffers buf;
    std::vector<double> zrow;
};

PathEstimator::PathEstimator(const SimulationRun& run, const Estimand& estimand)
    : impl_(new Impl{estimand_pipeline(run, estimand), {}, {}}) {}

PathEstimator::PathEstimator(const PathEstimator& other)
    : impl_(new Impl{other.impl_->pipeline, {}, {}}) {}

PathEstimator::~PathEstimator() = default;

std::size_t PathEstimator::dimension() const { return impl_->pipeline.dim; }

double PathEstimator::eval_gaussians(const double* z) {
    eval_legs(impl_->pipeline, z, impl_->buf);
    return combine(impl_->pipeline.outputs[0], impl_->buf.leg_values);
}

double PathEstimator::eval_uniforms(const double* u) {
    impl_->zrow.resize(impl_->pipeline.dim);
    for (std::size_t j = 0; j < impl_->zrow.size(); ++j)
        impl_->zrow[j] = inverse_normal_cdf(u[j]);
    return eval_gaussians(impl_->zrow.data());
}

} // namespace qmc
