#include "qmc/analysis.hpp"
#include "qmc/config.hpp"
#include "qmc/engine.hpp"
#include "qmc/errors.hpp"
#include "qmc/gsa.hpp"
#include "qmc/oracle.hpp"
#include "qmc/paths.hpp"
#include "qmc/reports.hpp"
#include "qmc/sobol.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace {

using nlohmann::json;
using namespace qmc;

std::string file_label(const GeneratorSpec& gen) {
    return gen.kind == GeneratorSpec::Kind::Pseudo ? "pseudo" + std::to_string(gen.seed)
                                                   : "sobol" + std::to_string(gen.section);
}

struct Context {
    ExperimentConfig config;
    std::string out_dir;
    std::string emit;
    std::string fixture_dir; // empty = bundled store
    std::uint64_t dump_paths = 0;

    FixtureStore store() const {
        return fixture_dir.empty() ? FixtureStore::bundled() : FixtureStore(fixture_dir);
    }

    void stamp(CsvDocument& csv) const {
        csv.provenance("engine_version", kEngineVersion);
        csv.provenance("config_hash", config.config_hash);
        csv.provenance("sobol_table", SobolTable::bundled().id());
        csv.provenance("payoff", payoff_label(config.payoff));
    }

    json base_json() const {
        return {{"engine_version", kEngineVersion},
                {"config_hash", config.config_hash},
                {"sobol_table", SobolTable::bundled().id()},
                {"config", config.canonical}};
    }

    void emit_files(const std::string& stem, const CsvDocument& csv, const json& j) const {
        std::filesystem::create_directories(out_dir);
        const std::string base = (std::filesystem::path(out_dir) / stem).string();
        if (emit != "json") write_file(base + ".csv", csv.text());
        if (emit != "csv") write_file(base + ".json", j.dump(2) + "\n");
    }
};

std::string run_stem(const SchemeSpec& scheme, const GeneratorSpec& gen,
                     const MarketModel& model) {
    return file_label(gen) + "_" + scheme.normalized(model.n_assets()).label();
}

void greek_rows(CsvDocument& csv, const GreekReport& report) {
    csv.header({"quantity", "asset", "value", "std_error", "method"});
    const std::string m = report.method == GreekMethod::AAD ? "aad" : "fd";
    const std::string mv = report.vega_method == GreekMethod::AAD ? "aad" : "fd";
    csv.row({"price", "", format_double(report.price.value),
             format_double(report.price.std_error), ""});
    for (std::size_t i = 0; i < report.delta.size(); ++i)
        csv.row({"delta", std::to_string(i), format_double(report.delta[i].value),
                 format_double(report.delta[i].std_error), m});
    for (std::size_t i = 0; i < report.gamma.size(); ++i)
        csv.row({"gamma", std::to_string(i), format_double(report.gamma[i].value),
                 format_double(report.gamma[i].std_error), m});
    for (std::size_t i = 0; i < report.vega.size(); ++i)
        csv.row({"vega", std::to_string(i), format_double(report.vega[i].value),
                 format_double(report.vega[i].std_error), mv});
}

void dump_paths_csv(const Context& ctx, const SimulationRun& run, std::uint64_t count) {
    const PathPlan plan = make_path_plan(run.model, run.grid, run.scheme);
    PointGenerator gen =
        run.generator.kind == GeneratorSpec::Kind::Sobol
            ? PointGenerator::sobol(plan.dimension(), run.generator.section, run.n_paths)
            : PointGenerator::pseudo(derive_seed(run.generator.seed, 0), plan.dimension());
    Matrix z = gen.gaussian_block(count);
    const PathBatch batch = gbm_paths(plan, run.model.spots, z);
    CsvDocument csv;
    ctx.stamp(csv);
    csv.provenance("scheme", plan.scheme.label());
    csv.provenance("generator", run.generator.label());
    csv.header({"path", "step", "asset", "value"});
    for (std::size_t k = 0; k < batch.n_paths; ++k)
        for (std::size_t j = 0; j < batch.n_steps; ++j)
            for (std::size_t i = 0; i < batch.n_assets; ++i)
                csv.row({std::to_string(k), std::to_string(j), std::to_string(i),
                         format_double(batch.at(k, j, i))});
    std::filesystem::create_directories(ctx.out_dir);
    write_file((std::filesystem::path(ctx.out_dir) / "paths.csv").string(), csv.text());
}

int cmd_price(const Context& ctx) {
    for (const auto& gen : ctx.config.generators)
        for (const auto& scheme : ctx.config.schemes) {
            const SimulationRun run = ctx.config.make_run(scheme, gen);
            const Estimate est = price(run);
            CsvDocument csv;
            ctx.stamp(csv);
            csv.provenance("generator", gen.label());
            csv.provenance("scheme", scheme.normalized(run.model.n_assets()).label());
            csv.provenance("paths", std::to_string(run.n_paths));
            csv.provenance("dimension",
                           std::to_string(run.grid.n_steps() * run.model.n_assets()));
            csv.header({"quantity", "value", "std_error", "std_error_probabilistic"});
            csv.row({"price", format_double(est.value), format_double(est.std_error),
                     est.probabilistic_error ? "true" : "false"});
            json j = ctx.base_json();
            j["run"] = run_descriptor(run);
            j["dimension"] = run.grid.n_steps() * run.model.n_assets();
            j["price"] = to_json(est);
            ctx.emit_files("price_" + run_stem(scheme, gen, run.model), csv, j);
            if (ctx.dump_paths > 0) dump_paths_csv(ctx, run, ctx.dump_paths);
        }
    return 0;
}

int cmd_greeks(const Context& ctx) {
    for (const auto& gen : ctx.config.generators)
        for (const auto& scheme : ctx.config.schemes) {
            const SimulationRun run = ctx.config.make_run(scheme, gen);
            const GreekReport report = fd_greeks(run);
            CsvDocument csv;
            ctx.stamp(csv);
            csv.provenance("generator", gen.label());
            csv.provenance("scheme", scheme.normalized(run.model.n_assets()).label());
            csv.provenance("paths", std::to_string(run.n_paths));
            csv.provenance("fd_shift", format_double(run.fd_shift));
            greek_rows(csv, report);
            json j = ctx.base_json();
            j["run"] = run_descriptor(run);
            j["greeks"] = to_json(report);
            ctx.emit_files("greeks_" + run_stem(scheme, gen, run.model), csv, j);
        }
    return 0;
}

int cmd_gsa(const Context& ctx) {
    std::vector<double> shifts = ctx.config.gsa_shifts;
    if (shifts.empty()) shifts.push_back(ctx.config.fd_shift);
    for (const auto& scheme : ctx.config.schemes)
        for (const auto& target : ctx.config.targets)
            for (double shift : shifts) {
                SimulationRun run = ctx.config.make_run(scheme, ctx.config.generators.front());
                run.fd_shift = shift;
                const GsaReport report = gsa_on_pricer(run, target, ctx.config.gsa_samples);
                CsvDocument csv;
                ctx.stamp(csv);
                csv.provenance("scheme", report.scheme_label);
                csv.provenance("target", report.target_label);
                csv.provenance("samples", std::to_string(report.samples));
                csv.provenance("fd_shift", format_double(shift));
                csv.header({"index", "s", "s_tot"});
                for (std::size_t i = 0; i < report.dimension; ++i)
                    csv.row({std::to_string(i), format_double(report.first_order[i]),
                             format_double(report.total[i])});
                csv.provenance("summary.f0", format_double(report.f0));
                csv.provenance("summary.variance", format_double(report.variance));
                csv.provenance("summary.sum_s", format_double(report.sum_first_order));
                csv.provenance("summary.d_t", std::to_string(report.d_truncation));
                csv.provenance("summary.d_s_bound",
                               std::to_string(report.d_superposition_bound));
                csv.provenance("summary.d_a", format_double(report.d_average));
                csv.provenance("summary.class", std::string(1, report.func_class));

                json j = ctx.base_json();
                j["gsa"] = {{"target", report.target_label},
                            {"scheme", report.scheme_label},
                            {"samples", report.samples},
                            {"evaluations", report.evaluations},
                            {"fd_shift", shift},
                            {"s", report.first_order},
                            {"s_tot", report.total},
                            {"s_raw", report.first_order_raw},
                            {"s_tot_raw", report.total_raw},
                            {"f0", report.f0},
                            {"variance", report.variance},
                            {"sum_s", report.sum_first_order},
                            {"d_t", report.d_truncation},
                            {"d_s_bound", report.d_superposition_bound},
                            {"d_a", report.d_average},
                            {"class", std::string(1, report.func_class)}};
                std::string stem = "gsa_" + report.target_label + "_" + report.scheme_label;
                if (shifts.size() > 1) stem += "_eps" + format_double(shift);
                ctx.emit_files(stem, csv, j);
            }
    return 0;
}

std::vector<std::uint64_t> n_ladder(unsigned p_min, unsigned p_max) {
    std::vector<std::uint64_t> ns;
    for (unsigned p = p_min; p <= p_max; ++p) ns.push_back(std::uint64_t(1) << p);
    return ns;
}

double need_fixture(const Context& ctx, const SimulationRun& run, const Estimand& target,
                    double* std_error = nullptr) {
    const std::string key = fixture_key(run, target, 0, 0);
    const auto fixture = ctx.store().find(key);
    if (!fixture)
        throw ConfigError("no reference fixture " + key + " for " + payoff_label(run.payoff) +
                          "/" + target.label() +
                          "; build it first with: qmcgreeks fixtures --config <same model, "
                          "grid, payoff and targets>");
    if (std_error) *std_error = fixture->std_error;
    return fixture->value;
}

int cmd_convergence(const Context& ctx) {
    const auto ns = n_ladder(ctx.config.conv_p_min, ctx.config.conv_p_max);
    CsvDocument curves, fits;
    ctx.stamp(curves);
    ctx.stamp(fits);
    curves.provenance("runs", std::to_string(ctx.config.conv_runs));
    curves.header({"method", "target", "n", "rmse"});
    fits.header({"method", "target", "slope", "stderr_slope", "intercept_at_512",
                 "stderr_intercept", "points_used", "points_dropped"});
    json j = ctx.base_json();
    j["curves"] = json::array();
    j["fits"] = json::array();

    for (const auto& gen : ctx.config.generators)
        for (const auto& scheme : ctx.config.schemes)
            for (const auto& target : ctx.config.targets) {
                const SimulationRun tmpl = ctx.config.make_run(scheme, gen);
                const double reference = need_fixture(ctx, tmpl, target);
                const ConvergenceCurve curve =
                    rmse_curve(tmpl, target, ns, ctx.config.conv_runs, reference);
                const RegressionResult fit = fit_power_law(curve);
                for (std::size_t i = 0; i < curve.n_values.size(); ++i)
                    curves.row({curve.method_label, curve.estimand_label,
                                std::to_string(curve.n_values[i]),
                                format_double(curve.rmse[i])});
                fits.row({curve.method_label, curve.estimand_label, format_double(fit.slope),
                          format_double(fit.stderr_slope), format_double(fit.intercept_at_n0),
                          format_double(fit.stderr_intercept), std::to_string(fit.points_used),
                          std::to_string(fit.points_dropped)});
                j["curves"].push_back({{"method", curve.method_label},
                                       {"target", curve.estimand_label},
                                       {"n", curve.n_values},
                                       {"rmse", curve.rmse},
                                       {"reference", reference}});
                j["fits"].push_back({{"method", curve.method_label},
                                     {"target", curve.estimand_label},
                                     {"slope", fit.slope},
                                     {"stderr_slope", fit.stderr_slope},
                                     {"intercept_at_512", fit.intercept_at_n0},
                                     {"stderr_intercept", fit.stderr_intercept}});
            }
    json j_fits = ctx.base_json();
    j_fits["fits"] = j["fits"];
    ctx.emit_files("convergence", curves, j);
    ctx.emit_files("fits", fits, j_fits);
    return 0;
}

int cmd_speedup(const Context& ctx) {
    QMC_REQUIRE(ctx.config.speedup_a && ctx.config.speedup_b,
                "config: speedup section with method_a and method_b is required");
    const auto ns = n_ladder(ctx.config.conv_p_min, ctx.config.conv_p_max);
    CsvDocument csv;
    ctx.stamp(csv);
    csv.header({"method_a", "method_b", "target", "accuracy", "n_star_a", "n_star_b",
                "speedup", "status"});
    json j = ctx.base_json();
    j["speedup"] = json::array();

    for (const auto& target : ctx.config.targets) {
        SimulationRun run_a =
            ctx.config.make_run(ctx.config.speedup_a->scheme, ctx.config.speedup_a->generator);
        SimulationRun run_b =
            ctx.config.make_run(ctx.config.speedup_b->scheme, ctx.config.speedup_b->generator);
        const double reference = need_fixture(ctx, run_a, target);

        double bias = 0.0;
        if (target.target != Target::Price) {
            SimulationRun bias_run = run_a;
            bias_run.generator = GeneratorSpec::pseudo(ctx.config.fixture_seed0);
            bias = fd_bias_floor(bias_run, target);
        }
        FittedCurve a{rmse_curve(run_a, target, ns, ctx.config.conv_runs, reference), {}};
        FittedCurve b{rmse_curve(run_b, target, ns, ctx.config.conv_runs, reference), {}};
        a.curve.bias_floor = bias;
        b.curve.bias_floor = bias;
        a.fit = fit_power_law(a.curve);
        b.fit = fit_power_law(b.curve);

        for (double acc : ctx.config.speedup_accuracies) {
            const SpeedUpResult s = speedup(a, b, acc, reference);
            const std::string status = s.reachable() ? "ok" : "unreachable";
            csv.row({a.curve.method_label, b.curve.method_label, target.label(),
                     format_double(acc),
                     s.reachable_a ? format_double(s.n_star_a) : "",
                     s.reachable_b ? format_double(s.n_star_b) : "",
                     s.reachable() ? format_double(s.ratio) : "", status});
            j["speedup"].push_back({{"method_a", a.curve.method_label},
                                    {"method_b", b.curve.method_label},
                                    {"target", target.label()},
                                    {"accuracy", acc},
                                    {"n_star_a", s.n_star_a},
                                    {"n_star_b", s.n_star_b},
                                    {"ratio", s.ratio},
                                    {"reachable", s.reachable()},
                                    {"bias_floor", bias}});
        }
    }
    ctx.emit_files("speedup", csv, j);
    return 0;
}

int cmd_stability(const Context& ctx) {
    for (const auto& gen : ctx.config.generators)
        for (const auto& scheme : ctx.config.schemes)
            for (const auto& target : ctx.config.targets) {
                const SimulationRun tmpl = ctx.config.make_run(scheme, gen);
                const StabilityTrace trace =
                    stability_trace(tmpl, target, ctx.config.stab_n_min, ctx.config.stab_n_max,
                                    ctx.config.stab_points, ctx.config.stab_windows);
                CsvDocument csv;
                ctx.stamp(csv);
                csv.provenance("generator", gen.label());
                csv.provenance("scheme", scheme.normalized(tmpl.model.n_assets()).label());
                csv.provenance("target", target.label());
                csv.header({"window", "mean", "vol", "log_return"});
                for (std::size_t w = 0; w < trace.window_mean.size(); ++w) {
                    const bool has_ret = w > 0 && !std::isnan(trace.log_returns[w - 1]);
                    csv.row({std::to_string(w + 1), format_double(trace.window_mean[w]),
                             format_double(trace.window_vol[w]),
                             has_ret ? format_double(trace.log_returns[w - 1]) : ""});
                }
                json j = ctx.base_json();
                j["stability"] = {{"generator", gen.label()},
                                  {"scheme", scheme.normalized(tmpl.model.n_assets()).label()},
                                  {"target", target.label()},
                                  {"n", trace.n_values},
                                  {"estimates", trace.estimates},
                                  {"window_mean", trace.window_mean},
                                  {"window_vol", trace.window_vol}};
                ctx.emit_files("stability_" + run_stem(scheme, gen, tmpl.model) + "_" +
                                   target.label(),
                               csv, j);
            }
    return 0;
}

int cmd_fixtures(const Context& ctx) {
    const FixtureStore store = ctx.store();
    const std::uint64_t n = std::uint64_t(1) << ctx.config.fixture_paths_log2;
    for (const auto& target : ctx.config.targets) {
        SimulationRun tmpl = ctx.config.make_run(ctx.config.schemes.front(),
                                                 GeneratorSpec::pseudo(ctx.config.fixture_seed0));
        const Fixture f = build_fixture(tmpl, target, n, ctx.config.fixture_seeds);
        store.save(f);
        std::cout << "fixture " << f.key << " " << payoff_label(ctx.config.payoff) << "/"
                  << target.label() << " = " << format_double(f.value) << " +- "
                  << format_double(f.std_error) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Monte-Carlo pricing, greeks and sensitivity experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override, emit_override, fixture_dir;
    int workers_override = 0;
    std::uint64_t dump_paths = 0;

    app.add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--workers", workers_override, "data-parallel width (overrides config)");
    app.add_option("--emit", emit_override, "csv | json | both (overrides config)")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_option("--fixtures-dir", fixture_dir, "fixture store location (default: bundled)");
    app.fallthrough();

    auto* price_cmd = app.add_subcommand("price", "price per scheme and generator");
    price_cmd->add_option("--dump-paths", dump_paths, "also export the first K paths as CSV");
    auto* greeks_cmd = app.add_subcommand("greeks", "finite-difference greeks");
    auto* gsa_cmd = app.add_subcommand("gsa", "Sobol' indices and effective dimensions");
    auto* conv_cmd = app.add_subcommand("convergence", "RMSE curves and power-law fits");
    auto* speed_cmd = app.add_subcommand("speedup", "path-count ratios at target accuracies");
    auto* stab_cmd = app.add_subcommand("stability", "windowed running-estimate diagnostics");
    auto* fix_cmd = app.add_subcommand("fixtures", "build and store reference fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        Context ctx{ExperimentConfig::load(config_path), "", "", fixture_dir, dump_paths};
        ctx.out_dir = out_override.empty() ? ctx.config.output_dir : out_override;
        ctx.emit = emit_override.empty() ? ctx.config.emit : emit_override;
        if (workers_override > 0) ctx.config.workers = static_cast<unsigned>(workers_override);

        if (price_cmd->parsed()) return cmd_price(ctx);
        if (greeks_cmd->parsed()) return cmd_greeks(ctx);
        if (gsa_cmd->parsed()) return cmd_gsa(ctx);
        if (conv_cmd->parsed()) return cmd_convergence(ctx);
        if (speed_cmd->parsed()) return cmd_speedup(ctx);
        if (stab_cmd->parsed()) return cmd_stability(ctx);
        if (fix_cmd->parsed()) return cmd_fixtures(ctx);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
