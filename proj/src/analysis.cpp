#include "qmc/analysis.hpp"

#include "qmc/errors.hpp"

#include <cmath>
#include <limits>

namespace qmc {

ConvergenceCurve rmse_curve(const SimulationRun& run_template, const Estimand& estimand,
                            const std::vector<std::uint64_t>& n_values, std::size_t l_runs,
                            double reference) {
    QMC_REQUIRE(l_runs >= 2, "rmse: at least two independent runs required");
    QMC_REQUIRE(!n_values.empty(), "rmse: empty path-count list");

    ConvergenceCurve curve;
    curve.n_values = n_values;
    curve.runs = l_runs;
    curve.reference = reference;
    curve.estimand_label = estimand.label();
    curve.method_label = run_template.generator.label() + "+" +
                         run_template.scheme.normalized(run_template.model.n_assets()).label();

    for (std::uint64_t n : n_values) {
        double sq = 0.0;
        for (std::size_t l = 0; l < l_runs; ++l) {
            SimulationRun run = run_template;
            run.n_paths = n;
            if (run.generator.kind == GeneratorSpec::Kind::Sobol)
                run.generator.section = run_template.generator.section + static_cast<std::uint32_t>(l);
            else
                run.generator.seed = run_template.generator.seed + l;
            const double v = evaluate_estimand(run, estimand).value;
            sq += (reference - v) * (reference - v);
        }
        curve.rmse.push_back(std::sqrt(sq / static_cast<double>(l_runs)));
    }
    return curve;
}

RegressionResult fit_power_law(const ConvergenceCurve& curve) {
    std::vector<double> xs, ys;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
        if (curve.rmse[i] <= 0.0) {
            ++dropped; // exact-reference degeneracy, excluded from the fit
            continue;
        }
        xs.push_back(std::log10(static_cast<double>(curve.n_values[i])));
        ys.push_back(std::log10(curve.rmse[i]));
    }
    QMC_NUMERIC_REQUIRE(xs.size() >= 4, "fit: need at least four usable points");

    const double n = static_cast<double>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    QMC_NUMERIC_REQUIRE(sxx > 0.0, "fit: path counts must differ");

    RegressionResult fit;
    fit.points_used = xs.size();
    fit.points_dropped = dropped;
    fit.slope = sxy / sxx;

    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double resid = ys[i] - (ybar + fit.slope * (xs[i] - xbar));
        ssr += resid * resid;
    }
    const double s2 = xs.size() > 2 ? ssr / (n - 2.0) : 0.0;
    fit.stderr_slope = std::sqrt(s2 / sxx);

    const double x0 = std::log10(RegressionResult::kReferenceN);
    fit.intercept_at_n0 = ybar + fit.slope * (x0 - xbar);
    fit.stderr_intercept = std::sqrt(s2 * (1.0 / n + (x0 - xbar) * (x0 - xbar) / sxx));
    return fit;
}

namespace {

struct Inversion {
    double n_star = 0.0;
    bool reachable = false;
};

Inversion invert_fit(const FittedCurve& method, double eps_target) {
    Inversion inv;
    if (method.curve.bias_floor > 0.0 && eps_target <= method.curve.bias_floor) return inv;
    if (method.fit.slope >= -1e-9) return inv; // no convergence to invert
    const double log_n = std::log10(RegressionResult::kReferenceN) +
                         (std::log10(eps_target) - method.fit.intercept_at_n0) / method.fit.slope;
    const double n_star = std::pow(10.0, log_n);
    if (n_star > SpeedUpResult::kExtrapolationCap) return inv;
    inv.n_star = std::max(1.0, n_star);
    inv.reachable = true;
    return inv;
}

} // namespace

SpeedUpResult speedup(const FittedCurve& method_a, const FittedCurve& method_b,
                      double accuracy_rel, double reference) {
    QMC_REQUIRE(accuracy_rel > 0.0, "speedup: accuracy must be positive");
    QMC_NUMERIC_REQUIRE(reference != 0.0, "speedup: reference value must be nonzero");
    const double eps_target = accuracy_rel * std::fabs(reference) / 3.0;

    SpeedUpResult result;
    result.accuracy = accuracy_rel;
    const Inversion a = invert_fit(method_a, eps_target);
    const Inversion b = invert_fit(method_b, eps_target);
    result.n_star_a = a.n_star;
    result.n_star_b = b.n_star;
    result.reachable_a = a.reachable;
    result.reachable_b = b.reachable;
    if (a.reachable && b.reachable) result.ratio = a.n_star / b.n_star;
    return result;
}

double fd_bias_floor(const SimulationRun& run_template, const Estimand& estimand,
                     std::uint64_t n_paths) {
    if (estimand.target == Target::Price) return 0.0;
    SimulationRun run = run_template;
    run.n_paths = n_paths;
    const double v_h = evaluate_estimand(run, estimand).value;
    run.fd_shift = run_template.fd_shift * 0.5;
    const double v_h2 = evaluate_estimand(run, estimand).value;
    // One Richardson step for an O(h^2) estimator: bias(h) = 4/3 (v_h - v_h/2).
    return std::fabs(4.0 / 3.0 * (v_h - v_h2));
}

StabilityTrace stability_trace(const SimulationRun& run_template, const Estimand& estimand,
                               std::uint64_t n_min, std::uint64_t n_max, std::size_t n_points,
                               std::size_t windows) {
    QMC_REQUIRE(n_points >= windows && windows >= 2, "stability: need several windows");
    QMC_REQUIRE(n_min >= 1 && n_max > n_min, "stability: bad path-count range");
    QMC_REQUIRE(n_points % windows == 0, "stability: points must divide evenly into windows");

    SimulationRun run = run_template;
    run.n_paths = n_max;
    PathEstimator estimator(run, estimand);
    const std::size_t dim = estimator.dimension();

    PointGenerator gen = run.generator.kind == GeneratorSpec::Kind::Sobol
                             ? PointGenerator::sobol(dim, run.generator.section, n_max)
                             : PointGenerator::pseudo(derive_seed(run.generator.seed, 0), dim);

    StabilityTrace trace;
    trace.n_values.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        trace.n_values[i] =
            n_min + (n_max - n_min) * static_cast<std::uint64_t>(i) / (n_points - 1);

    Matrix one;
    double acc = 0.0;
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::uint64_t target = trace.n_values[i];
        while (k < target) {
            gen.next_points(1, one);
            acc += estimator.eval_uniforms(one.row(0));
            ++k;
        }
        trace.estimates.push_back(acc / static_cast<double>(target));
    }

    const std::size_t per = n_points / windows;
    for (std::size_t w = 0; w < windows; ++w) {
        double mean = 0.0;
        for (std::size_t i = 0; i < per; ++i) mean += trace.estimates[w * per + i];
        mean /= static_cast<double>(per);
        double var = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double d = trace.estimates[w * per + i] - mean;
            var += d * d;
        }
        trace.window_mean.push_back(mean);
        trace.window_vol.push_back(per > 1 ? std::sqrt(var / static_cast<double>(per - 1)) : 0.0);
    }
    for (std::size_t w = 1; w < windows; ++w) {
        const double prev = trace.window_mean[w - 1], cur = trace.window_mean[w];
        trace.log_returns.push_back(prev > 0.0 && cur > 0.0
                                        ? std::log(cur / prev)
                                        : std::numeric_limits<double>::quiet_NaN());
    }
    return trace;
}

} // namespace qmc
