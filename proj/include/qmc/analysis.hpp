#pragma once

#include "qmc/engine.hpp"

#include <string>
#include <vector>

namespace qmc {

/// RMSE against a reference value over L independent runs per path count.
/// Sobol' runs use consecutive non-overlapping sections, pseudo runs use
/// consecutive seeds.
struct ConvergenceCurve {
    std::vector<std::uint64_t> n_values;
    std::vector<double> rmse;
    std::size_t runs = 0;
    double reference = 0.0;
    double bias_floor = 0.0; // known systematic floor of the estimand, if any
    std::string method_label;
    std::string estimand_label;
};

ConvergenceCurve rmse_curve(const SimulationRun& run_template, const Estimand& estimand,
                            const std::vector<std::uint64_t>& n_values, std::size_t l_runs,
                            double reference);

/// Ordinary least squares of log10 RMSE on log10 N. The intercept is the
/// fitted value at N = 512. Zero RMSE points are excluded with a count.
struct RegressionResult {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept_at_n0 = 0.0;
    double stderr_intercept = 0.0;
    std::size_t points_used = 0;
    std::size_t points_dropped = 0;
    static constexpr double kReferenceN = 512.0;
};

RegressionResult fit_power_law(const ConvergenceCurve& curve);

struct FittedCurve {
    ConvergenceCurve curve;
    RegressionResult fit;
};

/// Path counts two methods need to reach and hold a relative accuracy, from
/// regression inversion at the level 3*rmse = accuracy*|reference|. A side is
/// unreachable when the target sits at or below its bias floor, the fit does
/// not converge, or the inversion extrapolates past the cap.
struct SpeedUpResult {
    double accuracy = 0.0;
    double n_star_a = 0.0;
    double n_star_b = 0.0;
    bool reachable_a = false;
    bool reachable_b = false;
    double ratio = 0.0; // n_star_a / n_star_b when both reachable
    bool reachable() const { return reachable_a && reachable_b; }
    static constexpr double kExtrapolationCap = 67108864.0; // 2^26
};

SpeedUpResult speedup(const FittedCurve& method_a, const FittedCurve& method_b,
                      double accuracy_rel, double reference);

/// Running estimates along one stream, grouped into windows: per-window mean,
/// volatility and log-returns of consecutive window means.
struct StabilityTrace {
    std::vector<std::uint64_t> n_values;
    std::vector<double> estimates;
    std::vector<double> window_mean;
    std::vector<double> window_vol;
    std::vector<double> log_returns; // NaN marks undefined entries
};

StabilityTrace stability_trace(const SimulationRun& run_template, const Estimand& estimand,
                               std::uint64_t n_min = 100, std::uint64_t n_max = 10000,
                               std::size_t n_points = 100, std::size_t windows = 10);

/// Systematic floor of a finite-difference estimand, estimated by step
/// halving on common random numbers at a large path count. Zero for prices.
double fd_bias_floor(const SimulationRun& run_template, const Estimand& estimand,
                     std::uint64_t n_paths = std::uint64_t(1) << 17);

} // namespace qmc
