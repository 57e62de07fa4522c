#pragma once

#include "qmc/engine.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qmc {

/// Scalar square-integrable function on the unit hypercube.
struct HypercubeFunction {
    std::size_t dimension = 0;
    std::function<double(const double*)> eval;
};

struct GsaOptions {
    double truncation_threshold = 0.01; // reported d_T prefix test
    double class_a_threshold = 0.05;    // prefix test for the A class (5% convention)
    double class_a_fraction = 0.2;      // A needs the prefix to fire within 0.2*D
    double class_b_min_sum = 0.4;       // B needs sum_i S_i at least this ...
    double class_b_max_avg = 4.0;       // ... and an average dimension at most this
    double superposition_sum = 0.95;    // d_S bound refines to 1 above this
    GeneratorSpec generator = GeneratorSpec::sobol(0);
};

/// First-order and total Sobol' indices with effective dimensions.
struct GsaReport {
    std::vector<double> first_order; // clipped so 0 <= S_i <= S_i^tot <= 1
    std::vector<double> total;
    std::vector<double> first_order_raw; // direct estimates before clipping
    std::vector<double> total_raw;

    double f0 = 0.0;
    double variance = 0.0;
    double sum_first_order = 0.0; // sum of clipped S_i
    double d_average = 0.0;       // sum of clipped S_i^tot
    std::size_t d_truncation = 0;
    std::size_t d_superposition_bound = 0;
    bool d_superposition_refined = false; // bound tightened to 1 by additivity
    char func_class = 'C';

    std::size_t dimension = 0;
    std::size_t samples = 0;
    std::uint64_t evaluations = 0;

    std::string target_label;
    std::string scheme_label;
    double fd_shift = 0.0;
};

/// Direct-evaluation estimators: D+2 function values per sample point give
/// every S_i and S_i^tot. m_samples must be a power of two.
GsaReport sobol_indices(const HypercubeFunction& f, std::size_t m_samples,
                        const GsaOptions& opt = {});

/// Smallest prefix d of the sampling order whose complement looks negligible:
/// (sum of trailing totals * d) / (sum of leading totals * (D-d)) < threshold.
/// Returns D when the test never fires before the complement empties.
std::size_t truncation_dimension(const std::vector<double>& total, double threshold = 0.01);

/// A: the prefix test fires within class_a_fraction * D at the 5% level.
/// B: first-order indices carry at least class_b_min_sum of the variance and
///    the average dimension stays small (low-order interactions dominate).
/// C: the rest (dominant high-order interactions).
char classify(const GsaReport& report, const GsaOptions& opt = {});

/// Wrap the path-construction + payoff (+ single-path finite difference)
/// pipeline as a function of the D uniforms and run sobol_indices on it.
/// Multi-asset models must have zero correlation (independent inputs).
GsaReport gsa_on_pricer(const SimulationRun& run, const Estimand& target,
                        std::size_t m_samples, const GsaOptions& opt = {});

} // namespace qmc
