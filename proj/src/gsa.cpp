#include "qmc/gsa.hpp"

#include "qmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

namespace {

bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t truncation_or_max(const std::vector<double>& total, double threshold,
                              bool* fired = nullptr) {
    const std::size_t d_max = total.size();
    double all = 0.0;
    for (double t : total) all += t;
    QMC_NUMERIC_REQUIRE(all > 0.0, "gsa: all total indices vanish (degenerate function)");
    double front = 0.0;
    for (std::size_t d = 1; d < d_max; ++d) {
        front += total[d - 1];
        if (front <= 0.0) continue;
        const double back = all - front;
        const double ratio = (back * static_cast<double>(d)) /
                             (front * static_cast<double>(d_max - d));
        if (ratio < threshold) {
            if (fired) *fired = true;
            return d;
        }
    }
    // The full prefix always qualifies (empty complement).
    if (fired) *fired = true;
    return d_max;
}

} // namespace

std::size_t truncation_dimension(const std::vector<double>& total, double threshold) {
    return truncation_or_max(total, threshold);
}

char classify(const GsaReport& report, const GsaOptions& opt) {
    const std::size_t d = truncation_or_max(report.total, opt.class_a_threshold);
    const auto limit = std::max<std::size_t>(
        1, static_cast<std::size_t>(opt.class_a_fraction * static_cast<double>(report.dimension)));
    if (d <= limit && d < report.dimension) return 'A';
    if (report.dimension == 1 && d == 1) return 'A';
    if (report.sum_first_order >= opt.class_b_min_sum && report.d_average <= opt.class_b_max_avg)
        return 'B';
    return 'C';
}

GsaReport sobol_indices(const HypercubeFunction& f, std::size_t m_samples,
                        const GsaOptions& opt) {
    const std::size_t d = f.dimension;
    QMC_REQUIRE(d >= 1, "gsa: dimension must be positive");
    QMC_REQUIRE(is_power_of_two(m_samples), "gsa: sample count must be a power of two");

    // One 2D-dimensional stream split into the base point x and the shifted
    // point x'.
    PointGenerator gen =
        opt.generator.kind == GeneratorSpec::Kind::Sobol
            ? PointGenerator::sobol(2 * d, opt.generator.section, m_samples)
            : PointGenerator::pseudo(opt.generator.seed, 2 * d);
    const Matrix block = gen.next_points(m_samples);

    std::vector<double> fx(m_samples), fxp(m_samples);
    std::uint64_t evals = 0;
    for (std::size_t k = 0; k < m_samples; ++k) {
        fx[k] = f.eval(block.row(k));
        fxp[k] = f.eval(block.row(k) + d);
        evals += 2;
    }

    const double m = static_cast<double>(m_samples);
    double f0 = 0.0;
    for (double v : fx) f0 += v;
    f0 /= m;
    double variance = 0.0;
    for (double v : fx) variance += (v - f0) * (v - f0);
    variance /= m;
    QMC_NUMERIC_REQUIRE(variance > 0.0 && variance >= 1e-14 * f0 * f0,
                        "gsa: function is numerically constant, indices undefined");

    std::vector<double> s_num(d, 0.0), t_num(d, 0.0);
    std::vector<double> row(d);
    for (std::size_t k = 0; k < m_samples; ++k) {
        const double* x = block.row(k);
        const double* xp = x + d;
        std::copy(x, x + d, row.begin());
        for (std::size_t i = 0; i < d; ++i) {
            const double saved = row[i];
            row[i] = xp[i];
            const double fxx = f.eval(row.data());
            ++evals;
            row[i] = saved;
            s_num[i] += (fxp[k] - f0) * (fxx - fx[k]);
            t_num[i] += (fx[k] - fxx) * (fx[k] - fxx);
        }
    }

    GsaReport report;
    report.dimension = d;
    report.samples = m_samples;
    report.evaluations = evals;
    report.f0 = f0;
    report.variance = variance;
    report.first_order_raw.resize(d);
    report.total_raw.resize(d);
    report.first_order.resize(d);
    report.total.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        report.first_order_raw[i] = s_num[i] / (m * variance);
        report.total_raw[i] = t_num[i] / (2.0 * m * variance);
        report.total[i] = std::clamp(report.total_raw[i], 0.0, 1.0);
        report.first_order[i] = std::clamp(report.first_order_raw[i], 0.0, report.total[i]);
        report.sum_first_order += report.first_order[i];
        report.d_average += report.total[i];
    }
    report.d_truncation = truncation_dimension(report.total, opt.truncation_threshold);
    report.d_superposition_refined = report.sum_first_order >= opt.superposition_sum;
    report.d_superposition_bound = report.d_superposition_refined ? 1 : report.d_truncation;
    report.func_class = classify(report, opt);
    return report;
}

GsaReport gsa_on_pricer(const SimulationRun& run, const Estimand& target,
                        std::size_t m_samples, const GsaOptions& opt) {
    run.validate();
    for (std::size_t i = 0; i < run.model.n_assets(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            QMC_REQUIRE(run.model.correlation(i, j) == 0.0,
                        "gsa: variance-based indices need independent inputs; "
                        "use zero correlation");
    if (std::holds_alternative<CliquetOption>(run.payoff) &&
        (target.target == Target::Delta || target.target == Target::Gamma))
        throw ConfigError("gsa: identically zero target (cliquet spot sensitivities vanish "
                          "by scale invariance)");

    PathEstimator estimator(run, target);
    HypercubeFunction f;
    f.dimension = estimator.dimension();
    f.eval = [&estimator](const double* u) { return estimator.eval_uniforms(u); };

    GsaReport report = sobol_indices(f, m_samples, opt);
    report.target_label = target.label();
    report.scheme_label = run.scheme.normalized(run.model.n_assets()).label();
    report.fd_shift = run.fd_shift;
    return report;
}

} // namespace qmc
