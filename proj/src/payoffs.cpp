#include "qmc/payoffs.hpp"

#include "qmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

namespace {

void check_weights(const std::vector<double>& w, std::size_t n_assets) {
    QMC_REQUIRE(w.size() == n_assets, "payoff: weight vector length must match asset count");
    double sum = 0.0;
    for (double x : w) sum += x;
    QMC_REQUIRE(std::fabs(sum - 1.0) <= 1e-12, "payoff: weights must sum to 1");
}

void check_shape(const PayoffSpec& spec, std::size_t n_assets) {
    if (payoff_assets(spec) != n_assets)
        throw ConfigError("payoff: path has " + std::to_string(n_assets) +
                          " assets, contract expects " + std::to_string(payoff_assets(spec)));
}

} // namespace

std::size_t payoff_assets(const PayoffSpec& spec) {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, EuropeanBasketCall> ||
                          std::is_same_v<T, AsianBasketCall>)
                return p.weights.size();
            else
                return 1;
        },
        spec);
}

std::string payoff_label(const PayoffSpec& spec) {
    struct Visitor {
        std::string operator()(const AsianCall&) const { return "asian"; }
        std::string operator()(const DoubleKnockOutCall&) const { return "double_ko"; }
        std::string operator()(const CliquetOption&) const { return "cliquet"; }
        std::string operator()(const EuropeanBasketCall&) const { return "euro_basket"; }
        std::string operator()(const AsianBasketCall&) const { return "asian_basket"; }
    };
    return std::visit(Visitor{}, spec);
}

void validate_payoff(const PayoffSpec& spec, const MarketModel& model) {
    check_shape(spec, model.n_assets());
    if (const auto* ko = std::get_if<DoubleKnockOutCall>(&spec)) {
        const double s0 = model.spots[0];
        QMC_REQUIRE(ko->lower_barrier < s0, "payoff: lower barrier must sit below spot");
        QMC_REQUIRE(ko->upper_barrier > s0, "payoff: upper barrier must sit above spot");
        QMC_REQUIRE(ko->strike > 0.0, "payoff: strike must be positive");
    } else if (const auto* cl = std::get_if<CliquetOption>(&spec)) {
        QMC_REQUIRE(cl->local_cap >= 0.0, "payoff: local cap must be non-negative");
        QMC_REQUIRE(cl->global_floor >= 0.0, "payoff: global floor must be non-negative");
    } else if (const auto* eb = std::get_if<EuropeanBasketCall>(&spec)) {
        check_weights(eb->weights, model.n_assets());
    } else if (const auto* ab = std::get_if<AsianBasketCall>(&spec)) {
        check_weights(ab->weights, model.n_assets());
    }
}

double payoff_value(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                    std::size_t n_assets, const double* spots) {
    check_shape(spec, n_assets);
    struct Visitor {
        const double* path;
        std::size_t n, m;
        const double* spots;

        double operator()(const AsianCall& p) const {
            double mean = 0.0;
            for (std::size_t j = 0; j < n; ++j) mean += path[j];
            mean /= static_cast<double>(n);
            return std::max(mean - p.strike, 0.0);
        }
        double operator()(const DoubleKnockOutCall& p) const {
            double lo = path[0], hi = path[0];
            for (std::size_t j = 1; j < n; ++j) {
                lo = std::min(lo, path[j]);
                hi = std::max(hi, path[j]);
            }
            if (!(lo > p.lower_barrier && hi < p.upper_barrier)) return 0.0;
            return std::max(path[n - 1] - p.strike, 0.0);
        }
        double operator()(const CliquetOption& p) const {
            double sum = 0.0;
            double prev = spots[0];
            for (std::size_t j = 0; j < n; ++j) {
                const double ret = (path[j] - prev) / prev;
                sum += std::max(0.0, std::min(p.local_cap, ret));
                prev = path[j];
            }
            return std::max(sum, p.global_floor);
        }
        double operator()(const EuropeanBasketCall& p) const {
            double basket = 0.0;
            for (std::size_t i = 0; i < m; ++i) basket += p.weights[i] * path[(n - 1) * m + i];
            return std::max(basket - p.strike, 0.0);
        }
        double operator()(const AsianBasketCall& p) const {
            double mean = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double basket = 0.0;
                for (std::size_t i = 0; i < m; ++i) basket += p.weights[i] * path[j * m + i];
                mean += basket;
            }
            mean /= static_cast<double>(n);
            return std::max(mean - p.strike, 0.0);
        }
    };
    return std::visit(Visitor{path, n_steps, n_assets, spots}, spec);
}

double discounted_payoff(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                         std::size_t n_assets, const MarketModel& model) {
    const double disc = std::exp(-model.rate * model.maturity);
    return disc * payoff_value(spec, path, n_steps, n_assets, model.spots.data());
}

bool payoff_supports_pathwise(const PayoffSpec& spec) {
    return std::holds_alternative<AsianCall>(spec) ||
           std::holds_alternative<EuropeanBasketCall>(spec) ||
           std::holds_alternative<AsianBasketCall>(spec);
}

void payoff_path_adjoint(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                         std::size_t n_assets, const double* /*spots*/, double seed,
                         double* bar) {
    check_shape(spec, n_assets);
    const std::size_t n = n_steps, m = n_assets;
    if (const auto* p = std::get_if<AsianCall>(&spec)) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += path[j];
        mean /= static_cast<double>(n);
        if (mean > p->strike) {
            const double g = seed / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) bar[j] += g;
        }
        return;
    }
    if (const auto* p = std::get_if<EuropeanBasketCall>(&spec)) {
        double basket = 0.0;
        for (std::size_t i = 0; i < m; ++i) basket += p->weights[i] * path[(n - 1) * m + i];
        if (basket > p->strike)
            for (std::size_t i = 0; i < m; ++i) bar[(n - 1) * m + i] += seed * p->weights[i];
        return;
    }
    if (const auto* p = std::get_if<AsianBasketCall>(&spec)) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < m; ++i) mean += p->weights[i] * path[j * m + i];
        mean /= static_cast<double>(n);
        if (mean > p->strike) {
            const double g = seed / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < m; ++i) bar[j * m + i] += g * p->weights[i];
        }
        return;
    }
    throw NumericError("payoff: pathwise derivative needs a Lipschitz payoff; " +
                       payoff_label(spec) + " has a discontinuity or kink");
}

} // namespace qmc
