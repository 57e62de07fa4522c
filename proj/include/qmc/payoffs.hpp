#pragma once

#include "qmc/market.hpp"

#include <string>
#include <variant>
#include <vector>

namespace qmc {

struct AsianCall {
    double strike;
};

/// Call on S(T), knocked out if any fixing touches either barrier.
/// Monitoring is discrete at the fixing dates; survival needs strict
/// inequalities, a fixing exactly on a barrier kills the option.
struct DoubleKnockOutCall {
    double strike;
    double lower_barrier;
    double upper_barrier;
};

/// Sum of per-period returns, each floored at 0 and capped at local_cap,
/// with a global floor on the sum. The first return is taken against S(0).
struct CliquetOption {
    double local_cap;
    double global_floor;
};

struct EuropeanBasketCall {
    double strike;
    std::vector<double> weights;
};

struct AsianBasketCall {
    double strike;
    std::vector<double> weights;
};

using PayoffSpec = std::variant<AsianCall, DoubleKnockOutCall, CliquetOption,
                                EuropeanBasketCall, AsianBasketCall>;

std::size_t payoff_assets(const PayoffSpec& spec);
std::string payoff_label(const PayoffSpec& spec);

/// Construction-time checks: barriers bracket spot, weights sum to one,
/// cap and floor non-negative, asset counts line up.
void validate_payoff(const PayoffSpec& spec, const MarketModel& model);

/// Payoff on a single path laid out [step*n_assets + asset].
double payoff_value(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                    std::size_t n_assets, const double* spots);

double discounted_payoff(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                         std::size_t n_assets, const MarketModel& model);

/// True for the Lipschitz payoffs whose pathwise derivative exists almost
/// surely (Asian and the two baskets).
bool payoff_supports_pathwise(const PayoffSpec& spec);

/// Accumulate seed * d(payoff)/d(path) into bar[step*n_assets + asset].
/// Kinks take the zero subgradient: an exactly at-the-money average
/// contributes nothing.
void payoff_path_adjoint(const PayoffSpec& spec, const double* path, std::size_t n_steps,
                         std::size_t n_assets, const double* spots, double seed, double* bar);

} // namespace qmc
