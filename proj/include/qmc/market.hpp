#pragma once

#include "qmc/matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace qmc {

/// Multi-asset Black-Scholes market: spots, volatilities, constant
/// correlation structure, flat rate and maturity.
struct MarketModel {
    std::vector<double> spots;  // S_i(0) > 0
    std::vector<double> vols;   // sigma_i > 0, per sqrt(year)
    Matrix correlation;         // symmetric, unit diagonal
    double rate = 0.0;          // flat risk-free rate
    double maturity = 1.0;      // years

    std::size_t n_assets() const { return spots.size(); }

    /// Covariance of the log dynamics, diag(sigma) * R * diag(sigma).
    Matrix covariance() const;

    void validate() const;

    static MarketModel single_asset(double spot, double vol, double rate, double maturity);
    static MarketModel flat_correlation(std::vector<double> spots, std::vector<double> vols,
                                        double rho, double rate, double maturity);
};

/// Strictly increasing fixing/simulation times t_1 < ... < t_n = T, with
/// t_0 = 0 implicit.
struct TimeGrid {
    std::vector<double> times;

    std::size_t n_steps() const { return times.size(); }
    double maturity() const { return times.back(); }
    double dt(std::size_t j) const { return j == 0 ? times[0] : times[j] - times[j - 1]; }

    void validate() const;

    static TimeGrid uniform(double maturity, std::size_t n_steps);
};

enum class TimeScheme { SD, BBD, PCA };
enum class Factorization { Cholesky, PCA };

/// Sampling strategy: time discretization crossed with the factorization of
/// the asset covariance. PCA x PCA is carried out as one joint full-space
/// construction rather than two nested ones.
struct SchemeSpec {
    TimeScheme time_scheme = TimeScheme::SD;
    Factorization factorization = Factorization::Cholesky;

    /// Single-asset models make the factorization irrelevant; it is
    /// normalized to Cholesky so equal strategies compare equal.
    SchemeSpec normalized(std::size_t n_assets) const {
        SchemeSpec s = *this;
        if (n_assets == 1) s.factorization = Factorization::Cholesky;
        return s;
    }

    bool joint_pca() const {
        return time_scheme == TimeScheme::PCA && factorization == Factorization::PCA;
    }

    std::string label() const;
    static SchemeSpec parse(const std::string& label);
};

} // namespace qmc
