#include "qmc/market.hpp"

#include "qmc/errors.hpp"

#include <cmath>

namespace qmc {

Matrix MarketModel::covariance() const {
    const std::size_t n = n_assets();
    Matrix sigma(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sigma(i, j) = vols[i] * correlation(i, j) * vols[j];
    return sigma;
}

void MarketModel::validate() const {
    const std::size_t n = n_assets();
    QMC_REQUIRE(n >= 1, "model: at least one asset required");
    QMC_REQUIRE(vols.size() == n, "model: spots and vols must have equal length");
    QMC_REQUIRE(correlation.rows() == n && correlation.cols() == n,
                "model: correlation matrix shape mismatch");
    QMC_REQUIRE(maturity > 0.0, "model: maturity must be positive");
    for (double s : spots) QMC_REQUIRE(s > 0.0, "model: spots must be strictly positive");
    for (double v : vols) QMC_REQUIRE(v > 0.0, "model: vols must be strictly positive");
    for (std::size_t i = 0; i < n; ++i) {
        QMC_REQUIRE(std::fabs(correlation(i, i) - 1.0) < 1e-14,
                    "model: correlation diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j) {
            QMC_REQUIRE(std::fabs(correlation(i, j) - correlation(j, i)) < 1e-14,
                        "model: correlation must be symmetric");
            QMC_REQUIRE(std::fabs(correlation(i, j)) <= 1.0,
                        "model: correlations must lie in [-1,1]");
        }
    }
    // Positive semidefiniteness is established by the factorization itself.
}

MarketModel MarketModel::single_asset(double spot, double vol, double rate, double maturity) {
    MarketModel m;
    m.spots = {spot};
    m.vols = {vol};
    m.correlation = Matrix::identity(1);
    m.rate = rate;
    m.maturity = maturity;
    m.validate();
    return m;
}

MarketModel MarketModel::flat_correlation(std::vector<double> spots, std::vector<double> vols,
                                          double rho, double rate, double maturity) {
    MarketModel m;
    const std::size_t n = spots.size();
    m.spots = std::move(spots);
    m.vols = std::move(vols);
    m.correlation = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) m.correlation(i, j) = rho;
    m.rate = rate;
    m.maturity = maturity;
    m.validate();
    return m;
}

void TimeGrid::validate() const {
    QMC_REQUIRE(!times.empty(), "grid: at least one time step required");
    QMC_REQUIRE(times.front() > 0.0, "grid: times must be positive");
    for (std::size_t j = 1; j < times.size(); ++j)
        QMC_REQUIRE(times[j] > times[j - 1], "grid: times must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double maturity, std::size_t n_steps) {
    QMC_REQUIRE(n_steps >= 1, "grid: at least one time step required");
    QMC_REQUIRE(maturity > 0.0, "grid: maturity must be positive");
    TimeGrid g;
    g.times.resize(n_steps);
    for (std::size_t j = 0; j < n_steps; ++j)
        g.times[j] = maturity * static_cast<double>(j + 1) / static_cast<double>(n_steps);
    g.times.back() = maturity;
    return g;
}

std::string SchemeSpec::label() const {
    std::string t = time_scheme == TimeScheme::SD    ? "sd"
                    : time_scheme == TimeScheme::BBD ? "bbd"
                                                     : "pca";
    std::string f = factorization == Factorization::Cholesky ? "chol" : "pca";
    return t + "_" + f;
}

SchemeSpec SchemeSpec::parse(const std::string& label) {
    const auto sep = label.find('_');
    QMC_REQUIRE(sep != std::string::npos,
                "scheme: expected '<sd|bbd|pca>_<chol|pca>', got '" + label + "'");
    const std::string t = label.substr(0, sep), f = label.substr(sep + 1);
    SchemeSpec s;
    if (t == "sd")
        s.time_scheme = TimeScheme::SD;
    else if (t == "bbd")
        s.time_scheme = TimeScheme::BBD;
    else if (t == "pca")
        s.time_scheme = TimeScheme::PCA;
    else
        throw ConfigError("scheme: unknown time scheme '" + t + "'");
    if (f == "chol")
        s.factorization = Factorization::Cholesky;
    else if (f == "pca")
        s.factorization = Factorization::PCA;
    else
        throw ConfigError("scheme: unknown factorization '" + f + "'");
    return s;
}

} // namespace qmc
