#include <doctest.h>

#include "qmc/factor.hpp"
#include "qmc/generator.hpp"
#include "qmc/paths.hpp"

#include <cmath>
#include <vector>

using namespace qmc;

namespace {

MarketModel paper_basket(double rho, double rate = 0.0) {
    return MarketModel::flat_correlation({80, 90, 100, 110, 120}, {0.5, 0.4, 0.2, 0.3, 0.6},
                                         rho, rate, 1.0);
}

// Columns of the linear map z -> W by feeding unit vectors.
Matrix linear_map(const PathPlan& plan) {
    const std::size_t d = plan.dimension();
    Matrix map(d, d, 0.0);
    PathWorkspace ws;
    std::vector<double> z(d, 0.0), w(d);
    for (std::size_t r = 0; r < d; ++r) {
        z[r] = 1.0;
        brownian_values(plan, z.data(), w.data(), ws);
        z[r] = 0.0;
        for (std::size_t f = 0; f < d; ++f) map(f, r) = w[f];
    }
    return map;
}

void check_exact_brownian_covariance(const PathPlan& plan, const MarketModel& model,
                                     const TimeGrid& grid, double tol) {
    // Cov[Y_i(t_j), Y_l(t_k)] = min(t_j,t_k) Sigma_il follows from M M^T of
    // the construction's linear map; brute force over unit vectors.
    const Matrix map = linear_map(plan);
    const Matrix cov = multiply_abt(map, map);
    const Matrix sigma = model.covariance();
    const std::size_t m = model.n_assets();
    for (std::size_t j = 0; j < grid.n_steps(); ++j)
        for (std::size_t k = 0; k < grid.n_steps(); ++k)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t l = 0; l < m; ++l) {
                    const double expected =
                        std::min(grid.times[j], grid.times[k]) * sigma(i, l);
                    CHECK(std::fabs(cov(j * m + i, k * m + l) - expected) <= tol);
                }
}

} // namespace

TEST_CASE("bridge on two steps matches the hand-computed weights") {
    const MarketModel model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    TimeGrid grid;
    grid.times = {0.5, 1.0};
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::BBD, Factorization::Cholesky});
    // Unit-volatility view: divide out the factor root.
    PathWorkspace ws;
    double z[2] = {1.0, 0.0};
    double w[2];
    brownian_values(plan, z, w, ws);
    CHECK(w[1] / 0.3 == doctest::Approx(1.0));       // W(1) = z1
    CHECK(w[0] / 0.3 == doctest::Approx(0.5));       // W(0.5) = z1/2 + z2/2
    double z2[2] = {0.0, 1.0};
    brownian_values(plan, z2, w, ws);
    CHECK(w[1] / 0.3 == doctest::Approx(0.0));
    CHECK(w[0] / 0.3 == doctest::Approx(0.5));
}

TEST_CASE("zero variates give zero Brownian values under every scheme") {
    const MarketModel model = paper_basket(0.6);
    const TimeGrid grid = TimeGrid::uniform(1.0, 8);
    for (TimeScheme ts : {TimeScheme::SD, TimeScheme::BBD, TimeScheme::PCA})
        for (Factorization f : {Factorization::Cholesky, Factorization::PCA}) {
            PathPlan plan = make_path_plan(model, grid, {ts, f});
            std::vector<double> z(plan.dimension(), 0.0), w(plan.dimension(), 1.0);
            PathWorkspace ws;
            brownian_values(plan, z.data(), w.data(), ws);
            for (double v : w) CHECK(v == 0.0);
        }
}

TEST_CASE("all schemes produce the exact target covariance") {
    const MarketModel model = paper_basket(0.6);
    const TimeGrid grid = TimeGrid::uniform(1.0, 4);
    for (TimeScheme ts : {TimeScheme::SD, TimeScheme::BBD, TimeScheme::PCA})
        for (Factorization f : {Factorization::Cholesky, Factorization::PCA}) {
            PathPlan plan = make_path_plan(model, grid, {ts, f});
            check_exact_brownian_covariance(plan, model, grid, 1e-12);
        }
}

TEST_CASE("bridge covariance is exact on a non-dyadic grid") {
    const MarketModel model = MarketModel::single_asset(100, 1.0, 0.0, 1.3);
    TimeGrid grid;
    grid.times = {0.1, 0.35, 0.6, 0.71, 1.02, 1.3};
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::BBD, Factorization::Cholesky});
    check_exact_brownian_covariance(plan, model, grid, 1e-12);
}

TEST_CASE("joint pca equals the brute-force eigensystem of the assembled matrix") {
    const MarketModel model = MarketModel::flat_correlation({100, 110}, {0.3, 0.5}, 0.4, 0.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 3);
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::PCA, Factorization::PCA});

    // Assemble C_time (x) Sigma explicitly (6x6) and decompose it directly.
    const Matrix ct = brownian_time_covariance(grid);
    const Matrix sigma = model.covariance();
    Matrix full(6, 6);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t l = 0; l < 2; ++l)
                    full(j * 2 + i, k * 2 + l) = ct(j, k) * sigma(i, l);
    const EigenSystem direct = symmetric_eigensystem(full);

    // Same sorted eigenvalues: the squared column norms of the joint map.
    for (std::size_t r = 0; r < 6; ++r) {
        double norm2 = 0.0;
        for (std::size_t f = 0; f < 6; ++f) norm2 += plan.joint_map(f, r) * plan.joint_map(f, r);
        CHECK(norm2 == doctest::Approx(direct.values[r]).epsilon(1e-10));
    }
    // And the same reconstruction.
    const Matrix recon = multiply_abt(plan.joint_map, plan.joint_map);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b)
            CHECK(std::fabs(recon(a, b) - full(a, b)) < 1e-10);
}

TEST_CASE("gbm paths stay flat in the zero-volatility drift-free limit") {
    const MarketModel model = MarketModel::single_asset(100, 1e-12, 0.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 8);
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::SD, Factorization::Cholesky});
    auto gen = PointGenerator::pseudo(1, plan.dimension());
    const Matrix z = gen.gaussian_block(16);
    const PathBatch batch = gbm_paths(plan, model.spots, z);
    for (double v : batch.values) CHECK(v == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("single deterministic step reproduces the plug-in value") {
    const MarketModel model = MarketModel::single_asset(100, 0.3, 0.05, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 1);
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::SD, Factorization::Cholesky});
    PathWorkspace ws;
    double z = 0.0, s;
    gbm_path(plan, model.spots.data(), &z, &s, ws);
    CHECK(s == doctest::Approx(100.0 * std::exp(0.05 - 0.5 * 0.09)));
}

TEST_CASE("sampled covariance agrees with the law for every time scheme") {
    const MarketModel model = MarketModel::flat_correlation({100, 100}, {0.4, 0.25}, 0.5, 0.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 4);
    const std::size_t n = 1 << 15;
    const Matrix sigma = model.covariance();
    for (TimeScheme ts : {TimeScheme::SD, TimeScheme::BBD, TimeScheme::PCA}) {
        PathPlan plan = make_path_plan(model, grid, {ts, Factorization::Cholesky});
        auto gen = PointGenerator::pseudo(99, plan.dimension());
        const Matrix z = gen.gaussian_block(n);
        PathWorkspace ws;
        std::vector<double> w(plan.dimension());
        // accumulate E[W_0(t_2) W_1(t_3)] and E[W_0(t_1)^2]
        double c_mixed = 0.0, c_var = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            brownian_values(plan, z.row(k), w.data(), ws);
            c_mixed += w[2 * 2 + 0] * w[3 * 2 + 1];
            c_var += w[0] * w[0];
        }
        c_mixed /= n;
        c_var /= n;
        // three standard errors of a product-normal sample at this n
        CHECK(std::fabs(c_mixed - std::min(grid.times[2], grid.times[3]) * sigma(0, 1)) < 0.02);
        CHECK(std::fabs(c_var - grid.times[0] * sigma(0, 0)) < 0.01);
    }
}

TEST_CASE("martingale check: discounted terminal mean returns the spot") {
    const MarketModel model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 8);
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::BBD, Factorization::Cholesky});
    auto gen = PointGenerator::sobol(plan.dimension(), 0, 1 << 16);
    const Matrix z = gen.gaussian_block(1 << 16);
    const PathBatch batch = gbm_paths(plan, model.spots, z);
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < batch.n_paths; ++k) {
        const double st = batch.at(k, 7, 0);
        mean += st;
        sq += st * st;
    }
    mean /= batch.n_paths;
    const double se = std::sqrt((sq / batch.n_paths - mean * mean) / batch.n_paths);
    CHECK(std::fabs(mean - 100.0) < 3.0 * se);
}

TEST_CASE("variate block shape mismatches are rejected") {
    const MarketModel model = MarketModel::single_asset(100, 0.3, 0.0, 1.0);
    const TimeGrid grid = TimeGrid::uniform(1.0, 8);
    PathPlan plan = make_path_plan(model, grid, {TimeScheme::SD, Factorization::Cholesky});
    Matrix z(4, 5);
    CHECK_THROWS(gbm_paths(plan, model.spots, z));
}
