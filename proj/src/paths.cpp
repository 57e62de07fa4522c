#include "qmc/paths.hpp"

#include "qmc/errors.hpp"
#include "qmc/factor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace qmc {

namespace {

// Breadth-first bisection over extended time indices 0..n (0 is the origin).
// The terminal value comes first, then midpoints at ever finer scales, so the
// early variates carry the coarse shape of the path.
std::vector<PathPlan::BridgeNode> build_bridge(const std::vector<double>& times) {
    const std::size_t n = times.size();
    auto t = [&](std::size_t ext) { return ext == 0 ? 0.0 : times[ext - 1]; };

    std::vector<PathPlan::BridgeNode> nodes;
    nodes.push_back({n, 0, n, 0.0, 0.0, std::sqrt(t(n)), true});

    std::deque<std::pair<std::size_t, std::size_t>> ranges;
    ranges.emplace_back(0, n);
    while (!ranges.empty()) {
        auto [lo, hi] = ranges.front();
        ranges.pop_front();
        if (hi - lo < 2) continue;
        const std::size_t mid = (lo + hi + 1) / 2;
        const double tl = t(lo), tm = t(mid), th = t(hi);
        PathPlan::BridgeNode node;
        node.step = mid;
        node.left = lo;
        node.right = hi;
        node.w_left = (th - tm) / (th - tl);
        node.w_right = (tm - tl) / (th - tl);
        node.vol = std::sqrt((th - tm) * (tm - tl) / (th - tl));
        node.terminal = false;
        nodes.push_back(node);
        ranges.emplace_back(lo, mid);
        ranges.emplace_back(mid, hi);
    }
    return nodes;
}

// Independent unit-variance component values W_k(t_j) into ws.w[j*n_assets+k],
// consuming variates in the plan's assignment order.
void component_values(const PathPlan& plan, const double* z, PathWorkspace& ws) {
    const std::size_t n = plan.n_steps, m = plan.n_assets;
    ws.w.assign(n * m, 0.0);
    switch (plan.scheme.time_scheme) {
    case TimeScheme::SD: {
        // Component-major order: variates of component k are the block
        // [k*n, (k+1)*n), sequential in time.
        for (std::size_t k = 0; k < m; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += plan.sqrt_dt[j] * z[k * n + j];
                ws.w[j * m + k] = acc;
            }
        }
        break;
    }
    case TimeScheme::BBD: {
        // Node-major order: each bridge node consumes one variate per
        // component, most important component first.
        for (std::size_t r = 0; r < plan.bridge.size(); ++r) {
            const auto& node = plan.bridge[r];
            for (std::size_t k = 0; k < m; ++k) {
                const double zz = z[r * m + k];
                double v = node.vol * zz;
                if (!node.terminal) {
                    const double wl =
                        node.left == 0 ? 0.0 : ws.w[(node.left - 1) * m + k];
                    const double wr = ws.w[(node.right - 1) * m + k];
                    v += node.w_left * wl + node.w_right * wr;
                }
                ws.w[(node.step - 1) * m + k] = v;
            }
        }
        break;
    }
    case TimeScheme::PCA: {
        // Time-eigenvalue-major order: variate b*m+k drives the b-th
        // principal component of component k's path.
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t b = 0; b < n; ++b) {
                const double zz = z[b * m + k];
                if (zz == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j)
                    ws.w[j * m + k] += plan.time_pca(j, b) * zz;
            }
        break;
    }
    }
}

void correlate_values(const PathPlan& plan, PathWorkspace& ws, double* out) {
    const std::size_t n = plan.n_steps, m = plan.n_assets;
    if (m == 1) {
        const double a = plan.factor_root(0, 0);
        for (std::size_t j = 0; j < n; ++j) out[j] = a * ws.w[j];
        return;
    }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += plan.factor_root(i, k) * ws.w[j * m + k];
            out[j * m + i] = s;
        }
}

} // namespace

PathPlan make_path_plan(const MarketModel& model, const TimeGrid& grid, SchemeSpec scheme) {
    model.validate();
    grid.validate();
    QMC_REQUIRE(std::fabs(grid.maturity() - model.maturity) < 1e-12,
                "paths: grid must end at the model maturity");

    PathPlan plan;
    plan.n_steps = grid.n_steps();
    plan.n_assets = model.n_assets();
    plan.scheme = scheme.normalized(plan.n_assets);
    plan.times = grid.times;

    plan.dt.resize(plan.n_steps);
    for (std::size_t j = 0; j < plan.n_steps; ++j) plan.dt[j] = grid.dt(j);

    plan.drift.resize(plan.n_steps * plan.n_assets);
    for (std::size_t j = 0; j < plan.n_steps; ++j)
        for (std::size_t i = 0; i < plan.n_assets; ++i)
            plan.drift[j * plan.n_assets + i] =
                (model.rate - 0.5 * model.vols[i] * model.vols[i]) * plan.dt[j];

    const Matrix sigma = model.covariance();

    if (plan.scheme.joint_pca()) {
        // One PCA of the full covariance min(t_j,t_k) * Sigma_il. Its
        // eigensystem is the Kronecker product of the two factors; variate r
        // drives the r-th largest eigenvalue product.
        const EigenSystem time_sys = symmetric_eigensystem(brownian_time_covariance(grid));
        const EigenSystem asset_sys = symmetric_eigensystem(sigma);
        const std::size_t n = plan.n_steps, m = plan.n_assets, d = n * m;

        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        pairs.reserve(d);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < m; ++b) pairs.emplace_back(a, b);
        std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
            return time_sys.values[p.first] * asset_sys.values[p.second] >
                   time_sys.values[q.first] * asset_sys.values[q.second];
        });

        plan.joint_map.resize(d, d);
        for (std::size_t r = 0; r < d; ++r) {
            const auto [a, b] = pairs[r];
            const double lam =
                std::max(time_sys.values[a], 0.0) * std::max(asset_sys.values[b], 0.0);
            const double s = std::sqrt(lam);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < m; ++i)
                    plan.joint_map(j * m + i, r) = s * time_sys.vectors(j, a) * asset_sys.vectors(i, b);
        }
        return plan;
    }

    plan.factor_root = plan.scheme.factorization == Factorization::Cholesky
                           ? cholesky_root(sigma)
                           : pca_root(sigma);

    switch (plan.scheme.time_scheme) {
    case TimeScheme::SD:
        plan.sqrt_dt.resize(plan.n_steps);
        for (std::size_t j = 0; j < plan.n_steps; ++j) plan.sqrt_dt[j] = std::sqrt(plan.dt[j]);
        break;
    case TimeScheme::BBD:
        plan.bridge = build_bridge(grid.times);
        break;
    case TimeScheme::PCA: {
        const EigenSystem sys = symmetric_eigensystem(brownian_time_covariance(grid));
        plan.time_pca.resize(plan.n_steps, plan.n_steps);
        for (std::size_t b = 0; b < plan.n_steps; ++b) {
            const double s = std::sqrt(std::max(sys.values[b], 0.0));
            for (std::size_t j = 0; j < plan.n_steps; ++j)
                plan.time_pca(j, b) = s * sys.vectors(j, b);
        }
        break;
    }
    }
    return plan;
}

void brownian_values(const PathPlan& plan, const double* z, double* out, PathWorkspace& ws) {
    const std::size_t d = plan.dimension();
    if (plan.scheme.joint_pca()) {
        for (std::size_t f = 0; f < d; ++f) {
            double s = 0.0;
            for (std::size_t r = 0; r < d; ++r) s += plan.joint_map(f, r) * z[r];
            out[f] = s;
        }
        return;
    }
    component_values(plan, z, ws);
    correlate_values(plan, ws, out);
}

void brownian_increments(const PathPlan& plan, const double* z, double* out, PathWorkspace& ws) {
    const std::size_t n = plan.n_steps, m = plan.n_assets;
    ws.dw.resize(n * m);
    brownian_values(plan, z, ws.dw.data(), ws);
    for (std::size_t i = 0; i < m; ++i) out[i] = ws.dw[i];
    for (std::size_t j = n; j-- > 1;)
        for (std::size_t i = 0; i < m; ++i)
            out[j * m + i] = ws.dw[j * m + i] - ws.dw[(j - 1) * m + i];
}

void component_increments(const PathPlan& plan, const double* z, double* out,
                          PathWorkspace& ws) {
    QMC_NUMERIC_REQUIRE(!plan.scheme.joint_pca(),
                        "paths: the joint PCA construction has no component stage");
    const std::size_t n = plan.n_steps, m = plan.n_assets;
    component_values(plan, z, ws);
    for (std::size_t i = 0; i < m; ++i) out[i] = ws.w[i];
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i)
            out[j * m + i] = ws.w[j * m + i] - ws.w[(j - 1) * m + i];
}

void gbm_path(const PathPlan& plan, const double* spots, const double* z, double* out,
              PathWorkspace& ws) {
    const std::size_t n = plan.n_steps, m = plan.n_assets;
    ws.dw.resize(n * m);
    brownian_values(plan, z, ws.dw.data(), ws);
    for (std::size_t i = 0; i < m; ++i)
        out[i] = spots[i] * std::exp(plan.drift[i] + ws.dw[i]);
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            const double dy = ws.dw[j * m + i] - ws.dw[(j - 1) * m + i];
            out[j * m + i] = out[(j - 1) * m + i] * std::exp(plan.drift[j * m + i] + dy);
        }
}

PathBatch gbm_paths(const PathPlan& plan, const std::vector<double>& spots, const Matrix& z) {
    QMC_REQUIRE(z.cols() == plan.dimension(), "paths: variate block has " +
                                                  std::to_string(z.cols()) +
                                                  " columns, plan needs " +
                                                  std::to_string(plan.dimension()));
    QMC_REQUIRE(spots.size() == plan.n_assets, "paths: spot vector length mismatch");
    PathBatch batch;
    batch.n_paths = z.rows();
    batch.n_steps = plan.n_steps;
    batch.n_assets = plan.n_assets;
    batch.values.resize(batch.n_paths * plan.dimension());
    PathWorkspace ws;
    for (std::size_t k = 0; k < batch.n_paths; ++k)
        gbm_path(plan, spots.data(), z.row(k), batch.path(k), ws);
    return batch;
}

} // namespace qmc
