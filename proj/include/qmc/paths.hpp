#pragma once

#include "qmc/market.hpp"
#include "qmc/matrix.hpp"

#include <cstddef>
#include <vector>

namespace qmc {

/// Batch of simulated asset paths, path-major then step-major then asset.
struct PathBatch {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::size_t n_assets = 0;
    std::vector<double> values;

    double* path(std::size_t k) { return values.data() + k * n_steps * n_assets; }
    const double* path(std::size_t k) const { return values.data() + k * n_steps * n_assets; }
    double at(std::size_t k, std::size_t j, std::size_t i) const {
        return values[(k * n_steps + j) * n_assets + i];
    }
};

/// Everything derived from (model, grid, scheme) that the per-path kernels
/// need: time increments, drifts, the factor root and the variate-to-feature
/// assignment of the chosen sampling strategy. Low-index variates are mapped
/// to the most important path features, which is what makes the strategies
/// differ under low-discrepancy sampling while leaving the law unchanged.
struct PathPlan {
    std::size_t n_steps = 0;
    std::size_t n_assets = 0;
    SchemeSpec scheme;
    std::vector<double> times;
    std::vector<double> dt;
    std::vector<double> drift;   // [j*n_assets + i]
    Matrix factor_root;          // A with A A^T = Sigma (unused for the joint map)

    std::vector<double> sqrt_dt; // SD

    struct BridgeNode {          // BBD, in consumption order
        std::size_t step;        // extended index 1..n_steps of the node
        std::size_t left, right; // extended indices of conditioning values
        double w_left, w_right, vol;
        bool terminal;
    };
    std::vector<BridgeNode> bridge;

    Matrix time_pca;  // PCA time scheme: column b = eigvec_b * sqrt(mu_b), descending
    Matrix joint_map; // joint PCA x PCA: D x D map from variates to flat Brownian values

    std::size_t dimension() const { return n_steps * n_assets; }
};

/// Per-thread scratch space for the path kernels.
struct PathWorkspace {
    std::vector<double> w;
    std::vector<double> dw;
};

PathPlan make_path_plan(const MarketModel& model, const TimeGrid& grid, SchemeSpec scheme);

/// Correlated Brownian values Y_i(t_j) for one path, out[j*n_assets + i].
void brownian_values(const PathPlan& plan, const double* z, double* out, PathWorkspace& ws);

/// Increments dY_i(t_j) = Y_i(t_j) - Y_i(t_{j-1}) for one path.
void brownian_increments(const PathPlan& plan, const double* z, double* out, PathWorkspace& ws);

/// Increments of the independent unit-variance components dW_k(t_j), before
/// the factor root is applied, out[j*n_assets + k]. Undefined for the joint
/// PCA construction, which has no separate component stage.
void component_increments(const PathPlan& plan, const double* z, double* out, PathWorkspace& ws);

/// One GBM path from a row of independent standard normals.
/// S_i(t_j) = S_i(t_{j-1}) exp[(r - sigma_i^2/2) dt_j + dY_i(t_j)].
void gbm_path(const PathPlan& plan, const double* spots, const double* z, double* out,
              PathWorkspace& ws);

/// Batched construction; Z must have plan.dimension() columns.
PathBatch gbm_paths(const PathPlan& plan, const std::vector<double>& spots, const Matrix& z);

} // namespace qmc
