#pragma once

#include "qmc/market.hpp"
#include "qmc/matrix.hpp"

#include <vector>

namespace qmc {

/// Lower-triangular A with A A^T = Sigma. Tolerant of semidefinite input:
/// pivots below -1e-12 (relative) raise NumericError, pivots within the
/// tolerance of zero produce a zero column tail.
Matrix cholesky_root(const Matrix& sigma);

struct EigenSystem {
    std::vector<double> values; // descending
    Matrix vectors;             // column k belongs to values[k]
};

/// Symmetric eigendecomposition with deterministic ordering: eigenvalues
/// descending, ties broken by original index, each eigenvector's
/// largest-magnitude entry made positive.
EigenSystem symmetric_eigensystem(const Matrix& m);

/// A = V Lambda^(1/2) with columns in descending-eigenvalue order.
Matrix pca_root(const Matrix& sigma);

/// Forward-mode derivative of the Cholesky root: given Sigma, its root A and
/// a symmetric perturbation dSigma, returns dA. Zero pivots propagate zero
/// sensitivities.
Matrix cholesky_root_derivative(const Matrix& a, const Matrix& dsigma);

/// Covariance matrix of a discretized unit Brownian motion on the grid,
/// C[j][k] = min(t_j, t_k).
Matrix brownian_time_covariance(const TimeGrid& grid);

} // namespace qmc
