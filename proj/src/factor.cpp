#include "qmc/factor.hpp"

#include "qmc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmc {

namespace {
constexpr double kPivotTol = 1e-12;
}

Matrix cholesky_root(const Matrix& sigma) {
    const std::size_t n = sigma.rows();
    QMC_NUMERIC_REQUIRE(sigma.cols() == n, "cholesky: matrix must be square");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(sigma(i, i)));
    if (scale == 0.0) scale = 1.0;

    Matrix a(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = sigma(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= a(j, k) * a(j, k);
        QMC_NUMERIC_REQUIRE(pivot > -kPivotTol * scale,
                            "cholesky: matrix is not positive semidefinite");
        if (pivot <= kPivotTol * scale) {
            a(j, j) = 0.0; // semidefinite direction, column tail stays zero
            continue;
        }
        a(j, j) = std::sqrt(pivot);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = sigma(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / a(j, j);
        }
    }
    return a;
}

EigenSystem symmetric_eigensystem(const Matrix& m) {
    const std::size_t n = m.rows();
    QMC_NUMERIC_REQUIRE(m.cols() == n, "eigensystem: matrix must be square");
    Eigen::MatrixXd em(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) em(i, j) = 0.5 * (m(i, j) + m(j, i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(em);
    QMC_NUMERIC_REQUIRE(solver.info() == Eigen::Success, "eigensystem: decomposition failed");

    // Eigen returns ascending order; re-sort descending with stable ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return solver.eigenvalues()(static_cast<Eigen::Index>(a)) >
               solver.eigenvalues()(static_cast<Eigen::Index>(b));
    });

    EigenSystem sys;
    sys.values.resize(n);
    sys.vectors.resize(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(order[k]);
        sys.values[k] = solver.eigenvalues()(src);
        // Fix the sign so the largest-magnitude entry is positive.
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = std::fabs(solver.eigenvectors()(static_cast<Eigen::Index>(i), src));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        const double flip =
            solver.eigenvectors()(static_cast<Eigen::Index>(arg), src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            sys.vectors(i, k) = flip * solver.eigenvectors()(static_cast<Eigen::Index>(i), src);
    }
    return sys;
}

Matrix pca_root(const Matrix& sigma) {
    const std::size_t n = sigma.rows();
    EigenSystem sys = symmetric_eigensystem(sigma);
    double scale = 0.0;
    for (double v : sys.values) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) scale = 1.0;
    Matrix a(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        QMC_NUMERIC_REQUIRE(sys.values[k] > -kPivotTol * scale,
                            "pca: matrix is not positive semidefinite");
        const double s = std::sqrt(std::max(sys.values[k], 0.0));
        for (std::size_t i = 0; i < n; ++i) a(i, k) = sys.vectors(i, k) * s;
    }
    return a;
}

Matrix cholesky_root_derivative(const Matrix& a, const Matrix& dsigma) {
    const std::size_t n = a.rows();
    Matrix da(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (a(j, j) == 0.0) continue;
        double dp = dsigma(j, j);
        for (std::size_t k = 0; k < j; ++k) dp -= 2.0 * a(j, k) * da(j, k);
        da(j, j) = 0.5 * dp / a(j, j);
        for (std::size_t i = j + 1; i < n; ++i) {
            double ds = dsigma(i, j);
            for (std::size_t k = 0; k < j; ++k) ds -= da(i, k) * a(j, k) + a(i, k) * da(j, k);
            da(i, j) = (ds - a(i, j) * da(j, j)) / a(j, j);
        }
    }
    return da;
}

Matrix brownian_time_covariance(const TimeGrid& grid) {
    const std::size_t n = grid.n_steps();
    Matrix c(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) c(j, k) = std::min(grid.times[j], grid.times[k]);
    return c;
}

} // namespace qmc
