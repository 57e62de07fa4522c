#pragma once

namespace qmc {

/// Standard normal cumulative distribution function.
double normal_cdf(double z);

/// Standard normal density.
double normal_pdf(double z);

/// Inverse standard normal CDF on (0,1).
///
/// Rational approximation (Wichura's AS 241) polished with one Newton step,
/// absolute error well below 1e-9 across [1e-12, 1-1e-12]. Exactly
/// antisymmetric: the upper half is evaluated by mirroring the lower half.
/// Throws std::domain_error outside (0,1).
double inverse_normal_cdf(double u);

} // namespace qmc
