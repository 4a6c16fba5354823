#pragma once

namespace gamdiag {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_pdf(double x);
/// Phi(x).
double norm_cdf(double x);
/// 1 - Phi(x), accurate in the upper tail.
double norm_sf(double x);
/// Phi^{-1}(p); -inf / +inf at 0 / 1.
double norm_quantile(double p);

}  // namespace gamdiag
