#pragma once

namespace tmvn::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double x);
double log_pdf(double x);
/// Phi(x).
double cdf(double x);
/// log Phi(x), accurate in the far lower tail where Phi underflows.
double log_cdf(double x);
/// phi(x) / Phi(x).
double inverse_mills(double x);

/// Phi^{-1}(p) for p in (0, 1) (Wichura AS241).
double quantile(double p);
/// Phi^{-1}(exp(log_p)); usable for probabilities far below DBL_MIN.
double quantile_from_log(double log_p);

/// Draw from N(0,1) restricted to (lower, inf) by inversion at uniform u.
/// Stable in both tails: when lower > 0 the upper-tail mass is inverted in
/// log scale.
struct TailDraw {
  double value;
  double log_mass;  // log P(Z > lower)
};
TailDraw draw_above(double lower, double u);

}  // namespace tmvn::normal
