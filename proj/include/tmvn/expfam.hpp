#pragma once

#include <string>
#include <vector>

#include "tmvn/moments.hpp"
#include "tmvn/orthant.hpp"

namespace tmvn {

/// Canonical coordinates (theta, Theta). Theta need not be PD.
struct NaturalParams {
  Vector theta;
  SymMatrix big_theta;

  NaturalParams() = default;
  /// Throws InputError on a dimension mismatch, NonFinite on NaN/Inf.
  NaturalParams(Vector theta_in, SymMatrix big_theta_in);

  Index dim() const { return theta.size(); }
};

enum class ParamTag { omega_r, outside_d };

struct ParamClass {
  ParamTag tag = ParamTag::outside_d;
  /// r for omega_r; rank of Theta when PSD, -1 when indefinite.
  int rank = -1;
  /// PSD structure of Theta (empty basis when Theta is indefinite).
  PsdClassification psd;
  /// Outside D: negative-eigenvalue direction, recession ray, or unit vector
  /// of the violating index. Empty for omega_r.
  Vector certificate;
  /// Short reason, e.g. "indefinite", "nonnegative theta", "recession ray".
  std::string reason;
  /// Maximum of theta'v over the normalized recession cone (rank-deficient
  /// cases only; 0 when the cone is trivial).
  double cone_max = 0.0;
};

NaturalParams to_natural(const ModelParams& p);
/// Throws ThetaNotPd if Theta has rank < d.
ModelParams from_natural(const NaturalParams& np);

/// (t_1..t_d, t_i t_j for i <= j in row-major order); length d + d(d+1)/2.
Vector sufficient_stats(const Vector& t);

/// Membership in the natural parameter space, stratified by rank Theta.
/// Rank-deficient PSD Theta is decided on the recession cone
/// N = null(Theta) intersected with the orthant: the point is inside iff
/// max { theta'v : v in N, v >= 0, 1'v = 1 } < -tol * ||theta||, or N = {0}.
ParamClass classify_parameter(const NaturalParams& np, double tol = kDefaultRankTol);

/// L(theta, Theta) = integral over w > 0 of exp(theta'w - w'Theta w).
/// Throws DivergentParameter outside D.
IntegralEstimate laplace_transform(const NaturalParams& np, const IntegratorConfig& cfg);

/// log L(theta, Theta).
double cgf(const NaturalParams& np, const IntegratorConfig& cfg);

/// grad_theta K = E[t] and grad_Theta K = -E[tt'] on the full symmetric
/// matrix. Moving Theta_ij and Theta_ji together changes K at rate
/// (2 - delta_ij) * d_big_theta(i, j). Requires Theta PD.
struct CgfGradient {
  Vector d_theta;
  SymMatrix d_big_theta;
  Vector d_theta_se;
  Matrix d_big_theta_se;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
};
CgfGradient grad_cgf(const NaturalParams& np, const IntegratorConfig& cfg);

struct SteepnessRecord {
  double epsilon = 0.0;
  Vector grad_theta;
  SymMatrix grad_big_theta;
  double norm_sq = 0.0;  // ||grad_theta K||^2 + ||grad_Theta K||_F^2
  double norm_sq_se = 0.0;
  double inner = 0.0;  // theta' grad_theta K
  double inner_se = 0.0;
  IntegrationMethod method = IntegrationMethod::exact1d;
};

struct SteepnessTrace {
  Vector theta;
  std::vector<double> epsilons;
  std::vector<SteepnessRecord> records;
  /// Limits as Theta -> 0, where t has independent Exp(-theta_j) coordinates.
  Vector limit_grad_theta;      // -1/theta_j
  Matrix limit_grad_big_theta;  // -(1 + delta_ij) / (theta_i theta_j)
  /// ||limit_grad_theta||^2 + ||limit_grad_big_theta||_F^2 = s + s^2 + 3 sum theta_j^-4,
  /// s = sum theta_j^-2.
  double limit_norm_sq = 0.0;
  /// s + s^2: the value obtained when E[t_j^2] is taken as theta_j^-2 on the
  /// diagonal. Reported for comparison; the trace does not converge to it.
  double diagonal_free_limit_norm_sq = 0.0;
  double limit_inner = 0.0;  // -d
};

std::vector<double> default_epsilons();

/// Evaluates grad_cgf along Theta = eps * I. Throws InputError unless theta
/// is componentwise negative and epsilons are positive and strictly
/// decreasing.
SteepnessTrace steepness_probe(const Vector& theta, const std::vector<double>& epsilons,
                               const IntegratorConfig& cfg);

/// Same, along an arbitrary sequence of PD matrices. The recorded epsilon of
/// each step is ||Theta_n||_F / sqrt(d).
SteepnessTrace steepness_probe(const Vector& theta, const std::vector<SymMatrix>& sequence,
                               const IntegratorConfig& cfg);

}  // namespace tmvn
