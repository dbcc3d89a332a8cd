#pragma once

#include <vector>

#include "tmvn/orthant.hpp"

namespace tmvn {

/// Mean and covariance of X ~ N_d(mu, Sigma; 0), with standard errors from
/// the randomized-shift replicates (zero on exact paths).
struct MomentPair {
  Vector nu;
  SymMatrix lambda;
  Vector nu_std_error;
  Matrix lambda_std_error;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
  bool clipped = false;  // tiny negative eigenvalues of lambda floored to 0
};

/// nu = mu + C^{-1} Sigma grad C.
VectorEstimate mean_vector(const ModelParams& p, const IntegratorConfig& cfg);

/// nu and Lambda = Sigma + C^{-1} Sigma (grad grad' C) Sigma - (nu - mu)(nu - mu)'.
/// Throws IllConditioned when Lambda has an eigenvalue below
/// -1e-6 * max(1, ||Lambda||_F).
MomentPair covariance_matrix(const ModelParams& p, const IntegratorConfig& cfg);

/// K(t) = log E exp(t'X) = -log C(mu, Sigma) + t'mu + t'Sigma t / 2 + log C(mu + Sigma t, Sigma).
double log_mgf(const Vector& t, const ModelParams& p, const IntegratorConfig& cfg);

namespace detail {

struct MomentReps {
  std::vector<Vector> nu;
  std::vector<Matrix> lambda;  // empty when only the mean was requested
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
};

MomentReps moment_reps(const ModelParams& p, const qmc::Plan& plan, bool with_covariance);
MomentReps moment_reps(const ModelParams& p, const IntegratorConfig& cfg, bool with_covariance);

/// Averages replicates into a MomentPair and applies the PSD floor.
MomentPair aggregate(const ModelParams& p, const MomentReps& reps);

}  // namespace detail
}  // namespace tmvn
