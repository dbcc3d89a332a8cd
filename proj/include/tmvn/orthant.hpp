#pragma once

#include <cstdint>
#include <vector>

#include "tmvn/matrix_core.hpp"
#include "tmvn/qmc.hpp"

namespace tmvn {

/// (mu, Sigma) of the positive-orthant truncated normal N_d(mu, Sigma; 0).
struct ModelParams {
  Vector mu;
  SpdMatrix sigma;

  ModelParams() = default;
  ModelParams(Vector mu_in, SpdMatrix sigma_in);
  ModelParams(Vector mu_in, const Matrix& sigma_in);

  Index dim() const { return mu.size(); }
};

struct IntegratorConfig {
  int qmc_points = 4096;  // per shift
  int random_shifts = 16;
  std::uint64_t seed = 20240917;
  double target_rel_error = 1e-4;
  long max_points = 1L << 20;  // cap on qmc_points * random_shifts

  /// Throws InputError unless qmc_points >= 64, random_shifts >= 2,
  /// target_rel_error > 0 and max_points >= qmc_points * random_shifts.
  void validate() const;
  qmc::Plan base_plan() const { return {qmc_points, random_shifts, seed}; }
};

enum class IntegrationMethod { exact1d, exact2d, qmc, finite_diff };
const char* to_string(IntegrationMethod m);

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long points_used = 0;
  IntegrationMethod method = IntegrationMethod::exact1d;
  /// log(value); stays finite when value under- or overflows.
  double log_value = 0.0;
  /// False when target_rel_error was not reached within max_points.
  bool target_met = true;
};

struct VectorEstimate {
  Vector value;
  Vector std_error;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
};

struct MatrixEstimate {
  SymMatrix value;
  Matrix std_error;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
};

/// C(mu, Sigma) = (2 pi)^{d/2} |Sigma|^{1/2} P(Z > 0), Z ~ N(mu, Sigma).
IntegralEstimate normalizing_constant(const ModelParams& p, const IntegratorConfig& cfg);
/// P(Z > 0).
IntegralEstimate orthant_probability(const ModelParams& p, const IntegratorConfig& cfg);
/// grad_mu C by conditioning on each boundary face.
VectorEstimate grad_c(const ModelParams& p, const IntegratorConfig& cfg);
/// grad_mu C by central differences of normalizing_constant (common random
/// numbers). Independent of the conditioning identity used by grad_c.
VectorEstimate grad_c_finite_diff(const ModelParams& p, const IntegratorConfig& cfg);
/// grad grad' C; central differences of grad_mu log C, symmetrized.
MatrixEstimate hess_c(const ModelParams& p, const IntegratorConfig& cfg);

/// Finite-difference step used for mu_i.
double mu_step(double mu_i);

namespace detail {

/// log P(Z > 0) per QMC shift (a single entry for exact paths).
struct LogOrthant {
  std::vector<double> log_rep;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
};

/// log-integrand on (0,1)^{d-1} whose mean is P(Z > 0) (separation of
/// variables with sequential truncation). Requires d >= 2.
qmc::LogIntegrand genz_integrand(const Vector& mu, const Matrix& sigma);

/// Fixed-plan evaluation; no refinement.
LogOrthant log_orthant(const Vector& mu, const Matrix& sigma, const qmc::Plan& plan);

/// Exact bivariate orthant log-probability, relative error ~1e-13.
double log_bvn_orthant(double mu1, double mu2, double s11, double s12, double s22);

/// Doubles points per shift from cfg.qmc_points until the relative standard
/// error of P meets target_rel_error or the cap is hit.
struct PlanChoice {
  qmc::Plan plan;
  bool target_met = true;
};
PlanChoice choose_plan(const ModelParams& p, const IntegratorConfig& cfg);

/// Returns cfg with qmc_points fixed to plan and refinement disabled, so
/// subsequent evaluations reuse the same point set (common random numbers).
IntegratorConfig frozen(const IntegratorConfig& cfg, const qmc::Plan& plan);

/// Per-replicate log P, grad log P and (order 2) Hessian of log P.
/// grad log C == grad log P since the Gaussian factor does not depend on mu.
struct CBundle {
  int replicates = 1;
  std::vector<double> log_p;
  std::vector<Vector> grad_log;
  std::vector<Matrix> hess_log;
  double log_gauss_factor = 0.0;  // (d/2) log 2 pi + (1/2) log |Sigma|
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  bool target_met = true;
};
CBundle c_bundle(const ModelParams& p, const qmc::Plan& plan, int order);
CBundle c_bundle(const ModelParams& p, const IntegratorConfig& cfg, int order);

}  // namespace detail
}  // namespace tmvn
