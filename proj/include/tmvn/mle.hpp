#pragma once

#include <string>
#include <vector>

#include "tmvn/moments.hpp"
#include "tmvn/orthant.hpp"

namespace tmvn {

/// n x d observations, every entry strictly positive.
class Sample {
 public:
  Sample() = default;
  /// Throws InputError naming the first non-positive or non-finite cell
  /// (1-based row and column), or if data has no rows or no columns.
  explicit Sample(Matrix data);

  Index n() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  Vector mean() const { return data_.colwise().mean().transpose(); }

 private:
  Matrix data_;
};

struct SampleStats {
  Vector xbar;
  SpdMatrix s_xbar;
};

/// x-bar and S(x-bar). Throws SingularSampleCovariance if n < d + 1 or
/// S(x-bar) has rank < d.
SampleStats sample_stats(const Sample& s);

/// S(alpha) = n^{-1} sum_j (x_j - alpha)(x_j - alpha)'.
SymMatrix s_alpha(const Sample& s, const Vector& alpha);

/// -n log C(mu, Sigma) - (1/2) sum_j (x_j - mu)' Sigma^{-1} (x_j - mu).
double loglik(const ModelParams& p, const Sample& s, const IntegratorConfig& cfg);
/// Same likelihood in (mu, Psi = Sigma^{-1}): -n log C(mu, Psi^{-1}) - (n/2) tr Psi S(mu).
double loglik_precision(const Vector& mu, const SpdMatrix& psi, const Sample& s,
                        const IntegratorConfig& cfg);

/// d_mu = -n Sigma^{-1} (nu - xbar);
/// d_psi(i,j) = (n/2)(2 - delta_ij)(lambda_ij + (nu_i - mu_i)(nu_j - mu_j) - a_ij),
/// a = S(mu). d_psi(i,j) is the derivative along the symmetric coordinate
/// psi_ij = psi_ji.
struct Score {
  Vector d_mu;
  SymMatrix d_psi;
  Vector d_mu_se;
  Matrix d_psi_se;
};
Score score(const ModelParams& p, const Sample& s, const IntegratorConfig& cfg);

enum class FitStatus { converged, max_iterations, necessary_condition_violated, integration_failure };
const char* to_string(FitStatus s);

enum class Solver { quasi_newton, fixed_point };
const char* to_string(Solver s);

struct FitConfig {
  int max_iterations = 200;
  /// Converged when ||nu - xbar|| <= tol (1 + ||xbar||) and
  /// ||Lambda - S||_F <= tol (1 + ||S||_F).
  double tol = 1e-6;
  IntegratorConfig integrator;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  double fd_step = 1e-5;  // relative step for the residual Jacobian
  /// NecessaryConditionViolated when the directly computed q exceeds 1 + q_slack.
  double q_slack = 1e-8;
  Solver solver = Solver::quasi_newton;

  void validate() const;
};

struct FitIteration {
  double residual = 0.0;       // combined scaled norm
  double mean_residual = 0.0;  // ||nu - xbar|| / (1 + ||xbar||)
  double cov_residual = 0.0;   // ||Lambda - S||_F / (1 + ||S||_F)
  double step = 0.0;           // accepted step length (0 for the initial point)
};

struct FitResult {
  FitStatus status = FitStatus::max_iterations;
  Vector mu;
  SymMatrix sigma;
  Vector nu;
  SymMatrix lambda;
  /// (xbar - mu)' S(mu)^{-1} (xbar - mu), via the Woodbury form.
  double q = 0.0;
  /// Same quantity by direct inversion of S(mu); used for the status check.
  double q_direct = 0.0;
  /// Score block norms divided by n.
  double score_mu_norm = 0.0;
  double score_psi_norm = 0.0;
  int iterations = 0;
  std::vector<FitIteration> trace;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
  std::string message;
};

/// Solves nu(mu, Sigma) = xbar and Lambda(mu, Sigma) = S(xbar) from the
/// start (xbar, S(xbar)), with Sigma log-Cholesky parameterized. The QMC
/// plan is fixed at the start so every residual uses the same points.
/// Throws SingularSampleCovariance via sample_stats.
FitResult fit(const Sample& s, const FitConfig& cfg);

/// q = (xbar - mu)' (S(xbar) + (xbar - mu)(xbar - mu)')^{-1} (xbar - mu), in [0, 1).
double necessary_condition(const SampleStats& stats, const Vector& mu_hat);

}  // namespace tmvn
