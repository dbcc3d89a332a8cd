#include "tmvn/moments.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "tmvn/errors.hpp"

namespace tmvn {
namespace detail {

MomentReps moment_reps(const ModelParams& p, const qmc::Plan& plan, bool with_covariance) {
  const CBundle b = c_bundle(p, plan, with_covariance ? 2 : 1);
  const Matrix& sigma = p.sigma.dense();
  MomentReps out;
  out.method = b.method;
  out.points_used = b.points_used;
  out.target_met = b.target_met;
  out.nu.resize(b.replicates);
  if (with_covariance) out.lambda.resize(b.replicates);
  for (int s = 0; s < b.replicates; ++s) {
    out.nu[s] = p.mu + sigma * b.grad_log[s];
    if (with_covariance) {
      // C^{-1} grad grad' C - C^{-2} grad C grad C' is the Hessian of log C.
      out.lambda[s] = SymMatrix::symmetrized(sigma + sigma * b.hess_log[s] * sigma).dense();
    }
  }
  return out;
}

MomentReps moment_reps(const ModelParams& p, const IntegratorConfig& cfg, bool with_covariance) {
  const PlanChoice choice = choose_plan(p, cfg);
  MomentReps out = moment_reps(p, choice.plan, with_covariance);
  out.target_met = choice.target_met;
  return out;
}

MomentPair aggregate(const ModelParams& p, const MomentReps& reps) {
  const Index d = p.dim();
  const int n = static_cast<int>(reps.nu.size());
  MomentPair out;
  out.method = reps.method;
  out.points_used = reps.points_used;
  out.target_met = reps.target_met;
  out.nu.resize(d);
  out.nu_std_error.resize(d);
  std::vector<double> comp(n);
  for (Index i = 0; i < d; ++i) {
    for (int s = 0; s < n; ++s) comp[s] = reps.nu[s](i);
    const qmc::MeanSe ms = qmc::mean_se(comp);
    out.nu(i) = ms.mean;
    out.nu_std_error(i) = ms.std_error;
  }
  if (reps.lambda.empty()) return out;

  Matrix lam(d, d);
  out.lambda_std_error.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      for (int s = 0; s < n; ++s) comp[s] = reps.lambda[s](i, j);
      const qmc::MeanSe ms = qmc::mean_se(comp);
      lam(i, j) = ms.mean;
      out.lambda_std_error(i, j) = ms.std_error;
    }
  }
  lam = SymMatrix::symmetrized(lam).dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(lam);
  const double min_eval = es.eigenvalues()(0);
  if (min_eval < 0.0) {
    const double floor_tol = 1e-6 * std::max(1.0, frobenius_norm(lam));
    if (min_eval < -floor_tol) {
      throw IllConditioned("covariance estimate has eigenvalue " + std::to_string(min_eval));
    }
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    lam = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    out.clipped = true;
  }
  out.lambda = SymMatrix::symmetrized(lam);
  return out;
}

}  // namespace detail

VectorEstimate mean_vector(const ModelParams& p, const IntegratorConfig& cfg) {
  const MomentPair mp = detail::aggregate(p, detail::moment_reps(p, cfg, false));
  VectorEstimate out;
  out.value = mp.nu;
  out.std_error = mp.nu_std_error;
  out.method = mp.method;
  out.points_used = mp.points_used;
  out.target_met = mp.target_met;
  return out;
}

MomentPair covariance_matrix(const ModelParams& p, const IntegratorConfig& cfg) {
  return detail::aggregate(p, detail::moment_reps(p, cfg, true));
}

double log_mgf(const Vector& t, const ModelParams& p, const IntegratorConfig& cfg) {
  if (t.size() != p.dim()) throw InputError("log_mgf: t has the wrong dimension");
  require_finite(t, "t");
  const detail::PlanChoice choice = detail::choose_plan(p, cfg);
  const Matrix& sigma = p.sigma.dense();
  const Vector shifted = p.mu + sigma * t;
  const double base = qmc::summarize(detail::log_orthant(p.mu, sigma, choice.plan).log_rep).log_mean;
  const double moved =
      qmc::summarize(detail::log_orthant(shifted, sigma, choice.plan).log_rep).log_mean;
  // The Gaussian factors of the two normalizing constants cancel.
  return -base + t.dot(p.mu) + 0.5 * t.dot(sigma * t) + moved;
}

}  // namespace tmvn
