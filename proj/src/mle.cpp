#include "tmvn/mle.hpp"

#include <cmath>
#include <Eigen/QR>
#include <optional>

#include "tmvn/errors.hpp"

namespace tmvn {

Sample::Sample(Matrix data) : data_(std::move(data)) {
  if (data_.rows() == 0) throw InputError("no rows");
  if (data_.cols() == 0) throw InputError("no columns");
  for (Index i = 0; i < data_.rows(); ++i) {
    for (Index j = 0; j < data_.cols(); ++j) {
      const double v = data_(i, j);
      if (!std::isfinite(v) || v <= 0.0) {
        throw InputError("entry at row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) +
                         " is not strictly positive");
      }
    }
  }
}

SymMatrix s_alpha(const Sample& s, const Vector& alpha) {
  if (alpha.size() != s.dim()) throw InputError("s_alpha: alpha has the wrong dimension");
  const Matrix centered = s.data().rowwise() - alpha.transpose();
  return SymMatrix::symmetrized(centered.transpose() * centered / static_cast<double>(s.n()));
}

SampleStats sample_stats(const Sample& s) {
  if (s.n() < s.dim() + 1) {
    throw SingularSampleCovariance("need at least d + 1 observations");
  }
  const Vector xbar = s.mean();
  const SymMatrix cov = s_alpha(s, xbar);
  const PsdResult r = classify_psd(cov);
  const auto* c = std::get_if<PsdClassification>(&r);
  if (c == nullptr || c->rank < s.dim()) {
    throw SingularSampleCovariance("sample covariance is singular");
  }
  try {
    return {xbar, SpdMatrix(cov)};
  } catch (const SingularSigma&) {
    throw SingularSampleCovariance("sample covariance is singular");
  }
}

double loglik(const ModelParams& p, const Sample& s, const IntegratorConfig& cfg) {
  if (p.dim() != s.dim()) throw InputError("loglik: dimension mismatch");
  const double log_c = normalizing_constant(p, cfg).log_value;
  const Matrix a = s_alpha(s, p.mu).dense();
  const double n = static_cast<double>(s.n());
  return -n * log_c - 0.5 * n * p.sigma.solve(a).trace();
}

double loglik_precision(const Vector& mu, const SpdMatrix& psi, const Sample& s,
                        const IntegratorConfig& cfg) {
  if (mu.size() != s.dim() || psi.dim() != s.dim()) {
    throw InputError("loglik_precision: dimension mismatch");
  }
  const ModelParams p(mu, SymMatrix::symmetrized(psi.inverse()).dense());
  const double log_c = normalizing_constant(p, cfg).log_value;
  const Matrix a = s_alpha(s, mu).dense();
  const double n = static_cast<double>(s.n());
  return -n * log_c - 0.5 * n * (psi.dense().cwiseProduct(a)).sum();
}

Score score(const ModelParams& p, const Sample& s, const IntegratorConfig& cfg) {
  if (p.dim() != s.dim()) throw InputError("score: dimension mismatch");
  const Index d = p.dim();
  const double n = static_cast<double>(s.n());
  const Vector xbar = s.mean();
  const Matrix a = s_alpha(s, p.mu).dense();
  const detail::MomentReps reps = detail::moment_reps(p, cfg, true);
  const std::size_t r = reps.nu.size();

  std::vector<Vector> dmu(r);
  std::vector<Matrix> dpsi(r);
  for (std::size_t k = 0; k < r; ++k) {
    dmu[k] = -n * p.sigma.solve(Vector(reps.nu[k] - xbar));
    const Vector c = reps.nu[k] - p.mu;
    Matrix g = reps.lambda[k] + c * c.transpose() - a;
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) g(i, j) *= 0.5 * n * (i == j ? 1.0 : 2.0);
    }
    dpsi[k] = g;
  }

  Score out;
  out.d_mu.resize(d);
  out.d_mu_se.resize(d);
  Matrix mean(d, d);
  out.d_psi_se.resize(d, d);
  std::vector<double> comp(r);
  for (Index i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < r; ++k) comp[k] = dmu[k](i);
    const qmc::MeanSe ms = qmc::mean_se(comp);
    out.d_mu(i) = ms.mean;
    out.d_mu_se(i) = ms.std_error;
    for (Index j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < r; ++k) comp[k] = dpsi[k](i, j);
      const qmc::MeanSe mp = qmc::mean_se(comp);
      mean(i, j) = mp.mean;
      out.d_psi_se(i, j) = mp.std_error;
    }
  }
  out.d_psi = SymMatrix::symmetrized(mean);
  return out;
}

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "Converged";
    case FitStatus::max_iterations: return "MaxIterations";
    case FitStatus::necessary_condition_violated: return "NecessaryConditionViolated";
    case FitStatus::integration_failure: return "IntegrationFailure";
  }
  return "unknown";
}

const char* to_string(Solver s) {
  return s == Solver::quasi_newton ? "quasi-newton" : "fixed-point";
}

void FitConfig::validate() const {
  if (max_iterations < 1) throw InputError("max_iterations must be >= 1");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw InputError("backtrack_factor must lie in (0, 1)");
  }
  if (max_backtracks < 0) throw InputError("max_backtracks must be >= 0");
  if (!(fd_step > 0.0)) throw InputError("fd_step must be positive");
  if (!(q_slack >= 0.0)) throw InputError("q_slack must be nonnegative");
  integrator.validate();
}

double necessary_condition(const SampleStats& stats, const Vector& mu_hat) {
  if (mu_hat.size() != stats.xbar.size()) throw InputError("necessary_condition: dimension mismatch");
  return woodbury_quadratic(stats.s_xbar, Vector(stats.xbar - mu_hat));
}

namespace {

struct Problem {
  Index d;
  Vector xbar;
  Matrix s;
  double mean_scale, cov_scale;
  IntegratorConfig cfg;  // frozen plan
};

struct Evaluation {
  Vector residual;
  double mean_part = 0.0, cov_part = 0.0;
  Vector nu;
  Matrix lambda;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;

  double norm() const { return residual.norm(); }
};

Index unknowns(Index d) { return d + d * (d + 1) / 2; }

// z = (mu, strict lower entries of L and log diag(L), row by row).
Vector pack(const Vector& mu, const Matrix& sigma) {
  const Index d = mu.size();
  const Matrix l = Eigen::LLT<Matrix>(sigma).matrixL();
  Vector z(unknowns(d));
  z.head(d) = mu;
  Index k = d;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) z(k++) = i == j ? std::log(l(i, i)) : l(i, j);
  }
  return z;
}

void unpack(const Vector& z, Index d, Vector& mu, Matrix& sigma) {
  mu = z.head(d);
  Matrix l = Matrix::Zero(d, d);
  Index k = d;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) l(i, j) = i == j ? std::exp(z(k++)) : z(k++);
  }
  sigma = l * l.transpose();
}

// Off-diagonal entries carry sqrt(2) so the block norm is the Frobenius norm.
Evaluation evaluate_at(const Problem& pr, const Vector& mu, const Matrix& sigma) {
  const ModelParams p(mu, SymMatrix::symmetrized(sigma).dense());
  const MomentPair mp = detail::aggregate(p, detail::moment_reps(p, pr.cfg, true));
  Evaluation ev;
  ev.nu = mp.nu;
  ev.lambda = mp.lambda.dense();
  ev.method = mp.method;
  ev.points_used = mp.points_used;
  const Index d = pr.d;
  ev.residual.resize(unknowns(d));
  ev.residual.head(d) = (mp.nu - pr.xbar) / pr.mean_scale;
  const Matrix diff = (ev.lambda - pr.s) / pr.cov_scale;
  Index k = d;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j <= i; ++j) ev.residual(k++) = i == j ? diff(i, i) : std::sqrt(2.0) * diff(i, j);
  }
  if (!ev.residual.allFinite()) throw NonFinite("moment residual is not finite");
  ev.mean_part = ev.residual.head(d).norm();
  ev.cov_part = ev.residual.tail(ev.residual.size() - d).norm();
  return ev;
}

Evaluation evaluate(const Problem& pr, const Vector& z) {
  Vector mu;
  Matrix sigma;
  unpack(z, pr.d, mu, sigma);
  return evaluate_at(pr, mu, sigma);
}

Matrix jacobian(const Problem& pr, const Vector& z, double rel_step) {
  const Index m = z.size();
  Matrix j(m, m);
  for (Index k = 0; k < m; ++k) {
    const double h = rel_step * (1.0 + std::abs(z(k)));
    Vector zp = z, zm = z;
    zp(k) += h;
    zm(k) -= h;
    j.col(k) = (evaluate(pr, zp).residual - evaluate(pr, zm).residual) / (2.0 * h);
  }
  return j;
}

std::optional<Evaluation> try_evaluate(const Problem& pr, const Vector& mu, const Matrix& sigma) {
  try {
    return evaluate_at(pr, mu, sigma);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success && m.allFinite();
}

}  // namespace

FitResult fit(const Sample& s, const FitConfig& cfg) {
  cfg.validate();
  const SampleStats stats = sample_stats(s);
  const Index d = s.dim();

  Problem pr;
  pr.d = d;
  pr.xbar = stats.xbar;
  pr.s = stats.s_xbar.dense();
  pr.mean_scale = 1.0 + pr.xbar.norm();
  pr.cov_scale = 1.0 + frobenius_norm(pr.s);

  FitResult res;
  Vector mu = pr.xbar;
  Matrix sigma = pr.s;
  std::optional<Evaluation> cur;
  try {
    const detail::PlanChoice choice =
        detail::choose_plan(ModelParams(mu, stats.s_xbar), cfg.integrator);
    pr.cfg = detail::frozen(cfg.integrator, choice.plan);
    cur = evaluate_at(pr, mu, sigma);
  } catch (const Error& e) {
    res.status = FitStatus::integration_failure;
    res.message = e.what();
    res.mu = mu;
    res.sigma = SymMatrix::symmetrized(sigma);
    return res;
  }

  auto record = [&](double step) {
    res.trace.push_back({cur->norm(), cur->mean_part, cur->cov_part, step});
  };
  auto converged = [&] { return cur->mean_part <= cfg.tol && cur->cov_part <= cfg.tol; };
  record(0.0);

  res.status = FitStatus::max_iterations;
  for (int it = 0; it < cfg.max_iterations && !converged(); ++it) {
    Vector new_mu;
    Matrix new_sigma;
    double t = 1.0;
    bool accepted = false;
    std::optional<Evaluation> trial;

    if (cfg.solver == Solver::quasi_newton) {
      const Vector z = pack(mu, sigma);
      Vector delta;
      try {
        const Matrix j = jacobian(pr, z, cfg.fd_step);
        delta = j.colPivHouseholderQr().solve(-cur->residual);
      } catch (const Error& e) {
        res.status = FitStatus::integration_failure;
        res.message = e.what();
        break;
      }
      if (!delta.allFinite()) {
        res.message = "singular Jacobian";
        break;
      }
      for (int b = 0; b <= cfg.max_backtracks; ++b, t *= cfg.backtrack_factor) {
        unpack(Vector(z + t * delta), d, new_mu, new_sigma);
        trial = try_evaluate(pr, new_mu, new_sigma);
        if (trial && trial->norm() < cur->norm()) {
          accepted = true;
          break;
        }
      }
    } else {
      const Vector dmu = pr.xbar - cur->nu;
      const Matrix dsigma = pr.s - cur->lambda;
      for (int b = 0; b <= cfg.max_backtracks; ++b, t *= cfg.backtrack_factor) {
        new_mu = mu + t * dmu;
        new_sigma = SymMatrix::symmetrized(sigma + t * dsigma).dense();
        if (!is_pd(new_sigma)) continue;
        trial = try_evaluate(pr, new_mu, new_sigma);
        if (trial && trial->norm() < cur->norm()) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      res.message = "line search stalled";
      break;
    }
    mu = new_mu;
    sigma = new_sigma;
    cur = trial;
    res.iterations = it + 1;
    record(t);
  }

  res.mu = mu;
  res.sigma = SymMatrix::symmetrized(sigma);
  res.nu = cur->nu;
  res.lambda = SymMatrix::symmetrized(cur->lambda);
  res.method = cur->method;
  res.points_used = cur->points_used;
  res.q = necessary_condition(stats, mu);
  if (res.status == FitStatus::integration_failure || !converged()) {
    if (res.status != FitStatus::integration_failure) res.status = FitStatus::max_iterations;
    return res;
  }

  res.status = FitStatus::converged;
  try {
    const SpdMatrix s_hat(s_alpha(s, mu));
    const Vector dev = stats.xbar - mu;
    res.q_direct = s_hat.inv_quadratic(dev);
  } catch (const SingularSigma&) {
    res.q_direct = res.q;
  }
  if (res.q_direct > 1.0 + cfg.q_slack) {
    res.status = FitStatus::necessary_condition_violated;
    res.message = "q exceeds 1 at the candidate solution";
  }
  try {
    const Score sc = score(ModelParams(mu, res.sigma.dense()), s, pr.cfg);
    const double n = static_cast<double>(s.n());
    res.score_mu_norm = sc.d_mu.norm() / n;
    res.score_psi_norm = frobenius_norm(sc.d_psi) / n;
  } catch (const Error& e) {
    res.status = FitStatus::integration_failure;
    res.message = e.what();
  }
  return res;
}

}  // namespace tmvn
