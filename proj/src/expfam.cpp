#include "tmvn/expfam.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include "tmvn/errors.hpp"
#include "tmvn/simplex.hpp"

namespace tmvn {

NaturalParams::NaturalParams(Vector theta_in, SymMatrix big_theta_in)
    : theta(std::move(theta_in)), big_theta(std::move(big_theta_in)) {
  if (big_theta.dim() != theta.size()) throw InputError("natural parameters: dimension mismatch");
  require_finite(theta, "theta");
  require_finite(big_theta.dense(), "Theta");
}

NaturalParams to_natural(const ModelParams& p) {
  return NaturalParams(p.sigma.solve(p.mu), SymMatrix::symmetrized(0.5 * p.sigma.inverse()));
}

ModelParams from_natural(const NaturalParams& np) {
  const PsdResult r = classify_psd(np.big_theta);
  const auto* c = std::get_if<PsdClassification>(&r);
  if (c == nullptr || c->rank < np.dim()) throw ThetaNotPd("Theta is not positive definite");
  const SpdMatrix big_theta(np.big_theta);
  const Matrix sigma = SymMatrix::symmetrized(0.5 * big_theta.inverse()).dense();
  return ModelParams(sigma * np.theta, sigma);
}

Vector sufficient_stats(const Vector& t) {
  require_finite(t, "t");
  const Index d = t.size();
  Vector out(d + d * (d + 1) / 2);
  out.head(d) = t;
  Index k = d;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) out(k++) = t(i) * t(j);
  }
  return out;
}

ParamClass classify_parameter(const NaturalParams& np, double tol) {
  require_finite(np.theta, "theta");
  const Index d = np.dim();
  ParamClass out;
  const PsdResult r = classify_psd(np.big_theta, tol);
  if (const auto* neg = std::get_if<NotPsd>(&r)) {
    out.tag = ParamTag::outside_d;
    out.certificate = neg->direction;
    out.reason = "indefinite";
    return out;
  }
  out.psd = std::get<PsdClassification>(r);
  out.rank = out.psd.rank;
  if (out.rank == d) {
    out.tag = ParamTag::omega_r;
    return out;
  }

  const double bound = -tol * np.theta.norm();
  if (out.rank == 0) {
    Index j = 0;
    out.cone_max = np.theta.maxCoeff(&j);
    if (out.cone_max < bound) {
      out.tag = ParamTag::omega_r;
    } else {
      out.tag = ParamTag::outside_d;
      out.certificate = Vector::Unit(d, j);
      out.reason = "nonnegative theta";
    }
    return out;
  }

  // v in the orthant with H1'v = 0 lies in null(Theta); 1'v = 1 normalizes.
  const Matrix h1 = out.psd.range_basis();
  Matrix a(out.rank + 1, d);
  a.topRows(out.rank) = h1.transpose();
  a.row(out.rank).setOnes();
  Vector b = Vector::Zero(out.rank + 1);
  b(out.rank) = 1.0;
  const lp::Result res = lp::maximize(a, b, np.theta);
  if (res.status == lp::Status::infeasible) {
    out.tag = ParamTag::omega_r;
    return out;
  }
  if (res.status != lp::Status::optimal) throw Error("classify_parameter: cone LP failed");
  out.cone_max = res.objective;
  if (res.objective < bound) {
    out.tag = ParamTag::omega_r;
  } else {
    out.tag = ParamTag::outside_d;
    out.certificate = res.x;
    out.reason = "recession ray";
  }
  return out;
}

namespace {

IntegralEstimate from_log(double log_value, double rel_se, IntegrationMethod method, long points,
                          bool target_met) {
  IntegralEstimate est;
  est.log_value = log_value;
  est.value = std::exp(log_value);
  est.std_error = est.value * rel_se;
  est.method = method;
  est.points_used = points;
  est.target_met = target_met;
  return est;
}

// Importance sampling with proposal prod_j eps exp(-eps w_j); the weight
// exp((theta + eps 1)'w - w'Theta w) / eps^d stays bounded when eps is below
// the decay rate of theta along the recession cone.
IntegralEstimate rank_deficient_transform(const NaturalParams& np, double eps,
                                          const IntegratorConfig& cfg) {
  cfg.validate();
  const Index d = np.dim();
  const Vector shifted = np.theta.array() + eps;
  const Matrix& big = np.big_theta.dense();
  const double log_norm = -static_cast<double>(d) * std::log(eps);
  qmc::LogIntegrand f;
  f.dim = static_cast<int>(d);
  f.scratch_size = static_cast<int>(d);
  f.log_f = [&](const double* w, double* x) {
    for (Index j = 0; j < d; ++j) x[j] = -std::log1p(-w[j]) / eps;
    double lin = 0.0, quad = 0.0;
    for (Index i = 0; i < d; ++i) {
      lin += shifted(i) * x[i];
      double row = 0.0;
      for (Index j = 0; j < d; ++j) row += big(i, j) * x[j];
      quad += x[i] * row;
    }
    return lin - quad + log_norm;
  };
  qmc::Plan plan = cfg.base_plan();
  while (true) {
    const qmc::ReplicateSummary sum = qmc::summarize(qmc::log_means(f, plan));
    const bool met = sum.rel_std_error <= cfg.target_rel_error;
    if (met || 2 * plan.total_points() > cfg.max_points) {
      return from_log(sum.log_mean, sum.rel_std_error, IntegrationMethod::qmc, plan.total_points(),
                      met);
    }
    plan.points_per_shift *= 2;
  }
}

}  // namespace

IntegralEstimate laplace_transform(const NaturalParams& np, const IntegratorConfig& cfg) {
  const ParamClass cls = classify_parameter(np);
  if (cls.tag == ParamTag::outside_d) {
    throw DivergentParameter("Laplace transform diverges (" + cls.reason + ")");
  }
  const Index d = np.dim();
  if (cls.rank == d) {
    // Completing the square: exp(theta'Sigma theta / 2) C(Sigma theta, Sigma), Sigma = Theta^{-1}/2.
    const ModelParams p = from_natural(np);
    const detail::PlanChoice choice = detail::choose_plan(p, cfg);
    const detail::LogOrthant lo = detail::log_orthant(p.mu, p.sigma.dense(), choice.plan);
    const qmc::ReplicateSummary sum = qmc::summarize(lo.log_rep);
    const double log_value = 0.5 * np.theta.dot(p.mu) +
                             0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                             0.5 * p.sigma.log_det() + sum.log_mean;
    return from_log(log_value, sum.rel_std_error, lo.method, lo.points_used, choice.target_met);
  }
  if (cls.rank == 0) {
    const double log_value = -(-np.theta.array()).log().sum();
    return from_log(log_value, 0.0, IntegrationMethod::exact1d, 0, true);
  }
  const double eps = cls.cone_max < 0.0 ? -0.5 * cls.cone_max : 1.0;
  return rank_deficient_transform(np, eps, cfg);
}

double cgf(const NaturalParams& np, const IntegratorConfig& cfg) {
  return laplace_transform(np, cfg).log_value;
}

namespace {

struct GradReps {
  std::vector<Vector> d_theta;
  std::vector<Matrix> d_big_theta;
  IntegrationMethod method;
  long points_used;
  bool target_met;
};

GradReps grad_reps(const NaturalParams& np, const IntegratorConfig& cfg) {
  const ModelParams p = from_natural(np);
  const detail::MomentReps m = detail::moment_reps(p, cfg, true);
  GradReps out{m.nu, {}, m.method, m.points_used, m.target_met};
  out.d_big_theta.reserve(m.nu.size());
  for (std::size_t s = 0; s < m.nu.size(); ++s) {
    out.d_big_theta.push_back(-(m.lambda[s] + m.nu[s] * m.nu[s].transpose()));
  }
  return out;
}

}  // namespace

CgfGradient grad_cgf(const NaturalParams& np, const IntegratorConfig& cfg) {
  const GradReps g = grad_reps(np, cfg);
  const Index d = np.dim();
  const std::size_t n = g.d_theta.size();
  CgfGradient out;
  out.method = g.method;
  out.points_used = g.points_used;
  out.target_met = g.target_met;
  out.d_theta.resize(d);
  out.d_theta_se.resize(d);
  std::vector<double> comp(n);
  for (Index i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < n; ++s) comp[s] = g.d_theta[s](i);
    const qmc::MeanSe ms = qmc::mean_se(comp);
    out.d_theta(i) = ms.mean;
    out.d_theta_se(i) = ms.std_error;
  }
  Matrix mean(d, d);
  out.d_big_theta_se.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      for (std::size_t s = 0; s < n; ++s) comp[s] = g.d_big_theta[s](i, j);
      const qmc::MeanSe ms = qmc::mean_se(comp);
      mean(i, j) = ms.mean;
      out.d_big_theta_se(i, j) = ms.std_error;
    }
  }
  out.d_big_theta = SymMatrix::symmetrized(mean);
  return out;
}

std::vector<double> default_epsilons() { return {1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001}; }

namespace {

void require_negative(const Vector& theta) {
  if (theta.size() == 0) throw InputError("theta must be non-empty");
  require_finite(theta, "theta");
  if ((theta.array() >= 0.0).any()) throw InputError("theta must be componentwise negative");
}

SteepnessRecord probe_point(const Vector& theta, const SymMatrix& big_theta, double eps,
                            const IntegratorConfig& cfg) {
  const GradReps g = grad_reps(NaturalParams(theta, big_theta), cfg);
  const std::size_t n = g.d_theta.size();
  std::vector<double> norm_sq(n), inner(n);
  Vector gt = Vector::Zero(theta.size());
  Matrix gb = Matrix::Zero(theta.size(), theta.size());
  for (std::size_t s = 0; s < n; ++s) {
    norm_sq[s] = g.d_theta[s].squaredNorm() + g.d_big_theta[s].squaredNorm();
    inner[s] = theta.dot(g.d_theta[s]);
    gt += g.d_theta[s];
    gb += g.d_big_theta[s];
  }
  SteepnessRecord rec;
  rec.epsilon = eps;
  rec.grad_theta = gt / static_cast<double>(n);
  rec.grad_big_theta = SymMatrix::symmetrized(gb / static_cast<double>(n));
  const qmc::MeanSe ns = qmc::mean_se(norm_sq);
  const qmc::MeanSe in = qmc::mean_se(inner);
  rec.norm_sq = ns.mean;
  rec.norm_sq_se = ns.std_error;
  rec.inner = in.mean;
  rec.inner_se = in.std_error;
  rec.method = g.method;
  return rec;
}

SteepnessTrace run_probe(const Vector& theta, const std::vector<SymMatrix>& sequence,
                         const std::vector<double>& labels, const IntegratorConfig& cfg) {
  const Index d = theta.size();
  SteepnessTrace trace;
  trace.theta = theta;
  trace.epsilons = labels;
  trace.records.resize(sequence.size());
  const Vector inv = theta.cwiseInverse();
  trace.limit_grad_theta = -inv;
  trace.limit_grad_big_theta = -inv * inv.transpose();
  trace.limit_grad_big_theta.diagonal() *= 2.0;
  const double s = inv.squaredNorm();
  trace.limit_norm_sq = s + trace.limit_grad_big_theta.squaredNorm();
  trace.diagonal_free_limit_norm_sq = s + s * s;
  trace.limit_inner = -static_cast<double>(d);

  std::exception_ptr failure;
  const int count = static_cast<int>(sequence.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    try {
      trace.records[k] = probe_point(theta, sequence[k], labels[k], cfg);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return trace;
}

}  // namespace

SteepnessTrace steepness_probe(const Vector& theta, const std::vector<double>& epsilons,
                               const IntegratorConfig& cfg) {
  require_negative(theta);
  if (epsilons.empty()) throw InputError("epsilon sequence is empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0) || !std::isfinite(epsilons[k])) {
      throw InputError("epsilons must be positive");
    }
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw InputError("epsilons must be strictly decreasing");
    }
  }
  const Index d = theta.size();
  std::vector<SymMatrix> seq;
  seq.reserve(epsilons.size());
  for (double e : epsilons) seq.push_back(SymMatrix::symmetrized(e * Matrix::Identity(d, d)));
  return run_probe(theta, seq, epsilons, cfg);
}

SteepnessTrace steepness_probe(const Vector& theta, const std::vector<SymMatrix>& sequence,
                               const IntegratorConfig& cfg) {
  require_negative(theta);
  if (sequence.empty()) throw InputError("Theta sequence is empty");
  const Index d = theta.size();
  std::vector<double> labels;
  labels.reserve(sequence.size());
  for (const SymMatrix& m : sequence) {
    if (m.dim() != d) throw InputError("Theta sequence: dimension mismatch");
    labels.push_back(frobenius_norm(m) / std::sqrt(static_cast<double>(d)));
  }
  return run_probe(theta, sequence, labels, cfg);
}

}  // namespace tmvn
