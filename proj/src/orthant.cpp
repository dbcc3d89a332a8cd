#include "tmvn/orthant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quadrature.hpp"
#include "tmvn/errors.hpp"
#include "tmvn/normal_dist.hpp"

namespace tmvn {

ModelParams::ModelParams(Vector mu_in, SpdMatrix sigma_in)
    : mu(std::move(mu_in)), sigma(std::move(sigma_in)) {
  if (mu.size() != sigma.dim()) throw InputError("mu and Sigma dimensions differ");
  require_finite(mu, "mu");
}

ModelParams::ModelParams(Vector mu_in, const Matrix& sigma_in)
    : ModelParams(std::move(mu_in), SpdMatrix(sigma_in)) {}

void IntegratorConfig::validate() const {
  if (qmc_points < 64) throw InputError("qmc_points must be >= 64");
  if (random_shifts < 2) throw InputError("random_shifts must be >= 2");
  if (!(target_rel_error > 0.0)) throw InputError("target_rel_error must be positive");
  if (max_points < static_cast<long>(qmc_points) * random_shifts) {
    throw InputError("max_points must be >= qmc_points * random_shifts");
  }
}

const char* to_string(IntegrationMethod m) {
  switch (m) {
    case IntegrationMethod::exact1d:
      return "exact1d";
    case IntegrationMethod::exact2d:
      return "exact2d";
    case IntegrationMethod::qmc:
      return "qmc";
    case IntegrationMethod::finite_diff:
      return "finite_diff";
  }
  return "unknown";
}

double mu_step(double mu_i) { return std::max(1e-4, 1e-4 * (1.0 + std::abs(mu_i))); }

namespace detail {
namespace {

constexpr double kDrop = 60.0;  // e^-60 relative cut on the integrand

IntegrationMethod combine(IntegrationMethod a, IntegrationMethod b) {
  return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

// Replicate s of a vector that may hold a single broadcast entry.
template <class T>
const T& rep(const std::vector<T>& v, int s) {
  return v.size() == 1 ? v[0] : v[s];
}

struct GradReps {
  std::vector<double> log_p;
  std::vector<Vector> grad_log;
  IntegrationMethod method = IntegrationMethod::exact1d;
  long points_used = 0;
};

// Z_{-i} | Z_i = 0 for Z ~ N(mu, sigma).
void condition_on_face(const Vector& mu, const Matrix& sigma, Index i, Vector& cmu,
                       Matrix& csig) {
  const Index d = mu.size();
  cmu.resize(d - 1);
  csig.resize(d - 1, d - 1);
  const double sii = sigma(i, i);
  for (Index a = 0, ar = 0; a < d; ++a) {
    if (a == i) continue;
    cmu(ar) = mu(a) - sigma(a, i) / sii * mu(i);
    for (Index b = 0, br = 0; b < d; ++b) {
      if (b == i) continue;
      csig(ar, br) = sigma(a, b) - sigma(a, i) * sigma(i, b) / sii;
      ++br;
    }
    ++ar;
  }
  csig = SymMatrix::symmetrized(csig).dense();
}

GradReps grad_log_reps(const Vector& mu, const Matrix& sigma, const qmc::Plan& plan) {
  GradReps out;
  const Index d = mu.size();
  LogOrthant base = log_orthant(mu, sigma, plan);
  out.method = base.method;
  out.points_used = base.points_used;

  std::vector<LogOrthant> faces(d);
  std::vector<double> log_face_density(d);
  std::size_t reps = base.log_rep.size();
  Vector cmu;
  Matrix csig;
  for (Index i = 0; i < d; ++i) {
    const double sii = sigma(i, i);
    log_face_density[i] = normal::log_pdf(mu(i) / std::sqrt(sii)) - 0.5 * std::log(sii);
    if (d == 1) {
      faces[i].log_rep = {0.0};
    } else {
      condition_on_face(mu, sigma, i, cmu, csig);
      faces[i] = log_orthant(cmu, csig, plan);
      out.method = combine(out.method, faces[i].method);
      out.points_used += faces[i].points_used;
    }
    reps = std::max(reps, faces[i].log_rep.size());
  }

  out.log_p.resize(reps);
  out.grad_log.assign(reps, Vector(d));
  for (std::size_t s = 0; s < reps; ++s) {
    const int si = static_cast<int>(s);
    out.log_p[s] = rep(base.log_rep, si);
    for (Index i = 0; i < d; ++i) {
      out.grad_log[s](i) =
          std::exp(log_face_density[i] + rep(faces[i].log_rep, si) - out.log_p[s]);
    }
  }
  return out;
}

}  // namespace

double log_bvn_orthant(double mu1, double mu2, double s11, double s12, double s22) {
  const double sd1 = std::sqrt(s11);
  const double cond_var = s22 - s12 * s12 / s11;
  if (!(cond_var > 0.0)) throw SingularSigma("bivariate covariance is singular");
  const double csd = std::sqrt(cond_var);
  // P = int_{lo}^{inf} phi(x) Phi(alpha + beta x) dx with x = (z1 - mu1)/sd1.
  const double lo = -mu1 / sd1;
  const double alpha = mu2 / csd;
  const double beta = s12 / (sd1 * csd);

  auto ell = [&](double x) { return normal::log_pdf(x) + normal::log_cdf(alpha + beta * x); };
  auto slope = [&](double x) { return -x + beta * normal::inverse_mills(alpha + beta * x); };

  // The integrand is log-concave, so the mode is the unique root of slope.
  double mode = lo;
  if (slope(lo) > 0.0) {
    double a = lo;
    double step = 1.0;
    double b = std::max(lo, 0.0) + step;
    while (slope(b) > 0.0) {
      a = b;
      step *= 2.0;
      b = a + step;
    }
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      (slope(m) > 0.0 ? a : b) = m;
    }
    mode = 0.5 * (a + b);
  }
  const double peak = ell(mode);

  double right = mode;
  for (double step = 0.25; ell(right) > peak - kDrop; step *= 2.0) right = mode + step;
  double left = lo;
  if (mode > lo) {
    left = mode;
    for (double step = 0.25; left > lo && ell(left) > peak - kDrop; step *= 2.0) {
      left = mode - step;
    }
    left = std::max(left, lo);
  }

  std::vector<double> cuts = {left, right};
  if (mode > left && mode < right) cuts.push_back(mode);
  if (beta != 0.0) {
    const double kink = -alpha / beta;
    if (kink > left && kink < right) cuts.push_back(kink);
  }
  std::sort(cuts.begin(), cuts.end());

  auto g = [&](double x) { return std::exp(ell(x) - peak); };
  double coarse = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) coarse += gk15(g, cuts[k], cuts[k + 1]).value;
  const double tol = 1e-14 * std::max(coarse, 1e-300) / static_cast<double>(cuts.size());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += gauss_kronrod(g, cuts[k], cuts[k + 1], tol);
  }
  return peak + std::log(total);
}

qmc::LogIntegrand genz_integrand(const Vector& mu, const Matrix& sigma) {
  const Index d = mu.size();
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw SingularSigma("covariance is not positive definite");
  const Matrix chol = llt.matrixL();

  // Separation of variables: Z = mu + L e, sequentially truncating each e_i.
  qmc::LogIntegrand f;
  f.dim = static_cast<int>(d) - 1;
  f.scratch_size = static_cast<int>(d);
  f.log_f = [chol, mu, d](const double* w, double* y) {
    double log_val = 0.0;
    for (Index i = 0; i < d; ++i) {
      double acc = 0.0;
      for (Index j = 0; j < i; ++j) acc += chol(i, j) * y[j];
      const double lower = (-mu(i) - acc) / chol(i, i);
      if (i + 1 < d) {
        const normal::TailDraw draw = normal::draw_above(lower, w[i]);
        y[i] = draw.value;
        log_val += draw.log_mass;
      } else {
        log_val += normal::log_cdf(-lower);
      }
    }
    return log_val;
  };
  return f;
}

LogOrthant log_orthant(const Vector& mu, const Matrix& sigma, const qmc::Plan& plan) {
  const Index d = mu.size();
  LogOrthant out;
  if (d == 0) {
    out.log_rep = {0.0};
    return out;
  }
  if (d == 1) {
    out.log_rep = {normal::log_cdf(mu(0) / std::sqrt(sigma(0, 0)))};
    out.method = IntegrationMethod::exact1d;
    return out;
  }
  if (d == 2) {
    out.log_rep = {log_bvn_orthant(mu(0), mu(1), sigma(0, 0), sigma(0, 1), sigma(1, 1))};
    out.method = IntegrationMethod::exact2d;
    return out;
  }

  out.log_rep = qmc::log_means(genz_integrand(mu, sigma), plan);
  out.method = IntegrationMethod::qmc;
  out.points_used = plan.total_points();
  return out;
}

PlanChoice choose_plan(const ModelParams& p, const IntegratorConfig& cfg) {
  cfg.validate();
  PlanChoice choice{cfg.base_plan(), true};
  if (p.dim() <= 2) return choice;
  if (cfg.max_points < 2 * choice.plan.total_points()) return choice;
  while (true) {
    const LogOrthant lo = log_orthant(p.mu, p.sigma.dense(), choice.plan);
    if (qmc::summarize(lo.log_rep).rel_std_error <= cfg.target_rel_error) return choice;
    if (2 * choice.plan.total_points() > cfg.max_points) {
      choice.target_met = false;
      return choice;
    }
    choice.plan.points_per_shift *= 2;
  }
}

IntegratorConfig frozen(const IntegratorConfig& cfg, const qmc::Plan& plan) {
  IntegratorConfig out = cfg;
  out.qmc_points = plan.points_per_shift;
  out.random_shifts = plan.shifts;
  out.seed = plan.seed;
  out.max_points = plan.total_points();
  return out;
}

CBundle c_bundle(const ModelParams& p, const qmc::Plan& plan, int order) {
  CBundle out;
  const Index d = p.dim();
  const Matrix& sigma = p.sigma.dense();
  out.log_gauss_factor =
      0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + 0.5 * p.sigma.log_det();
  if (order <= 0) {
    LogOrthant lo = log_orthant(p.mu, sigma, plan);
    out.log_p = std::move(lo.log_rep);
    out.replicates = static_cast<int>(out.log_p.size());
    out.method = lo.method;
    out.points_used = lo.points_used;
    return out;
  }

  GradReps base = grad_log_reps(p.mu, sigma, plan);
  out.method = base.method;
  out.points_used = base.points_used;
  std::size_t reps = base.log_p.size();
  std::vector<GradReps> plus, minus;
  std::vector<double> steps(d);
  if (order >= 2) {
    for (Index j = 0; j < d; ++j) {
      steps[j] = mu_step(p.mu(j));
      Vector up = p.mu;
      Vector dn = p.mu;
      up(j) += steps[j];
      dn(j) -= steps[j];
      plus.push_back(grad_log_reps(up, sigma, plan));
      minus.push_back(grad_log_reps(dn, sigma, plan));
      out.points_used += plus.back().points_used + minus.back().points_used;
      reps = std::max({reps, plus.back().log_p.size(), minus.back().log_p.size()});
    }
  }

  out.replicates = static_cast<int>(reps);
  out.log_p.resize(reps);
  out.grad_log.resize(reps);
  if (order >= 2) out.hess_log.resize(reps);
  for (std::size_t s = 0; s < reps; ++s) {
    const int si = static_cast<int>(s);
    out.log_p[s] = rep(base.log_p, si);
    out.grad_log[s] = rep(base.grad_log, si);
    if (order >= 2) {
      Matrix h(d, d);
      for (Index j = 0; j < d; ++j) {
        h.col(j) = (rep(plus[j].grad_log, si) - rep(minus[j].grad_log, si)) / (2.0 * steps[j]);
      }
      out.hess_log[s] = SymMatrix::symmetrized(h).dense();
    }
  }
  return out;
}

CBundle c_bundle(const ModelParams& p, const IntegratorConfig& cfg, int order) {
  const PlanChoice choice = choose_plan(p, cfg);
  CBundle out = c_bundle(p, choice.plan, order);
  out.target_met = choice.target_met;
  return out;
}

}  // namespace detail

namespace {

IntegralEstimate summarize_log(const detail::LogOrthant& lo, double log_factor, bool target_met) {
  const qmc::ReplicateSummary sum = qmc::summarize(lo.log_rep);
  IntegralEstimate est;
  est.log_value = log_factor + sum.log_mean;
  est.value = std::exp(est.log_value);
  est.std_error = lo.log_rep.size() > 1 ? est.value * sum.rel_std_error : 0.0;
  est.method = lo.method;
  est.points_used = lo.points_used;
  est.target_met = target_met;
  return est;
}

template <class F>
VectorEstimate vector_from_reps(int reps, Index d, const F& value_at) {
  VectorEstimate out;
  out.value.resize(d);
  out.std_error.resize(d);
  std::vector<Vector> vals(reps);
  for (int s = 0; s < reps; ++s) vals[s] = value_at(s);
  std::vector<double> comp(reps);
  for (Index i = 0; i < d; ++i) {
    for (int s = 0; s < reps; ++s) comp[s] = vals[s](i);
    const qmc::MeanSe ms = qmc::mean_se(comp);
    out.value(i) = ms.mean;
    out.std_error(i) = ms.std_error;
  }
  return out;
}

}  // namespace

IntegralEstimate normalizing_constant(const ModelParams& p, const IntegratorConfig& cfg) {
  const detail::PlanChoice choice = detail::choose_plan(p, cfg);
  const detail::LogOrthant lo = detail::log_orthant(p.mu, p.sigma.dense(), choice.plan);
  const double factor = 0.5 * static_cast<double>(p.dim()) * std::log(2.0 * std::numbers::pi) +
                        0.5 * p.sigma.log_det();
  return summarize_log(lo, factor, choice.target_met);
}

IntegralEstimate orthant_probability(const ModelParams& p, const IntegratorConfig& cfg) {
  const detail::PlanChoice choice = detail::choose_plan(p, cfg);
  const detail::LogOrthant lo = detail::log_orthant(p.mu, p.sigma.dense(), choice.plan);
  IntegralEstimate est = summarize_log(lo, 0.0, choice.target_met);
  est.value = std::min(est.value, 1.0);
  return est;
}

VectorEstimate grad_c(const ModelParams& p, const IntegratorConfig& cfg) {
  const detail::CBundle b = detail::c_bundle(p, cfg, 1);
  VectorEstimate out = vector_from_reps(b.replicates, p.dim(), [&](int s) -> Vector {
    return std::exp(b.log_gauss_factor + b.log_p[s]) * b.grad_log[s];
  });
  out.method = b.method;
  out.points_used = b.points_used;
  out.target_met = b.target_met;
  return out;
}

VectorEstimate grad_c_finite_diff(const ModelParams& p, const IntegratorConfig& cfg) {
  const detail::PlanChoice choice = detail::choose_plan(p, cfg);
  const Index d = p.dim();
  const Matrix& sigma = p.sigma.dense();
  const double factor = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                        0.5 * p.sigma.log_det();
  std::vector<detail::LogOrthant> up(d), dn(d);
  std::vector<double> steps(d);
  int reps = 1;
  long points = 0;
  for (Index i = 0; i < d; ++i) {
    steps[i] = mu_step(p.mu(i));
    Vector a = p.mu;
    Vector b = p.mu;
    a(i) += steps[i];
    b(i) -= steps[i];
    up[i] = detail::log_orthant(a, sigma, choice.plan);
    dn[i] = detail::log_orthant(b, sigma, choice.plan);
    points += up[i].points_used + dn[i].points_used;
    reps = std::max(reps, static_cast<int>(up[i].log_rep.size()));
  }
  VectorEstimate out = vector_from_reps(reps, d, [&](int s) -> Vector {
    Vector g(d);
    for (Index i = 0; i < d; ++i) {
      const double lu = detail::rep(up[i].log_rep, s);
      const double ld = detail::rep(dn[i].log_rep, s);
      g(i) = (std::exp(factor + lu) - std::exp(factor + ld)) / (2.0 * steps[i]);
    }
    return g;
  });
  out.method = IntegrationMethod::finite_diff;
  out.points_used = points;
  out.target_met = choice.target_met;
  return out;
}

MatrixEstimate hess_c(const ModelParams& p, const IntegratorConfig& cfg) {
  const detail::CBundle b = detail::c_bundle(p, cfg, 2);
  const Index d = p.dim();
  std::vector<Matrix> vals(b.replicates);
  for (int s = 0; s < b.replicates; ++s) {
    const Vector& r = b.grad_log[s];
    vals[s] = std::exp(b.log_gauss_factor + b.log_p[s]) * (b.hess_log[s] + r * r.transpose());
  }
  MatrixEstimate out;
  Matrix mean(d, d);
  out.std_error.resize(d, d);
  std::vector<double> comp(b.replicates);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      for (int s = 0; s < b.replicates; ++s) comp[s] = vals[s](i, j);
      const qmc::MeanSe ms = qmc::mean_se(comp);
      mean(i, j) = ms.mean;
      out.std_error(i, j) = ms.std_error;
    }
  }
  out.value = SymMatrix::symmetrized(mean);
  out.method = IntegrationMethod::finite_diff;
  out.points_used = b.points_used;
  out.target_met = b.target_met;
  return out;
}

}  // namespace tmvn
