// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 when every
// failure is listed in kExpectedFailures and nothing listed there passes.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "tmvn/expfam.hpp"
#include "tmvn/matrix_core.hpp"
#include "tmvn/mle.hpp"
#include "tmvn/moments.hpp"
#include "tmvn/orthant.hpp"
#include "tmvn/sampler.hpp"

using namespace tmvn;
namespace fs = std::filesystem;

namespace {

// The steepness limits 6 and 0.75 assume E[t_j^2] = theta_j^-2 on the
// diagonal of the Theta-gradient; the exponential second moment is
// 2 theta_j^-2, so the measured norm converges to s + s^2 + 3 sum theta_j^-4.
const std::map<int, std::string> kExpectedFailures = {
    {1, "targets 6 and 0.75 omit the diagonal second moments; the trace converges to 12 and 1.125"}};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

Matrix random_spd(Index d, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> sc(lo, hi);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = g(rng);
  Matrix s = a * a.transpose() / static_cast<double>(d) + 0.3 * Matrix::Identity(d, d);
  const Vector sd = s.diagonal().cwiseSqrt().cwiseInverse();
  Vector scale(d);
  for (Index i = 0; i < d; ++i) scale(i) = std::sqrt(sc(rng));
  s = (sd.asDiagonal() * s * sd.asDiagonal()).eval();
  return scale.asDiagonal() * s * scale.asDiagonal();
}

Vector uniform_vector(Index d, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = u(rng);
  return v;
}

// Integrator settings that keep the base plan, so finite differences share
// their random numbers.
IntegratorConfig crn_config(std::uint64_t seed) {
  IntegratorConfig c;
  c.seed = seed;
  c.target_rel_error = 1.0;
  return c;
}

// ---------------------------------------------------------------------------

Outcome non_steepness() {
  const IntegratorConfig cfg;
  Outcome out;
  std::ostringstream d;
  for (double t : {-1.0, -2.0}) {
    const Vector theta = Vector::Constant(2, t);
    const auto tr = steepness_probe(theta, default_epsilons(), cfg);
    const auto& last = tr.records.back();
    const double target = tr.diagonal_free_limit_norm_sq;
    const bool near_target = std::abs(last.norm_sq - target) <= 0.02 * target;
    const bool near_limit = std::abs(last.norm_sq - tr.limit_norm_sq) <= 0.02 * tr.limit_norm_sq;

    // Cauchy: successive differences shrink once eps <= 0.03.
    std::vector<double> diffs, errs;
    for (std::size_t k = 0; k + 1 < tr.records.size(); ++k) {
      if (tr.records[k].epsilon > 0.03 + 1e-12) continue;
      diffs.push_back(std::abs(tr.records[k].norm_sq - tr.records[k + 1].norm_sq));
      errs.push_back(std::hypot(tr.records[k].norm_sq_se, tr.records[k + 1].norm_sq_se));
    }
    bool cauchy = !diffs.empty();
    for (std::size_t k = 0; k + 1 < diffs.size(); ++k) cauchy = cauchy && diffs[k + 1] <= diffs[k] + 3 * (errs[k] + errs[k + 1]);

    out.pass = out.pass && near_target && cauchy;
    d << "theta=" << t << ": norm^2(1e-3)=" << fmt(last.norm_sq) << " target " << fmt(target)
      << (near_target ? " ok" : " MISS") << ", corrected limit " << fmt(tr.limit_norm_sq)
      << (near_limit ? " ok" : " miss") << ", cauchy " << (cauchy ? "ok" : "MISS") << "; ";
  }
  out.detail = d.str();
  return out;
}

Outcome inner_product_limit() {
  const IntegratorConfig cfg;
  std::mt19937_64 rng(101);
  Outcome out;
  double worst = 0.0;
  for (Index d = 1; d <= 3; ++d)
    for (int rep = 0; rep < 3; ++rep) {
      const Vector theta = uniform_vector(d, rng, -3.0, -0.5);
      const auto tr = steepness_probe(theta, std::vector<double>{1e-3}, cfg);
      const double rel = std::abs(tr.records.back().inner + static_cast<double>(d)) / static_cast<double>(d);
      worst = std::max(worst, rel);
      out.pass = out.pass && rel <= 0.02;
    }
  out.detail = "9 cases, worst relative gap to -d " + fmt(worst, 3);
  return out;
}

Outcome moment_identities() {
  const IntegratorConfig cfg;
  std::mt19937_64 rng(202);
  int checks = 0, misses = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const Index d = 1 + inst % 4;
    const Vector mu = uniform_vector(d, rng, -1.0, 1.0);
    const Matrix sigma = random_spd(d, rng);
    const auto mp = covariance_matrix(ModelParams(mu, sigma), cfg);
    const auto o = oracle::truncated_moments(mu, sigma, 20, 4000, 1000 + inst);
    for (Index i = 0; i < d; ++i) {
      ++checks;
      if (std::abs(mp.nu(i) - o.mean(i)) > 3 * std::hypot(mp.nu_std_error(i), o.mean_se(i))) ++misses;
      for (Index j = 0; j <= i; ++j) {
        ++checks;
        if (std::abs(mp.lambda(i, j) - o.cov(i, j)) > 3 * std::hypot(mp.lambda_std_error(i, j), o.cov_se(i, j)))
          ++misses;
      }
    }
  }
  const double rate = static_cast<double>(misses) / checks;
  return {rate <= 0.02, std::to_string(misses) + "/" + std::to_string(checks) + " componentwise checks outside 3 se (" +
                            fmt(100 * rate, 3) + "%)"};
}

// Shared with the necessary-condition criterion.
std::vector<FitResult> g_fits;

Outcome score_mom() {
  Vector mu(2);
  mu << 0.5, -0.5;
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 1.0;
  const ModelParams p(mu, sigma);
  Outcome out;
  double worst_res = 0.0, worst_score = 0.0;
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SamplerConfig sc;
    sc.seed = seed;
    const auto r = fit(sample(p, 10000, sc), FitConfig{});
    g_fits.push_back(r);
    if (r.status == FitStatus::converged) ++converged;
    const auto& last = r.trace.back();
    worst_res = std::max({worst_res, last.mean_residual, last.cov_residual});
    worst_score = std::max({worst_score, r.score_mu_norm, r.score_psi_norm});
  }
  out.pass = converged == 10 && worst_res <= 1e-6 && worst_score <= 1e-5;
  out.detail = std::to_string(converged) + "/10 converged, max moment residual " + fmt(worst_res, 3) +
               ", max score norm per observation " + fmt(worst_score, 3);
  return out;
}

Outcome necessary_condition_check() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> g;
  double worst = 0.0;
  bool in_range = true;
  for (int rep = 0; rep < 10000; ++rep) {
    const Index d = 1 + rep % 6;
    const Matrix u = random_spd(d, rng, 0.1, 10.0);
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = g(rng) * (rep % 3 == 0 ? 10.0 : 1.0);
    const double q = woodbury_quadratic(SpdMatrix(u), v);
    const double ref = oracle::quadratic_after_update(u, v);
    in_range = in_range && q >= 0.0 && q < 1.0;
    if (ref > 0) worst = std::max(worst, std::abs(q - ref) / ref);
  }
  bool fits_ok = !g_fits.empty();
  for (const auto& f : g_fits)
    fits_ok = fits_ok && f.status == FitStatus::converged && f.q >= 0.0 && f.q < 1.0 && f.q_direct < 1.0;
  return {in_range && worst <= 1e-10 && fits_ok, "10000 cases, max relative error " + fmt(worst, 3) +
                                                     (in_range ? ", all in [0,1)" : ", OUT OF RANGE") +
                                                     (fits_ok ? "; q in [0,1) at all fits" : "; fit q check failed")};
}

Outcome classifier() {
  struct Case {
    Vector theta;
    Matrix big;
    bool member;
    bool brute;  // cross-check against numeric integration
  };
  auto vec = [](std::initializer_list<double> v) {
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
  };
  auto dg = [&](std::initializer_list<double> v) { return Matrix(vec(v).asDiagonal()); };
  auto outer = [&](std::initializer_list<double> v) {
    const Vector u = vec(v);
    return Matrix(u * u.transpose());
  };
  std::mt19937_64 rng(404);
  std::vector<Case> cases = {
      // rank 0
      {vec({-1}), Matrix::Zero(1, 1), true, false},
      {vec({-1, -1}), Matrix::Zero(2, 2), true, false},
      {vec({-0.5, -3}), Matrix::Zero(2, 2), true, false},
      {vec({-1, -2, -0.1}), Matrix::Zero(3, 3), true, false},
      {vec({0, -1}), Matrix::Zero(2, 2), false, false},
      {vec({2}), Matrix::Zero(1, 1), false, false},
      {vec({-1, -1, 0.5}), Matrix::Zero(3, 3), false, false},
      {vec({-1, 1e-3}), Matrix::Zero(2, 2), false, false},
      // indefinite
      {vec({-1, -1}), dg({1, -1}), false, false},
      {vec({0, 0}), dg({-1, -1}), false, false},
      {vec({-5, -5, -5}), dg({1, 2, -0.1}), false, false},
      {vec({1, 2}), Matrix{{0.5, 1.0}, {1.0, 0.5}}, false, false},
      {vec({-1, -1, -1}), outer({1, -1, 0}) - 0.2 * outer({0, 0, 1}), false, false},
      // rank 1 and 2 in d = 2, 3
      {vec({0, -1}), dg({1, 0}), true, true},
      {vec({5, -0.5}), dg({1, 0}), true, true},
      {vec({-1, 0.5}), dg({1, 0}), false, true},
      {vec({3, 3}), outer({1, 1}), true, true},
      {vec({-1, 0.5}), outer({1, -1}), true, true},
      {vec({1, -0.5}), outer({1, -1}), false, true},
      {vec({0, -1, -2}), dg({1, 0, 0}), true, true},
      {vec({0, -1, 0.5}), dg({1, 0, 0}), false, true},
      {vec({2, 2, -1}), dg({1, 1, 0}), true, true},
      {vec({1, 1, 1}), outer({1, 1, 1}) / 3.0, true, true},
      {vec({-1, 0.5, -1}), outer({1, -1, 0}), true, true},
      {vec({-1, 2, -1}), outer({1, -1, 0}), false, true},
  };
  // full rank
  for (Index d = 1; d <= 3; ++d)
    for (int rep = 0; rep < 2 - (d == 1); ++rep) {
      cases.push_back({uniform_vector(d, rng, -3, 3), random_spd(d, rng), true, false});
    }
  Outcome out;
  int agree = 0, brute_agree = 0, brute_total = 0;
  for (const auto& c : cases) {
    const auto k = classify_parameter(NaturalParams(c.theta, SymMatrix::symmetrized(c.big)));
    const bool member = k.tag == ParamTag::omega_r;
    if (member == c.member) ++agree;
    if (c.brute) {
      ++brute_total;
      const int n = c.theta.size() == 2 ? 300 : 60;
      if (oracle::diverges_numerically(c.theta, c.big, 15.0, n) == !c.member) ++brute_agree;
    }
  }
  out.pass = agree == static_cast<int>(cases.size()) && brute_agree == brute_total;
  out.detail = std::to_string(agree) + "/" + std::to_string(cases.size()) + " labels agree; " +
               std::to_string(brute_agree) + "/" + std::to_string(brute_total) + " rank-deficient labels confirmed by integration";
  return out;
}

Outcome orthant_engine() {
  const IntegratorConfig cfg;
  double exact_err = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  exact_err = std::max(exact_err, rel(normalizing_constant(ModelParams(Vector::Zero(1), Matrix::Identity(1, 1)), cfg).value,
                                      std::sqrt(std::numbers::pi / 2)));
  exact_err = std::max(exact_err, rel(normalizing_constant(ModelParams(Vector::Zero(2), Matrix::Identity(2, 2)), cfg).value,
                                      std::numbers::pi / 2));
  exact_err = std::max(exact_err, rel(orthant_probability(ModelParams(Vector::Zero(2), Matrix{{1, 0.5}, {0.5, 1}}), cfg).value,
                                      1.0 / 3.0));

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> corr(-0.9, 0.9), sd(0.5, 2.0);
  int ok = 0;
  double worst_z = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const Index d = 3 + inst % 2;
    const Vector mu = uniform_vector(d, rng, -1.0, 1.0);
    Matrix sigma = Matrix::Zero(d, d);
    double ref = 1.0;
    std::vector<Index> perm(d);
    for (Index i = 0; i < d; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (inst % 3 == 0) {
      for (Index i = 0; i < d; ++i) {
        sigma(i, i) = sd(rng) * sd(rng);
        ref *= oracle::Phi(mu(i) / std::sqrt(sigma(i, i)));
      }
    } else {
      // Correlated pair(s) at permuted positions, remaining coordinates independent.
      const int blocks = (d == 4 && inst % 3 == 2) ? 2 : 1;
      for (int b = 0; b < blocks; ++b) {
        const Index i = perm[2 * b], j = perm[2 * b + 1];
        const double si = sd(rng), sj = sd(rng), r = corr(rng);
        sigma(i, i) = si * si;
        sigma(j, j) = sj * sj;
        sigma(i, j) = sigma(j, i) = r * si * sj;
        Vector m2(2);
        m2 << mu(i), mu(j);
        ref *= orthant_probability(ModelParams(m2, Matrix{{si * si, r * si * sj}, {r * si * sj, sj * sj}}), cfg).value;
      }
      for (Index k = 2 * blocks; k < d; ++k) {
        const Index i = perm[k];
        sigma(i, i) = sd(rng) * sd(rng);
        ref *= oracle::Phi(mu(i) / std::sqrt(sigma(i, i)));
      }
    }
    const auto est = orthant_probability(ModelParams(mu, sigma), cfg);
    const double gap = std::abs(est.value - ref);
    const double bound = 3 * est.std_error + 1e-12 * ref;
    if (gap <= bound) ++ok;
    if (est.std_error > 0) worst_z = std::max(worst_z, gap / est.std_error);
  }
  return {exact_err <= 1e-8 && ok == 100, "exact paths max relative error " + fmt(exact_err, 3) + "; " +
                                              std::to_string(ok) + "/100 QMC instances within 3 se (max |z| " +
                                              fmt(worst_z, 3) + ")"};
}

Outcome gradients() {
  std::mt19937_64 rng(606);
  const int fd_seeds = 3;
  int cgf_ok = 0, score_ok = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index d = 2 + inst % 2;
    const IntegratorConfig cfg = crn_config(7000 + inst);

    // grad_cgf at an interior point of the full-rank stratum.
    const Matrix big = 0.5 * SpdMatrix(random_spd(d, rng)).inverse();
    const NaturalParams np(uniform_vector(d, rng, -1.0, 1.0), SymMatrix::symmetrized(big));
    const auto g = grad_cgf(np, cfg);
    const double h = 1e-4;
    bool good = true;
    auto fd_stats = [&](const std::function<double(const IntegratorConfig&)>& diff, double& mean, double& se) {
      std::vector<double> v;
      for (int s = 0; s < fd_seeds; ++s) v.push_back(diff(crn_config(9000 + 31 * inst + s)));
      mean = 0;
      for (double x : v) mean += x / fd_seeds;
      se = 0;
      for (double x : v) se += (x - mean) * (x - mean);
      se = std::sqrt(se / (fd_seeds * (fd_seeds - 1)));
    };
    for (Index i = 0; i < d; ++i) {
      double m, se;
      fd_stats([&](const IntegratorConfig& c) {
        Vector tp = np.theta, tm = np.theta;
        tp(i) += h;
        tm(i) -= h;
        return (cgf(NaturalParams(tp, np.big_theta), c) - cgf(NaturalParams(tm, np.big_theta), c)) / (2 * h);
      }, m, se);
      good = good && std::abs(m - g.d_theta(i)) <= std::max(1e-4, 5 * std::hypot(se, g.d_theta_se(i)));
      for (Index j = 0; j <= i; ++j) {
        fd_stats([&](const IntegratorConfig& c) {
          Matrix bp = np.big_theta.dense(), bm = bp;
          bp(i, j) += h;
          bm(i, j) -= h;
          if (i != j) bp(j, i) += h, bm(j, i) -= h;
          return (cgf(NaturalParams(np.theta, SymMatrix::symmetrized(bp)), c) -
                  cgf(NaturalParams(np.theta, SymMatrix::symmetrized(bm)), c)) /
                 (2 * h * (i == j ? 1.0 : 2.0));
        }, m, se);
        good = good && std::abs(m - g.d_big_theta(i, j)) <= std::max(1e-4, 5 * std::hypot(se, g.d_big_theta_se(i, j)));
      }
    }
    if (good) ++cgf_ok;

    // Score of the log-likelihood on a small synthetic sample.
    const Vector mu = uniform_vector(d, rng, -0.5, 1.0);
    const Matrix sigma = random_spd(d, rng);
    SamplerConfig sc;
    sc.seed = 50 + inst;
    const Sample data = sample(ModelParams(mu, sigma), 30, sc);
    const auto sco = score(ModelParams(mu, sigma), data, cfg);
    const double hs = 1e-5;
    const Matrix psi = SpdMatrix(sigma).inverse();
    bool sgood = true;
    for (Index i = 0; i < d; ++i) {
      double m, se;
      fd_stats([&](const IntegratorConfig& c) {
        Vector up = mu, dn = mu;
        up(i) += hs;
        dn(i) -= hs;
        return (loglik(ModelParams(up, sigma), data, c) - loglik(ModelParams(dn, sigma), data, c)) / (2 * hs);
      }, m, se);
      sgood = sgood && std::abs(m - sco.d_mu(i)) <= std::max(1e-4, 5 * std::hypot(se, sco.d_mu_se(i)));
      for (Index j = 0; j <= i; ++j) {
        fd_stats([&](const IntegratorConfig& c) {
          Matrix up = psi, dn = psi;
          up(i, j) += hs;
          dn(i, j) -= hs;
          if (i != j) up(j, i) += hs, dn(j, i) -= hs;
          return (loglik_precision(mu, SpdMatrix(up), data, c) - loglik_precision(mu, SpdMatrix(dn), data, c)) / (2 * hs);
        }, m, se);
        sgood = sgood && std::abs(m - sco.d_psi(i, j)) <= std::max(1e-4, 5 * std::hypot(se, sco.d_psi_se(i, j)));
      }
    }
    if (sgood) ++score_ok;
  }
  return {cgf_ok == 20 && score_ok == 20,
          "grad_cgf " + std::to_string(cgf_ok) + "/20, score " + std::to_string(score_ok) + "/20 points agree"};
}

Outcome untruncated() {
  const ModelParams p(Vector::Constant(2, 10.0), Matrix::Identity(2, 2));
  SamplerConfig sc;
  sc.seed = 909;
  const Sample data = sample(p, 5000, sc);
  const auto st = sample_stats(data);
  const auto r = fit(data, FitConfig{});
  const double dm = (r.mu - st.xbar).norm();
  const double ds = (r.sigma.dense() - st.s_xbar.dense()).norm();
  return {r.status == FitStatus::converged && dm <= 1e-2 && ds <= 1e-2,
          std::string(to_string(r.status)) + ", |mu - xbar| " + fmt(dm, 3) + ", |Sigma - S|_F " + fmt(ds, 3)};
}

// ---------------------------------------------------------------------------

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(TMVN_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, k);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timing(const std::string& text, bool embedded) {
  auto j = nlohmann::json::parse(text);
  (embedded ? j["manifest"] : j).erase("timing");
  return j.dump();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("tmvn_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string data = (dir / "data.csv").string();
  Outcome out;
  std::vector<std::string> failed;

  struct Command {
    std::string name, args;
    bool csv;
  };
  const std::vector<Command> commands = {
      {"sample", "sample --mu 0.5,-0.5 --sigma \"1,0.3;0.3,1\" --n 3000 --seed 7", true},
      {"sample-3d", "sample --mu 0.5,-0.5,0.2 --sigma \"1,0.3,0;0.3,1,0.2;0,0.2,1\" --n 3000 --seed 7", true},
      {"sample-gibbs", "sample --mu=-1,-1 --sigma \"1,0.5;0.5,1\" --n 500 --seed 7 --method gibbs", true},
      {"fit", "fit --header --input " + data + " --seed 11", false},
      {"moments", "moments --mu 0.2,-0.1,0.4,0 --sigma \"1,0.2,0.1,0;0.2,1,0.3,0.1;0.1,0.3,1,0.2;0,0.1,0.2,1\" --seed 5", false},
      {"classify", "classify --theta=-1,0.5,-1 --big-theta \"1,-1,0;-1,1,0;0,0,0\" --seed 5", false},
      {"steepness-demo", "steepness-demo --theta=-1,-1,-0.5 --epsilons 0.1,0.01 --seed 5", true},
  };
  // Data for the fit command comes from the first sample run.
  if (run_cli(commands[0].args + " --output " + data).code != 0) failed.push_back("setup");

  for (const auto& c : commands) {
    std::string first, second;
    bool ok = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path target = dir / (c.name + std::to_string(rep) + (c.csv ? ".csv" : ".json"));
      const auto r = run_cli(c.args + " --output " + target.string());
      ok = ok && r.code == 0;
      std::string text;
      if (c.csv) {
        text = slurp(target) + without_timing(slurp(target.string() + ".manifest.json"), false);
      } else {
        text = without_timing(slurp(target), true);
      }
      (rep == 0 ? first : second) = text;
    }
    if (!ok || first != second || first.empty()) failed.push_back(c.name);
  }
  fs::remove_all(dir);
  out.pass = failed.empty();
  out.detail = std::to_string(commands.size() - failed.size()) + "/" + std::to_string(commands.size()) +
               " commands byte-identical across runs";
  for (const auto& f : failed) out.detail += " [" + f + " differs]";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"non-steepness limit and Cauchy trace", non_steepness},
      {"theta' grad_theta K -> -d", inner_product_limit},
      {"moment identities vs direct sampling", moment_identities},
      {"score / moment equivalence at the fit", score_mom},
      {"necessary condition q in [0,1)", necessary_condition_check},
      {"parameter-space classifier", classifier},
      {"orthant engine", orthant_engine},
      {"gradient soundness", gradients},
      {"untruncated limit", untruncated},
      {"CLI determinism", determinism},
  };
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto expected = kExpectedFailures.find(id);
    std::string tag = o.pass ? "PASS" : "FAIL";
    if (expected != kExpectedFailures.end()) {
      if (o.pass) {
        tag = "PASS (unexpected; listed as an expected failure)";
        ++unexpected;
      } else {
        tag = "FAIL (expected: " + expected->second + ")";
      }
    } else if (!o.pass) {
      ++unexpected;
    }
    std::cout << "criterion " << id << " " << tag << " | " << criteria[k].first << " | " << o.detail << " ["
              << fmt(secs, 3) << " s]" << std::endl;
  }
  std::cout << (unexpected == 0 ? "acceptance: all outcomes as expected" : "acceptance: unexpected outcomes") << std::endl;
  return unexpected == 0 ? 0 : 1;
}
