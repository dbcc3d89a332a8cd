#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmvn/errors.hpp"
#include "tmvn/expfam.hpp"
#include "tmvn/io.hpp"
#include "tmvn/mle.hpp"
#include "tmvn/moments.hpp"
#include "tmvn/sampler.hpp"

#ifndef TMVN_VERSION
#define TMVN_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using tmvn::io::to_json;

constexpr int kExitInput = 4;
constexpr int kExitRuntime = 1;

struct Options {
  std::string input, output, config;
  std::optional<std::uint64_t> seed;
  std::optional<int> d;
  std::string mu, sigma, theta, big_theta, epsilons, method;
  int qmc_points = 4096;
  int shifts = 16;
  double tol = 1e-6;
  int max_iter = 200;
  long n = 1000;
  bool header = false;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(std::string command, const Options& opt)
      : command_(std::move(command)), opt_(opt), started_(utc_now()),
        clock_(std::chrono::steady_clock::now()) {}

  json manifest(const json& resolved, const json& seeds) const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    json m;
    m["command"] = command_;
    m["config"] = resolved;
    m["seeds"] = seeds;
    m["versions"] = {
        {"tmvn", TMVN_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"cli11", CLI11_VERSION}};
    // Excluded from reproducibility comparisons.
    m["timing"] = {{"started_at", started_}, {"duration_seconds", secs}};
    return m;
  }

  void write_json(json doc, const json& resolved, const json& seeds) const {
    doc["manifest"] = manifest(resolved, seeds);
    emit(tmvn::io::dump_json(doc));
  }

  // CSV goes to --output (manifest beside it) or stdout (manifest on stderr).
  void write_csv(const std::string& body, const json& resolved, const json& seeds) const {
    emit(body);
    const std::string m = tmvn::io::dump_json(manifest(resolved, seeds));
    if (opt_.output.empty()) {
      std::cerr << m;
    } else {
      std::ofstream f(opt_.output + ".manifest.json", std::ios::binary);
      if (!f) throw tmvn::InputError("cannot write " + opt_.output + ".manifest.json");
      f << m;
    }
  }

 private:
  void emit(const std::string& text) const {
    if (opt_.output.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(opt_.output, std::ios::binary);
    if (!f) throw tmvn::InputError("cannot write " + opt_.output);
    f << text;
  }

  std::string command_;
  const Options& opt_;
  std::string started_;
  std::chrono::steady_clock::time_point clock_;
};

tmvn::IntegratorConfig integrator(const Options& opt) {
  tmvn::IntegratorConfig cfg;
  cfg.qmc_points = opt.qmc_points;
  cfg.random_shifts = opt.shifts;
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.max_points = std::max(cfg.max_points, static_cast<long>(cfg.qmc_points) * cfg.random_shifts);
  cfg.validate();
  return cfg;
}

json integrator_json(const tmvn::IntegratorConfig& cfg) {
  return {{"qmc_points", cfg.qmc_points},
          {"random_shifts", cfg.random_shifts},
          {"seed", cfg.seed},
          {"target_rel_error", cfg.target_rel_error},
          {"max_points", cfg.max_points}};
}

void check_dim(const Options& opt, tmvn::Index got, const char* what) {
  if (opt.d && *opt.d != got) {
    throw tmvn::InputError(std::string(what) + " has dimension " + std::to_string(got) +
                           " but --d is " + std::to_string(*opt.d));
  }
}

tmvn::ModelParams model_params(const Options& opt) {
  if (opt.mu.empty() || opt.sigma.empty()) throw tmvn::InputError("--mu and --sigma are required");
  const tmvn::Vector mu = tmvn::io::parse_vector(opt.mu, "--mu");
  const tmvn::SymMatrix sigma = tmvn::io::parse_symmetric(opt.sigma, "--sigma");
  if (sigma.dim() != mu.size()) throw tmvn::InputError("--mu and --sigma dimensions differ");
  check_dim(opt, mu.size(), "--mu");
  return tmvn::ModelParams(mu, tmvn::SpdMatrix(sigma));
}

int exit_code(tmvn::FitStatus s) {
  switch (s) {
    case tmvn::FitStatus::converged: return 0;
    case tmvn::FitStatus::max_iterations: return 2;
    case tmvn::FitStatus::necessary_condition_violated: return 3;
    case tmvn::FitStatus::integration_failure: return 5;
  }
  return kExitRuntime;
}

int cmd_fit(const Options& opt) {
  Run run("fit", opt);
  if (opt.input.empty()) throw tmvn::InputError("--input is required");
  tmvn::FitConfig cfg;
  cfg.integrator = integrator(opt);
  cfg.tol = opt.tol;
  cfg.max_iterations = opt.max_iter;
  if (opt.method.empty() || opt.method == "quasi-newton") {
    cfg.solver = tmvn::Solver::quasi_newton;
  } else if (opt.method == "fixed-point") {
    cfg.solver = tmvn::Solver::fixed_point;
  } else {
    throw tmvn::InputError("--method for fit must be quasi-newton or fixed-point");
  }
  cfg.validate();

  const tmvn::Sample s(tmvn::io::read_csv_file(opt.input, opt.header));
  check_dim(opt, s.dim(), "input");
  const tmvn::SampleStats stats = tmvn::sample_stats(s);
  const tmvn::FitResult r = tmvn::fit(s, cfg);

  json trace = json::array();
  for (const tmvn::FitIteration& it : r.trace) {
    trace.push_back({{"residual", it.residual},
                     {"mean_residual", it.mean_residual},
                     {"cov_residual", it.cov_residual},
                     {"step", it.step}});
  }
  json doc;
  doc["status"] = tmvn::to_string(r.status);
  doc["n"] = s.n();
  doc["d"] = s.dim();
  doc["xbar"] = to_json(stats.xbar);
  doc["s_xbar"] = to_json(stats.s_xbar.dense());
  doc["mu"] = to_json(r.mu);
  doc["sigma"] = to_json(r.sigma.dense());
  doc["nu"] = to_json(r.nu);
  doc["lambda"] = to_json(r.lambda.dense());
  doc["q"] = r.q;
  doc["q_direct"] = r.q_direct;
  doc["score_mu_norm_per_obs"] = r.score_mu_norm;
  doc["score_psi_norm_per_obs"] = r.score_psi_norm;
  doc["iterations"] = r.iterations;
  doc["integration_method"] = tmvn::to_string(r.method);
  doc["points_used"] = r.points_used;
  if (!r.message.empty()) doc["message"] = r.message;
  doc["trace"] = trace;

  const json resolved = {{"input", opt.input},
                         {"header", opt.header},
                         {"solver", tmvn::to_string(cfg.solver)},
                         {"tol", cfg.tol},
                         {"max_iter", cfg.max_iterations},
                         {"integrator", integrator_json(cfg.integrator)}};
  run.write_json(doc, resolved, {{"integrator", cfg.integrator.seed}});
  return exit_code(r.status);
}

int cmd_moments(const Options& opt) {
  Run run("moments", opt);
  const tmvn::IntegratorConfig cfg = integrator(opt);
  const tmvn::ModelParams p = model_params(opt);
  const tmvn::MomentPair mp = tmvn::covariance_matrix(p, cfg);
  const tmvn::IntegralEstimate c = tmvn::normalizing_constant(p, cfg);
  json doc;
  doc["d"] = p.dim();
  doc["nu"] = to_json(mp.nu);
  doc["nu_std_error"] = to_json(mp.nu_std_error);
  doc["lambda"] = to_json(mp.lambda.dense());
  doc["lambda_std_error"] = to_json(mp.lambda_std_error);
  doc["lambda_clipped"] = mp.clipped;
  doc["normalizing_constant"] = {{"value", c.value},
                                 {"log_value", c.log_value},
                                 {"std_error", c.std_error}};
  doc["integration_method"] = tmvn::to_string(mp.method);
  doc["points_used"] = mp.points_used;
  doc["target_met"] = mp.target_met;
  const json resolved = {{"mu", to_json(p.mu)},
                         {"sigma", to_json(p.sigma.dense())},
                         {"integrator", integrator_json(cfg)}};
  run.write_json(doc, resolved, {{"integrator", cfg.seed}});
  return 0;
}

int cmd_classify(const Options& opt) {
  Run run("classify", opt);
  if (opt.theta.empty() || opt.big_theta.empty()) {
    throw tmvn::InputError("--theta and --big-theta are required");
  }
  const tmvn::IntegratorConfig cfg = integrator(opt);
  const tmvn::Vector theta = tmvn::io::parse_vector(opt.theta, "--theta");
  const tmvn::SymMatrix big = tmvn::io::parse_symmetric(opt.big_theta, "--big-theta");
  check_dim(opt, theta.size(), "--theta");
  const tmvn::NaturalParams np(theta, big);
  const tmvn::ParamClass pc = tmvn::classify_parameter(np);

  json doc;
  const bool inside = pc.tag == tmvn::ParamTag::omega_r;
  doc["tag"] = inside ? "OmegaR" : "OutsideD";
  doc["rank"] = pc.rank;
  if (inside) {
    doc["certificate"] = {{"rank", pc.psd.rank},
                          {"eigenvalues", to_json(pc.psd.eigenvalues)},
                          {"basis", to_json(pc.psd.basis)}};
    const tmvn::IntegralEstimate lt = tmvn::laplace_transform(np, cfg);
    doc["cgf"] = {{"value", lt.log_value},
                  {"rel_std_error", lt.value > 0 ? lt.std_error / lt.value : 0.0},
                  {"integration_method", tmvn::to_string(lt.method)}};
  } else {
    doc["certificate"] = {{"kind", pc.reason}, {"direction", to_json(pc.certificate)}};
  }
  if (pc.rank > 0 && pc.rank < theta.size()) doc["cone_max"] = pc.cone_max;
  const json resolved = {{"theta", to_json(theta)},
                         {"big_theta", to_json(big.dense())},
                         {"integrator", integrator_json(cfg)}};
  run.write_json(doc, resolved, {{"integrator", cfg.seed}});
  return 0;
}

int cmd_steepness(const Options& opt) {
  Run run("steepness-demo", opt);
  const tmvn::IntegratorConfig cfg = integrator(opt);
  tmvn::Vector theta;
  if (!opt.theta.empty()) {
    theta = tmvn::io::parse_vector(opt.theta, "--theta");
    check_dim(opt, theta.size(), "--theta");
  } else {
    theta = -tmvn::Vector::Ones(opt.d.value_or(2));
  }
  std::vector<double> eps = tmvn::default_epsilons();
  if (!opt.epsilons.empty()) {
    const tmvn::Vector e = tmvn::io::parse_vector(opt.epsilons, "--epsilons");
    eps.assign(e.data(), e.data() + e.size());
  }
  const tmvn::SteepnessTrace tr = tmvn::steepness_probe(theta, eps, cfg);

  tmvn::Matrix rows(static_cast<tmvn::Index>(tr.records.size()), 8);
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    const tmvn::SteepnessRecord& r = tr.records[k];
    rows.row(static_cast<tmvn::Index>(k)) << r.epsilon, r.norm_sq, r.norm_sq_se, r.inner,
        r.inner_se, tr.limit_norm_sq, tr.diagonal_free_limit_norm_sq, tr.limit_inner;
  }
  std::ostringstream out;
  tmvn::io::write_csv(out,
                      {"epsilon", "grad_norm_sq", "grad_norm_sq_se", "theta_dot_grad",
                       "theta_dot_grad_se", "limit_grad_norm_sq", "diagonal_free_limit_grad_norm_sq",
                       "limit_theta_dot_grad"},
                      rows);
  const json resolved = {{"theta", to_json(theta)},
                         {"epsilons", eps},
                         {"integrator", integrator_json(cfg)}};
  run.write_csv(out.str(), resolved, {{"integrator", cfg.seed}});
  return 0;
}

int cmd_sample(const Options& opt) {
  Run run("sample", opt);
  const tmvn::ModelParams p = model_params(opt);
  tmvn::SamplerConfig cfg;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.method.empty() || opt.method == "rejection") {
    cfg.method = tmvn::SamplerMethod::rejection;
  } else if (opt.method == "gibbs") {
    cfg.method = tmvn::SamplerMethod::gibbs;
  } else {
    throw tmvn::InputError("--method for sample must be rejection or gibbs");
  }
  if (opt.n < 1) throw tmvn::InputError("--n must be >= 1");
  const tmvn::Sample s = tmvn::sample(p, opt.n, cfg);
  std::vector<std::string> header;
  for (tmvn::Index j = 0; j < p.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  std::ostringstream out;
  tmvn::io::write_csv(out, header, s.data());
  const json resolved = {{"mu", to_json(p.mu)},
                         {"sigma", to_json(p.sigma.dense())},
                         {"n", opt.n},
                         {"method", tmvn::to_string(cfg.method)},
                         {"burn_in", cfg.burn_in},
                         {"thinning", cfg.thinning}};
  run.write_csv(out.str(), resolved, {{"sampler", cfg.seed}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-orthant truncated multivariate normal toolkit"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; flags take precedence");

  Options opt;
  app.add_option("--input", opt.input, "Input CSV");
  app.add_option("--output", opt.output, "Output file (default stdout)");
  app.add_option("--seed", opt.seed, "Seed for the sampler or the QMC integrator");
  app.add_option("--d", opt.d, "Dimension check / default dimension")->check(CLI::PositiveNumber);
  app.add_option("--mu", opt.mu, "Mean vector, comma separated");
  app.add_option("--sigma", opt.sigma, "Covariance, row-major");
  app.add_option("--theta", opt.theta, "Natural parameter theta");
  app.add_option("--big-theta", opt.big_theta, "Natural parameter Theta, row-major");
  app.add_option("--epsilons", opt.epsilons, "Decreasing epsilon grid");
  app.add_option("--method", opt.method, "rejection|gibbs for sample, quasi-newton|fixed-point for fit");
  app.add_option("--qmc-points", opt.qmc_points, "QMC points per shift");
  app.add_option("--shifts", opt.shifts, "Random shifts");
  app.add_option("--tol", opt.tol, "Fit residual tolerance");
  app.add_option("--max-iter", opt.max_iter, "Fit iteration cap");
  app.add_option("--n", opt.n, "Number of draws");
  app.add_flag("--header", opt.header, "Input CSV has a header line");

  auto* fit = app.add_subcommand("fit", "Fit (mu, Sigma) to a CSV sample");
  auto* moments = app.add_subcommand("moments", "Mean and covariance for given (mu, Sigma)");
  auto* classify = app.add_subcommand("classify", "Classify (theta, Theta)");
  auto* steep = app.add_subcommand("steepness-demo", "Gradient trace along Theta = eps I");
  auto* samp = app.add_subcommand("sample", "Draw a sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit) return cmd_fit(opt);
    if (*moments) return cmd_moments(opt);
    if (*classify) return cmd_classify(opt);
    if (*steep) return cmd_steepness(opt);
    if (*samp) return cmd_sample(opt);
  } catch (const tmvn::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tmvn::SingularSigma& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tmvn::SingularSampleCovariance& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tmvn::NonFinite& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tmvn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
