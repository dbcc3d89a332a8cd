#include "tmvn/qmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tmvn::qmc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

const std::vector<double>& generators() {
  static const std::vector<double> alpha = [] {
    std::vector<double> out;
    for (int n = 2; out.size() < 128; ++n) {
      bool prime = true;
      for (int k = 2; k * k <= n; ++k) {
        if (n % k == 0) {
          prime = false;
          break;
        }
      }
      if (prime) {
        const double s = std::sqrt(static_cast<double>(n));
        out.push_back(s - std::floor(s));
      }
    }
    return out;
  }();
  return alpha;
}

double accumulate_shift(const LogIntegrand& f, const Plan& plan, int shift,
                        std::vector<double>& w, std::vector<double>& scratch) {
  const auto& alpha = generators();
  std::mt19937_64 rng(shift_seed(plan.seed, shift));
  std::vector<double> delta(f.dim);
  for (auto& d : delta) d = unit_from_bits(rng());

  constexpr double kEdge = 0x1.0p-53;
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  for (int k = 0; k < plan.points_per_shift; ++k) {
    for (int j = 0; j < f.dim; ++j) {
      double u = static_cast<double>(k) * alpha[j] + delta[j];
      u -= std::floor(u);
      const double baker = 1.0 - std::abs(2.0 * u - 1.0);
      w[j] = std::clamp(baker, kEdge, 1.0 - kEdge);
    }
    const double lv = f.log_f(w.data(), scratch.data());
    if (lv == -std::numeric_limits<double>::infinity()) continue;
    if (lv > run_max) {
      run_sum = run_sum * std::exp(run_max - lv) + 1.0;
      run_max = lv;
    } else {
      run_sum += std::exp(lv - run_max);
    }
  }
  if (run_sum == 0.0) return -std::numeric_limits<double>::infinity();
  return run_max + std::log(run_sum) - std::log(static_cast<double>(plan.points_per_shift));
}

void check(const LogIntegrand& f, const Plan& plan) {
  if (f.dim < 0 || f.dim > static_cast<int>(generators().size())) {
    throw std::invalid_argument("qmc: unsupported dimension");
  }
  if (plan.points_per_shift < 1 || plan.shifts < 1) {
    throw std::invalid_argument("qmc: empty plan");
  }
}

}  // namespace

std::uint64_t shift_seed(std::uint64_t seed, int shift) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(shift + 1));
}

std::vector<double> log_means_serial(const LogIntegrand& f, const Plan& plan) {
  check(f, plan);
  std::vector<double> out(plan.shifts);
  std::vector<double> w(f.dim);
  std::vector<double> scratch(f.scratch_size);
  for (int s = 0; s < plan.shifts; ++s) out[s] = accumulate_shift(f, plan, s, w, scratch);
  return out;
}

std::vector<double> log_means(const LogIntegrand& f, const Plan& plan) {
  check(f, plan);
  std::vector<double> out(plan.shifts);
  const long work = plan.total_points() * std::max(1, f.dim);
#pragma omp parallel if (work > 20000)
  {
    std::vector<double> w(f.dim);
    std::vector<double> scratch(f.scratch_size);
#pragma omp for schedule(static)
    for (int s = 0; s < plan.shifts; ++s) out[s] = accumulate_shift(f, plan, s, w, scratch);
  }
  return out;
}

ReplicateSummary summarize(const std::vector<double>& log_rep) {
  if (log_rep.empty()) throw std::invalid_argument("summarize: no replicates");
  const double m = *std::max_element(log_rep.begin(), log_rep.end());
  if (!std::isfinite(m)) return {m, 0.0};
  std::vector<double> scaled(log_rep.size());
  for (std::size_t s = 0; s < log_rep.size(); ++s) scaled[s] = std::exp(log_rep[s] - m);
  const MeanSe ms = mean_se(scaled);
  return {m + std::log(ms.mean), ms.std_error / ms.mean};
}

MeanSe mean_se(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace tmvn::qmc
