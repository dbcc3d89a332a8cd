#include "tmvn/sampler.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "tmvn/errors.hpp"
#include "tmvn/normal_dist.hpp"

namespace tmvn {
namespace {

constexpr long kAcceptanceWindow = 100000;
constexpr double kMinAcceptance = 1e-4;

// Uniform on (0, 1) from the top 53 bits; std distributions are not
// reproducible across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal() { return normal::quantile(uniform()); }

 private:
  std::mt19937_64 eng_;
};

SampleDraws rejection(const ModelParams& p, Index n, Stream& rng) {
  const Index d = p.dim();
  const Matrix& l = p.sigma.factor();
  SampleDraws out;
  out.data.resize(n, d);
  Vector z(d);
  Index accepted = 0;
  while (accepted < n) {
    for (Index j = 0; j < d; ++j) z(j) = rng.normal();
    const Vector x = p.mu + l * z;
    ++out.proposals;
    if ((x.array() > 0.0).all()) out.data.row(accepted++) = x.transpose();
    if (out.proposals == kAcceptanceWindow &&
        static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(kAcceptanceWindow)) {
      throw AcceptanceTooLow("rejection acceptance rate below 1e-4; use the gibbs sampler");
    }
  }
  return out;
}

SampleDraws gibbs(const ModelParams& p, Index n, const SamplerConfig& cfg, Stream& rng) {
  const Index d = p.dim();
  const Matrix q = p.sigma.inverse();
  Vector x(d);
  for (Index j = 0; j < d; ++j) x(j) = std::max(p.mu(j), std::sqrt(p.sigma(j, j)));

  auto sweep = [&] {
    for (Index i = 0; i < d; ++i) {
      double shift = 0.0;
      for (Index j = 0; j < d; ++j) {
        if (j != i) shift += q(i, j) * (x(j) - p.mu(j));
      }
      const double sd = 1.0 / std::sqrt(q(i, i));
      const double m = p.mu(i) - shift / q(i, i);
      const double v = m + sd * normal::draw_above(-m / sd, rng.uniform()).value;
      x(i) = v > 0.0 ? v : std::numeric_limits<double>::denorm_min();
    }
  };

  SampleDraws out;
  out.data.resize(n, d);
  for (int b = 0; b < cfg.burn_in; ++b) sweep();
  out.proposals = cfg.burn_in;
  for (Index r = 0; r < n; ++r) {
    for (int t = 0; t < cfg.thinning; ++t) sweep();
    out.proposals += cfg.thinning;
    out.data.row(r) = x.transpose();
  }
  return out;
}

}  // namespace

const char* to_string(SamplerMethod m) {
  return m == SamplerMethod::rejection ? "rejection" : "gibbs";
}

void SamplerConfig::validate() const {
  if (burn_in < 0) throw InputError("burn_in must be >= 0");
  if (thinning < 1) throw InputError("thinning must be >= 1");
}

SampleDraws sample_draws(const ModelParams& p, Index n, const SamplerConfig& cfg) {
  cfg.validate();
  if (n < 1) throw InputError("sample size must be >= 1");
  Stream rng(cfg.seed);
  return cfg.method == SamplerMethod::rejection ? rejection(p, n, rng) : gibbs(p, n, cfg, rng);
}

Sample sample(const ModelParams& p, Index n, const SamplerConfig& cfg) {
  return Sample(sample_draws(p, n, cfg).data);
}

}  // namespace tmvn
