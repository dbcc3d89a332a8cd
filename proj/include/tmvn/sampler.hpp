#pragma once

#include <cstdint>

#include "tmvn/mle.hpp"
#include "tmvn/orthant.hpp"

namespace tmvn {

enum class SamplerMethod { rejection, gibbs };
const char* to_string(SamplerMethod m);

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::rejection;
  std::uint64_t seed = 1;
  int burn_in = 500;  // gibbs only
  int thinning = 5;   // gibbs only

  void validate() const;
};

struct SampleDraws {
  Matrix data;
  /// Rejection: number of N(mu, Sigma) proposals used. Gibbs: sweeps.
  long proposals = 0;
};

/// Rejection aborts with AcceptanceTooLow once 1e5 proposals have been made
/// with an acceptance rate below 1e-4.
SampleDraws sample_draws(const ModelParams& p, Index n, const SamplerConfig& cfg);
Sample sample(const ModelParams& p, Index n, const SamplerConfig& cfg);

}  // namespace tmvn
