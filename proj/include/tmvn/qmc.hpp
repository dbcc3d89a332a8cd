#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace tmvn::qmc {

/// Fixed randomized-QMC design: `shifts` independent uniform shifts of a
/// `points_per_shift`-point Kronecker set (sqrt-prime generators, baker's
/// transform).
struct Plan {
  int points_per_shift = 4096;
  int shifts = 16;
  std::uint64_t seed = 0;

  long total_points() const { return static_cast<long>(points_per_shift) * shifts; }
};

/// Integrand in log scale on (0,1)^dim. `scratch` holds scratch_size doubles
/// private to the calling thread.
struct LogIntegrand {
  int dim = 0;
  int scratch_size = 0;
  std::function<double(const double* w, double* scratch)> log_f;
};

/// Deterministic per-shift seed: splitmix64 of (seed, shift index).
std::uint64_t shift_seed(std::uint64_t seed, int shift);

/// One entry per shift: log of the point-average of exp(log_f).
/// Reference implementation, single-threaded.
std::vector<double> log_means_serial(const LogIntegrand& f, const Plan& plan);

/// Same contract, shifts distributed over OpenMP threads. Each shift is
/// accumulated sequentially and the per-shift results are stored by index,
/// so the output is bit-identical to log_means_serial for any schedule.
std::vector<double> log_means(const LogIntegrand& f, const Plan& plan);

/// Log-mean and relative standard error of replicate values exp(log_rep[s]).
struct ReplicateSummary {
  double log_mean;
  double rel_std_error;
};
ReplicateSummary summarize(const std::vector<double>& log_rep);

/// Mean and standard error across replicates of plain values.
struct MeanSe {
  double mean;
  double std_error;
};
MeanSe mean_se(const std::vector<double>& values);

}  // namespace tmvn::qmc
