#pragma once

#include "rwt/space.hpp"

#include <cstdint>
#include <vector>

namespace rwt {

/// SplitMix64 generator. Streams are keyed by (seed, state, sample) so every
/// sample is reproducible on its own, whatever the scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t state, std::uint64_t sample);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Per-row cumulative distributions of the kernel for inverse-CDF sampling.
class JumpSampler {
 public:
  explicit JumpSampler(const FiniteRWSpace& space);
  Index jump(Index from, SplitMix64& rng) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> targets_;
  std::vector<double> cdf_;
};

inline constexpr std::uint64_t kStepCap = 10'000'000;

/// Jumps until the walk first leaves omega. Errors: StepCapExceeded, InvalidArgument.
std::uint64_t sample_exit_time(const JumpSampler& sampler, const Domain& domain, Index start, SplitMix64& rng);
std::uint64_t sample_exit_time(const FiniteRWSpace& space, const Domain& domain, Index start, SplitMix64& rng);

struct McEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;  // 1.96 * stddev / sqrt(n_samples)
  double stddev = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Errors: InvalidArgument (fewer than 100 samples), StepCapExceeded.
McEstimate mc_stress(const FiniteRWSpace& space, const Domain& domain, Index start, std::uint64_t n_samples,
                     std::uint64_t seed);
/// Stratified sum of nu(x) * mean exit time over omega; n_samples is per state.
McEstimate mc_torsion(const FiniteRWSpace& space, const Domain& domain, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace rwt
