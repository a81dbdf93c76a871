#include "rwt/montecarlo.hpp"

#include "rwt/error.hpp"
#include "rwt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>

namespace rwt {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

void require_samples(std::uint64_t n) {
  if (n < 100) throw Error(Errc::invalid_argument, "Monte-Carlo estimates need at least 100 samples");
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

Moments sample_state(const JumpSampler& sampler, const Domain& domain, Index start, std::uint64_t n,
                     std::uint64_t seed) {
  std::vector<std::uint64_t> times(n);
  const auto count = static_cast<std::int64_t>(n);
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::int64_t s = 0; s < count; ++s) {
    if (failed.load(std::memory_order_relaxed)) continue;
    SplitMix64 rng = SplitMix64::substream(seed, start, static_cast<std::uint64_t>(s));
    try {
      times[static_cast<std::size_t>(s)] = sample_exit_time(sampler, domain, start, rng);
    } catch (...) {
#pragma omp critical(rwt_mc_failure)
      if (!failure) failure = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (failure) std::rethrow_exception(failure);
  double sum = 0.0;
  for (auto t : times) sum += static_cast<double>(t);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (auto t : times) ss += (static_cast<double>(t) - mean) * (static_cast<double>(t) - mean);
  return {mean, ss / static_cast<double>(n - 1)};
}

}  // namespace

SplitMix64 SplitMix64::substream(std::uint64_t seed, std::uint64_t state, std::uint64_t sample) {
  std::uint64_t key = mix(seed + kGolden);
  key = mix(key ^ (state + kGolden));
  key = mix(key ^ (sample + 2 * kGolden));
  return SplitMix64(key);
}

std::uint64_t SplitMix64::next() {
  state_ += kGolden;
  return mix(state_);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

JumpSampler::JumpSampler(const FiniteRWSpace& space) {
  const Kernel& p = space.kernel();
  offsets_.push_back(0);
  for (Eigen::Index x = 0; x < p.outerSize(); ++x) {
    double acc = 0.0;
    for (Kernel::InnerIterator it(p, x); it; ++it) {
      acc += it.value();
      targets_.push_back(static_cast<Index>(it.col()));
      cdf_.push_back(acc);
    }
    offsets_.push_back(targets_.size());
  }
}

Index JumpSampler::jump(Index from, SplitMix64& rng) const {
  const auto begin = cdf_.begin() + static_cast<std::ptrdiff_t>(offsets_[from]);
  const auto end = cdf_.begin() + static_cast<std::ptrdiff_t>(offsets_[from + 1]);
  const double u = rng.uniform() * *(end - 1);
  auto it = std::upper_bound(begin, end, u);
  if (it == end) --it;
  return targets_[static_cast<std::size_t>(it - cdf_.begin())];
}

std::uint64_t sample_exit_time(const JumpSampler& sampler, const Domain& domain, Index start, SplitMix64& rng) {
  if (start >= domain.local.size() || !domain.contains(start))
    throw Error(Errc::invalid_argument, "exit-time sampling must start inside the domain");
  Index x = start;
  for (std::uint64_t k = 1; k <= kStepCap; ++k) {
    x = sampler.jump(x, rng);
    if (!domain.contains(x)) return k;
  }
  throw Error(Errc::step_cap_exceeded, "walk stayed in the domain for " + std::to_string(kStepCap) + " steps");
}

std::uint64_t sample_exit_time(const FiniteRWSpace& space, const Domain& domain, Index start, SplitMix64& rng) {
  return sample_exit_time(JumpSampler(space), domain, start, rng);
}

McEstimate mc_stress(const FiniteRWSpace& space, const Domain& domain, Index start, std::uint64_t n_samples,
                     std::uint64_t seed) {
  require_samples(n_samples);
  const JumpSampler sampler(space);
  const Moments m = sample_state(sampler, domain, start, n_samples, seed);
  McEstimate out;
  out.mean = m.mean;
  out.stddev = std::sqrt(m.variance);
  out.half_width_95 = 1.96 * out.stddev / std::sqrt(static_cast<double>(n_samples));
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

McEstimate mc_torsion(const FiniteRWSpace& space, const Domain& domain, std::uint64_t n_samples, std::uint64_t seed) {
  require_samples(n_samples);
  const JumpSampler sampler(space);
  double total = 0.0, weighted_var = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Index x = domain.omega[i];
    const Moments m = sample_state(sampler, domain, x, n_samples, seed);
    total += space.nu(x) * m.mean;
    weighted_var += space.nu(x) * space.nu(x) * m.variance;
  }
  McEstimate out;
  out.mean = total;
  out.stddev = std::sqrt(weighted_var);
  out.half_width_95 = 1.96 * out.stddev / std::sqrt(static_cast<double>(n_samples));
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

}  // namespace rwt
