#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nlsgd {

/// Deterministic random stream identified by (seed, stream id).
///
/// xoshiro256** whose 256-bit state is derived from the pair through a
/// SplitMix64 chain, so that distinct stream ids give unrelated sequences and
/// the same pair always reproduces the same bits on every platform. All
/// floating-point variates are produced here (not via <random> distributions,
/// whose output is implementation-defined).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept;

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t bounded(std::uint64_t n) noexcept;

  /// Standard normal (Marsaglia polar method; caches the second variate).
  double normal() noexcept;

  /// Fair coin with success probability p.
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; exposed for seed derivation in the harness.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace nlsgd
