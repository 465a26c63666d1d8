#pragma once

#include <cstdint>
#include <random>

namespace isingmc {

/// Seed plus stream id. Identical (seed, stream) pairs give identical draws;
/// child() derives independent sub-streams for chains and replications.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSeed child(std::uint64_t k) const noexcept;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline RngSeed RngSeed::child(std::uint64_t k) const noexcept {
  return {seed, mix64(stream ^ mix64(k + 0x632BE59BD9B4E019ULL))};
}

/// Engine wrapper whose uniform draws are defined bit-for-bit here rather
/// than by the standard library's distributions, so output is portable.
class Rng {
 public:
  explicit Rng(RngSeed s);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on {0, ..., n-1}.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }
  /// +1 or -1 with equal probability.
  std::int8_t spin() { return (engine_() >> 63) ? std::int8_t{1} : std::int8_t{-1}; }

 private:
  std::mt19937_64 engine_;
};

inline Rng::Rng(RngSeed s) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(s.stream), static_cast<std::uint32_t>(s.stream >> 32)};
  engine_.seed(seq);
}

}  // namespace isingmc
