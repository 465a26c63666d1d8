#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isingmc/ising.hpp"
#include "isingmc/rng.hpp"

namespace isingmc {

/// One random-scan update. `site` is 0-based, or -1 when the drawn spin
/// equals the current one.
struct FlipRecord {
  std::int32_t site = -1;
  Spin value = 0;

  bool changed() const noexcept { return site >= 0; }
};

/// Random-scan Gibbs kernel for p(.|psi). Neighbour lists are built from the
/// nonzero entries of psi so a step costs O(degree).
class GibbsSampler {
 public:
  explicit GibbsSampler(const Theta& psi);

  int dim() const noexcept { return d_; }
  const Theta& psi() const noexcept { return psi_; }

  /// P(y(site) = +1 | y(-site)).
  double prob_plus(std::span<const Spin> y, int site) const;
  FlipRecord step(SpinConfig& y, Rng& rng) const;

 private:
  struct Neighbor {
    std::int32_t site;
    double weight;
  };
  Theta psi_;
  int d_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> neighbors_;
};

/// Single update of y under psi; returns the new config and the flip record.
std::pair<SpinConfig, FlipRecord> gibbs_step(const SpinConfig& y, const Theta& psi, Rng& rng);

/// Post-burn-in Gibbs chain Y^1..Y^m stored as single-site flips relative to
/// `start` (the state after burn-in). `init` is the pre-burn-in state.
struct MarkovSample {
  Theta psi;
  std::size_t m = 0;
  std::size_t burn_in = 0;
  SpinConfig init;
  SpinConfig start;
  std::vector<FlipRecord> steps;
  /// psi' J(Y^k) for k = 1..m; empty when not cached.
  std::vector<double> scores_psi;
  RngSeed seed;

  int dim() const noexcept { return psi.dim(); }

  /// Calls visit(k, y, record) for k = 0..m-1 where y is Y^{k+1} and record
  /// the flip that produced it from its predecessor.
  template <class Visit>
  void replay(Visit&& visit) const {
    SpinConfig y = start;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& rec = steps[k];
      if (rec.changed()) y.flip(rec.site);
      visit(k, static_cast<const SpinConfig&>(y), rec);
    }
  }

  /// Materialises Y^k (1-based k).
  SpinConfig state(std::size_t k) const;
};

/// Full recomputation interval for cached running scores.
inline constexpr std::size_t kScoreRefreshInterval = 100000;

inline std::size_t default_burn_in(int d) { return 1000 * static_cast<std::size_t>(d); }

/// Runs burn_in + m single-site updates from `init` (uniform random when
/// absent) and keeps the last m as a delta-encoded sample.
MarkovSample run_chain(const Theta& psi, std::size_t m, std::size_t burn_in,
                       std::optional<SpinConfig> init, RngSeed seed, bool cache_scores = true);

/// n independent chains of chain_len single-site updates from uniform random
/// starts; only each final configuration is kept. Observation i uses stream
/// seed.child(i), so the result does not depend on `threads`.
Dataset sample_dataset(const Theta& theta, std::size_t n, std::size_t chain_len, RngSeed seed,
                       unsigned threads = 1);

SpinConfig random_config(int d, Rng& rng);

}  // namespace isingmc
