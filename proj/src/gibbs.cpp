#include "isingmc/gibbs.hpp"

#include <cmath>

#include "isingmc/parallel.hpp"

namespace isingmc {

GibbsSampler::GibbsSampler(const Theta& psi) : psi_(psi), d_(psi.dim()) {
  if (!psi.all_finite()) throw std::invalid_argument("Gibbs sampler: non-finite psi");
  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(d_));
  std::size_t e = 0;
  for (int r = 0; r < d_; ++r) {
    for (int s = r + 1; s < d_; ++s, ++e) {
      const double w = psi[e];
      if (w == 0.0) continue;
      adj[static_cast<std::size_t>(r)].push_back({s, w});
      adj[static_cast<std::size_t>(s)].push_back({r, w});
    }
  }
  offsets_.resize(static_cast<std::size_t>(d_) + 1, 0);
  for (int r = 0; r < d_; ++r) {
    offsets_[static_cast<std::size_t>(r) + 1] = offsets_[static_cast<std::size_t>(r)] + adj[static_cast<std::size_t>(r)].size();
    neighbors_.insert(neighbors_.end(), adj[static_cast<std::size_t>(r)].begin(), adj[static_cast<std::size_t>(r)].end());
  }
}

double GibbsSampler::prob_plus(std::span<const Spin> y, int site) const {
  double field = 0.0;
  const auto lo = offsets_[static_cast<std::size_t>(site)];
  const auto hi = offsets_[static_cast<std::size_t>(site) + 1];
  for (auto k = lo; k < hi; ++k) field += neighbors_[k].weight * y[static_cast<std::size_t>(neighbors_[k].site)];
  // psi'J(Y+) - psi'J(Y-) = 2 * field.
  return 1.0 / (1.0 + std::exp(-2.0 * field));
}

FlipRecord GibbsSampler::step(SpinConfig& y, Rng& rng) const {
  const int site = static_cast<int>(rng.below(static_cast<std::uint32_t>(d_)));
  const double p = prob_plus(y.spins(), site);
  const Spin v = rng.uniform() < p ? Spin{1} : Spin{-1};
  if (v == y[site]) return {-1, v};
  y.flip(site);
  return {site, v};
}

std::pair<SpinConfig, FlipRecord> gibbs_step(const SpinConfig& y, const Theta& psi, Rng& rng) {
  check_same_dim(y.dim(), psi.dim(), "gibbs_step");
  GibbsSampler sampler(psi);
  SpinConfig out = y;
  auto rec = sampler.step(out, rng);
  return {std::move(out), rec};
}

SpinConfig MarkovSample::state(std::size_t k) const {
  if (k < 1 || k > steps.size()) throw std::out_of_range("MarkovSample::state: k out of range");
  SpinConfig y = start;
  for (std::size_t j = 0; j < k; ++j) {
    if (steps[j].changed()) y.flip(steps[j].site);
  }
  return y;
}

SpinConfig random_config(int d, Rng& rng) {
  std::vector<Spin> v(static_cast<std::size_t>(d));
  for (auto& x : v) x = rng.spin();
  return SpinConfig(std::move(v));
}

MarkovSample run_chain(const Theta& psi, std::size_t m, std::size_t burn_in,
                       std::optional<SpinConfig> init, RngSeed seed, bool cache_scores) {
  if (m < 1) throw std::invalid_argument("run_chain: m must be >= 1");
  GibbsSampler sampler(psi);
  Rng rng(seed);
  MarkovSample out;
  out.psi = psi;
  out.m = m;
  out.burn_in = burn_in;
  out.seed = seed;
  if (init) {
    check_same_dim(init->dim(), psi.dim(), "run_chain");
    out.init = *init;
  } else {
    out.init = random_config(psi.dim(), rng);
  }
  SpinConfig y = out.init;
  for (std::size_t k = 0; k < burn_in; ++k) sampler.step(y, rng);
  out.start = y;
  out.steps.reserve(m);
  if (cache_scores) out.scores_psi.reserve(m);
  double score = cache_scores ? edge_score(psi, y) : 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto rec = sampler.step(y, rng);
    out.steps.push_back(rec);
    if (!cache_scores) continue;
    if ((k + 1) % kScoreRefreshInterval == 0) {
      score = edge_score(psi, y);
    } else if (rec.changed()) {
      // y already holds the new spin; the flip changed the score by 2 * v * field.
      score += 2.0 * rec.value * local_field(psi, y.spins(), rec.site);
    }
    out.scores_psi.push_back(score);
  }
  return out;
}

Dataset sample_dataset(const Theta& theta, std::size_t n, std::size_t chain_len, RngSeed seed,
                       unsigned threads) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
  if (chain_len < 1) throw std::invalid_argument("sample_dataset: chain_len must be >= 1");
  const int d = theta.dim();
  GibbsSampler sampler(theta);
  std::vector<Spin> flat(n * static_cast<std::size_t>(d));
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(seed.child(i));
    SpinConfig y = random_config(d, rng);
    for (std::size_t k = 0; k < chain_len; ++k) sampler.step(y, rng);
    std::copy(y.spins().begin(), y.spins().end(), flat.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d)));
  });
  return Dataset(d, n, std::move(flat));
}

}  // namespace isingmc
