#include "isingmc/ising.hpp"

#include <algorithm>
#include <cmath>

namespace isingmc {

std::pair<int, int> linear_to_pair(std::size_t linear, int d) {
  if (linear >= num_edges(d)) {
    throw std::out_of_range("edge linear index " + std::to_string(linear) + " out of range for d=" +
                            std::to_string(d));
  }
  // Row r holds d-1-r pairs.
  int r = 0;
  std::size_t row_start = 0;
  while (true) {
    const auto row_len = static_cast<std::size_t>(d - 1 - r);
    if (linear < row_start + row_len) {
      return {r, r + 1 + static_cast<int>(linear - row_start)};
    }
    row_start += row_len;
    ++r;
  }
}

EdgeIndex edge_index(int r, int s, int d) {
  if (r < 1 || s > d || r >= s) {
    throw std::invalid_argument("invalid edge (" + std::to_string(r) + "," + std::to_string(s) +
                                ") for d=" + std::to_string(d) + "; need 1 <= r < s <= d");
  }
  return {r, s, pair_to_linear(r - 1, s - 1, d)};
}

EdgeIndex edge_from_linear(std::size_t linear, int d) {
  const auto [r, s] = linear_to_pair(linear, d);
  return {r + 1, s + 1, linear};
}

// ---------------------------------------------------------------------------
// Theta

Theta::Theta(int d) : d_(d), values_(num_edges(d), 0.0) {
  if (d < 2) throw std::invalid_argument("Theta needs at least 2 vertices");
}

Theta::Theta(int d, std::vector<double> values) : d_(d), values_(std::move(values)) {
  if (d < 2) throw std::invalid_argument("Theta needs at least 2 vertices");
  if (values_.size() != num_edges(d)) {
    throw DimensionError("Theta: expected " + std::to_string(num_edges(d)) + " values, got " +
                         std::to_string(values_.size()));
  }
  if (!all_finite()) throw std::invalid_argument("Theta: non-finite entry");
}

double Theta::at(int r, int s) const {
  if (r == s) return 0.0;
  if (r > s) std::swap(r, s);
  return values_[pair_to_linear(r, s, d_)];
}

void Theta::set(int r, int s, double v) {
  if (r == s || r < 0 || s < 0 || r >= d_ || s >= d_) {
    throw std::invalid_argument("Theta::set: invalid pair");
  }
  if (r > s) std::swap(r, s);
  values_[pair_to_linear(r, s, d_)] = v;
}

bool Theta::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t Theta::nonzeros() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double Theta::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// SpinConfig

SpinConfig::SpinConfig(std::vector<Spin> spins) : spins_(std::move(spins)) {
  for (Spin v : spins_) {
    if (v != 1 && v != -1) throw std::invalid_argument("spin entries must be -1 or +1");
  }
}

SpinConfig SpinConfig::ones(int d) { return SpinConfig(std::vector<Spin>(static_cast<std::size_t>(d), 1)); }

void SpinConfig::set(int i, Spin v) {
  if (v != 1 && v != -1) throw std::invalid_argument("spin entries must be -1 or +1");
  spins_.at(static_cast<std::size_t>(i)) = v;
}

SpinConfig SpinConfig::negated() const {
  SpinConfig out = *this;
  for (auto& v : out.spins_) v = static_cast<Spin>(-v);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(int d, std::vector<SpinConfig> configs) : d_(d), n_(configs.size()) {
  if (configs.empty()) throw std::invalid_argument("Dataset needs at least one observation");
  flat_.reserve(n_ * static_cast<std::size_t>(d));
  for (const auto& c : configs) {
    check_same_dim(c.dim(), d, "Dataset");
    flat_.insert(flat_.end(), c.spins().begin(), c.spins().end());
  }
}

Dataset::Dataset(int d, std::size_t n, std::vector<Spin> flat) : d_(d), n_(n), flat_(std::move(flat)) {
  if (n == 0) throw std::invalid_argument("Dataset needs at least one observation");
  if (d < 2) throw std::invalid_argument("Dataset needs at least 2 vertices");
  if (flat_.size() != n * static_cast<std::size_t>(d)) {
    throw DimensionError("Dataset: flat buffer has wrong size");
  }
  for (Spin v : flat_) {
    if (v != 1 && v != -1) throw std::invalid_argument("spin entries must be -1 or +1");
  }
}

SpinConfig Dataset::config(std::size_t i) const {
  auto r = row(i);
  return SpinConfig(std::vector<Spin>(r.begin(), r.end()));
}

std::vector<double> Dataset::mean_suff_stat() const {
  std::vector<long long> counts(num_edges(d_), 0);
  for (std::size_t i = 0; i < n_; ++i) {
    auto y = row(i);
    std::size_t e = 0;
    for (int r = 0; r < d_; ++r) {
      for (int s = r + 1; s < d_; ++s, ++e) counts[e] += y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(s)];
    }
  }
  std::vector<double> mean(counts.size());
  for (std::size_t e = 0; e < counts.size(); ++e) mean[e] = static_cast<double>(counts[e]) / static_cast<double>(n_);
  return mean;
}

// ---------------------------------------------------------------------------

SuffStat suff_stat(std::span<const Spin> y) {
  const int d = static_cast<int>(y.size());
  SuffStat j;
  j.reserve(num_edges(d));
  for (int r = 0; r < d; ++r) {
    for (int s = r + 1; s < d; ++s) j.push_back(static_cast<Spin>(y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(s)]));
  }
  return j;
}

double edge_score(const Theta& theta, std::span<const Spin> y) {
  const int d = theta.dim();
  check_same_dim(static_cast<int>(y.size()), d, "edge_score");
  auto v = theta.values();
  double total = 0.0;
  std::size_t e = 0;
  for (int r = 0; r < d; ++r) {
    double row = 0.0;
    for (int s = r + 1; s < d; ++s, ++e) row += v[e] * y[static_cast<std::size_t>(s)];
    total += row * y[static_cast<std::size_t>(r)];
  }
  return total;
}

double local_field(const Theta& theta, std::span<const Spin> y, int site) {
  const int d = theta.dim();
  auto v = theta.values();
  double a = 0.0;
  // Column part: pairs (s, site) with s < site.
  for (int s = 0; s < site; ++s) a += v[pair_to_linear(s, site, d)] * y[static_cast<std::size_t>(s)];
  // Row part: pairs (site, s) with s > site are contiguous.
  if (site + 1 < d) {
    const std::size_t base = pair_to_linear(site, site + 1, d);
    for (int s = site + 1; s < d; ++s) a += v[base + static_cast<std::size_t>(s - site - 1)] * y[static_cast<std::size_t>(s)];
  }
  return a;
}

double incremental_edge_score(double prev, const Theta& theta, const SpinConfig& y_prev,
                              int flipped_site, Spin new_value) {
  check_same_dim(y_prev.dim(), theta.dim(), "incremental_edge_score");
  if (flipped_site < 0 || flipped_site >= theta.dim()) {
    throw std::out_of_range("incremental_edge_score: invalid site " + std::to_string(flipped_site));
  }
  if (new_value != 1 && new_value != -1) throw std::invalid_argument("spin entries must be -1 or +1");
  const Spin old = y_prev[flipped_site];
  if (old == new_value) return prev;
  // Every pair touching the site changes sign: delta = (new - old) * field.
  return prev + static_cast<double>(new_value - old) * local_field(theta, y_prev.spins(), flipped_site);
}

}  // namespace isingmc
