#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace isingmc {

/// Thrown when two objects that must share a vertex count do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Canonical position of an unordered vertex pair. Vertices are 1-based here,
/// matching every external file format; the linear index is 0-based.
struct EdgeIndex {
  int r = 0;
  int s = 0;
  std::size_t linear = 0;

  friend bool operator==(const EdgeIndex&, const EdgeIndex&) = default;
};

inline constexpr std::size_t num_edges(int d) noexcept {
  return d < 2 ? 0 : static_cast<std::size_t>(d) * static_cast<std::size_t>(d - 1) / 2;
}

/// Linear index of the 0-based pair (r, s), r < s, in the row-major order
/// (0,1),(0,2),...,(0,d-1),(1,2),...
inline constexpr std::size_t pair_to_linear(int r, int s, int d) noexcept {
  const auto rr = static_cast<std::size_t>(r);
  const auto dd = static_cast<std::size_t>(d);
  return rr * dd - rr * (rr + 1) / 2 + static_cast<std::size_t>(s - r - 1);
}

/// Inverse of pair_to_linear; returns 0-based (r, s).
std::pair<int, int> linear_to_pair(std::size_t linear, int d);

/// 1-based public entry point; rejects r >= s, r < 1 or s > d.
EdgeIndex edge_index(int r, int s, int d);
EdgeIndex edge_from_linear(std::size_t linear, int d);

/// Pairwise interaction vector over the d(d-1)/2 edges.
class Theta {
 public:
  Theta() = default;
  explicit Theta(int d);
  Theta(int d, std::vector<double> values);

  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t e) const { return values_[e]; }
  double& operator[](std::size_t e) { return values_[e]; }

  /// Symmetric 0-based accessor; (r, r) is zero.
  double at(int r, int s) const;
  void set(int r, int s, double v);

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  bool all_finite() const noexcept;
  std::size_t nonzeros() const noexcept;
  double max_abs() const noexcept;

  friend bool operator==(const Theta&, const Theta&) = default;

 private:
  int d_ = 0;
  std::vector<double> values_;
};

using Spin = std::int8_t;

/// One configuration in {-1,+1}^d.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::vector<Spin> spins);
  /// All spins +1.
  static SpinConfig ones(int d);

  int dim() const noexcept { return static_cast<int>(spins_.size()); }
  Spin operator[](int i) const { return spins_[static_cast<std::size_t>(i)]; }
  void set(int i, Spin v);
  void flip(int i) { spins_[static_cast<std::size_t>(i)] = static_cast<Spin>(-spins_[static_cast<std::size_t>(i)]); }
  std::span<const Spin> spins() const noexcept { return spins_; }
  SpinConfig negated() const;

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<Spin> spins_;
};

/// J(y): the vector of pairwise products y(r) y(s) in canonical edge order.
using SuffStat = std::vector<Spin>;

/// n observations of a d-vertex model, stored row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int d, std::vector<SpinConfig> configs);
  /// Row-major n x d spins.
  Dataset(int d, std::size_t n, std::vector<Spin> flat);

  int dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return n_; }
  Spin at(std::size_t i, int s) const { return flat_[i * static_cast<std::size_t>(d_) + static_cast<std::size_t>(s)]; }
  std::span<const Spin> row(std::size_t i) const {
    return {flat_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  SpinConfig config(std::size_t i) const;
  std::span<const Spin> flat() const noexcept { return flat_; }

  /// (1/n) sum_i J(Y_i).
  std::vector<double> mean_suff_stat() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  int d_ = 0;
  std::size_t n_ = 0;
  std::vector<Spin> flat_;
};

SuffStat suff_stat(std::span<const Spin> y);
inline SuffStat suff_stat(const SpinConfig& y) { return suff_stat(y.spins()); }

/// theta' J(y).
double edge_score(const Theta& theta, std::span<const Spin> y);
inline double edge_score(const Theta& theta, const SpinConfig& y) { return edge_score(theta, y.spins()); }

/// sum_{s != site} theta_{site,s} y(s); 0-based site.
double local_field(const Theta& theta, std::span<const Spin> y, int site);

/// theta' J(y_new) given prev = theta' J(y_prev), where y_new equals y_prev
/// except at the 0-based flipped_site which takes new_value. O(d).
double incremental_edge_score(double prev, const Theta& theta, const SpinConfig& y_prev,
                              int flipped_site, Spin new_value);

inline void check_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace isingmc
