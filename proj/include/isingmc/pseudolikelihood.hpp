#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isingmc/ising.hpp"

namespace isingmc {

/// P(y(s) = +1 | y(-s), theta) for the 0-based site s.
double conditional_prob(const Theta& theta, const SpinConfig& y, int site);

/// Negative log-pseudolikelihood averaged over observations, with gradient.
/// Site activations a_{i,s} = sum_{r != s} theta_{rs} Y_i(r) come from one
/// n x d by d x d product, so each evaluation is O(d^2 n).
class PlObjective {
 public:
  explicit PlObjective(const Dataset& data);

  int dim() const noexcept { return d_; }
  std::size_t num_params() const noexcept { return num_edges(d_); }
  std::size_t size() const noexcept { return n_; }

  /// n x d matrix of activations.
  Eigen::MatrixXd activations(const Theta& theta) const;

  double value(const Theta& theta) const;
  std::vector<double> gradient(const Theta& theta) const;
  double value_and_gradient(const Theta& theta, std::vector<double>& grad) const;

 private:
  Eigen::MatrixXd coupling_matrix(const Theta& theta) const;

  int d_;
  std::size_t n_;
  Eigen::MatrixXd spins_;  // n x d, entries +-1
};

inline double pl_nll(const Theta& theta, const Dataset& data) { return PlObjective(data).value(theta); }
inline std::vector<double> pl_grad(const Theta& theta, const Dataset& data) {
  return PlObjective(data).gradient(theta);
}

}  // namespace isingmc
