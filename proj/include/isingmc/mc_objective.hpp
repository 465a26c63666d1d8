#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "isingmc/gibbs.hpp"
#include "isingmc/ising.hpp"
#include "isingmc/logsumexp.hpp"

namespace isingmc {

struct McEvaluation {
  double value = 0.0;
  std::vector<double> gradient;  // empty unless requested
  double ess = 0.0;
  double max_log_weight = 0.0;
};

/// Monte-Carlo approximate negative log-likelihood
///
///   l(theta) = -data_mean' theta + log((1/m) sum_k exp[(theta - psi)' J(Y^k)])
///
/// with the constant log C(psi) dropped. Y^k is a Gibbs chain at psi.
/// Every evaluation replays the chain's flip deltas once, so value and
/// gradient cost O(m d) rather than O(m d^2).
class McObjective {
 public:
  McObjective(const Dataset& data, std::shared_ptr<const MarkovSample> sample);
  McObjective(std::vector<double> data_mean, std::shared_ptr<const MarkovSample> sample);

  int dim() const noexcept { return d_; }
  std::size_t num_params() const noexcept { return data_mean_.size(); }
  const std::vector<double>& data_mean() const noexcept { return data_mean_; }
  const MarkovSample& sample() const noexcept { return *sample_; }
  const Theta& psi() const noexcept { return sample_->psi; }

  /// (theta - psi)' J(Y^k), k = 1..m.
  std::vector<double> log_weights(const Theta& theta) const;

  double value(const Theta& theta) const;
  std::vector<double> gradient(const Theta& theta) const;
  McEvaluation evaluate(const Theta& theta, bool with_gradient = true) const;

  /// Weighted covariance of J(Y^k). O(m d^2 d^2); meant for d up to ~50.
  Eigen::MatrixXd hessian(const Theta& theta) const;

  /// ESS below this fraction of m flags a stale instrumental parameter.
  static constexpr double kLowEssFraction = 0.01;

 private:
  void check(const Theta& theta) const;

  int d_;
  std::vector<double> data_mean_;
  std::shared_ptr<const MarkovSample> sample_;
};

/// Refresh period for the incrementally maintained log-weights.
inline constexpr std::size_t kLogWeightRefreshInterval = 10000;

}  // namespace isingmc
