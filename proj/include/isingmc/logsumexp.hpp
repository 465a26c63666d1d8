#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace isingmc {

/// Raised when importance weights cannot be normalised (all underflow, or a
/// log-weight is not finite). Usually means psi is far from theta.
class WeightUnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NormalizedWeights {
  /// log((1/m) sum_k exp(logw_k)).
  double log_mean_exp = 0.0;
  /// exp(logw_k) / sum_j exp(logw_j).
  std::vector<double> weights;
  /// (sum w)^2 / sum w^2.
  double ess = 0.0;
};

/// Max-shifted softmax over log-weights.
NormalizedWeights normalize_log_weights(std::span<const double> log_weights);

/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

/// 1 / (1 + exp(-x)) without overflow.
double sigmoid(double x) noexcept;

}  // namespace isingmc
