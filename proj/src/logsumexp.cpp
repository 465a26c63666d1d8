#include "isingmc/logsumexp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isingmc {

NormalizedWeights normalize_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("normalize_log_weights: empty sample");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw WeightUnderflowError("importance log-weight is not finite");
    }
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw WeightUnderflowError("all importance weights underflow to zero");

  NormalizedWeights out;
  out.weights.resize(log_weights.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    out.weights[k] = std::exp(log_weights[k] - top);
    sum += out.weights[k];
  }
  double sum_sq = 0.0;
  for (auto& w : out.weights) {
    w /= sum;
    sum_sq += w * w;
  }
  out.log_mean_exp = top + std::log(sum) - std::log(static_cast<double>(log_weights.size()));
  out.ess = 1.0 / sum_sq;
  return out;
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace isingmc
