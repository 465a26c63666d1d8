#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace isingmc {

/// Objective or gradient became NaN/inf, or the iterates diverged.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t max_iters = 5000;
  double kkt_tol = 1e-6;
  double initial_step = 1.0;
  double backtrack_factor = 2.0;
  bool active_set = false;

  void validate() const;
};

struct FitResult {
  std::vector<double> theta_hat;
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  /// smooth(theta_hat) + lambda |theta_hat|_1
  double objective = 0.0;
  bool converged = false;
};

/// Smooth convex part of a composite objective. value_and_grad fills `grad`
/// and returns the value.
struct SmoothFunction {
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double>, std::vector<double>&)> value_and_grad;
};

inline double soft_threshold(double x, double tau) {
  if (tau < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

/// Worst violation of the subgradient optimality conditions of
/// smooth + lambda |.|_1 at theta with gradient grad.
double kkt_violation(std::span<const double> theta, std::span<const double> grad, double lambda);

/// Monotone FISTA with backtracking on the quadratic upper bound. Stops when
/// the KKT violation drops to opts.kkt_tol. Throws NumericalError on non-finite
/// values or when the prox point fails to improve 100 times in a row.
FitResult fista(const SmoothFunction& smooth, double lambda, std::span<const double> theta_init,
                const SolverOptions& opts = {});

}  // namespace isingmc
