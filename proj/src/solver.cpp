#include "isingmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace isingmc {

void SolverOptions::validate() const {
  if (!(kkt_tol > 0.0)) throw std::invalid_argument("SolverOptions: kkt_tol must be > 0");
  if (!(backtrack_factor > 1.0)) throw std::invalid_argument("SolverOptions: backtrack_factor must be > 1");
  if (!(initial_step > 0.0)) throw std::invalid_argument("SolverOptions: initial_step must be > 0");
  if (max_iters == 0) throw std::invalid_argument("SolverOptions: max_iters must be > 0");
}

double kkt_violation(std::span<const double> theta, std::span<const double> grad, double lambda) {
  if (theta.size() != grad.size()) throw std::invalid_argument("kkt_violation: size mismatch");
  double worst = 0.0;
  for (std::size_t e = 0; e < theta.size(); ++e) {
    double v;
    if (theta[e] != 0.0) {
      v = std::abs(grad[e] + lambda * (theta[e] > 0.0 ? 1.0 : -1.0));
    } else {
      v = std::max(std::abs(grad[e]) - lambda, 0.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("fista: non-finite ") + what);
}

void require_finite(const std::vector<double>& g) {
  for (double v : g) require_finite(v, "gradient");
}

// KKT restricted to the unmasked coordinates.
double masked_kkt(const std::vector<double>& x, const std::vector<double>& g, double lambda,
                  const std::vector<char>* mask) {
  if (!mask) return kkt_violation(x, g, lambda);
  double worst = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (!(*mask)[e]) continue;
    const double ge[1] = {g[e]};
    const double xe[1] = {x[e]};
    worst = std::max(worst, kkt_violation(xe, ge, lambda));
  }
  return worst;
}

// Accumulates into `iterations`; coordinates outside `mask` stay at zero.
FitResult run_mfista(const SmoothFunction& f, double lambda, std::vector<double> x,
                     const SolverOptions& opts, const std::vector<char>* mask, double& inv_step,
                     std::size_t iteration_budget) {
  const std::size_t p = x.size();
  auto apply_mask = [&](std::vector<double>& v) {
    if (!mask) return;
    for (std::size_t e = 0; e < p; ++e) {
      if (!(*mask)[e]) v[e] = 0.0;
    }
  };
  apply_mask(x);

  std::vector<double> grad_x;
  double fx = f.value_and_grad(x, grad_x);
  require_finite(fx, "objective");
  require_finite(grad_x);
  double obj_x = fx + lambda * l1(x);

  FitResult res;
  res.kkt_violation = masked_kkt(x, grad_x, lambda, mask);
  if (res.kkt_violation <= opts.kkt_tol) {
    res.theta_hat = std::move(x);
    res.objective = obj_x;
    res.converged = true;
    return res;
  }

  std::vector<double> y = x, x_prev = x, z(p), grad_y = grad_x;
  double fy = fx;
  double t = 1.0;
  int stalls = 0;

  for (std::size_t it = 1; it <= iteration_budget; ++it) {
    if (it > 1) {
      fy = f.value_and_grad(y, grad_y);
      require_finite(fy, "objective");
      require_finite(grad_y);
    }
    // Backtracking on the quadratic upper bound at y.
    double fz;
    while (true) {
      const double step = 1.0 / inv_step;
      for (std::size_t e = 0; e < p; ++e) z[e] = soft_threshold(y[e] - step * grad_y[e], lambda * step);
      apply_mask(z);
      fz = f.value(z);
      require_finite(fz, "objective");
      double lin = 0.0, sq = 0.0;
      for (std::size_t e = 0; e < p; ++e) {
        const double diff = z[e] - y[e];
        lin += grad_y[e] * diff;
        sq += diff * diff;
      }
      if (fz <= fy + lin + 0.5 * inv_step * sq + 1e-12 * (1.0 + std::abs(fy))) break;
      inv_step *= opts.backtrack_factor;
      if (!std::isfinite(inv_step) || inv_step > 1e300) throw NumericalError("fista: backtracking failed");
    }

    const double obj_z = fz + lambda * l1(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    x_prev = x;
    // Monotone variant: keep the better of z and the previous iterate; on a
    // rejected step restart the momentum from x.
    if (obj_z <= obj_x + 1e-13 * (1.0 + std::abs(obj_x))) {
      if (obj_z < obj_x) stalls = 0;
      x = z;
      obj_x = obj_z;
      fx = f.value_and_grad(x, grad_x);
      require_finite(grad_x);
      for (std::size_t e = 0; e < p; ++e) {
        y[e] = x[e] + ((t - 1.0) / t_next) * (x[e] - x_prev[e]);
      }
      t = t_next;
    } else {
      if (++stalls >= 100) throw NumericalError("fista: objective failed to decrease over 100 consecutive steps");
      y = x;
      t = 1.0;
    }
    res.iterations = it;

    res.kkt_violation = masked_kkt(x, grad_x, lambda, mask);
    if (res.kkt_violation <= opts.kkt_tol) {
      res.converged = true;
      break;
    }
  }
  res.theta_hat = std::move(x);
  res.objective = obj_x;
  return res;
}

}  // namespace

FitResult fista(const SmoothFunction& smooth, double lambda, std::span<const double> theta_init,
                const SolverOptions& opts) {
  opts.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("fista: lambda must be finite and >= 0");
  double inv_step = 1.0 / opts.initial_step;
  std::vector<double> x0(theta_init.begin(), theta_init.end());

  if (!opts.active_set) return run_mfista(smooth, lambda, std::move(x0), opts, nullptr, inv_step, opts.max_iters);

  // Active set: warm-start nonzeros plus KKT violators; grow until the full
  // KKT check passes.
  const std::size_t p = x0.size();
  std::vector<double> grad;
  smooth.value_and_grad(x0, grad);
  require_finite(grad);
  std::vector<char> active(p, 0);
  for (std::size_t e = 0; e < p; ++e) active[e] = (x0[e] != 0.0 || std::abs(grad[e]) > lambda) ? 1 : 0;

  std::size_t used = 0;
  FitResult res;
  while (true) {
    res = run_mfista(smooth, lambda, x0, opts, &active, inv_step, opts.max_iters - used);
    used += res.iterations;
    res.iterations = used;
    smooth.value_and_grad(res.theta_hat, grad);
    require_finite(grad);
    bool grew = false;
    for (std::size_t e = 0; e < p; ++e) {
      if (!active[e] && std::abs(grad[e]) - lambda > opts.kkt_tol) {
        active[e] = 1;
        grew = true;
      }
    }
    res.kkt_violation = kkt_violation(res.theta_hat, grad, lambda);
    res.converged = res.kkt_violation <= opts.kkt_tol;
    if (!grew || used >= opts.max_iters) break;
    x0 = res.theta_hat;
  }
  return res;
}

}  // namespace isingmc
