#include "isingmc/path.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "isingmc/logsumexp.hpp"
#include "isingmc/mc_objective.hpp"
#include "isingmc/pseudolikelihood.hpp"

namespace isingmc {

std::vector<double> PathResult::lambdas() const {
  std::vector<double> out;
  for (const auto& s : steps) out.push_back(s.lambda);
  return out;
}

std::vector<Theta> PathResult::thetas() const {
  std::vector<Theta> out;
  for (const auto& s : steps) out.push_back(s.theta);
  return out;
}

std::vector<Theta> PathResult::psi_trace() const {
  std::vector<Theta> out;
  for (const auto& s : steps) out.push_back(s.psi);
  return out;
}

void validate_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i])) throw std::invalid_argument("lambdas must be finite and > 0");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("lambdas must be strictly decreasing");
  }
}

double lambda_max(const Dataset& data, const MarkovSample& sample0) {
  const McObjective obj(data, std::make_shared<MarkovSample>(sample0));
  const auto g = obj.gradient(Theta(data.dim()));
  double out = 0.0;
  for (double v : g) out = std::max(out, std::abs(v));
  return out;
}

double pl_lambda_max(const Dataset& data) {
  const auto g = PlObjective(data).gradient(Theta(data.dim()));
  double out = 0.0;
  for (double v : g) out = std::max(out, std::abs(v));
  return out;
}

namespace {

template <class Obj>
SmoothFunction wrap(const Obj& obj, int d) {
  SmoothFunction f;
  f.value = [&obj, d](std::span<const double> x) {
    return obj.value(Theta(d, std::vector<double>(x.begin(), x.end())));
  };
  f.value_and_grad = [&obj, d](std::span<const double> x, std::vector<double>& g) {
    const Theta t(d, std::vector<double>(x.begin(), x.end()));
    if constexpr (std::is_same_v<Obj, McObjective>) {
      auto ev = obj.evaluate(t, true);
      g = std::move(ev.gradient);
      return ev.value;
    } else {
      return obj.value_and_gradient(t, g);
    }
  };
  return f;
}

}  // namespace

PathResult run_mc_path(const Dataset& data, const std::vector<double>& lambdas, const McPathOptions& opts,
                       RngSeed seed) {
  validate_lambdas(lambdas);
  const int d = data.dim();
  const std::size_t burn_in = opts.burn_in ? opts.burn_in : default_burn_in(d);
  const auto data_mean = data.mean_suff_stat();

  PathResult out;
  Theta psi(d);
  Theta warm(d);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    PathStep step;
    step.lambda = lambdas[i];
    step.psi = psi;
    step.chain_seed = seed.child(i);
    try {
      auto chain = std::make_shared<MarkovSample>(
          run_chain(psi, opts.m, burn_in, std::nullopt, step.chain_seed, false));
      const McObjective obj(data_mean, chain);
      const auto fit = fista(wrap(obj, d), lambdas[i], warm.values(), opts.solver);
      step.theta = Theta(d, fit.theta_hat);
      step.kkt_violation = fit.kkt_violation;
      step.iterations = fit.iterations;
      step.objective = fit.objective;
      step.converged = fit.converged;
      step.ess = obj.evaluate(step.theta, false).ess;
      psi = step.theta;
      warm = step.theta;
    } catch (const std::exception& ex) {
      step.failed = true;
      step.error = ex.what();
      step.theta = warm;
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

PathResult run_pl_path(const Dataset& data, const std::vector<double>& lambdas, const SolverOptions& opts) {
  validate_lambdas(lambdas);
  const int d = data.dim();
  const PlObjective obj(data);
  const auto f = wrap(obj, d);

  PathResult out;
  Theta warm(d);
  for (double lambda : lambdas) {
    PathStep step;
    step.lambda = lambda;
    step.psi = Theta(d);
    step.ess = static_cast<double>(data.size());
    try {
      const auto fit = fista(f, lambda, warm.values(), opts);
      step.theta = Theta(d, fit.theta_hat);
      step.kkt_violation = fit.kkt_violation;
      step.iterations = fit.iterations;
      step.objective = fit.objective;
      step.converged = fit.converged;
      warm = step.theta;
    } catch (const std::exception& ex) {
      step.failed = true;
      step.error = ex.what();
      step.theta = warm;
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

SupportSet threshold_support(const Theta& theta, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("threshold_support: delta must be >= 0");
  SupportSet out;
  for (std::size_t e = 0; e < theta.size(); ++e) {
    if (std::abs(theta[e]) > delta) out.insert(e);
  }
  return out;
}

SelectionMetrics selection_metrics(const SupportSet& estimated, const SupportSet& truth, std::size_t num_params) {
  for (const auto* s : {&estimated, &truth}) {
    if (!s->empty() && *s->rbegin() >= num_params) throw std::out_of_range("selection_metrics: edge out of range");
  }
  SelectionMetrics m;
  for (auto e : estimated) (truth.count(e) ? m.true_positives : m.false_positives)++;
  m.false_negatives = truth.size() - m.true_positives;
  m.exact_recovery = estimated == truth;
  m.true_positive_rate = truth.empty() ? 1.0 : static_cast<double>(m.true_positives) / static_cast<double>(truth.size());
  const std::size_t negatives = num_params - truth.size();
  m.false_positive_rate = negatives == 0 ? 0.0 : static_cast<double>(m.false_positives) / static_cast<double>(negatives);
  return m;
}

double grid_scale(int d, std::size_t n) {
  return std::sqrt(std::log(static_cast<double>(d) * static_cast<double>(d - 1)) / static_cast<double>(n));
}

std::vector<double> lambda_grid(const std::vector<double>& c1, int d, std::size_t n) {
  std::vector<double> sorted = c1;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const double scale = grid_scale(d, n);
  std::vector<double> out;
  for (double c : sorted) out.push_back(c * scale);
  validate_lambdas(out);
  return out;
}

}  // namespace isingmc
