#include "isingmc/mc_objective.hpp"

#include <algorithm>
#include <cmath>

namespace isingmc {

McObjective::McObjective(const Dataset& data, std::shared_ptr<const MarkovSample> sample)
    : McObjective(data.mean_suff_stat(), std::move(sample)) {
  check_same_dim(data.dim(), d_, "McObjective");
}

McObjective::McObjective(std::vector<double> data_mean, std::shared_ptr<const MarkovSample> sample)
    : d_(sample ? sample->dim() : 0), data_mean_(std::move(data_mean)), sample_(std::move(sample)) {
  if (!sample_ || sample_->steps.empty()) throw std::invalid_argument("McObjective: empty Markov sample");
  if (data_mean_.size() != num_edges(d_)) throw DimensionError("McObjective: data mean has wrong length");
}

void McObjective::check(const Theta& theta) const { check_same_dim(theta.dim(), d_, "McObjective"); }

std::vector<double> McObjective::log_weights(const Theta& theta) const {
  check(theta);
  std::vector<double> diff(theta.size());
  for (std::size_t e = 0; e < diff.size(); ++e) diff[e] = theta[e] - sample_->psi[e];
  const Theta delta(d_, std::move(diff));

  std::vector<double> out(sample_->steps.size());
  double score = edge_score(delta, sample_->start);
  sample_->replay([&](std::size_t k, const SpinConfig& y, const FlipRecord& rec) {
    if ((k + 1) % kLogWeightRefreshInterval == 0) {
      score = edge_score(delta, y);
    } else if (rec.changed()) {
      score += 2.0 * rec.value * local_field(delta, y.spins(), rec.site);
    }
    out[k] = score;
  });
  return out;
}

double McObjective::value(const Theta& theta) const { return evaluate(theta, false).value; }

std::vector<double> McObjective::gradient(const Theta& theta) const {
  return evaluate(theta, true).gradient;
}

McEvaluation McObjective::evaluate(const Theta& theta, bool with_gradient) const {
  const auto logw = log_weights(theta);
  auto norm = normalize_log_weights(logw);

  McEvaluation out;
  double linear = 0.0;
  for (std::size_t e = 0; e < data_mean_.size(); ++e) linear += data_mean_[e] * theta[e];
  out.value = -linear + norm.log_mean_exp;
  out.ess = norm.ess;
  out.max_log_weight = *std::max_element(logw.begin(), logw.end());
  if (!with_gradient) return out;

  // Each J coordinate is constant between flips of its two endpoints, so its
  // weighted sum is a sum over constant segments of prefix-weight
  // differences. A flip at site r closes the d-1 segments touching r.
  const auto& w = norm.weights;
  const std::size_t m = w.size();
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) prefix[k + 1] = prefix[k] + w[k];

  const std::size_t nparams = data_mean_.size();
  std::vector<double> acc(nparams, 0.0);
  std::vector<std::size_t> seg_start(nparams, 0);
  SpinConfig y = sample_->start;
  auto current = suff_stat(y);

  auto close_site = [&](int r, std::size_t upto) {
    for (int s = 0; s < d_; ++s) {
      if (s == r) continue;
      const std::size_t e = r < s ? pair_to_linear(r, s, d_) : pair_to_linear(s, r, d_);
      acc[e] += current[e] * (prefix[upto] - prefix[seg_start[e]]);
      seg_start[e] = upto;
      current[e] = static_cast<Spin>(-current[e]);
    }
  };
  for (std::size_t k = 0; k < m; ++k) {
    const auto& rec = sample_->steps[k];
    if (rec.changed()) close_site(rec.site, k);
  }
  out.gradient.resize(nparams);
  for (std::size_t e = 0; e < nparams; ++e) {
    acc[e] += current[e] * (prefix[m] - prefix[seg_start[e]]);
    out.gradient[e] = -data_mean_[e] + acc[e];
  }
  return out;
}

Eigen::MatrixXd McObjective::hessian(const Theta& theta) const {
  const auto logw = log_weights(theta);
  const auto norm = normalize_log_weights(logw);
  const auto p = static_cast<Eigen::Index>(data_mean_.size());

  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd j(p);

  // Consecutive identical states are merged into one weighted term.
  double run_weight = 0.0;
  auto flush = [&](const SpinConfig& y) {
    if (run_weight == 0.0) return;
    const auto js = suff_stat(y);
    for (Eigen::Index e = 0; e < p; ++e) j[e] = js[static_cast<std::size_t>(e)];
    mean.noalias() += run_weight * j;
    second.selfadjointView<Eigen::Lower>().rankUpdate(j, run_weight);
    run_weight = 0.0;
  };
  SpinConfig y = sample_->start;
  for (std::size_t k = 0; k < sample_->steps.size(); ++k) {
    const auto& rec = sample_->steps[k];
    if (rec.changed()) {
      flush(y);
      y.flip(rec.site);
    }
    run_weight += norm.weights[k];
  }
  flush(y);
  Eigen::MatrixXd h = second.selfadjointView<Eigen::Lower>();
  h.noalias() -= mean * mean.transpose();
  return h;
}

}  // namespace isingmc
