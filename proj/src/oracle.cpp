#include "isingmc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "isingmc/logsumexp.hpp"
#include "isingmc/rng.hpp"

namespace isingmc {

namespace {

void require_enumerable(int d, int cap, const char* what) {
  if (d > cap) {
    throw std::invalid_argument(std::string(what) + ": d=" + std::to_string(d) + " exceeds the enumeration cap of " +
                                std::to_string(cap));
  }
}

// theta'J(y) for every state, walking a Gray code so each step is O(d).
std::vector<double> all_scores(const Theta& theta) {
  const int d = theta.dim();
  const std::uint32_t count = 1u << d;
  std::vector<double> scores(count);
  std::vector<Spin> y(static_cast<std::size_t>(d), -1);
  double score = edge_score(theta, y);
  std::uint32_t state = 0;
  scores[0] = score;
  for (std::uint32_t i = 1; i < count; ++i) {
    const int bit = std::countr_zero(i);
    const double field = local_field(theta, y, bit);
    score -= 2.0 * y[static_cast<std::size_t>(bit)] * field;
    y[static_cast<std::size_t>(bit)] = static_cast<Spin>(-y[static_cast<std::size_t>(bit)]);
    state ^= 1u << bit;
    scores[state] = score;
  }
  return scores;
}

}  // namespace

SpinConfig state_config(std::uint32_t index, int d) {
  std::vector<Spin> y(static_cast<std::size_t>(d));
  for (int s = 0; s < d; ++s) y[static_cast<std::size_t>(s)] = (index >> s) & 1u ? Spin{1} : Spin{-1};
  return SpinConfig(std::move(y));
}

std::uint32_t config_state(const SpinConfig& y) {
  std::uint32_t idx = 0;
  for (int s = 0; s < y.dim(); ++s) {
    if (y[s] == 1) idx |= 1u << s;
  }
  return idx;
}

double ExactDistribution::norming_constant() const {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double v : scores) acc += std::exp(v - mx);
  return acc * std::exp(mx);
}

ExactDistribution exact_distribution(const Theta& theta) {
  require_enumerable(theta.dim(), kMaxEnumerationDim, "exact_distribution");
  ExactDistribution out;
  out.d = theta.dim();
  out.scores = all_scores(theta);
  const auto norm = normalize_log_weights(out.scores);
  const double mx = *std::max_element(out.scores.begin(), out.scores.end());
  double acc = 0.0;
  for (double v : out.scores) acc += std::exp(v - mx);
  out.log_c = mx + std::log(acc);
  out.probabilities = norm.weights;
  return out;
}

double log_norming_constant(const Theta& theta) { return exact_distribution(theta).log_c; }
double norming_constant(const Theta& theta) { return exact_distribution(theta).norming_constant(); }

ExactLikelihood exact_log_partition(const Theta& theta, bool with_hessian) {
  const auto dist = exact_distribution(theta);
  const int d = theta.dim();
  const auto p = static_cast<Eigen::Index>(theta.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd second;
  if (with_hessian) second = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd j(p);
  for (std::uint32_t state = 0; state < dist.probabilities.size(); ++state) {
    const double w = dist.probabilities[state];
    Eigen::Index e = 0;
    for (int r = 0; r < d; ++r) {
      const double yr = (state >> r) & 1u ? 1.0 : -1.0;
      for (int s = r + 1; s < d; ++s, ++e) j[e] = yr * ((state >> s) & 1u ? 1.0 : -1.0);
    }
    mean.noalias() += w * j;
    if (with_hessian) second.selfadjointView<Eigen::Lower>().rankUpdate(j, w);
  }
  ExactLikelihood out;
  out.value = dist.log_c;
  out.gradient.assign(mean.data(), mean.data() + p);
  if (with_hessian) {
    out.hessian = second.selfadjointView<Eigen::Lower>();
    out.hessian.noalias() -= mean * mean.transpose();
  }
  return out;
}

ExactLikelihood exact_nll_grad_hess(const Theta& theta, const Dataset& data, bool with_hessian) {
  check_same_dim(data.dim(), theta.dim(), "exact_nll_grad_hess");
  auto out = exact_log_partition(theta, with_hessian);
  const auto data_mean = data.mean_suff_stat();
  double linear = 0.0;
  for (std::size_t e = 0; e < data_mean.size(); ++e) {
    linear += data_mean[e] * theta[e];
    out.gradient[e] -= data_mean[e];
  }
  out.value -= linear;
  return out;
}

Eigen::MatrixXd gibbs_transition_matrix(const Theta& psi) {
  const int d = psi.dim();
  require_enumerable(d, kMaxTransitionDim, "gibbs_transition_matrix");
  const auto count = static_cast<Eigen::Index>(1u << d);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(count, count);
  for (Eigen::Index x = 0; x < count; ++x) {
    const auto y = state_config(static_cast<std::uint32_t>(x), d);
    double leave = 0.0;
    for (int r = 0; r < d; ++r) {
      const double plus = sigmoid(2.0 * local_field(psi, y.spins(), r));
      const double to_other = y[r] == 1 ? 1.0 - plus : plus;
      const double prob = to_other / d;
      p(x, x ^ (Eigen::Index{1} << r)) = prob;
      leave += prob;
    }
    p(x, x) = 1.0 - leave;
  }
  return p;
}

double detailed_balance_error(const Eigen::MatrixXd& transition, const std::vector<double>& stationary) {
  double worst = 0.0;
  for (Eigen::Index x = 0; x < transition.rows(); ++x) {
    for (Eigen::Index y = x + 1; y < transition.cols(); ++y) {
      const double lhs = stationary[static_cast<std::size_t>(x)] * transition(x, y);
      const double rhs = stationary[static_cast<std::size_t>(y)] * transition(y, x);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

ChainConstants gibbs_spectral_constants(const Theta& psi, const std::optional<std::vector<double>>& q) {
  const auto p = gibbs_transition_matrix(psi);
  const auto h = exact_distribution(psi).probabilities;
  const auto count = p.rows();

  // Reversibility makes D^{1/2} P D^{-1/2} symmetric with P's spectrum.
  Eigen::VectorXd root(count);
  for (Eigen::Index x = 0; x < count; ++x) root[x] = std::sqrt(h[static_cast<std::size_t>(x)]);
  Eigen::MatrixXd sym = root.asDiagonal() * p * root.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  std::vector<double> mags(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) mags[static_cast<std::size_t>(i)] = std::abs(solver.eigenvalues()[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  ChainConstants out;
  out.kappa = mags.size() > 1 ? mags[1] : 0.0;
  out.beta2 = (1.0 - out.kappa) / (1.0 + out.kappa);
  if (q) {
    if (q->size() != h.size()) throw std::invalid_argument("gibbs_spectral_constants: q has wrong length");
    double total = 0.0, acc = 0.0;
    for (std::size_t x = 0; x < h.size(); ++x) {
      const double qx = (*q)[x];
      if (!(qx >= 0.0)) throw std::invalid_argument("gibbs_spectral_constants: q has a negative entry");
      total += qx;
      acc += qx * qx / h[x];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("gibbs_spectral_constants: q does not sum to 1");
    out.beta1 = std::sqrt(acc);
  } else {
    out.beta1 = 1.0;
  }
  return out;
}

double importance_ratio_bound(const Theta& theta_star, const Theta& psi) {
  check_same_dim(theta_star.dim(), psi.dim(), "importance_ratio_bound");
  const auto target = exact_distribution(theta_star);
  const auto inst = exact_distribution(psi);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < target.scores.size(); ++x) {
    worst = std::max(worst, target.scores[x] - inst.scores[x]);
  }
  return std::exp(worst - target.log_c + inst.log_c);
}

// ---------------------------------------------------------------------------
// Cone invertibility factor

namespace {

struct ConeSearch {
  const Eigen::MatrixXd& sigma;
  std::vector<char> in_t;
  double xi;

  double l1_t(const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (Eigen::Index e = 0; e < v.size(); ++e) {
      if (in_t[static_cast<std::size_t>(e)]) s += std::abs(v[e]);
    }
    return s;
  }
  double l1_tc(const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (Eigen::Index e = 0; e < v.size(); ++e) {
      if (!in_t[static_cast<std::size_t>(e)]) s += std::abs(v[e]);
    }
    return s;
  }
  bool in_cone(const Eigen::VectorXd& v) const {
    const double t = l1_t(v);
    return t > 0.0 && l1_tc(v) <= xi * t * (1.0 + 1e-12);
  }
  double ratio(const Eigen::VectorXd& v, double quad) const {
    return quad / (l1_t(v) * v.cwiseAbs().maxCoeff());
  }
  double ratio(const Eigen::VectorXd& v) const { return ratio(v, v.dot(sigma * v)); }

  // Coordinate pattern search; every accepted move stays in the cone.
  double refine(Eigen::VectorXd& v) const {
    Eigen::VectorXd sv = sigma * v;
    double quad = v.dot(sv);
    double best = ratio(v, quad);
    double step = 0.5 * v.cwiseAbs().maxCoeff();
    const double floor = 1e-7 * step;
    while (step > floor) {
      bool improved = false;
      for (Eigen::Index e = 0; e < v.size(); ++e) {
        const double candidates[3] = {step, -step, -v[e]};
        for (double delta : candidates) {
          if (delta == 0.0) continue;
          const double old = v[e];
          v[e] = old + delta;
          if (!in_cone(v)) {
            v[e] = old;
            continue;
          }
          const double new_quad = quad + 2.0 * delta * sv[e] + delta * delta * sigma(e, e);
          const double r = ratio(v, new_quad);
          if (r < best - 1e-15 * std::abs(best)) {
            best = r;
            quad = new_quad;
            sv.noalias() += delta * sigma.col(e);
            improved = true;
            break;
          }
          v[e] = old;
        }
      }
      if (!improved) step *= 0.5;
    }
    return best;
  }
};

}  // namespace

ConeFactorResult cone_factor(double xi, const std::vector<std::size_t>& support, const Eigen::MatrixXd& sigma,
                             const ConeFactorOptions& opts) {
  if (!(xi > 1.0)) throw std::invalid_argument("cone_factor: xi must be > 1");
  if (support.empty()) throw std::invalid_argument("cone_factor: empty support");
  if (sigma.rows() != sigma.cols()) throw std::invalid_argument("cone_factor: matrix is not square");
  const auto p = sigma.rows();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + sigma.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("cone_factor: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("cone_factor: matrix is not PSD");

  ConeSearch search{sigma, std::vector<char>(static_cast<std::size_t>(p), 0), xi};
  std::vector<Eigen::Index> t_idx, tc_idx;
  for (auto e : support) {
    if (e >= static_cast<std::size_t>(p)) throw std::out_of_range("cone_factor: support index out of range");
    search.in_t[e] = 1;
  }
  for (Eigen::Index e = 0; e < p; ++e) (search.in_t[static_cast<std::size_t>(e)] ? t_idx : tc_idx).push_back(e);

  Rng rng({opts.seed, 0});
  auto gauss = [&] {
    // Box-Muller on our own uniforms keeps draws portable.
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };

  struct Candidate {
    double ratio;
    Eigen::VectorXd v;
  };
  std::vector<Candidate> best;
  auto offer = [&](Eigen::VectorXd v) {
    const double r = search.ratio(v);
    if (!std::isfinite(r)) return;
    if (best.size() < opts.refine_candidates) {
      best.push_back({r, std::move(v)});
    } else {
      auto worst = std::max_element(best.begin(), best.end(), [](auto& a, auto& b) { return a.ratio < b.ratio; });
      if (r < worst->ratio) *worst = {r, std::move(v)};
    }
  };

  for (std::size_t k = 0; k < opts.draws; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    // T part: dense Gaussian or a single signed coordinate.
    if (rng.uniform() < 0.5 || t_idx.size() == 1) {
      for (auto e : t_idx) v[e] = gauss();
    } else {
      const std::size_t k_nz = 1 + rng.below(static_cast<std::uint32_t>(t_idx.size()));
      for (std::size_t j = 0; j < k_nz; ++j) v[t_idx[rng.below(static_cast<std::uint32_t>(t_idx.size()))]] = gauss();
    }
    const double t_mass = search.l1_t(v);
    if (t_mass == 0.0) continue;
    // T^c part scaled to a fraction of the cone budget, often on the boundary.
    if (!tc_idx.empty() && rng.uniform() < 0.8) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
      if (rng.uniform() < 0.5) {
        for (auto e : tc_idx) w[e] = gauss();
      } else {
        const std::size_t k_nz = 1 + rng.below(static_cast<std::uint32_t>(std::min<std::size_t>(tc_idx.size(), 4)));
        for (std::size_t j = 0; j < k_nz; ++j) w[tc_idx[rng.below(static_cast<std::uint32_t>(tc_idx.size()))]] = gauss();
      }
      const double w_mass = w.cwiseAbs().sum();
      if (w_mass > 0.0) {
        const double frac = rng.uniform() < 0.5 ? 1.0 : rng.uniform();
        v += (frac * xi * t_mass / w_mass) * w;
      }
    }
    offer(std::move(v));
  }
  // Axis directions inside T are always feasible.
  for (auto e : t_idx) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    v[e] = 1.0;
    offer(std::move(v));
  }

  ConeFactorResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (auto& c : best) {
    const double r = search.refine(c.v);
    if (r < out.value) {
      out.value = r;
      out.argmin.assign(c.v.data(), c.v.data() + p);
    }
  }
  const double scale = std::abs(*std::max_element(out.argmin.begin(), out.argmin.end(),
                                                  [](double a, double b) { return std::abs(a) < std::abs(b); }));
  for (auto& x : out.argmin) x /= scale;
  return out;
}

// ---------------------------------------------------------------------------

double theorem_alpha(double xi) {
  if (!(xi > 1.0)) throw std::invalid_argument("theorem_alpha: xi must be > 1");
  return 2.0 + std::numbers::e / (xi - 1.0);
}

double theorem_error_bound(double xi, double lambda, double F) {
  const double alpha = theorem_alpha(xi);
  if (!(F > 0.0)) throw std::invalid_argument("theorem_error_bound: F must be > 0");
  return 2.0 * std::numbers::e * xi * alpha * lambda / ((xi + 1.0) * (alpha - 2.0) * F);
}

TheoremReport theorem_report(const TheoremInputs& in) {
  if (!(in.xi > 1.0)) throw std::invalid_argument("theorem_report: xi must be > 1");
  if (!(in.epsilon > 0.0)) throw std::invalid_argument("theorem_report: epsilon must be > 0");
  if (!(in.n > 0 && in.m > 0 && in.num_params > 0 && in.support_size > 0)) {
    throw std::invalid_argument("theorem_report: counts must be positive");
  }
  if (!(in.F > 0.0 && in.M > 0.0 && in.beta1 > 0.0 && in.beta2 > 0.0)) {
    throw std::invalid_argument("theorem_report: F, M, beta1, beta2 must be positive");
  }
  const double xi = in.xi;
  const double dbar = in.num_params;
  TheoremReport out;
  out.xi = xi;
  out.alpha = theorem_alpha(xi);
  out.F_used = in.F;
  out.lambda_sample_term = 2.0 * std::sqrt(2.0 * std::log(2.0 * dbar / in.epsilon) / in.n);
  out.lambda_mc_term =
      8.0 * in.M * std::sqrt(std::log((2.0 * dbar + 1.0) * in.beta1 / in.epsilon) / (in.m * in.beta2));
  out.lambda_thm = (xi + 1.0) / (xi - 1.0) * std::max(out.lambda_sample_term, out.lambda_mc_term);
  if (in.lambda && !(*in.lambda > 0.0)) throw std::invalid_argument("theorem_report: lambda must be > 0");
  out.R = theorem_error_bound(xi, in.lambda.value_or(out.lambda_thm), in.F);

  const double common = std::pow(1.0 + xi, 4) * out.alpha * out.alpha * in.support_size * in.support_size;
  out.n_required = 8.0 * common * std::log(2.0 * dbar / in.epsilon) / (in.F * in.F);
  out.m_required = 64.0 * common * in.M * in.M * std::log(2.0 * dbar * (dbar + 1.0) * in.beta1 / in.epsilon) /
                   (in.F * in.F * in.beta2);
  out.ncond_ok = in.n >= out.n_required;
  out.mcond_ok = in.m >= out.m_required;
  return out;
}

}  // namespace isingmc
