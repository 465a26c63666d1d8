#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "isingmc/ising.hpp"

namespace isingmc {

/// Enumeration caps; exceeding them is an error, never a silent truncation.
inline constexpr int kMaxEnumerationDim = 20;
inline constexpr int kMaxTransitionDim = 10;

/// State index <-> configuration: bit s of the index set means y(s) = +1.
SpinConfig state_config(std::uint32_t index, int d);
std::uint32_t config_state(const SpinConfig& y);

/// p(.|theta) over all 2^d configurations, indexed by state_config.
struct ExactDistribution {
  int d = 0;
  double log_c = 0.0;
  std::vector<double> probabilities;
  /// theta' J(y) per state.
  std::vector<double> scores;

  double norming_constant() const;
};

ExactDistribution exact_distribution(const Theta& theta);

double log_norming_constant(const Theta& theta);
double norming_constant(const Theta& theta);

struct ExactLikelihood {
  double value = 0.0;
  std::vector<double> gradient;
  /// Cov_theta(J(Y)); empty when not requested.
  Eigen::MatrixXd hessian;
};

/// -(1/n) sum theta'J(Y_i) + log C(theta), its gradient and Hessian.
ExactLikelihood exact_nll_grad_hess(const Theta& theta, const Dataset& data, bool with_hessian = true);

/// E_theta J(Y) and Cov_theta J(Y): gradient and Hessian of log C.
ExactLikelihood exact_log_partition(const Theta& theta, bool with_hessian = true);

/// Dense random-scan Gibbs transition matrix over 2^d states.
Eigen::MatrixXd gibbs_transition_matrix(const Theta& psi);

/// max_{x,y} |h(x) P(x,y) - h(y) P(y,x)|.
double detailed_balance_error(const Eigen::MatrixXd& transition, const std::vector<double>& stationary);

struct ChainConstants {
  double kappa = 0.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  std::optional<double> M;
};

/// kappa from the spectrum of D^{1/2} P D^{-1/2}; beta2 = (1-kappa)/(1+kappa);
/// beta1 = sqrt(sum_y q(y)^2 / h(y)). When q is absent it is taken equal to h.
ChainConstants gibbs_spectral_constants(const Theta& psi, const std::optional<std::vector<double>>& q = std::nullopt);

/// M = max_y p(y|theta_star) / p(y|psi).
double importance_ratio_bound(const Theta& theta_star, const Theta& psi);

struct ConeFactorOptions {
  std::size_t draws = 100000;
  std::size_t refine_candidates = 8;
  std::uint64_t seed = 20240101;
};

struct ConeFactorResult {
  /// Smallest ratio found. The infimum is at most this value.
  double value = 0.0;
  bool upper_bound = true;
  std::vector<double> argmin;
};

/// Searches inf theta'S theta / (|theta_T|_1 |theta|_inf) over the cone
/// |theta_{T^c}|_1 <= xi |theta_T|_1 by random draws plus coordinate pattern
/// search. The ratio is scale invariant so draws are unnormalised.
ConeFactorResult cone_factor(double xi, const std::vector<std::size_t>& support, const Eigen::MatrixXd& sigma,
                             const ConeFactorOptions& opts = {});

struct TheoremInputs {
  double xi = 2.0;
  double epsilon = 0.1;
  double n = 1;
  double m = 1;
  /// Number of free parameters d(d-1)/2.
  double num_params = 1;
  /// Size of the true support.
  double support_size = 1;
  double F = 1.0;
  double M = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  /// Penalty used for R; the theorem's lambda when absent.
  std::optional<double> lambda;
};

struct TheoremReport {
  double xi = 0.0;
  double alpha = 0.0;
  double lambda_sample_term = 0.0;
  double lambda_mc_term = 0.0;
  double lambda_thm = 0.0;
  double R = 0.0;
  double n_required = 0.0;
  double m_required = 0.0;
  bool ncond_ok = false;
  bool mcond_ok = false;
  double F_used = 0.0;
};

/// Penalty level, l_inf error bound and sample-size conditions of the
/// estimation error theorem.
TheoremReport theorem_report(const TheoremInputs& in);

/// alpha(xi) = 2 + e / (xi - 1).
double theorem_alpha(double xi);
/// l_inf error bound R at penalty lambda and cone factor F.
double theorem_error_bound(double xi, double lambda, double F);

}  // namespace isingmc
