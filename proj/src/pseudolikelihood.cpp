#include "isingmc/pseudolikelihood.hpp"

#include "isingmc/logsumexp.hpp"

namespace isingmc {

double conditional_prob(const Theta& theta, const SpinConfig& y, int site) {
  check_same_dim(y.dim(), theta.dim(), "conditional_prob");
  if (site < 0 || site >= theta.dim()) throw std::out_of_range("conditional_prob: invalid site");
  return sigmoid(2.0 * local_field(theta, y.spins(), site));
}

PlObjective::PlObjective(const Dataset& data)
    : d_(data.dim()), n_(data.size()), spins_(static_cast<Eigen::Index>(data.size()), data.dim()) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (int s = 0; s < d_; ++s) spins_(static_cast<Eigen::Index>(i), s) = data.at(i, s);
  }
}

Eigen::MatrixXd PlObjective::coupling_matrix(const Theta& theta) const {
  check_same_dim(theta.dim(), d_, "PlObjective");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d_, d_);
  std::size_t e = 0;
  for (int r = 0; r < d_; ++r) {
    for (int s = r + 1; s < d_; ++s, ++e) c(r, s) = c(s, r) = theta[e];
  }
  return c;
}

Eigen::MatrixXd PlObjective::activations(const Theta& theta) const { return spins_ * coupling_matrix(theta); }

double PlObjective::value(const Theta& theta) const {
  const Eigen::MatrixXd a = activations(theta);
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index s = 0; s < a.cols(); ++s) total += softplus(-2.0 * spins_(i, s) * a(i, s));
  }
  return total / static_cast<double>(n_);
}

double PlObjective::value_and_gradient(const Theta& theta, std::vector<double>& grad) const {
  const Eigen::MatrixXd a = activations(theta);
  Eigen::MatrixXd resid(a.rows(), a.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index s = 0; s < a.cols(); ++s) {
      const double margin = -2.0 * spins_(i, s) * a(i, s);
      total += softplus(margin);
      resid(i, s) = spins_(i, s) * sigmoid(margin);
    }
  }
  // Edge (r,s) collects the factor conditioning on s and the one on r.
  const Eigen::MatrixXd g = spins_.transpose() * resid;
  const double scale = -2.0 / static_cast<double>(n_);
  grad.resize(num_params());
  std::size_t e = 0;
  for (int r = 0; r < d_; ++r) {
    for (int s = r + 1; s < d_; ++s, ++e) grad[e] = scale * (g(r, s) + g(s, r));
  }
  return total / static_cast<double>(n_);
}

std::vector<double> PlObjective::gradient(const Theta& theta) const {
  std::vector<double> g;
  value_and_gradient(theta, g);
  return g;
}

}  // namespace isingmc
