#include <doctest.h>

#include <cmath>

#include "isingmc/solver.hpp"
#include "support/oracles.hpp"

using namespace isingmc;

namespace {

struct Quadratic {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  SmoothFunction fn() const {
    return {[this](std::span<const double> x) { return eval(x, nullptr); },
            [this](std::span<const double> x, std::vector<double>& g) { return eval(x, &g); }};
  }
  double eval(std::span<const double> x, std::vector<double>* g) const {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd av = a * v;
    if (g) {
      g->resize(x.size());
      for (Eigen::Index i = 0; i < av.size(); ++i) (*g)[static_cast<std::size_t>(i)] = av[i] - b[i];
    }
    return 0.5 * v.dot(av) - b.dot(v);
  }
  double lambda_max() const { return b.cwiseAbs().maxCoeff(); }
};

Quadratic random_quadratic(Eigen::Index p, isingmc::Rng& rng) {
  Eigen::MatrixXd z(p + 5, p);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = 2.0 * rng.uniform() - 1.0;
  Quadratic q;
  q.a = z.transpose() * z / static_cast<double>(z.rows()) + 0.05 * Eigen::MatrixXd::Identity(p, p);
  q.b.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) q.b[j] = 2.0 * rng.uniform() - 1.0;
  return q;
}

double objective(const Quadratic& q, const std::vector<double>& x, double lambda) {
  double l1 = 0.0;
  for (double v : x) l1 += std::abs(v);
  return q.eval(x, nullptr) + lambda * l1;
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  for (double x : {-2.5, 0.0, 1e-300, 7.0}) CHECK(soft_threshold(x, 0.0) == x);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("kkt_violation examples") {
  const std::vector<double> zero{0.0, 0.0};
  CHECK(kkt_violation(zero, std::vector<double>{0.2, -0.3}, 0.3) == 0.0);
  CHECK(kkt_violation(std::vector<double>{0.7}, std::vector<double>{-0.3}, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kkt_violation(std::vector<double>{0.0}, std::vector<double>{1.5}, 1.0) == 0.5);
  CHECK(kkt_violation(std::vector<double>{-1.0}, std::vector<double>{0.1}, 1.0) == doctest::Approx(0.9));
}

TEST_CASE("one-dimensional closed form") {
  Quadratic q;
  q.a = Eigen::MatrixXd::Identity(1, 1);
  q.b = Eigen::VectorXd::Constant(1, 1.0);
  const auto r = fista(q.fn(), 0.3, std::vector<double>{0.0});
  CHECK(r.converged);
  CHECK(r.theta_hat[0] == doctest::Approx(0.7).epsilon(1e-7));
  CHECK(r.theta_hat[0] == doctest::Approx(soft_threshold(1.0, 0.3)).epsilon(1e-7));
}

TEST_CASE("lambda at or above lambda_max gives exactly zero") {
  Rng rng({1, 0});
  const auto q = random_quadratic(12, rng);
  for (double scale : {1.0, 1.5, 10.0}) {
    const auto r = fista(q.fn(), scale * q.lambda_max(), std::vector<double>(12, 0.0));
    CHECK(r.converged);
    for (double v : r.theta_hat) CHECK(v == 0.0);
  }
  // From a nonzero start as well.
  const auto r = fista(q.fn(), 2.0 * q.lambda_max(), std::vector<double>(12, 0.4));
  for (double v : r.theta_hat) CHECK(v == 0.0);
}

TEST_CASE("warm start at the minimiser converges immediately") {
  Rng rng({2, 0});
  const auto q = random_quadratic(10, rng);
  const double lambda = 0.3 * q.lambda_max();
  SolverOptions tight;
  tight.kkt_tol = 1e-10;
  const auto first = fista(q.fn(), lambda, std::vector<double>(10, 0.0), tight);
  REQUIRE(first.converged);
  const auto again = fista(q.fn(), lambda, first.theta_hat, tight);
  CHECK(again.converged);
  CHECK(again.iterations <= 2);
}

TEST_CASE("fista matches coordinate descent on random quadratics") {
  Rng rng({3, 0});
  for (Eigen::Index p : {1, 5, 20, 50}) {
    for (int trial = 0; trial < 3; ++trial) {
      const auto q = random_quadratic(p, rng);
      const double lambda = (0.05 + 0.5 * rng.uniform()) * q.lambda_max();
      SolverOptions opts;
      opts.kkt_tol = 1e-9;
      opts.max_iters = 100000;
      const auto r = fista(q.fn(), lambda, std::vector<double>(static_cast<std::size_t>(p), 0.0), opts);
      REQUIRE(r.converged);
      const auto ref = testing::coordinate_descent_lasso(q.a, q.b, lambda);
      CHECK(testing::linf_diff(r.theta_hat, ref) <= 1e-5);
    }
  }
}

TEST_CASE("converged results re-verify their certificate") {
  Rng rng({4, 0});
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_quadratic(15, rng);
    const double lambda = 0.2 * q.lambda_max();
    const auto r = fista(q.fn(), lambda, std::vector<double>(15, 0.0));
    REQUIRE(r.converged);
    std::vector<double> g;
    q.eval(r.theta_hat, &g);
    CHECK(kkt_violation(r.theta_hat, g, lambda) <= 1e-6);
    CHECK(r.kkt_violation == doctest::Approx(kkt_violation(r.theta_hat, g, lambda)));
    CHECK(r.objective == doctest::Approx(objective(q, r.theta_hat, lambda)).epsilon(1e-12));
  }
}

TEST_CASE("objective sequence is non-increasing") {
  Rng rng({5, 0});
  const auto q = random_quadratic(30, rng);
  const double lambda = 0.1 * q.lambda_max();
  std::vector<double> trace;
  std::vector<double> x(30, 0.0);
  SolverOptions opts;
  opts.kkt_tol = 1e-12;
  for (std::size_t iters = 1; iters <= 60; ++iters) {
    opts.max_iters = iters;
    trace.push_back(fista(q.fn(), lambda, x, opts).objective);
  }
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-10);
}

TEST_CASE("active set mode agrees with full mode") {
  Rng rng({6, 0});
  for (int trial = 0; trial < 5; ++trial) {
    const auto q = random_quadratic(40, rng);
    const double lambda = 0.3 * q.lambda_max();
    SolverOptions full;
    full.kkt_tol = 1e-10;
    full.max_iters = 100000;
    SolverOptions active = full;
    active.active_set = true;
    const auto a = fista(q.fn(), lambda, std::vector<double>(40, 0.0), full);
    const auto b = fista(q.fn(), lambda, std::vector<double>(40, 0.0), active);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(testing::linf_diff(a.theta_hat, b.theta_hat) <= 1e-7);
  }
}

TEST_CASE("max_iters reached without convergence") {
  Rng rng({7, 0});
  const auto q = random_quadratic(30, rng);
  SolverOptions opts;
  opts.max_iters = 2;
  opts.kkt_tol = 1e-14;
  const auto r = fista(q.fn(), 0.01, std::vector<double>(30, 0.0), opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 2);
  CHECK(r.kkt_violation > opts.kkt_tol);
}

TEST_CASE("non-finite objective raises NumericalError") {
  const SmoothFunction bad{[](std::span<const double>) { return std::nan(""); },
                           [](std::span<const double> x, std::vector<double>& g) {
                             g.assign(x.size(), 1.0);
                             return std::nan("");
                           }};
  CHECK_THROWS_AS(fista(bad, 0.1, std::vector<double>{0.0, 0.0}), NumericalError);
}

TEST_CASE("option validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.kkt_tol = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o = {};
  o.backtrack_factor = 1.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  Quadratic q;
  q.a = Eigen::MatrixXd::Identity(1, 1);
  q.b = Eigen::VectorXd::Constant(1, 1.0);
  CHECK_THROWS_AS(fista(q.fn(), -1.0, std::vector<double>{0.0}), std::invalid_argument);
}
