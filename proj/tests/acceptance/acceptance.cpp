// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "isingmc/experiment.hpp"
#include "isingmc/gibbs.hpp"
#include "isingmc/io.hpp"
#include "isingmc/mc_objective.hpp"
#include "isingmc/oracle.hpp"
#include "isingmc/path.hpp"
#include "isingmc/pseudolikelihood.hpp"
#include "isingmc/solver.hpp"
#include "support/oracles.hpp"

using namespace isingmc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::shared_ptr<const MarkovSample> chain_at(const Theta& psi, std::size_t m, RngSeed seed) {
  return std::make_shared<const MarkovSample>(run_chain(psi, m, default_burn_in(psi.dim()), std::nullopt, seed));
}

Outcome oracle_agreement() {
  const Stopwatch clock;
  const RngSeed root{101, 0};
  double worst = 0.0;
  std::string per_d;
  for (int d = 2; d <= 8; ++d) {
    double worst_here = 0.0;
    Rng rng(root.child(static_cast<std::uint64_t>(d)));
    const auto psi = testing::random_theta(d, 1.0, rng);
    const auto data = sample_dataset(psi, 200, 2000, root.child(100 + static_cast<std::uint64_t>(d)));
    const McObjective obj(data, chain_at(psi, 200000, root.child(200 + static_cast<std::uint64_t>(d))));
    const double log_c_psi = log_norming_constant(psi);
    for (int k = 0; k < 20; ++k) {
      Theta theta = psi;
      for (std::size_t e = 0; e < theta.size(); ++e) theta[e] += 0.5 * (2.0 * rng.uniform() - 1.0);
      const double exact = exact_nll_grad_hess(theta, data, false).value - log_c_psi;
      worst_here = std::max(worst_here, std::abs(obj.value(theta) - exact));
    }
    worst = std::max(worst, worst_here);
    per_d += (per_d.empty() ? "" : " ") + std::to_string(d) + ":" + fmt(worst_here);
  }
  const double t = clock.seconds();
  return {worst <= 0.01 && t <= 60.0,
          "max error " + fmt(worst) + " (by d " + per_d + "), " + fmt(t) + " s"};
}

Outcome gradient_checks() {
  const RngSeed root{102, 0};
  double worst_mc = 0.0, worst_pl = 0.0;
  for (int d : {2, 3, 5, 8, 10}) {
    const auto sd = static_cast<std::uint64_t>(d);
    Rng rng(root.child(sd));
    const auto psi = testing::random_theta(d, 0.5, rng);
    const auto data = sample_dataset(psi, 100, 1000, root.child(100 + sd));
    const McObjective mc(data, chain_at(psi, 20000, root.child(200 + sd)));
    const PlObjective pl(data);
    const auto theta = testing::random_theta(d, 0.5, rng);
    const auto fd_mc = testing::finite_difference(
        [&](const std::vector<double>& x) { return mc.value(Theta(d, x)); }, theta.vector());
    const auto fd_pl = testing::finite_difference(
        [&](const std::vector<double>& x) { return pl.value(Theta(d, x)); }, theta.vector());
    worst_mc = std::max(worst_mc, testing::rel_linf_error(mc.gradient(theta), fd_mc));
    worst_pl = std::max(worst_pl, testing::rel_linf_error(pl_grad(theta, data), fd_pl));
  }
  return {worst_mc <= 1e-6 && worst_pl <= 1e-6, "mc " + fmt(worst_mc) + ", pl " + fmt(worst_pl)};
}

Outcome hessian_identity() {
  const int d = 5;
  const Theta zero(d);
  const Dataset data(d, {SpinConfig(std::vector<std::int8_t>(d, 1))});
  const McObjective obj(data, chain_at(zero, 100000, {103, 0}));
  const auto p = static_cast<Eigen::Index>(num_edges(d));
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
  const double mc_err = (obj.hessian(zero) - id).cwiseAbs().maxCoeff();
  const double exact_err = (exact_log_partition(zero).hessian - id).cwiseAbs().maxCoeff();
  return {mc_err <= 0.05 && exact_err <= 1e-12, "mc " + fmt(mc_err) + ", exact " + fmt(exact_err)};
}

Outcome solver_certificate() {
  const RngSeed root{104, 0};
  double cd_worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(root.child(static_cast<std::uint64_t>(trial)));
    const auto p = static_cast<Eigen::Index>(2 + rng.below(49));
    Eigen::MatrixXd z(p + 5, p);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.uniform() - 0.5;
    const Eigen::MatrixXd a = z.transpose() * z / static_cast<double>(z.rows()) + 0.05 * Eigen::MatrixXd::Identity(p, p);
    Eigen::VectorXd b(p);
    for (Eigen::Index i = 0; i < p; ++i) b[i] = 2.0 * rng.uniform() - 1.0;
    const double lambda = 0.5 * b.cwiseAbs().maxCoeff() * rng.uniform();
    const SmoothFunction f{[&](std::span<const double> x) {
                             const Eigen::Map<const Eigen::VectorXd> v(x.data(), p);
                             return 0.5 * v.dot(a * v) - b.dot(v);
                           },
                           [&](std::span<const double> x, std::vector<double>& g) {
                             const Eigen::Map<const Eigen::VectorXd> v(x.data(), p);
                             const Eigen::VectorXd av = a * v;
                             g.assign(av.data(), av.data() + p);
                             for (Eigen::Index i = 0; i < p; ++i) g[static_cast<std::size_t>(i)] -= b[i];
                             return 0.5 * v.dot(av) - b.dot(v);
                           }};
    SolverOptions opts;
    opts.kkt_tol = 1e-9;
    opts.max_iters = 100000;
    const auto fit = fista(f, lambda, std::vector<double>(static_cast<std::size_t>(p), 0.0), opts);
    const auto ref = testing::coordinate_descent_lasso(a, b, lambda);
    cd_worst = std::max(cd_worst, testing::linf_diff(fit.theta_hat, ref));
  }

  // Every converged step of an MC path and a PL path, re-verified on a
  // freshly rebuilt objective.
  const int d = 8;
  Theta truth(d);
  for (int r = 0; r + 1 < d; ++r) truth.set(r, r + 1, r % 2 == 0 ? 0.8 : -0.8);
  const auto data = sample_dataset(truth, 300, 5000, root.child(1000));
  const auto lambdas = lambda_grid({1.0, 2.0, 3.0, 4.0}, d, data.size());
  McPathOptions mc_opts;
  mc_opts.m = 20000;
  mc_opts.burn_in = default_burn_in(d);
  const auto mc_path = run_mc_path(data, lambdas, mc_opts, root.child(1001));
  const auto pl_path = run_pl_path(data, lambdas, SolverOptions{});
  double kkt_worst = 0.0;
  std::size_t checked = 0, total = 0;
  for (const auto& step : mc_path.steps) {
    ++total;
    if (!step.converged) continue;
    const McObjective obj(data, std::make_shared<const MarkovSample>(
                                    run_chain(step.psi, mc_opts.m, mc_opts.burn_in, std::nullopt, step.chain_seed, false)));
    kkt_worst = std::max(kkt_worst, kkt_violation(step.theta.values(), obj.gradient(step.theta), step.lambda));
    ++checked;
  }
  for (const auto& step : pl_path.steps) {
    ++total;
    if (!step.converged) continue;
    kkt_worst = std::max(kkt_worst, kkt_violation(step.theta.values(), pl_grad(step.theta, data), step.lambda));
    ++checked;
  }
  return {cd_worst <= 1e-5 && kkt_worst <= 1e-6 && checked > 0,
          "fista vs cd " + fmt(cd_worst) + ", kkt " + fmt(kkt_worst) + " over " + std::to_string(checked) + "/" +
              std::to_string(total) + " converged fits"};
}

Outcome sampler_correctness() {
  const RngSeed root{105, 0};
  double tv_worst = 0.0, db_worst = 0.0;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    Rng rng(root.child(trial));
    const auto psi = testing::random_theta(3, 1.0, rng);
    const auto chain = run_chain(psi, 1000000, default_burn_in(3), std::nullopt, root.child(100 + trial), false);
    std::vector<double> freq(8, 0.0);
    chain.replay([&](std::size_t, const SpinConfig& y, const FlipRecord&) { freq[config_state(y)] += 1.0; });
    for (auto& f : freq) f /= static_cast<double>(chain.m);
    const auto exact = exact_distribution(psi).probabilities;
    tv_worst = std::max(tv_worst, testing::tv_distance(freq, exact));
    db_worst = std::max(db_worst, detailed_balance_error(gibbs_transition_matrix(psi), exact));
  }
  return {tv_worst <= 0.01 && db_worst <= 1e-12, "tv " + fmt(tv_worst) + ", detailed balance " + fmt(db_worst)};
}

Outcome spectral_constants() {
  const auto c = gibbs_spectral_constants(Theta(2));
  Rng rng({106, 0});
  const auto theta_star = testing::random_theta(6, 1.0, rng);
  const double m = importance_ratio_bound(theta_star, theta_star);
  const bool ok = std::abs(c.kappa - 0.5) <= 1e-10 && std::abs(c.beta2 - 1.0 / 3.0) <= 1e-10 && m == 1.0;
  return {ok, "kappa " + format_double(c.kappa) + ", beta2 " + format_double(c.beta2) + ", M " + format_double(m)};
}

ExperimentConfig desk_config(ScenarioKind kind, int d, std::size_t n) {
  auto cfg = ExperimentConfig::defaults(kind);
  cfg.vartheta = 1.0;
  cfg.d_values = {d};
  cfg.n_values = {n};
  cfg.sign_configs = 20;
  cfg.replications = 1;
  cfg.m = 20000;
  cfg.seed = 2026;
  return cfg;
}

double best(const ResultTable& t, Method method, const std::string& estimator, int d, std::size_t n) {
  const auto* row = t.find(method, estimator, d, n);
  return row ? row->frequency : -1.0;
}

Outcome table_m2() {
  const Stopwatch clock;
  const auto table = run_experiment(desk_config(ScenarioKind::M2, 20, 500));
  const double t = clock.seconds();
  const double pl = best(table, Method::PL, "lasso", 20, 500);
  const double mc = best(table, Method::MCMC, "lasso", 20, 500);
  const double pl_thr = best(table, Method::PL, "thresholded", 20, 500);
  const double mc_thr = best(table, Method::MCMC, "thresholded", 20, 500);
  return {pl >= 0.8 && mc >= 0.8 && t <= 900.0,
          "lasso pl " + fmt(pl) + " mcmc " + fmt(mc) + ", thresholded pl " + fmt(pl_thr) + " mcmc " + fmt(mc_thr) +
              ", " + fmt(t) + " s"};
}

Outcome table_m1() {
  const Stopwatch clock;
  const auto table = run_experiment(desk_config(ScenarioKind::M1, 20, 1000));
  const double t = clock.seconds();
  const double pl = best(table, Method::PL, "thresholded", 20, 1000);
  const double mc = best(table, Method::MCMC, "thresholded", 20, 1000);
  const double pl_lasso = best(table, Method::PL, "lasso", 20, 1000);
  const double mc_lasso = best(table, Method::MCMC, "lasso", 20, 1000);
  return {mc - pl >= 0.15, "thresholded mcmc " + fmt(mc) + " pl " + fmt(pl) + ", lasso mcmc " + fmt(mc_lasso) +
                               " pl " + fmt(pl_lasso) + ", " + fmt(t) + " s"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISINGMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string rows_for_cell(const std::string& tsv, int d, std::size_t n, bool d_first) {
  const std::string key = d_first ? std::to_string(d) + '\t' + std::to_string(n) + '\t'
                                  : '\t' + std::to_string(d) + '\t' + std::to_string(n) + '\t';
  std::string out;
  std::istringstream in(tsv);
  std::string line;
  std::getline(in, line);
  out += line + '\n';
  while (std::getline(in, line)) {
    const bool hit = d_first ? line.rfind(key, 0) == 0 : line.find(key) != std::string::npos;
    if (hit) out += line + '\n';
  }
  return out;
}

Outcome reproducibility() {
  const auto dir = fs::temp_directory_path() / "isingmc_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cfg = dir / "config.json";
  write_file_atomic(cfg, R"({"scenario": "M3", "d_values": [10, 12], "n_values": [200], "sign_configs": 2,
  "replications": 2, "m": 5000, "chain_len": 5000, "seed": 9})");
  const auto full = dir / "full";
  if (run_cli("experiment --config '" + cfg.string() + "' --threads 1 --out-dir '" + full.string() + "'") != 0)
    return {false, "initial run failed"};
  const auto results = read_file(full / "results.tsv");
  const auto records = read_file(full / "records.tsv");
  int cells = 0, matched = 0;
  for (int d : {10, 12}) {
    for (unsigned threads : {1u, 3u}) {
      const auto out = dir / ("cell_" + std::to_string(d) + "_" + std::to_string(threads));
      ++cells;
      if (run_cli("experiment --config '" + (full / "manifest.json").string() + "' --cell " + std::to_string(d) +
                  ",200 --threads " + std::to_string(threads) + " --out-dir '" + out.string() + "'") != 0)
        continue;
      if (read_file(out / "results.tsv") == rows_for_cell(results, d, 200, false) &&
          read_file(out / "records.tsv") == rows_for_cell(records, d, 200, true))
        ++matched;
    }
  }
  return {matched == cells, std::to_string(matched) + "/" + std::to_string(cells) + " cell reruns byte-identical"};
}

Outcome theorem_calculators() {
  const double e = std::numbers::e;
  const double alpha = theorem_alpha(2.0);
  TheoremInputs in;
  in.xi = 2.0;
  in.lambda = 1.0;
  in.F = 1.0;
  const auto report = theorem_report(in);
  const double r_expected = 4.0 * (2.0 + e) / 3.0;
  const bool ok = std::abs(alpha - (2.0 + e)) <= 1e-9 && std::abs(report.alpha - (2.0 + e)) <= 1e-9 &&
                  std::abs(report.R - r_expected) <= 1e-9 &&
                  std::abs(theorem_error_bound(2.0, 1.0, 1.0) - r_expected) <= 1e-9;
  return {ok, "alpha " + format_double(report.alpha) + ", R " + format_double(report.R)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::array<Criterion, 10> criteria{{
      {1, "oracle agreement", oracle_agreement},
      {2, "gradient checks", gradient_checks},
      {3, "hessian identity at the origin", hessian_identity},
      {4, "solver certificate", solver_certificate},
      {5, "sampler correctness", sampler_correctness},
      {6, "spectral constants", spectral_constants},
      {7, "M2 desk table", table_m2},
      {8, "M1 desk table", table_m1},
      {9, "reproducibility", reproducibility},
      {10, "theorem calculators", theorem_calculators},
  }};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
