#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "isingmc/experiment.hpp"
#include "isingmc/gibbs.hpp"
#include "isingmc/io.hpp"
#include "isingmc/logsumexp.hpp"
#include "isingmc/mc_objective.hpp"
#include "isingmc/oracle.hpp"
#include "isingmc/path.hpp"
#include "isingmc/pseudolikelihood.hpp"
#include "isingmc/solver.hpp"

using namespace isingmc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Manifest {
 public:
  explicit Manifest(std::string subcommand) : started_(now_utc()) { doc_["subcommand"] = std::move(subcommand); }

  json& config() { return doc_["config"]; }
  json& seeds() { return doc_["seeds"]; }
  void input(const fs::path& p) { doc_["inputs"][p.string()] = sha256_hex(read_file(p)); }
  void output(const fs::path& p, std::string_view content) {
    write_file_atomic(p, content);
    doc_["outputs"][p.string()] = sha256_hex(content);
  }
  void write(const fs::path& p) {
    doc_["version"] = ISINGMC_VERSION;
    doc_["started"] = started_;
    doc_["finished"] = now_utc();
    if (!doc_.contains("inputs")) doc_["inputs"] = json::object();
    if (!doc_.contains("outputs")) doc_["outputs"] = json::object();
    write_file_atomic(p, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::string started_;
};

fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

// Either writes `content` to `out` plus a manifest beside it, or prints it.
void emit(Manifest& man, const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  man.output(out, content);
  man.write(manifest_path_for(out));
}

json solver_json(const SolverOptions& s) {
  return {{"max_iters", s.max_iters},
          {"kkt_tol", s.kkt_tol},
          {"initial_step", s.initial_step},
          {"backtrack_factor", s.backtrack_factor},
          {"active_set", s.active_set}};
}

void add_solver_flags(CLI::App* cmd, SolverOptions& s) {
  cmd->add_option("--max-iters", s.max_iters, "FISTA iteration cap")->capture_default_str();
  cmd->add_option("--kkt-tol", s.kkt_tol, "KKT tolerance")->capture_default_str();
  cmd->add_option("--initial-step", s.initial_step)->capture_default_str();
  cmd->add_option("--backtrack-factor", s.backtrack_factor)->capture_default_str();
  cmd->add_flag("--active-set", s.active_set, "iterate on an active set");
}

Theta load_theta(const std::string& path, std::optional<int> d, Manifest& man) {
  man.input(path);
  return read_theta_tsv(path, d);
}

Dataset load_data(const std::string& path, Manifest& man) {
  man.input(path);
  return read_dataset_csv(path);
}

std::optional<int> opt_dim(int d) { return d > 0 ? std::optional<int>(d) : std::nullopt; }

SmoothFunction smooth_of(const McObjective& obj) {
  const int d = obj.dim();
  return {[&obj, d](std::span<const double> x) { return obj.value(Theta(d, {x.begin(), x.end()})); },
          [&obj, d](std::span<const double> x, std::vector<double>& g) {
            auto ev = obj.evaluate(Theta(d, {x.begin(), x.end()}));
            g = std::move(ev.gradient);
            return ev.value;
          }};
}

SmoothFunction smooth_of(const PlObjective& obj) {
  const int d = obj.dim();
  return {[&obj, d](std::span<const double> x) { return obj.value(Theta(d, {x.begin(), x.end()})); },
          [&obj, d](std::span<const double> x, std::vector<double>& g) {
            return obj.value_and_gradient(Theta(d, {x.begin(), x.end()}), g);
          }};
}

void print_fit(const FitResult& fit, double lambda, std::ostream& os) {
  os << "lambda = " << format_double(lambda) << "\n"
     << "converged = " << (fit.converged ? "true" : "false") << "\n"
     << "iterations = " << fit.iterations << "\n"
     << "kkt_violation = " << format_double(fit.kkt_violation) << "\n"
     << "objective = " << format_double(fit.objective) << "\n";
}

std::string path_tsv(const PathResult& path) {
  std::string out = "step\tlambda\tr\ts\tvalue\n";
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& t = path.steps[i].theta;
    for (std::size_t e = 0; e < t.size(); ++e) {
      if (t[e] == 0.0) continue;
      const auto idx = edge_from_linear(e, t.dim());
      out += std::to_string(i) + '\t' + format_double(path.steps[i].lambda) + '\t' + std::to_string(idx.r) + '\t' +
             std::to_string(idx.s) + '\t' + format_double(t[e]) + '\n';
    }
  }
  return out;
}

std::string path_summary_tsv(const PathResult& path) {
  std::string out = "step\tlambda\tnonzeros\tconverged\tfailed\tkkt_violation\titerations\tess\tobjective\n";
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& s = path.steps[i];
    out += std::to_string(i) + '\t' + format_double(s.lambda) + '\t' + std::to_string(s.theta.nonzeros()) + '\t' +
           (s.converged ? "1" : "0") + '\t' + (s.failed ? "1" : "0") + '\t' + format_double(s.kkt_violation) + '\t' +
           std::to_string(s.iterations) + '\t' + format_double(s.ess) + '\t' + format_double(s.objective) + '\n';
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string theta, out;
  int d = 0;
  std::size_t n = 1000;
  std::size_t chain_len = 1000000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

int run_sample(const SampleArgs& a) {
  Manifest man("sample-data");
  const auto theta = load_theta(a.theta, opt_dim(a.d), man);
  man.config() = {{"theta", a.theta}, {"d", theta.dim()}, {"n", a.n}, {"chain_len", a.chain_len},
                  {"threads", a.threads}};
  man.seeds() = {{"seed", a.seed}, {"stream", 0}};
  const auto data = sample_dataset(theta, a.n, a.chain_len, {a.seed, 0}, a.threads);
  emit(man, a.out, format_dataset_csv(data));
  return 0;
}

struct FitArgs {
  std::string data, psi, out;
  double lambda = 0.0;
  std::size_t m = 100000;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
  SolverOptions solver;
};

int run_fit_mc(const FitArgs& a) {
  Manifest man("fit-mc");
  const auto data = load_data(a.data, man);
  const int d = data.dim();
  const Theta psi = a.psi.empty() ? Theta(d) : load_theta(a.psi, d, man);
  const std::size_t burn_in = a.burn_in ? a.burn_in : default_burn_in(d);
  man.config() = {{"data", a.data}, {"psi", a.psi}, {"lambda", a.lambda}, {"m", a.m},
                  {"burn_in", burn_in}, {"solver", solver_json(a.solver)}};
  man.seeds() = {{"seed", a.seed}, {"stream", 0}};
  auto chain = std::make_shared<const MarkovSample>(run_chain(psi, a.m, burn_in, std::nullopt, {a.seed, 0}, false));
  const McObjective obj(data, chain);
  const auto fit = fista(smooth_of(obj), a.lambda, Theta(d).values(), a.solver);
  const Theta hat(d, fit.theta_hat);
  const double ess = obj.evaluate(hat, false).ess;
  std::ostream& log = a.out.empty() ? std::cerr : std::cout;
  print_fit(fit, a.lambda, log);
  log << "ess = " << format_double(ess) << "\n";
  if (ess < McObjective::kLowEssFraction * static_cast<double>(a.m)) {
    std::cerr << "warning: effective sample size " << format_double(ess) << " is below 1% of m; psi may be stale\n";
  }
  emit(man, a.out, format_theta_tsv(hat));
  return 0;
}

int run_fit_pl(const FitArgs& a) {
  Manifest man("fit-pl");
  const auto data = load_data(a.data, man);
  const int d = data.dim();
  man.config() = {{"data", a.data}, {"lambda", a.lambda}, {"solver", solver_json(a.solver)}};
  man.seeds() = json::object();
  const PlObjective obj(data);
  const auto fit = fista(smooth_of(obj), a.lambda, Theta(d).values(), a.solver);
  print_fit(fit, a.lambda, a.out.empty() ? std::cerr : std::cout);
  emit(man, a.out, format_theta_tsv(Theta(d, fit.theta_hat)));
  return 0;
}

struct PathArgs {
  std::string data, method = "mc", lambdas, c1, out_dir;
  std::size_t m = 100000;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
  SolverOptions solver;
};

int run_path(const PathArgs& a) {
  if (a.method != "mc" && a.method != "pl") throw UsageError("--method must be mc or pl");
  if (!a.lambdas.empty() && !a.c1.empty()) throw UsageError("give --lambdas or --c1, not both");
  Manifest man("path");
  const auto data = load_data(a.data, man);
  const int d = data.dim();
  std::vector<double> lambdas;
  if (!a.lambdas.empty()) {
    lambdas = parse_list(a.lambdas);
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  } else {
    const auto c1 = a.c1.empty() ? ExperimentConfig::defaults(ScenarioKind::M1).c1_grid : parse_list(a.c1);
    lambdas = lambda_grid(c1, d, data.size());
  }
  validate_lambdas(lambdas);
  const std::size_t burn_in = a.burn_in ? a.burn_in : default_burn_in(d);
  man.config() = {{"data", a.data}, {"method", a.method}, {"lambdas", lambdas}, {"m", a.m},
                  {"burn_in", burn_in}, {"solver", solver_json(a.solver)}};
  man.seeds() = {{"seed", a.seed}, {"stream", 0}};

  PathResult path;
  if (a.method == "mc") {
    McPathOptions opts;
    opts.m = a.m;
    opts.burn_in = burn_in;
    opts.solver = a.solver;
    path = run_mc_path(data, lambdas, opts, {a.seed, 0});
  } else {
    path = run_pl_path(data, lambdas, a.solver);
  }
  const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  fs::create_directories(dir);
  man.output(dir / "path.tsv", path_tsv(path));
  const auto summary = path_summary_tsv(path);
  man.output(dir / "path_summary.tsv", summary);
  man.write(dir / "manifest.json");
  std::cout << summary;
  for (const auto& s : path.steps) {
    if (s.failed) std::cerr << "warning: step at lambda " << format_double(s.lambda) << " failed: " << s.error << "\n";
  }
  return 0;
}

struct ExperimentArgs {
  std::string config, out_dir = "experiment_out", cell;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> replications, sign_configs, m;
  bool paper_scale = false;
};

ExperimentConfig resolve_experiment(const ExperimentArgs& a, Manifest& man) {
  ExperimentConfig cfg = ExperimentConfig::defaults(ScenarioKind::M2, a.paper_scale);
  if (!a.config.empty()) {
    man.input(a.config);
    json j;
    try {
      j = json::parse(read_file(a.config));
    } catch (const json::parse_error& e) {
      throw IoError(a.config + ": " + e.what());
    }
    // A run manifest carries the resolved config under "config".
    if (j.contains("subcommand") && j.contains("config")) j = j.at("config");
    if (a.paper_scale) j["paper_scale"] = true;
    cfg = experiment_config_from_json(j);
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (a.replications) cfg.replications = *a.replications;
  if (a.sign_configs) cfg.sign_configs = *a.sign_configs;
  if (a.m) cfg.m = *a.m;
  if (!a.cell.empty()) {
    const auto parts = parse_list(a.cell);
    if (parts.size() != 2) throw UsageError("--cell expects d,n");
    cfg.d_values = {static_cast<int>(parts[0])};
    cfg.n_values = {static_cast<std::size_t>(parts[1])};
  }
  cfg.validate();
  return cfg;
}

int run_experiment_cmd(const ExperimentArgs& a) {
  Manifest man("experiment");
  const auto cfg = resolve_experiment(a, man);
  man.config() = cfg;
  man.seeds() = {{"seed", cfg.seed}};

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const fs::path partial = dir / "records.partial.tsv";
  {
    std::FILE* f = std::fopen(partial.c_str(), "w");
    if (!f) throw IoError("cannot write " + partial.string());
    const auto header = records_tsv_header();
    std::fwrite(header.data(), 1, header.size(), f);
    std::fclose(f);
  }
  std::size_t done = 0;
  const std::size_t total = cfg.d_values.size() * cfg.n_values.size() * cfg.sign_configs * cfg.replications;
  const auto table = run_experiment(cfg, [&](const std::vector<ReplicationRecord>& recs) {
    if (std::FILE* f = std::fopen(partial.c_str(), "a")) {
      for (const auto& r : recs) {
        const auto line = format_record_line(r);
        std::fwrite(line.data(), 1, line.size(), f);
      }
      std::fclose(f);
    }
    ++done;
    std::cerr << "\r[" << done << "/" << total << "] replications" << std::flush;
  });
  if (total) std::cerr << "\n";

  const auto results = format_result_tsv(table.rows);
  man.output(dir / "results.tsv", results);
  man.output(dir / "records.tsv", format_records_tsv(table.records));
  man.output(dir / "summary.json", result_summary_json(cfg, table).dump(2) + "\n");
  fs::remove(partial);
  man.write(dir / "manifest.json");
  std::cout << results;
  if (table.failed_replications) {
    std::cerr << "warning: " << table.failed_replications << " replications failed\n";
  }
  return 0;
}

struct OracleArgs {
  std::string what, theta, theta_star, psi, data;
  int d = 0;
  double xi = 2.0, epsilon = 0.1;
  double n = 100, m = 1e4;
  std::optional<double> lambda, F, M, beta1, beta2;
  std::optional<std::uint32_t> q_state;
  std::size_t draws = 100000;
  std::uint64_t seed = 20240101;
};

int run_oracle(const OracleArgs& a) {
  Manifest man("oracle");
  auto need = [&](const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string("--what ") + a.what + " needs " + flag);
    return load_theta(path, opt_dim(a.d), man);
  };
  std::ostream& os = std::cout;
  if (a.what == "C") {
    const auto theta = need(a.theta, "--theta");
    os << "C = " << format_double(norming_constant(theta)) << "\n"
       << "log_C = " << format_double(log_norming_constant(theta)) << "\n";
  } else if (a.what == "nll") {
    const auto theta = need(a.theta, "--theta");
    if (a.data.empty()) throw UsageError("--what nll needs --data");
    const auto data = load_data(a.data, man);
    const auto r = exact_nll_grad_hess(theta, data, false);
    os << "nll = " << format_double(r.value) << "\n";
    for (std::size_t e = 0; e < r.gradient.size(); ++e) {
      const auto idx = edge_from_linear(e, theta.dim());
      os << "grad " << idx.r << " " << idx.s << " = " << format_double(r.gradient[e]) << "\n";
    }
  } else if (a.what == "spectral") {
    const auto psi = need(a.psi.empty() ? a.theta : a.psi, "--psi");
    std::optional<std::vector<double>> q;
    if (a.q_state) {
      if (*a.q_state >= (1u << psi.dim())) throw UsageError("--q-state out of range");
      q = std::vector<double>(1u << psi.dim(), 0.0);
      (*q)[*a.q_state] = 1.0;
    }
    const auto c = gibbs_spectral_constants(psi, q);
    os << "kappa = " << format_double(c.kappa) << "\n"
       << "beta1 = " << format_double(c.beta1) << "\n"
       << "beta2 = " << format_double(c.beta2) << "\n";
  } else if (a.what == "M") {
    const auto star = need(a.theta_star.empty() ? a.theta : a.theta_star, "--theta-star");
    const auto psi = a.psi.empty() ? Theta(star.dim()) : load_theta(a.psi, star.dim(), man);
    os << "M = " << format_double(importance_ratio_bound(star, psi)) << "\n";
  } else if (a.what == "cone") {
    const auto star = need(a.theta_star.empty() ? a.theta : a.theta_star, "--theta-star");
    std::vector<std::size_t> support;
    for (std::size_t e = 0; e < star.size(); ++e)
      if (star[e] != 0.0) support.push_back(e);
    ConeFactorOptions opts;
    opts.draws = a.draws;
    opts.seed = a.seed;
    const auto r = cone_factor(a.xi, support, exact_log_partition(star).hessian, opts);
    os << "F <= " << format_double(r.value) << "  (upper bound)\n";
  } else if (a.what == "theorem") {
    TheoremInputs in;
    in.xi = a.xi;
    in.epsilon = a.epsilon;
    in.n = a.n;
    in.m = a.m;
    in.lambda = a.lambda;
    if (!a.theta_star.empty() || !a.theta.empty()) {
      const auto star = need(a.theta_star.empty() ? a.theta : a.theta_star, "--theta-star");
      const auto psi = a.psi.empty() ? Theta(star.dim()) : load_theta(a.psi, star.dim(), man);
      in.num_params = static_cast<double>(star.size());
      in.support_size = static_cast<double>(star.nonzeros());
      if (in.support_size == 0) throw UsageError("theta-star has empty support");
      std::vector<std::size_t> support;
      for (std::size_t e = 0; e < star.size(); ++e)
        if (star[e] != 0.0) support.push_back(e);
      ConeFactorOptions opts;
      opts.draws = a.draws;
      opts.seed = a.seed;
      in.F = a.F ? *a.F : cone_factor(a.xi, support, exact_log_partition(star).hessian, opts).value;
      in.M = a.M ? *a.M : importance_ratio_bound(star, psi);
      const auto c = gibbs_spectral_constants(psi);
      in.beta1 = a.beta1 ? *a.beta1 : c.beta1;
      in.beta2 = a.beta2 ? *a.beta2 : c.beta2;
    } else {
      if (a.d < 2) throw UsageError("--what theorem needs --theta-star or --d");
      in.num_params = static_cast<double>(num_edges(a.d));
      in.F = a.F.value_or(1.0);
      in.M = a.M.value_or(1.0);
      in.beta1 = a.beta1.value_or(1.0);
      in.beta2 = a.beta2.value_or(1.0);
    }
    const auto r = theorem_report(in);
    os << "alpha = " << format_double(r.alpha) << "\n"
       << "lambda_sample_term = " << format_double(r.lambda_sample_term) << "\n"
       << "lambda_mc_term = " << format_double(r.lambda_mc_term) << "\n"
       << "lambda = " << format_double(r.lambda_thm) << "\n"
       << "R = " << format_double(r.R) << "\n"
       << "F = " << format_double(r.F_used) << "\n"
       << "n_required = " << format_double(r.n_required) << (r.ncond_ok ? "  (met)" : "  (not met)") << "\n"
       << "m_required = " << format_double(r.m_required) << (r.mcond_ok ? "  (met)" : "  (not met)") << "\n";
  } else {
    throw UsageError("--what must be one of C, nll, spectral, M, cone, theorem");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Ising structure learning with MCMC Lasso"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ISINGMC_VERSION);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample-data", "draw a dataset from theta with independent Gibbs chains");
  sample_cmd->add_option("--theta", sample.theta, "theta TSV")->required();
  sample_cmd->add_option("--d", sample.d, "number of vertices (default: largest id in the file)");
  sample_cmd->add_option("--n", sample.n, "observations")->capture_default_str();
  sample_cmd->add_option("--chain-len", sample.chain_len, "updates per observation")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed)->capture_default_str();
  sample_cmd->add_option("--threads", sample.threads, "0 = all cores")->capture_default_str();
  sample_cmd->add_option("--out", sample.out, "output CSV (stdout when absent)");

  FitArgs fit_mc;
  auto* fit_mc_cmd = app.add_subcommand("fit-mc", "MCMC Lasso at one lambda");
  fit_mc_cmd->add_option("--data", fit_mc.data, "data CSV")->required();
  fit_mc_cmd->add_option("--lambda", fit_mc.lambda)->required();
  fit_mc_cmd->add_option("--m", fit_mc.m, "chain length")->capture_default_str();
  fit_mc_cmd->add_option("--burn-in", fit_mc.burn_in, "0 = 1000 d")->capture_default_str();
  fit_mc_cmd->add_option("--psi", fit_mc.psi, "instrumental theta TSV (default 0)");
  fit_mc_cmd->add_option("--seed", fit_mc.seed)->capture_default_str();
  fit_mc_cmd->add_option("--out", fit_mc.out, "theta TSV (stdout when absent)");
  add_solver_flags(fit_mc_cmd, fit_mc.solver);

  FitArgs fit_pl;
  auto* fit_pl_cmd = app.add_subcommand("fit-pl", "pseudolikelihood Lasso at one lambda");
  fit_pl_cmd->add_option("--data", fit_pl.data, "data CSV")->required();
  fit_pl_cmd->add_option("--lambda", fit_pl.lambda)->required();
  fit_pl_cmd->add_option("--out", fit_pl.out, "theta TSV (stdout when absent)");
  add_solver_flags(fit_pl_cmd, fit_pl.solver);

  PathArgs path;
  auto* path_cmd = app.add_subcommand("path", "warm-started lambda path");
  path_cmd->add_option("--data", path.data, "data CSV")->required();
  path_cmd->add_option("--method", path.method, "mc or pl")->capture_default_str();
  path_cmd->add_option("--lambdas", path.lambdas, "comma separated lambdas");
  path_cmd->add_option("--c1", path.c1, "comma separated c1 values, lambda = c1 sqrt(log(d(d-1))/n)");
  path_cmd->add_option("--m", path.m, "chain length per step")->capture_default_str();
  path_cmd->add_option("--burn-in", path.burn_in, "0 = 1000 d")->capture_default_str();
  path_cmd->add_option("--seed", path.seed)->capture_default_str();
  path_cmd->add_option("--out-dir", path.out_dir, "output directory (default .)");
  add_solver_flags(path_cmd, path.solver);

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "simulation study over scenarios, d, n and tuning grids");
  exp_cmd->add_option("--config", exp.config, "config JSON or a previous run's manifest.json");
  exp_cmd->add_option("--out-dir", exp.out_dir)->capture_default_str();
  exp_cmd->add_option("--cell", exp.cell, "restrict to one cell: d,n");
  exp_cmd->add_option("--seed", exp.seed);
  exp_cmd->add_option("--threads", exp.threads, "0 = all cores");
  exp_cmd->add_option("--replications", exp.replications);
  exp_cmd->add_option("--sign-configs", exp.sign_configs);
  exp_cmd->add_option("--m", exp.m);
  exp_cmd->add_flag("--paper-scale", exp.paper_scale, "full-size study defaults");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact small-graph quantities by enumeration");
  oracle_cmd->add_option("--what", oracle.what, "C | nll | spectral | M | cone | theorem")->required();
  oracle_cmd->add_option("--theta", oracle.theta, "theta TSV");
  oracle_cmd->add_option("--theta-star", oracle.theta_star, "true theta TSV");
  oracle_cmd->add_option("--psi", oracle.psi, "instrumental theta TSV");
  oracle_cmd->add_option("--data", oracle.data, "data CSV");
  oracle_cmd->add_option("--d", oracle.d, "number of vertices");
  oracle_cmd->add_option("--q-state", oracle.q_state, "initial law is a point mass at this state index");
  oracle_cmd->add_option("--xi", oracle.xi)->capture_default_str();
  oracle_cmd->add_option("--epsilon", oracle.epsilon)->capture_default_str();
  oracle_cmd->add_option("--n", oracle.n)->capture_default_str();
  oracle_cmd->add_option("--m", oracle.m)->capture_default_str();
  oracle_cmd->add_option("--lambda", oracle.lambda, "penalty for R (default: the theorem's lambda)");
  oracle_cmd->add_option("--F", oracle.F);
  oracle_cmd->add_option("--M", oracle.M);
  oracle_cmd->add_option("--beta1", oracle.beta1);
  oracle_cmd->add_option("--beta2", oracle.beta2);
  oracle_cmd->add_option("--draws", oracle.draws, "cone factor random draws")->capture_default_str();
  oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*sample_cmd) return run_sample(sample);
    if (*fit_mc_cmd) return run_fit_mc(fit_mc);
    if (*fit_pl_cmd) return run_fit_pl(fit_pl);
    if (*path_cmd) return run_path(path);
    if (*exp_cmd) return run_experiment_cmd(exp);
    if (*oracle_cmd) return run_oracle(oracle);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const WeightUnderflowError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
