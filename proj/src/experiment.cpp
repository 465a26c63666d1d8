#include "isingmc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "isingmc/gibbs.hpp"
#include "isingmc/io.hpp"
#include "isingmc/parallel.hpp"

namespace isingmc {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::M1: return "M1";
    case ScenarioKind::M2: return "M2";
    case ScenarioKind::M3: return "M3";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "M1" || name == "m1") return ScenarioKind::M1;
  if (name == "M2" || name == "m2") return ScenarioKind::M2;
  if (name == "M3" || name == "m3") return ScenarioKind::M3;
  throw std::invalid_argument("unknown scenario '" + name + "' (expected M1, M2 or M3)");
}

std::string to_string(Method m) { return m == Method::PL ? "PL" : "MCMC"; }

Scenario make_scenario(ScenarioKind kind, int d, double vartheta, RngSeed sign_seed) {
  const int min_d = kind == ScenarioKind::M3 ? 8 : 10;
  if (d < min_d) {
    throw std::invalid_argument("scenario " + to_string(kind) + " needs d >= " + std::to_string(min_d));
  }
  if (!(vartheta > 0.0) || !std::isfinite(vartheta)) throw std::invalid_argument("vartheta must be positive");

  // 1-based (r, s) pairs of the support.
  std::vector<std::pair<int, int>> pairs;
  switch (kind) {
    case ScenarioKind::M1:
      for (int s = 2; s <= 5; ++s)
        for (int r = 1; r < s; ++r) pairs.emplace_back(r, s);
      break;
    case ScenarioKind::M2:
      for (int r = 2; r <= 10; ++r) pairs.emplace_back(r - 1, r);
      break;
    case ScenarioKind::M3:
      for (int s = 2; s <= 4; ++s)
        for (int r = 1; r < s; ++r) pairs.emplace_back(r, s);
      for (int s = 6; s <= 8; ++s)
        for (int r = 5; r < s; ++r) pairs.emplace_back(r, s);
      break;
  }
  std::sort(pairs.begin(), pairs.end());

  Scenario out;
  out.kind = kind;
  out.d = d;
  out.vartheta = vartheta;
  out.sign_seed = sign_seed;
  out.theta_star = Theta(d);
  Rng rng(sign_seed);
  for (auto [r, s] : pairs) {
    const auto e = edge_index(r, s, d).linear;
    out.theta_star[e] = rng.spin() * vartheta;
    out.support.insert(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::vector<double> c1_range(double hi) {
  std::vector<double> out;
  for (int k = 0; 1.0 + 0.25 * k <= hi + 1e-12; ++k) out.push_back(1.0 + 0.25 * k);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(ScenarioKind kind, bool paper_scale) {
  ExperimentConfig cfg;
  cfg.scenario = kind;
  cfg.vartheta = kind == ScenarioKind::M3 ? 2.0 : 1.0;
  cfg.c1_grid = c1_range(kind == ScenarioKind::M2 ? 8.0 : 4.0);
  cfg.paper_scale = paper_scale;
  if (paper_scale) {
    cfg.d_values = {20, 50};
    cfg.n_values = {50, 100, 200, 500, 1000};
    cfg.sign_configs = 20;
    cfg.replications = 20;
    cfg.m = 100000;
    cfg.chain_len = 1000000;
  } else {
    cfg.n_values = {kind == ScenarioKind::M2 ? std::size_t{500} : std::size_t{1000}};
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (d_values.empty() || n_values.empty()) throw std::invalid_argument("experiment: d and n lists must be nonempty");
  if (c1_grid.empty() || c2_grid.empty()) throw std::invalid_argument("experiment: c1 and c2 grids must be nonempty");
  for (double c : c1_grid) {
    if (!(c > 0.0)) throw std::invalid_argument("experiment: c1 values must be > 0");
  }
  for (double c : c2_grid) {
    if (!(c >= 0.0)) throw std::invalid_argument("experiment: c2 values must be >= 0");
  }
  for (int d : d_values) {
    const int min_d = scenario == ScenarioKind::M3 ? 8 : 10;
    if (d < min_d) throw std::invalid_argument("experiment: d=" + std::to_string(d) + " too small for " + to_string(scenario));
  }
  for (auto n : n_values) {
    if (n < 1) throw std::invalid_argument("experiment: n must be >= 1");
  }
  if (m < 1 || chain_len < 1) throw std::invalid_argument("experiment: m and chain_len must be >= 1");
  solver.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  j = nlohmann::json{{"scenario", to_string(cfg.scenario)},
                     {"vartheta", cfg.vartheta},
                     {"d_values", cfg.d_values},
                     {"n_values", cfg.n_values},
                     {"sign_configs", cfg.sign_configs},
                     {"replications", cfg.replications},
                     {"m", cfg.m},
                     {"burn_in", cfg.burn_in},
                     {"chain_len", cfg.chain_len},
                     {"c1_grid", cfg.c1_grid},
                     {"c2_grid", cfg.c2_grid},
                     {"seed", cfg.seed},
                     {"solver",
                      {{"max_iters", cfg.solver.max_iters},
                       {"kkt_tol", cfg.solver.kkt_tol},
                       {"initial_step", cfg.solver.initial_step},
                       {"backtrack_factor", cfg.solver.backtrack_factor},
                       {"active_set", cfg.solver.active_set}}},
                     {"threads", cfg.threads},
                     {"paper_scale", cfg.paper_scale}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  const auto kind = scenario_from_string(j.value("scenario", std::string("M2")));
  auto cfg = ExperimentConfig::defaults(kind, j.value("paper_scale", false));
  static const char* known[] = {"scenario", "vartheta",    "d_values", "n_values", "sign_configs", "replications",
                                "m",        "burn_in",     "chain_len", "c1_grid", "c2_grid",      "seed",
                                "solver",   "threads",     "paper_scale"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      throw std::invalid_argument("experiment config: unknown key '" + it.key() + "'");
    }
  }
  cfg.vartheta = j.value("vartheta", cfg.vartheta);
  cfg.d_values = j.value("d_values", cfg.d_values);
  cfg.n_values = j.value("n_values", cfg.n_values);
  cfg.sign_configs = j.value("sign_configs", cfg.sign_configs);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.m = j.value("m", cfg.m);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.chain_len = j.value("chain_len", cfg.chain_len);
  cfg.c1_grid = j.value("c1_grid", cfg.c1_grid);
  cfg.c2_grid = j.value("c2_grid", cfg.c2_grid);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
    cfg.solver.kkt_tol = s.value("kkt_tol", cfg.solver.kkt_tol);
    cfg.solver.initial_step = s.value("initial_step", cfg.solver.initial_step);
    cfg.solver.backtrack_factor = s.value("backtrack_factor", cfg.solver.backtrack_factor);
    cfg.solver.active_set = s.value("active_set", cfg.solver.active_set);
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Harness

const ResultRow* ResultTable::find(Method method, const std::string& estimator, int d, std::size_t n) const {
  for (const auto& r : rows) {
    if (r.method == method && r.estimator == estimator && r.d == d && r.n == n) return &r;
  }
  return nullptr;
}

namespace {

struct Unit {
  int d;
  std::size_t n;
  std::size_t sign_config;
  std::size_t replication;
};

// c2 values evaluated per path step: 0 (plain lasso) plus the grid.
std::vector<double> threshold_levels(const ExperimentConfig& cfg) {
  std::vector<double> out = cfg.c2_grid;
  out.push_back(0.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void score_path(const PathResult& path, Method method, const std::vector<double>& c1_desc, const Unit& u,
                const Scenario& sc, const std::vector<double>& c2s, double scale, std::uint64_t stream,
                std::vector<ReplicationRecord>& out) {
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& step = path.steps[i];
    for (double c2 : c2s) {
      ReplicationRecord rec;
      rec.d = u.d;
      rec.n = u.n;
      rec.sign_config = u.sign_config;
      rec.replication = u.replication;
      rec.method = method;
      rec.c1 = c1_desc[i];
      rec.c2 = c2;
      rec.data_stream = stream;
      rec.ok = !step.failed;
      if (rec.ok) {
        const auto est = threshold_support(step.theta, c2 * scale);
        const auto metrics = selection_metrics(est, sc.support, step.theta.size());
        rec.exact = metrics.exact_recovery;
        rec.true_positives = metrics.true_positives;
        rec.false_positives = metrics.false_positives;
        rec.selected = est.size();
      }
      out.push_back(rec);
    }
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg,
                           const std::function<void(const std::vector<ReplicationRecord>&)>& on_unit) {
  cfg.validate();
  std::vector<Unit> units;
  for (int d : cfg.d_values)
    for (auto n : cfg.n_values)
      for (std::size_t k = 0; k < cfg.sign_configs; ++k)
        for (std::size_t r = 0; r < cfg.replications; ++r) units.push_back({d, n, k, r});

  std::vector<double> c1_desc = cfg.c1_grid;
  std::sort(c1_desc.begin(), c1_desc.end(), std::greater<>());
  c1_desc.erase(std::unique(c1_desc.begin(), c1_desc.end()), c1_desc.end());
  const auto c2s = threshold_levels(cfg);
  const RngSeed root{cfg.seed, 0};

  std::vector<std::vector<ReplicationRecord>> per_unit(units.size());
  std::vector<char> unit_failed(units.size(), 0);
  std::mutex sink_mutex;

  parallel_for(units.size(), cfg.threads, [&](std::size_t idx) {
    const Unit& u = units[idx];
    const auto sc = make_scenario(cfg.scenario, u.d, cfg.vartheta, root.child(1).child(u.sign_config));
    const auto unit_seed = root.child(2)
                               .child(static_cast<std::uint64_t>(u.d))
                               .child(u.n)
                               .child(u.sign_config)
                               .child(u.replication);
    std::vector<ReplicationRecord> recs;
    try {
      const auto data = sample_dataset(sc.theta_star, u.n, cfg.chain_len, unit_seed.child(0), 1);
      const auto lambdas = lambda_grid(c1_desc, u.d, u.n);
      const double scale = grid_scale(u.d, u.n);

      const auto pl = run_pl_path(data, lambdas, cfg.solver);
      score_path(pl, Method::PL, c1_desc, u, sc, c2s, scale, unit_seed.stream, recs);

      McPathOptions mc;
      mc.m = cfg.m;
      mc.burn_in = cfg.burn_in;
      mc.solver = cfg.solver;
      const auto path = run_mc_path(data, lambdas, mc, unit_seed.child(1));
      score_path(path, Method::MCMC, c1_desc, u, sc, c2s, scale, unit_seed.stream, recs);
    } catch (const std::exception&) {
      unit_failed[idx] = 1;
      recs.clear();
    }
    if (on_unit) {
      std::lock_guard lock(sink_mutex);
      on_unit(recs);
    }
    per_unit[idx] = std::move(recs);
  });

  ResultTable table;
  for (std::size_t i = 0; i < units.size(); ++i) {
    table.failed_replications += unit_failed[i];
    table.records.insert(table.records.end(), per_unit[i].begin(), per_unit[i].end());
  }
  table.rows = aggregate(cfg, table.records);
  // Failed units count against every row of their cell.
  for (auto& row : table.rows) {
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (unit_failed[i] && units[i].d == row.d && units[i].n == row.n) ++row.failed;
    }
  }
  return table;
}

std::vector<ResultRow> aggregate(const ExperimentConfig& cfg, const std::vector<ReplicationRecord>& records) {
  struct Tally {
    std::size_t success = 0, completed = 0, failed = 0;
  };
  // (d, n, method, c1, c2) -> tally
  std::map<std::tuple<int, std::size_t, int, double, double>, Tally> cells;
  for (const auto& r : records) {
    auto& t = cells[{r.d, r.n, static_cast<int>(r.method), r.c1, r.c2}];
    if (r.ok) {
      ++t.completed;
      t.success += r.exact;
    } else {
      ++t.failed;
    }
  }

  std::vector<double> c1_asc = cfg.c1_grid;
  std::sort(c1_asc.begin(), c1_asc.end());
  c1_asc.erase(std::unique(c1_asc.begin(), c1_asc.end()), c1_asc.end());
  std::vector<double> c2_asc = cfg.c2_grid;
  std::sort(c2_asc.begin(), c2_asc.end());
  c2_asc.erase(std::unique(c2_asc.begin(), c2_asc.end()), c2_asc.end());

  std::vector<ResultRow> rows;
  for (int d : cfg.d_values) {
    for (auto n : cfg.n_values) {
      for (Method method : {Method::PL, Method::MCMC}) {
        for (const std::string estimator : {"lasso", "thresholded"}) {
          ResultRow row;
          row.method = method;
          row.estimator = estimator;
          row.d = d;
          row.n = n;
          row.frequency = -1.0;
          const std::vector<double> c2_list = estimator == "lasso" ? std::vector<double>{0.0} : c2_asc;
          for (double c1 : c1_asc) {
            for (double c2 : c2_list) {
              auto it = cells.find({d, n, static_cast<int>(method), c1, c2});
              if (it == cells.end()) continue;
              const auto& t = it->second;
              const double freq = t.completed ? static_cast<double>(t.success) / static_cast<double>(t.completed) : 0.0;
              if (freq > row.frequency) {
                row.frequency = freq;
                row.best_c1 = c1;
                row.best_c2 = c2;
                row.completed = t.completed;
                row.failed = t.failed;
              }
            }
          }
          if (row.frequency < 0.0) continue;  // no records for this cell
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::string format_result_tsv(const std::vector<ResultRow>& rows) {
  std::string out = "method\testimator\td\tn\tbest_c1\tbest_c2\tfrequency\tcompleted\tfailed\n";
  for (const auto& r : rows) {
    out += to_string(r.method) + '\t' + r.estimator + '\t' + std::to_string(r.d) + '\t' + std::to_string(r.n) + '\t' +
           format_double(r.best_c1) + '\t' + format_double(r.best_c2) + '\t' + format_double(r.frequency) + '\t' +
           std::to_string(r.completed) + '\t' + std::to_string(r.failed) + '\n';
  }
  return out;
}

std::string records_tsv_header() {
  return "d\tn\tsign_config\treplication\tmethod\tc1\tc2\tok\texact\ttp\tfp\tselected\tdata_stream\n";
}

std::string format_record_line(const ReplicationRecord& r) {
  return std::to_string(r.d) + '\t' + std::to_string(r.n) + '\t' + std::to_string(r.sign_config) + '\t' +
         std::to_string(r.replication) + '\t' + to_string(r.method) + '\t' + format_double(r.c1) + '\t' +
         format_double(r.c2) + '\t' + (r.ok ? "1" : "0") + '\t' + (r.exact ? "1" : "0") + '\t' +
         std::to_string(r.true_positives) + '\t' + std::to_string(r.false_positives) + '\t' +
         std::to_string(r.selected) + '\t' + std::to_string(r.data_stream) + '\n';
}

std::string format_records_tsv(const std::vector<ReplicationRecord>& records) {
  std::string out = records_tsv_header();
  for (const auto& r : records) out += format_record_line(r);
  return out;
}

nlohmann::json result_summary_json(const ExperimentConfig& cfg, const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", to_string(r.method)},
                    {"estimator", r.estimator},
                    {"d", r.d},
                    {"n", r.n},
                    {"best_c1", r.best_c1},
                    {"best_c2", r.best_c2},
                    {"frequency", r.frequency},
                    {"completed", r.completed},
                    {"failed", r.failed}});
  }
  return {{"config", cfg}, {"rows", rows}, {"failed_replications", table.failed_replications},
          {"records", table.records.size()}};
}

}  // namespace isingmc
