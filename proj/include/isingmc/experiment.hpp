#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "isingmc/path.hpp"
#include "isingmc/solver.hpp"

namespace isingmc {

enum class ScenarioKind { M1, M2, M3 };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& name);

/// Simulation model with random edge signs.
///   M1: all pairs among vertices 1..5 (10 edges), magnitude vartheta.
///   M2: chain (r-1, r) for r = 2..10 (9 edges), magnitude vartheta.
///   M3: all pairs within {1..4} and within {5..8} (12 edges), magnitude vartheta.
struct Scenario {
  ScenarioKind kind = ScenarioKind::M1;
  int d = 0;
  double vartheta = 1.0;
  RngSeed sign_seed;
  Theta theta_star;
  SupportSet support;
};

Scenario make_scenario(ScenarioKind kind, int d, double vartheta, RngSeed sign_seed);

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::M2;
  double vartheta = 1.0;
  std::vector<int> d_values{20};
  std::vector<std::size_t> n_values{500};
  /// Number of random sign draws of theta_star.
  std::size_t sign_configs = 20;
  /// Datasets per sign draw.
  std::size_t replications = 1;
  /// Chain length for the MC objective.
  std::size_t m = 20000;
  /// 0 selects 1000 d.
  std::size_t burn_in = 0;
  /// Single-site updates per observation when generating data.
  std::size_t chain_len = 100000;
  std::vector<double> c1_grid;
  std::vector<double> c2_grid{0.0, 0.04, 0.08, 0.12, 0.16};
  std::uint64_t seed = 1;
  SolverOptions solver;
  unsigned threads = 0;
  bool paper_scale = false;

  /// Desk-scale defaults for a scenario (c1 grid 1..4, or 1..8 for M2).
  static ExperimentConfig defaults(ScenarioKind kind, bool paper_scale = false);
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
/// Missing keys keep the scenario defaults; paper_scale=true resets to the
/// paper-scale defaults before other keys apply.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

enum class Method { PL, MCMC };
std::string to_string(Method m);

/// One (dataset, method, c1, c2) evaluation.
struct ReplicationRecord {
  int d = 0;
  std::size_t n = 0;
  std::size_t sign_config = 0;
  std::size_t replication = 0;
  Method method = Method::PL;
  double c1 = 0.0;
  double c2 = 0.0;
  bool ok = true;
  bool exact = false;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t selected = 0;
  std::uint64_t data_stream = 0;
};

struct ResultRow {
  Method method = Method::PL;
  /// "lasso" or "thresholded"
  std::string estimator;
  int d = 0;
  std::size_t n = 0;
  double best_c1 = 0.0;
  double best_c2 = 0.0;
  double frequency = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<ReplicationRecord> records;
  /// Replications whose data generation failed outright.
  std::size_t failed_replications = 0;

  const ResultRow* find(Method method, const std::string& estimator, int d, std::size_t n) const;
};

/// Runs every (d, n, sign config, replication) unit. Each unit derives its
/// seeds from (seed, d, n, sign config, replication) only, so results do
/// not depend on thread count or on which other cells are in the config.
/// `on_unit` receives each unit's records as soon as it completes.
ResultTable run_experiment(const ExperimentConfig& cfg,
                           const std::function<void(const std::vector<ReplicationRecord>&)>& on_unit = {});

/// Frequencies and best cells from raw records.
std::vector<ResultRow> aggregate(const ExperimentConfig& cfg, const std::vector<ReplicationRecord>& records);

std::string format_result_tsv(const std::vector<ResultRow>& rows);
std::string format_records_tsv(const std::vector<ReplicationRecord>& records);
std::string records_tsv_header();
std::string format_record_line(const ReplicationRecord& r);
nlohmann::json result_summary_json(const ExperimentConfig& cfg, const ResultTable& table);

}  // namespace isingmc
