#include <doctest.h>

#include "isingmc/experiment.hpp"
#include "isingmc/io.hpp"

using namespace isingmc;

namespace {

ExperimentConfig tiny(ScenarioKind kind = ScenarioKind::M2) {
  auto cfg = ExperimentConfig::defaults(kind);
  cfg.d_values = {10};
  cfg.n_values = {300};
  cfg.sign_configs = 3;
  cfg.replications = 1;
  cfg.m = 3000;
  cfg.burn_in = 500;
  cfg.chain_len = 3000;
  cfg.c1_grid = {2.0, 3.0, 5.0};
  cfg.c2_grid = {0.0, 0.08, 0.16};
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("M1 scenario") {
  const auto sc = make_scenario(ScenarioKind::M1, 20, 1.0, {1, 0});
  CHECK(sc.theta_star.nonzeros() == 10);
  CHECK(sc.support.size() == 10);
  for (auto e : sc.support) {
    const auto idx = edge_from_linear(e, 20);
    CHECK(idx.s <= 5);
    CHECK(std::abs(sc.theta_star[e]) == 1.0);
  }
}

TEST_CASE("M2 scenario is a chain of 9 edges") {
  const auto sc = make_scenario(ScenarioKind::M2, 20, 1.0, {2, 0});
  CHECK(sc.support.size() == 9);
  for (int r = 2; r <= 10; ++r) CHECK(sc.support.count(edge_index(r - 1, r, 20).linear) == 1);
}

TEST_CASE("M3 scenario has two blocks of six edges") {
  const auto sc = make_scenario(ScenarioKind::M3, 20, 2.0, {3, 0});
  CHECK(sc.theta_star.nonzeros() == 12);
  for (auto e : sc.support) {
    const auto idx = edge_from_linear(e, 20);
    CHECK(((idx.s <= 4) || (idx.r >= 5 && idx.s <= 8)));
    CHECK(std::abs(sc.theta_star[e]) == 2.0);
  }
  CHECK(ExperimentConfig::defaults(ScenarioKind::M3).vartheta == 2.0);
}

TEST_CASE("scenario signs are deterministic and vary with the seed") {
  const auto a = make_scenario(ScenarioKind::M1, 20, 1.0, {5, 7});
  const auto b = make_scenario(ScenarioKind::M1, 20, 1.0, {5, 7});
  CHECK(a.theta_star == b.theta_star);
  bool differs = false;
  for (std::uint64_t k = 8; k < 20 && !differs; ++k)
    differs = !(make_scenario(ScenarioKind::M1, 20, 1.0, {5, k}).theta_star == a.theta_star);
  CHECK(differs);
  CHECK_THROWS_AS(make_scenario(ScenarioKind::M2, 9, 1.0, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(make_scenario(ScenarioKind::M1, 20, 0.0, {1, 0}), std::invalid_argument);
}

TEST_CASE("scenario names") {
  CHECK(scenario_from_string("M1") == ScenarioKind::M1);
  CHECK(scenario_from_string("m3") == ScenarioKind::M3);
  CHECK(to_string(ScenarioKind::M2) == "M2");
  CHECK_THROWS_AS(scenario_from_string("M4"), std::invalid_argument);
}

TEST_CASE("defaults") {
  const auto m1 = ExperimentConfig::defaults(ScenarioKind::M1);
  CHECK(m1.c1_grid.front() == 1.0);
  CHECK(m1.c1_grid.back() == 4.0);
  CHECK(m1.c1_grid.size() == 13);
  CHECK(m1.c2_grid == std::vector<double>{0.0, 0.04, 0.08, 0.12, 0.16});
  CHECK(m1.m == 20000);
  CHECK(m1.sign_configs * m1.replications == 20);
  const auto m2 = ExperimentConfig::defaults(ScenarioKind::M2);
  CHECK(m2.c1_grid.back() == 8.0);
  const auto paper = ExperimentConfig::defaults(ScenarioKind::M1, true);
  CHECK(paper.m == 100000);
  CHECK(paper.sign_configs * paper.replications == 400);
}

TEST_CASE("config json round trip and validation") {
  const auto cfg = tiny();
  nlohmann::json j = cfg;
  const auto back = experiment_config_from_json(j);
  nlohmann::json j2 = back;
  CHECK(j == j2);
  j["bogus"] = 1;
  CHECK_THROWS_AS(experiment_config_from_json(j), std::invalid_argument);
  j.erase("bogus");
  j["c1_grid"] = nlohmann::json::array();
  CHECK_THROWS_AS(experiment_config_from_json(j), std::invalid_argument);
  const auto partial = experiment_config_from_json(nlohmann::json{{"scenario", "M1"}, {"seed", 9}});
  CHECK(partial.scenario == ScenarioKind::M1);
  CHECK(partial.seed == 9);
  CHECK(partial.c1_grid.back() == 4.0);
}

TEST_CASE("zero replications give an empty table with a header") {
  auto cfg = tiny();
  cfg.replications = 0;
  const auto table = run_experiment(cfg);
  CHECK(table.rows.empty());
  CHECK(table.records.empty());
  const auto tsv = format_result_tsv(table.rows);
  CHECK(tsv == "method\testimator\td\tn\tbest_c1\tbest_c2\tfrequency\tcompleted\tfailed\n");
}

TEST_CASE("experiment run invariants") {
  const auto cfg = tiny();
  std::size_t streamed = 0;
  const auto table = run_experiment(cfg, [&](const std::vector<ReplicationRecord>& recs) { streamed += recs.size(); });
  CHECK(streamed == table.records.size());
  // 3 units x 2 methods x 3 lambdas x 3 c2 levels
  CHECK(table.records.size() == 3 * 2 * 3 * 3);
  CHECK(table.rows.size() == 4);
  for (const auto& row : table.rows) {
    CHECK(row.frequency >= 0.0);
    CHECK(row.frequency <= 1.0);
    CHECK(row.completed + row.failed == 3);
    // The best cell's frequency equals successes / completed from the raw records.
    std::size_t succ = 0, done = 0;
    for (const auto& r : table.records) {
      if (r.method == row.method && r.c1 == row.best_c1 && r.c2 == row.best_c2 && r.ok) {
        ++done;
        succ += r.exact;
      }
    }
    CHECK(done == row.completed);
    CHECK(row.frequency == doctest::Approx(static_cast<double>(succ) / done));
  }
  for (Method m : {Method::PL, Method::MCMC}) {
    const auto* lasso = table.find(m, "lasso", 10, 300);
    const auto* thr = table.find(m, "thresholded", 10, 300);
    REQUIRE(lasso);
    REQUIRE(thr);
    CHECK(lasso->best_c2 == 0.0);
    CHECK(thr->frequency >= lasso->frequency);
  }
}

TEST_CASE("results do not depend on thread count or on other cells") {
  auto cfg = tiny();
  const auto one = run_experiment(cfg);
  cfg.threads = 3;
  const auto three = run_experiment(cfg);
  CHECK(format_records_tsv(one.records) == format_records_tsv(three.records));
  CHECK(format_result_tsv(one.rows) == format_result_tsv(three.rows));

  auto wide = tiny();
  wide.n_values = {150, 300};
  const auto both = run_experiment(wide);
  std::vector<ReplicationRecord> subset;
  for (const auto& r : both.records)
    if (r.n == 300) subset.push_back(r);
  CHECK(format_records_tsv(subset) == format_records_tsv(one.records));
}

TEST_CASE("aggregate picks the first maximum in ascending grid order") {
  auto cfg = tiny();
  std::vector<ReplicationRecord> recs;
  for (double c1 : {2.0, 3.0, 5.0}) {
    ReplicationRecord r;
    r.d = 10;
    r.n = 300;
    r.method = Method::PL;
    r.c1 = c1;
    r.c2 = 0.0;
    r.exact = c1 >= 3.0;
    recs.push_back(r);
  }
  const auto rows = aggregate(cfg, recs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].best_c1 == 3.0);
  CHECK(rows[0].frequency == 1.0);
}

TEST_CASE("record and summary formats") {
  ReplicationRecord r;
  r.d = 20;
  r.n = 500;
  r.method = Method::MCMC;
  r.c1 = 2.25;
  r.c2 = 0.04;
  r.exact = true;
  r.true_positives = 9;
  r.selected = 9;
  r.data_stream = 42;
  CHECK(format_record_line(r) == "20\t500\t0\t0\tMCMC\t2.25\t0.04\t1\t1\t9\t0\t9\t42\n");
  CHECK(format_records_tsv({r}) == records_tsv_header() + format_record_line(r));
  ResultTable t;
  const auto js = result_summary_json(tiny(), t);
  CHECK(js.at("rows").empty());
  CHECK(js.at("config").at("scenario") == "M2");
}
