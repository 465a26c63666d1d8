#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "isingmc/gibbs.hpp"
#include "isingmc/ising.hpp"
#include "isingmc/solver.hpp"

namespace isingmc {

/// Linear edge indices of selected or true edges.
using SupportSet = std::set<std::size_t>;

struct PathStep {
  double lambda = 0.0;
  Theta theta;
  /// Instrumental parameter the chain for this step was drawn at.
  Theta psi;
  RngSeed chain_seed;
  double ess = 0.0;
  double kkt_violation = 0.0;
  std::size_t iterations = 0;
  double objective = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct PathResult {
  std::vector<PathStep> steps;

  std::vector<double> lambdas() const;
  std::vector<Theta> thetas() const;
  std::vector<Theta> psi_trace() const;
};

struct McPathOptions {
  std::size_t m = 100000;
  /// Defaults to 1000 d when unset (0).
  std::size_t burn_in = 0;
  SolverOptions solver;
};

/// |grad l(0)|_inf for the MC objective on a chain drawn at psi = 0: the
/// smallest lambda for which theta = 0 satisfies the KKT conditions.
double lambda_max(const Dataset& data, const MarkovSample& sample0);

/// Same quantity for the pseudolikelihood objective.
double pl_lambda_max(const Dataset& data);

/// Warm-started lambda path. psi starts at 0; each step draws a fresh Gibbs
/// chain at psi with seed.child(i), minimises the penalised MC objective from
/// the previous solution and moves psi to the new solution. A step whose
/// solve fails is marked and leaves psi unchanged.
PathResult run_mc_path(const Dataset& data, const std::vector<double>& lambdas, const McPathOptions& opts,
                       RngSeed seed);

/// Same lambda grid and solver on the pseudolikelihood objective.
PathResult run_pl_path(const Dataset& data, const std::vector<double>& lambdas, const SolverOptions& opts);

/// {e : |theta_e| > delta}.
SupportSet threshold_support(const Theta& theta, double delta);

struct SelectionMetrics {
  bool exact_recovery = false;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double true_positive_rate = 0.0;
  double false_positive_rate = 0.0;
};

SelectionMetrics selection_metrics(const SupportSet& estimated, const SupportSet& truth, std::size_t num_params);

/// sqrt(log(d(d-1)) / n), the scale shared by the c1 and c2 grids.
double grid_scale(int d, std::size_t n);

/// c1 values (any order) mapped to a strictly decreasing lambda grid.
std::vector<double> lambda_grid(const std::vector<double>& c1, int d, std::size_t n);

void validate_lambdas(const std::vector<double>& lambdas);

}  // namespace isingmc
