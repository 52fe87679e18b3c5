#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sensopt/design.hpp"

namespace sensopt {

// Discrete candidate locations for selection. must_include lists candidate
// indices that are part of every design and count toward the budget.
struct CandidatePool {
  std::vector<SensorSpec> candidates;
  int budget = 0;
  std::vector<int> must_include;
};

// Threshold for a measurable stiffness change: the smallest average Fisher
// contribution a sensor must reach so a damage step delta_alpha_min moves the
// reading by at least delta_y.
struct DetectabilityConfig {
  double delta_y = 0.0;
  double delta_alpha_min = 0.0;
  double sigma = 1.0;
};

double detectability_threshold(const DetectabilityConfig& cfg);

// Single-sensor ranking by squared Jacobian row norm (each candidate's rows
// stacked over load cases). Ties within 1e-12 relative are grouped and broken
// toward the lowest candidate index.
struct SingleSensorRanking {
  int best = 0;
  std::vector<double> scores;
  std::vector<int> tied_best;  // every index within tolerance of the maximum
};

SingleSensorRanking single_sensor_avg_fisher(const std::vector<Eigen::MatrixXd>& rows_per_candidate);

// Sum of the per-parameter Fisher contributions that clear the threshold,
// and the count of parameters at or above it (zero contributions never
// count). fisher_row holds F_jj-contributions per parameter for one
// candidate, J_jk^2 / sigma^2.
double truncated_score(const Eigen::VectorXd& fisher_row, double f_min);
int count_score(const Eigen::VectorXd& fisher_row, double f_min);

// Candidate rows realized against a model at one (or several) parameter
// points: for each candidate, its stacked measurement Jacobian rows and the
// matching noise variances. Scenario-weighted rows are pre-scaled by
// sqrt(w_l) so subsets can be ranked by stacking.
class PlacementEvaluator {
 public:
  PlacementEvaluator(const StructuralModel& model, const ParameterVector& q0,
                     const CandidatePool& pool);
  PlacementEvaluator(const StructuralModel& model,
                     const std::vector<std::pair<ParameterVector, double>>& scenarios,
                     const CandidatePool& pool);
  // The pool is held by pointer and must outlive the evaluator.
  PlacementEvaluator(const StructuralModel&, const ParameterVector&,
                     CandidatePool&&) = delete;
  PlacementEvaluator(const StructuralModel&,
                     const std::vector<std::pair<ParameterVector, double>>&,
                     CandidatePool&&) = delete;

  const CandidatePool& pool() const { return *pool_; }
  int candidate_count() const { return static_cast<int>(rows_.size()); }
  int parameter_count() const { return n_q_; }
  // Stacked rows (over scenarios and load cases) of one candidate.
  const Eigen::MatrixXd& rows(int candidate) const { return rows_.at(candidate); }
  const Eigen::VectorXd& sigmas(int candidate) const { return sigmas_.at(candidate); }

  // Criterion goodness of a candidate subset; always maximized. D uses the
  // Gram convention below N_q stacked rows and log det(F + eps I) at or above
  // it; A returns -tr(F^{-1}); E returns the smallest eigenvalue.
  double goodness(const std::vector<int>& subset, Criterion c, double eps) const;

  // Gram determinant of a subset (D branch diagnostics).
  double gram_determinant(const std::vector<int>& subset) const;

 private:
  void build(const StructuralModel& model,
             const std::vector<std::pair<ParameterVector, double>>& scenarios);

  const CandidatePool* pool_;
  int n_q_ = 0;
  std::vector<Eigen::MatrixXd> rows_;
  std::vector<Eigen::VectorXd> sigmas_;
};

struct SelectionResult {
  std::vector<int> chosen;  // sorted candidate indices, best design
  double value = 0.0;       // goodness of the best design
  std::vector<std::vector<int>> co_optimal;  // all sets within tie tolerance
};

// Full enumeration of all size-m supersets of must_include. Throws
// CombinatorialBlowup when more than 1e6 subsets would be visited, EmptyPool
// on an empty pool. Ties are reported and the lexicographically smallest set
// wins.
SelectionResult exhaustive_select(const PlacementEvaluator& eval, int m,
                                  Criterion c, double eps);

struct GreedyResult {
  std::vector<int> chain;      // candidates in order of addition
  std::vector<double> values;  // goodness after each addition
  double value = 0.0;          // final goodness
};

// Forward greedy selection: grows must_include one best candidate at a time,
// ties toward the lowest candidate index. The prefixes of `chain` are the
// nested designs.
GreedyResult greedy_select(const PlacementEvaluator& eval, int m, Criterion c,
                           double eps);

// Projected gradient descent on the D-objective over the positions of the
// movable (displacement) sensors. The first trial step moves the fastest
// sensor by init_step_rel * min element length, shrinking by `shrink` until
// the Armijo condition with slope fraction c1 holds along the projection arc.
struct StepRule {
  double init_step_rel = 0.1;
  double shrink = 0.5;
  double c1 = 1e-4;
  double grad_tol = 1e-8;
  int max_backtracks = 60;
};

struct DescentStep {
  std::vector<double> positions;
  double phi;
};

struct RefineResult {
  std::vector<SensorSpec> sensors;   // final configuration, movable + static
  std::vector<DescentStep> trajectory;
  std::string termination;           // "gradient", "no_descent", "max_steps", "stationary"
};

// movable: indices into `sensors` of the displacement sensors whose positions
// are optimized; the rest contribute measurements but stay put. Positions are
// kept 1e-6 * (min element length) away from nodes and domain ends, with a
// pairwise separation of 1e-3 * (min element length) between movable sensors.
RefineResult continuous_descent(const StructuralModel& model,
                                const ParameterVector& q0,
                                std::vector<SensorSpec> sensors,
                                const std::vector<int>& movable, double eps,
                                int max_steps, const StepRule& rule = {});

}  // namespace sensopt
