#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sensopt/bar1d.hpp"
#include "sensopt/placement.hpp"

using namespace sensopt;

namespace {

StructuralModel tip_bar(int n_elements) {
  StructuralModel model(Mesh1D::uniform(n_elements, 1.0), 1.0, 1.0);
  LoadCase lc;
  lc.f = Eigen::VectorXd::Zero(n_elements + 1);
  lc.f[n_elements] = 1.0;
  model.add_load_case(std::move(lc));
  return model;
}

CandidatePool node_pool(int n_elements) {
  CandidatePool pool;
  for (int j = 1; j <= n_elements; ++j) {
    pool.candidates.push_back(SensorSpec::displacement(static_cast<double>(j)));
  }
  return pool;
}

double subset_det(const PlacementEvaluator& eval, std::vector<int> subset) {
  return eval.gram_determinant(subset);
}

}  // namespace

TEST_CASE("detectability threshold formula") {
  CHECK(detectability_threshold({0.01, 0.05, 1.0}) == doctest::Approx(0.04));
  CHECK(detectability_threshold({0.0, 0.05, 1.0}) == doctest::Approx(0.0));

  const double base = detectability_threshold({0.3, 0.1, 1.0});
  CHECK(detectability_threshold({0.3, 0.1, 2.0}) == doctest::Approx(base / 4.0));

  CHECK_THROWS_AS(detectability_threshold({0.01, 0.05, 0.0}), InvalidParameter);
  CHECK_THROWS_AS(detectability_threshold({0.01, 0.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(detectability_threshold({-0.1, 0.05, 1.0}), InvalidParameter);
}

TEST_CASE("single sensor rule ranks by squared row norm") {
  Eigen::MatrixXd a(1, 2), b(1, 2), c(1, 2);
  a << 1.0, 0.0;
  b << 2.0, 0.0;
  c << 0.0, 2.0;
  const SingleSensorRanking r = single_sensor_avg_fisher({a, b, c});
  CHECK(r.scores[0] == doctest::Approx(1.0));
  CHECK(r.scores[1] == doctest::Approx(4.0));
  CHECK(r.scores[2] == doctest::Approx(4.0));
  CHECK(r.best == 1);
  CHECK(r.tied_best == std::vector<int>{1, 2});

  CHECK(single_sensor_avg_fisher({c}).best == 0);
  CHECK_THROWS_AS(single_sensor_avg_fisher({}), EmptyPool);
}

TEST_CASE("threshold scores on a hand-built row") {
  Eigen::VectorXd row(4);
  row << 0.0, 0.3, 1.0, 2.0;
  CHECK(truncated_score(row, 0.5) == doctest::Approx(0.5 + 1.5));
  CHECK(count_score(row, 0.5) == 2);
  CHECK(truncated_score(row, 0.0) == doctest::Approx(row.sum()));
  CHECK(count_score(row, 0.0) == 3);  // the exact zero never counts
  CHECK(truncated_score(row, 5.0) == doctest::Approx(0.0));
  CHECK(count_score(row, 5.0) == 0);
}

TEST_CASE("thresholded scores follow the all-or-nothing law on the bar") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  const CandidatePool pool = node_pool(10);
  const PlacementEvaluator eval(model, q0, pool);

  for (int j = 1; j <= 10; ++j) {
    const Eigen::MatrixXd& rows = eval.rows(j - 1);
    const Eigen::VectorXd& sig = eval.sigmas(j - 1);
    Eigen::VectorXd fisher_row = Eigen::VectorXd::Zero(10);
    for (int r = 0; r < rows.rows(); ++r) {
      fisher_row += rows.row(r).array().square().matrix().transpose() /
                    (sig[r] * sig[r]);
    }
    CHECK(truncated_score(fisher_row, 0.5) == doctest::Approx(0.5 * j));
    CHECK(count_score(fisher_row, 0.5) == j);
    CHECK(truncated_score(fisher_row, 1.5) == doctest::Approx(0.0));
    CHECK(count_score(fisher_row, 1.5) == 0);
  }
}

TEST_CASE("evaluator rejects degenerate pools") {
  const StructuralModel model = tip_bar(4);
  const ParameterVector q0(Eigen::VectorXd::Ones(4));

  CandidatePool empty;
  CHECK_THROWS_AS(PlacementEvaluator(model, q0, empty), EmptyPool);

  CandidatePool doubled;
  doubled.candidates = {SensorSpec::displacement(2.0),
                        SensorSpec::displacement(2.0)};
  CHECK_THROWS_AS(PlacementEvaluator(model, q0, doubled), InvalidParameter);

  // Same location, different kind: fine.
  CandidatePool mixed;
  mixed.candidates = {SensorSpec::displacement(2.0), SensorSpec::strain(2)};
  const PlacementEvaluator ok(model, q0, mixed);
  CHECK(ok.candidate_count() == 2);
}

TEST_CASE("subset goodness and gram determinants on the bar") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  const CandidatePool pool = node_pool(10);
  const PlacementEvaluator eval(model, q0, pool);

  CHECK(subset_det(eval, {4, 9}) == doctest::Approx(25.0));
  CHECK(subset_det(eval, {1, 4, 9}) ==
        doctest::Approx(static_cast<double>(min_matrix_det({2, 5, 10}))));

  CHECK(eval.goodness({4, 9}, Criterion::D, 0.0) == doctest::Approx(std::log(25.0)));

  std::vector<int> all(10);
  for (int i = 0; i < 10; ++i) all[i] = i;
  CHECK(eval.goodness(all, Criterion::D, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval.goodness(all, Criterion::E, 0.0) > 0.0);
  CHECK(eval.goodness(all, Criterion::A, 0.0) < 0.0);

  CHECK_THROWS_AS(eval.goodness({4, 4}, Criterion::D, 0.0), InvalidParameter);
  CHECK_THROWS_AS(eval.goodness({42}, Criterion::D, 0.0), IndexOutOfRange);
}

TEST_CASE("exhaustive selection recovers the balanced designs") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  CandidatePool pool = node_pool(10);
  const PlacementEvaluator eval(model, q0, pool);

  SUBCASE("one sensor: the free end") {
    const SelectionResult sel = exhaustive_select(eval, 1, Criterion::D, 0.0);
    CHECK(sel.chosen == std::vector<int>{9});
    CHECK(sel.value == doctest::Approx(std::log(10.0)));
    CHECK(sel.co_optimal.size() == 1);
  }

  SUBCASE("two sensors: midpoint and free end") {
    const SelectionResult sel = exhaustive_select(eval, 2, Criterion::D, 0.0);
    CHECK(sel.chosen == std::vector<int>{4, 9});
    CHECK(sel.value == doctest::Approx(std::log(25.0)));
    CHECK(sel.co_optimal.size() == 1);
  }

  SUBCASE("three sensors: three-way tie") {
    const SelectionResult sel = exhaustive_select(eval, 3, Criterion::D, 0.0);
    const std::vector<std::vector<int>> expected = {{2, 5, 9}, {2, 6, 9}, {3, 6, 9}};
    CHECK(sel.co_optimal == expected);
    CHECK(sel.chosen == expected.front());
    CHECK(sel.value == doctest::Approx(std::log(36.0)));
  }

  SUBCASE("four sensors: six-way tie") {
    const SelectionResult sel = exhaustive_select(eval, 4, Criterion::D, 0.0);
    REQUIRE(sel.co_optimal.size() == 6);
    CHECK(sel.chosen == std::vector<int>{1, 3, 6, 9});
    CHECK(sel.co_optimal.back() == std::vector<int>{2, 5, 7, 9});
    CHECK(std::find(sel.co_optimal.begin(), sel.co_optimal.end(),
                    std::vector<int>{1, 4, 6, 9}) != sel.co_optimal.end());
    CHECK(sel.value == doctest::Approx(std::log(36.0)));
    // Matches the closed-form census node for node.
    const auto sets = theorem_optimal_sets(4, 10);
    REQUIRE(sets.size() == sel.co_optimal.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t k = 0; k < sets[i].size(); ++k) {
        CHECK(sel.co_optimal[i][k] == sets[i][k] - 1);
      }
    }
  }

  SUBCASE("full pool is the perfect design") {
    const SelectionResult sel = exhaustive_select(eval, 10, Criterion::D, 0.0);
    CHECK(sel.value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sel.chosen.size() == 10);
  }

  SUBCASE("forced inclusions stay in the design") {
    CandidatePool forced = node_pool(10);
    forced.must_include = {0};  // node 1
    const PlacementEvaluator ev(model, q0, forced);
    const SelectionResult sel = exhaustive_select(ev, 2, Criterion::D, 0.0);
    CHECK(sel.chosen == std::vector<int>{0, 9});
    CHECK(sel.value == doctest::Approx(std::log(9.0)));
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(exhaustive_select(eval, 0, Criterion::D, 0.0), InvalidParameter);
    CHECK_THROWS_AS(exhaustive_select(eval, 11, Criterion::D, 0.0), InvalidParameter);
  }

  SUBCASE("uniformly singular designs are reported") {
    // With eps = 0 and two rows, the 10x10 information matrix never has full
    // rank, so the A-criterion fails for every subset.
    CHECK_THROWS_AS(exhaustive_select(eval, 2, Criterion::A, 0.0), SingularFisher);
  }
}

TEST_CASE("enumeration bails out before it becomes astronomical") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  CandidatePool wide;
  for (int k = 0; k < 40; ++k) {
    wide.candidates.push_back(SensorSpec::displacement(0.2 + k * 0.24));
  }
  const PlacementEvaluator eval(model, q0, wide);
  CHECK_THROWS_AS(exhaustive_select(eval, 20, Criterion::D, 0.0),
                  CombinatorialBlowup);
}

TEST_CASE("greedy selection on the bar") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  const CandidatePool pool = node_pool(10);
  const PlacementEvaluator eval(model, q0, pool);

  const GreedyResult g = greedy_select(eval, 3, Criterion::D, 0.0);
  CHECK(g.chain == std::vector<int>{9, 4, 1});
  REQUIRE(g.values.size() == 3);
  CHECK(g.values[0] == doctest::Approx(std::log(10.0)));
  CHECK(g.values[1] == doctest::Approx(std::log(25.0)));
  CHECK(g.values[2] == doctest::Approx(std::log(30.0)));
  CHECK(g.value == doctest::Approx(std::log(30.0)));

  // Strictly below the exhaustive optimum here.
  const SelectionResult best = exhaustive_select(eval, 3, Criterion::D, 0.0);
  CHECK(g.value < best.value - 0.1);

  // Prefixes are nested by construction; check against smaller runs.
  const GreedyResult g1 = greedy_select(eval, 1, Criterion::D, 0.0);
  const GreedyResult g2 = greedy_select(eval, 2, Criterion::D, 0.0);
  CHECK(g1.chain[0] == g.chain[0]);
  CHECK(g2.chain[0] == g.chain[0]);
  CHECK(g2.chain[1] == g.chain[1]);
  CHECK(g1.chain == std::vector<int>{9});
  CHECK(g1.value == doctest::Approx(std::log(10.0)));
}

TEST_CASE("greedy never beats exhaustive") {
  const StructuralModel model = tip_bar(8);
  const ParameterVector q0(Eigen::VectorXd::Ones(8));
  const CandidatePool pool = node_pool(8);
  const PlacementEvaluator eval(model, q0, pool);
  for (int m = 1; m <= 8; ++m) {
    const GreedyResult g = greedy_select(eval, m, Criterion::D, 0.0);
    const SelectionResult e = exhaustive_select(eval, m, Criterion::D, 0.0);
    CHECK(g.value <= e.value + 1e-9);
  }
}

TEST_CASE("scenario-weighted goodness matches the averaged information matrix") {
  const StructuralModel model = tip_bar(6);
  const ParameterVector healthy(Eigen::VectorXd::Ones(6));
  Eigen::VectorXd damaged_alpha = Eigen::VectorXd::Ones(6);
  damaged_alpha[3] = 0.6;
  const ParameterVector damaged(damaged_alpha);

  const std::vector<std::pair<ParameterVector, double>> scenarios = {
      {healthy, 0.3}, {damaged, 0.7}};
  const CandidatePool pool = node_pool(6);
  const PlacementEvaluator eval(model, scenarios, pool);

  std::vector<int> all = {0, 1, 2, 3, 4, 5};
  const double eps = 1e-8;
  const double via_subsets = eval.goodness(all, Criterion::D, eps);

  std::vector<SensorSpec> specs = pool.candidates;
  const SensorConfig S = SensorConfig::broadcast(std::move(specs), 1);
  const NoiseModel R = NoiseModel::from_config(S);
  const FisherMatrix F = robust_fisher(model, scenarios, S, R, eps);
  CHECK(via_subsets == doctest::Approx(-criterion_value(F, Criterion::D))
                           .epsilon(1e-10));
}

TEST_CASE("descent drives a single sensor to the free end") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  const RefineResult r = continuous_descent(
      model, q0, {SensorSpec::displacement(2.3)}, {0}, 0.0, 200);

  REQUIRE(!r.trajectory.empty());
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    CHECK(r.trajectory[i].phi <= r.trajectory[i - 1].phi + 1e-12);
  }
  CHECK(r.sensors[0].x > 9.9);
  CHECK(r.termination == "no_descent");
}

TEST_CASE("descent with two sensors finds the nearby corners") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));

  SUBCASE("a start left of the watershed drains to the lower corner") {
    const RefineResult r = continuous_descent(
        model, q0,
        {SensorSpec::displacement(4.4), SensorSpec::displacement(9.6)}, {0, 1},
        0.0, 300);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
      CHECK(r.trajectory[i].phi <= r.trajectory[i - 1].phi + 1e-12);
    }
    CHECK(r.termination == "no_descent");
    CHECK(std::abs(r.sensors[0].x - 4.0) < 1e-3);
    CHECK(r.sensors[1].x > 10.0 - 1e-3);
    const double det = std::exp(-r.trajectory.back().phi);
    CHECK(det == doctest::Approx(24.0).epsilon(1e-3));
  }

  SUBCASE("a start right of the watershed reaches the midpoint design") {
    const RefineResult r = continuous_descent(
        model, q0,
        {SensorSpec::displacement(4.6), SensorSpec::displacement(9.4)}, {0, 1},
        0.0, 300);
    for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
      CHECK(r.trajectory[i].phi <= r.trajectory[i - 1].phi + 1e-12);
    }
    CHECK(std::abs(r.sensors[0].x - 5.0) < 1e-3);
    CHECK(r.sensors[1].x > 10.0 - 1e-3);
    const double det = std::exp(-r.trajectory.back().phi);
    CHECK(det > 24.99);
    CHECK(det < 25.0 + 1e-9);
  }
}

TEST_CASE("descent edge cases") {
  const StructuralModel model = tip_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));

  SUBCASE("nothing movable is already stationary") {
    const RefineResult r = continuous_descent(
        model, q0, {SensorSpec::displacement(2.5)}, {}, 0.0, 50);
    CHECK(r.termination == "stationary");
    CHECK(r.trajectory.size() == 1);
    CHECK(r.sensors[0].x == doctest::Approx(2.5));
  }

  SUBCASE("static sensors keep contributing while others move") {
    const RefineResult r = continuous_descent(
        model, q0,
        {SensorSpec::strain(2), SensorSpec::displacement(7.3)}, {1}, 0.0, 200);
    CHECK(r.sensors[0].kind == SensorKind::Strain);
    CHECK(r.sensors[1].x > 9.9);
  }

  SUBCASE("invalid movable lists") {
    const std::vector<SensorSpec> sensors = {SensorSpec::displacement(2.5),
                                             SensorSpec::strain(3)};
    CHECK_THROWS_AS(continuous_descent(model, q0, sensors, {2}, 0.0, 10),
                    IndexOutOfRange);
    CHECK_THROWS_AS(continuous_descent(model, q0, sensors, {1}, 0.0, 10),
                    NotDifferentiable);
    CHECK_THROWS_AS(continuous_descent(model, q0, sensors, {0, 0}, 0.0, 10),
                    InvalidParameter);
    CHECK_THROWS_AS(continuous_descent(model, q0, {}, {}, 0.0, 10), EmptyConfig);
    CHECK_THROWS_AS(continuous_descent(model, q0, sensors, {0}, 0.0, -1),
                    InvalidParameter);
  }

  SUBCASE("a start that cannot move at all is an error") {
    // Pinned against the upper clamp with the gradient pointing outward.
    const double pinned = 10.0 - 1e-6;
    CHECK_THROWS_AS(continuous_descent(model, q0,
                                       {SensorSpec::displacement(pinned)}, {0},
                                       0.0, 50),
                    NoDescent);
  }
}
