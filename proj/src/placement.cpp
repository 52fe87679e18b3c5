#include "sensopt/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace sensopt {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kMaxSubsets = 1e6;

bool close_to_best(double g, double best) {
  return std::abs(g - best) <= kTieTol * std::max(1.0, std::abs(best));
}

}  // namespace

double detectability_threshold(const DetectabilityConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw InvalidParameter("noise level must be positive");
  if (!(cfg.delta_alpha_min > 0.0)) {
    throw InvalidParameter("smallest detectable stiffness change must be positive");
  }
  if (cfg.delta_y < 0.0) throw InvalidParameter("reading threshold must be non-negative");
  const double ratio = cfg.delta_y / cfg.delta_alpha_min;
  return ratio * ratio / (cfg.sigma * cfg.sigma);
}

SingleSensorRanking single_sensor_avg_fisher(
    const std::vector<Eigen::MatrixXd>& rows_per_candidate) {
  if (rows_per_candidate.empty()) throw EmptyPool("no candidate rows");
  SingleSensorRanking out;
  out.scores.reserve(rows_per_candidate.size());
  for (const auto& rows : rows_per_candidate) {
    out.scores.push_back(rows.squaredNorm());
  }
  const double best = *std::max_element(out.scores.begin(), out.scores.end());
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    if (close_to_best(out.scores[i], best)) out.tied_best.push_back(static_cast<int>(i));
  }
  out.best = out.tied_best.front();
  return out;
}

double truncated_score(const Eigen::VectorXd& fisher_row, double f_min) {
  double acc = 0.0;
  for (int k = 0; k < fisher_row.size(); ++k) {
    acc += std::max(fisher_row[k] - f_min, 0.0);
  }
  return acc;
}

int count_score(const Eigen::VectorXd& fisher_row, double f_min) {
  int n = 0;
  for (int k = 0; k < fisher_row.size(); ++k) {
    // A vanishing contribution is never detectable, whatever the threshold.
    if (fisher_row[k] > 0.0 && fisher_row[k] >= f_min) ++n;
  }
  return n;
}

PlacementEvaluator::PlacementEvaluator(const StructuralModel& model,
                                       const ParameterVector& q0,
                                       const CandidatePool& pool)
    : pool_(&pool) {
  build(model, {{q0, 1.0}});
}

PlacementEvaluator::PlacementEvaluator(
    const StructuralModel& model,
    const std::vector<std::pair<ParameterVector, double>>& scenarios,
    const CandidatePool& pool)
    : pool_(&pool) {
  build(model, scenarios);
}

void PlacementEvaluator::build(
    const StructuralModel& model,
    const std::vector<std::pair<ParameterVector, double>>& scenarios) {
  const auto& cands = pool_->candidates;
  if (cands.empty()) throw EmptyPool("candidate pool is empty");
  if (scenarios.empty()) throw InvalidParameter("no parameter scenarios");
  for (std::size_t a = 0; a < cands.size(); ++a) {
    for (std::size_t b = a + 1; b < cands.size(); ++b) {
      if (cands[a].kind != cands[b].kind) continue;
      const bool same = cands[a].kind == SensorKind::Displacement
                            ? cands[a].x == cands[b].x
                            : cands[a].element == cands[b].element;
      if (same) {
        throw InvalidParameter("candidate pool entries must be distinct (" +
                               std::to_string(a) + " and " + std::to_string(b) + ")");
      }
    }
  }

  const int n_cases = model.load_case_count();
  const int n_rows_per_cand =
      n_cases * static_cast<int>(scenarios.size());
  rows_.assign(cands.size(), Eigen::MatrixXd());
  sigmas_.assign(cands.size(), Eigen::VectorXd());

  n_q_ = scenarios.front().first.size();
  const SensorConfig cfg = SensorConfig::broadcast(cands, n_cases);
  int block_row = 0;
  for (const auto& [q, w] : scenarios) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidParameter("scenario weights must be positive");
    }
    if (q.size() != n_q_) {
      throw InvalidParameter("scenarios disagree on the parameter layout");
    }
    JacobianBundle bundle(model, q, cfg, true);
    const double sqw = std::sqrt(w);
    for (int i = 0; i < n_cases; ++i) {
      const Eigen::MatrixXd& Ji = bundle.block(i);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        auto& rc = rows_[c];
        auto& sc = sigmas_[c];
        if (rc.rows() == 0) {
          rc.resize(n_rows_per_cand, n_q_);
          sc.resize(n_rows_per_cand);
        }
        rc.row(block_row) = sqw * Ji.row(static_cast<int>(c));
        sc[block_row] = cands[c].noise_sigma;
      }
      ++block_row;
    }
  }
}

namespace {

struct Stacked {
  Eigen::MatrixXd J;
  Eigen::VectorXd var;
};

Stacked stack_subset(const PlacementEvaluator& eval, const std::vector<int>& subset) {
  if (subset.empty()) throw InvalidParameter("subset is empty");
  std::set<int> seen;
  int total = 0;
  for (int c : subset) {
    if (c < 0 || c >= eval.candidate_count()) {
      throw IndexOutOfRange("candidate index " + std::to_string(c) + " out of range");
    }
    if (!seen.insert(c).second) throw InvalidParameter("duplicate candidate in subset");
    total += static_cast<int>(eval.rows(c).rows());
  }
  Stacked out;
  out.J.resize(total, eval.parameter_count());
  out.var.resize(total);
  int r = 0;
  for (int c : subset) {
    const auto& rows = eval.rows(c);
    out.J.middleRows(r, rows.rows()) = rows;
    out.var.segment(r, rows.rows()) = eval.sigmas(c).array().square();
    r += static_cast<int>(rows.rows());
  }
  return out;
}

}  // namespace

double PlacementEvaluator::goodness(const std::vector<int>& subset, Criterion c,
                                    double eps) const {
  const Stacked s = stack_subset(*this, subset);
  const NoiseModel R(s.var);
  if (c == Criterion::D && s.J.rows() < n_q_) {
    return -gram_criterion_value(s.J, R);
  }
  Eigen::MatrixXd Y = s.J;
  for (int p = 0; p < Y.rows(); ++p) Y.row(p) /= std::sqrt(s.var[p]);
  Eigen::MatrixXd Fm = Y.transpose() * Y;
  Fm = 0.5 * (Fm + Fm.transpose()).eval();
  Fm.diagonal().array() += eps;
  const FisherMatrix F(std::move(Fm), eps);
  switch (c) {
    case Criterion::D: return -criterion_value(F, Criterion::D);
    case Criterion::A: return -criterion_value(F, Criterion::A);
    case Criterion::E: return criterion_value(F, Criterion::E);
  }
  throw InvalidParameter("unknown criterion");
}

double PlacementEvaluator::gram_determinant(const std::vector<int>& subset) const {
  const Stacked s = stack_subset(*this, subset);
  const NoiseModel R(s.var);
  return gram_matrix(s.J, R).partialPivLu().determinant();
}

namespace {

void check_must_include(const CandidatePool& pool, int n) {
  std::set<int> seen;
  for (int c : pool.must_include) {
    if (c < 0 || c >= n) throw IndexOutOfRange("must-include index out of range");
    if (!seen.insert(c).second) throw InvalidParameter("duplicate must-include index");
  }
}

double count_combinations(int n, int k) {
  double combos = 1.0;
  for (int i = 1; i <= k; ++i) {
    combos *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (combos > 1e12) return combos;  // far past any guard, stop growing
  }
  return combos;
}

// Guarded per-subset evaluation: a singular design is ranked strictly worst.
double safe_goodness(const PlacementEvaluator& eval, const std::vector<int>& s,
                     Criterion c, double eps) {
  try {
    return eval.goodness(s, c, eps);
  } catch (const SingularFisher&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SelectionResult exhaustive_select(const PlacementEvaluator& eval, int m,
                                  Criterion c, double eps) {
  const auto& pool = eval.pool();
  const int n = eval.candidate_count();
  check_must_include(pool, n);
  const int n_must = static_cast<int>(pool.must_include.size());
  if (m < std::max(n_must, 1) || m > n) {
    throw InvalidParameter("budget m = " + std::to_string(m) +
                           " is infeasible for this pool");
  }

  std::vector<int> free_idx;
  const std::set<int> must(pool.must_include.begin(), pool.must_include.end());
  for (int i = 0; i < n; ++i) {
    if (!must.count(i)) free_idx.push_back(i);
  }
  const int k = m - n_must;
  const double combos = count_combinations(static_cast<int>(free_idx.size()), k);
  if (combos > kMaxSubsets) {
    throw CombinatorialBlowup(
        "exhaustive search over " + std::to_string(combos) +
        " subsets exceeds the 1e6 budget; use greedy selection or refinement");
  }

  // Walk all k-combinations of free_idx in lexicographic order, twice: first
  // for the best value, then to collect every tie.
  auto for_each_subset = [&](auto&& fn) {
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<int> subset(pool.must_include);
      for (int i = 0; i < k; ++i) subset.push_back(free_idx[pick[i]]);
      std::sort(subset.begin(), subset.end());
      fn(subset);
      if (k == 0) break;
      int i = k - 1;
      while (i >= 0 && pick[i] == static_cast<int>(free_idx.size()) - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  };

  double best = -std::numeric_limits<double>::infinity();
  for_each_subset([&](const std::vector<int>& s) {
    best = std::max(best, safe_goodness(eval, s, c, eps));
  });
  if (std::isinf(best)) {
    throw SingularFisher("every admissible design has a singular information "
                         "matrix");
  }

  SelectionResult result;
  result.value = best;
  for_each_subset([&](const std::vector<int>& s) {
    if (close_to_best(safe_goodness(eval, s, c, eps), best)) {
      result.co_optimal.push_back(s);
    }
  });
  std::sort(result.co_optimal.begin(), result.co_optimal.end());
  result.chosen = result.co_optimal.front();
  return result;
}

GreedyResult greedy_select(const PlacementEvaluator& eval, int m, Criterion c,
                           double eps) {
  const auto& pool = eval.pool();
  const int n = eval.candidate_count();
  check_must_include(pool, n);
  if (m < 1 || m > n || m < static_cast<int>(pool.must_include.size())) {
    throw InvalidParameter("budget m = " + std::to_string(m) +
                           " is infeasible for this pool");
  }

  GreedyResult out;
  std::vector<int> current(pool.must_include);
  std::set<int> in_set(current.begin(), current.end());
  while (static_cast<int>(current.size()) < m) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> g(n, -std::numeric_limits<double>::infinity());
    for (int cand = 0; cand < n; ++cand) {
      if (in_set.count(cand)) continue;
      std::vector<int> trial = current;
      trial.push_back(cand);
      g[cand] = safe_goodness(eval, trial, c, eps);
      best = std::max(best, g[cand]);
    }
    if (std::isinf(best)) {
      throw SingularFisher("every extension of the current design is singular");
    }
    int chosen = -1;
    for (int cand = 0; cand < n; ++cand) {
      if (!in_set.count(cand) && close_to_best(g[cand], best)) {
        chosen = cand;
        break;
      }
    }
    current.push_back(chosen);
    in_set.insert(chosen);
    out.chain.push_back(chosen);
    out.values.push_back(g[chosen]);
  }
  out.value = out.values.empty() ? eval.goodness(current, c, eps) : out.values.back();
  return out;
}

namespace {

class Projector {
 public:
  Projector(const Mesh1D& mesh, double node_gap, double separation)
      : mesh_(&mesh), gap_(node_gap), sep_(separation) {}

  std::vector<double> operator()(std::vector<double> x) const {
    for (double& xi : x) xi = push_off_nodes(clamp(xi));
    enforce_separation(x);
    for (double& xi : x) xi = push_off_nodes(clamp(xi));
    return x;
  }

 private:
  double clamp(double x) const {
    const double lo = mesh_->node_coords().front() + gap_;
    const double hi = mesh_->node_coords().back() - gap_;
    return std::min(std::max(x, lo), hi);
  }

  double push_off_nodes(double x) const {
    for (double node : mesh_->node_coords()) {
      if (std::abs(x - node) < gap_) {
        x = x >= node ? node + gap_ : node - gap_;
      }
    }
    return x;
  }

  void enforce_separation(std::vector<double>& x) const {
    const int n = static_cast<int>(x.size());
    if (n < 2) return;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return x[a] < x[b]; });
    for (int i = 1; i < n; ++i) {
      double& cur = x[order[i]];
      const double prev = x[order[i - 1]];
      if (cur < prev + sep_) cur = prev + sep_;
    }
    const double hi = mesh_->node_coords().back() - gap_;
    for (int i = n - 1; i >= 0; --i) {
      double& cur = x[order[i]];
      const double next = i + 1 < n ? x[order[i + 1]] - sep_ : hi;
      if (cur > next) cur = next;
    }
  }

  const Mesh1D* mesh_;
  double gap_;
  double sep_;
};

}  // namespace

RefineResult continuous_descent(const StructuralModel& model,
                                const ParameterVector& q0,
                                std::vector<SensorSpec> sensors,
                                const std::vector<int>& movable, double eps,
                                int max_steps, const StepRule& rule) {
  if (sensors.empty()) throw EmptyConfig("no sensors to refine");
  std::set<int> seen;
  for (int idx : movable) {
    if (idx < 0 || idx >= static_cast<int>(sensors.size())) {
      throw IndexOutOfRange("movable sensor index out of range");
    }
    if (!seen.insert(idx).second) throw InvalidParameter("duplicate movable index");
    if (sensors[idx].kind != SensorKind::Displacement) {
      throw NotDifferentiable("only displacement sensors can be repositioned");
    }
  }
  if (max_steps < 0) throw InvalidParameter("step budget must be non-negative");

  const Mesh1D& mesh = model.mesh();
  const double lmin = mesh.min_element_length();
  const Projector project(mesh, 1e-6 * lmin, 1e-3 * lmin);
  const int n_cases = model.load_case_count();

  auto config_at = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < movable.size(); ++i) sensors[movable[i]].x = x[i];
    return SensorConfig::broadcast(sensors, n_cases);
  };
  const NoiseModel R = NoiseModel::from_config(
      SensorConfig::broadcast(sensors, std::max(n_cases, 1)));

  auto phi_at = [&](const std::vector<double>& x) {
    JacobianBundle bundle(model, q0, config_at(x), true);
    return phi_d_value(bundle, R, eps);
  };

  std::vector<SensorParamId> thetas;
  for (int idx : movable) thetas.push_back({SensorParamId::kShared, idx});

  RefineResult out;
  std::vector<double> x;
  for (int idx : movable) x.push_back(sensors[idx].x);
  x = project(std::move(x));
  double phi = phi_at(x);
  out.trajectory.push_back({x, phi});
  out.termination = "max_steps";

  if (movable.empty()) {
    out.termination = "stationary";
    out.sensors = sensors;
    return out;
  }

  for (int step = 0; step < max_steps; ++step) {
    JacobianBundle bundle(model, q0, config_at(x), true);
    const AdjointWeight B = phi_d_adjoint_weight(bundle, R, eps);
    const std::vector<double> g = grad_phiD(bundle, thetas, B);

    double g_norm2 = 0.0, g_inf = 0.0;
    for (double gi : g) {
      g_norm2 += gi * gi;
      g_inf = std::max(g_inf, std::abs(gi));
    }
    if (std::sqrt(g_norm2) <= rule.grad_tol) {
      out.termination = "gradient";
      break;
    }

    double t = rule.init_step_rel * lmin / g_inf;
    bool accepted = false;
    for (int bt = 0; bt <= rule.max_backtracks; ++bt, t *= rule.shrink) {
      std::vector<double> x_try(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) x_try[i] = x[i] - t * g[i];
      x_try = project(std::move(x_try));
      if (x_try == x) continue;
      double decrease = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) decrease += g[i] * (x[i] - x_try[i]);
      double phi_try;
      try {
        phi_try = phi_at(x_try);
      } catch (const SingularFisher&) {
        continue;  // coincident trial configuration; shrink and retry
      }
      if (phi_try <= phi - rule.c1 * std::max(decrease, 0.0)) {
        x = std::move(x_try);
        phi = phi_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (out.trajectory.size() == 1) {
        throw NoDescent("backtracking found no acceptable step from the "
                        "initial configuration");
      }
      out.termination = "no_descent";
      break;
    }
    out.trajectory.push_back({x, phi});
  }

  config_at(x);  // write final positions back into the sensor list
  out.sensors = sensors;
  return out;
}

}  // namespace sensopt
