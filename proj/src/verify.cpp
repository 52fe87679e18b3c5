#include "sensopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sensopt/bar1d.hpp"
#include "sensopt/placement.hpp"
#include "sensopt/sensitivity.hpp"

namespace sensopt {

namespace {

StructuralModel make_bar(const BarSpec& bar) {
  Mesh1D mesh = Mesh1D::uniform(bar.n_elements, bar.element_length);
  StructuralModel model(std::move(mesh), bar.youngs_modulus, bar.area);
  LoadCase lc;
  lc.id = 0;
  lc.f = Eigen::VectorXd::Zero(bar.n_elements + 1);
  lc.f[bar.n_elements] = bar.tip_load;
  model.add_load_case(std::move(lc));
  return model;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// FE displacements and strains against the closed forms over random damage
// fields. Returns the worst absolute deviations.
void check_closed_forms(const VerifyOptions& opts, std::vector<VerifyCheck>& out) {
  const BarSpec bar;
  const StructuralModel model = make_bar(bar);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(0.05, 1.0);

  double worst_u = 0.0, worst_eps = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    Eigen::VectorXd alpha(bar.n_elements);
    for (int e = 0; e < bar.n_elements; ++e) alpha[e] = dist(rng);
    const ParameterVector q(alpha);
    const StiffnessMatrix K = model.assemble_stiffness(q);
    const Eigen::VectorXd u =
        solve_state(K, model.mesh(), model.load_case(0), Eigen::VectorXd());
    const Eigen::VectorXd u_ref = analytic_displacement(bar, alpha);
    worst_u = std::max(worst_u, (u - u_ref).cwiseAbs().maxCoeff());

    const Eigen::VectorXd eps = model.element_strain(u);
    for (int e = 0; e < bar.n_elements; ++e) {
      const double ref = bar.strain_scale() / alpha[e];
      worst_eps = std::max(worst_eps, std::abs(eps[e] - ref));
    }
  }
  out.push_back({"displacement closed form (100 draws)", worst_u <= 1e-10,
                 "max |u_fe - u_ref| = " + fmt(worst_u)});
  out.push_back({"strain closed form (100 draws)", worst_eps <= 1e-10,
                 "max |eps_fe - eps_ref| = " + fmt(worst_eps)});
}

// Jacobian rows of displacement and strain sensors against the analytic
// prefix/single-entry patterns. inject_c_error scales the reference rows to
// prove the check can fail.
void check_jacobian_rows(const VerifyOptions& opts, std::vector<VerifyCheck>& out) {
  const BarSpec bar;
  const StructuralModel model = make_bar(bar);
  std::mt19937_64 rng(opts.seed + 1);
  std::uniform_real_distribution<double> dist(0.05, 1.0);

  std::vector<SensorSpec> specs;
  for (int j = 1; j <= bar.n_elements; ++j) {
    specs.push_back(SensorSpec::displacement(j * bar.element_length));
  }
  for (int r = 1; r <= bar.n_elements; ++r) {
    specs.push_back(SensorSpec::strain(r));
  }
  const SensorConfig cfg = SensorConfig::broadcast(specs, 1);
  const double scale = 1.0 + opts.inject_c_error;

  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    Eigen::VectorXd alpha(bar.n_elements);
    for (int e = 0; e < bar.n_elements; ++e) alpha[e] = dist(rng);
    JacobianBundle bundle(model, ParameterVector(alpha), cfg, true);
    const Eigen::MatrixXd& J = bundle.block(0);
    for (int j = 1; j <= bar.n_elements; ++j) {
      const Eigen::RowVectorXd ref =
          scale * analytic_jacobian_row(bar, BarSensorKind::Displacement, j, alpha);
      worst = std::max(worst, (J.row(j - 1) - ref).cwiseAbs().maxCoeff());
    }
    for (int r = 1; r <= bar.n_elements; ++r) {
      const Eigen::RowVectorXd ref =
          scale * analytic_jacobian_row(bar, BarSensorKind::Strain, r, alpha);
      worst = std::max(worst,
                       (J.row(bar.n_elements + r - 1) - ref).cwiseAbs().maxCoeff());
    }
  }
  out.push_back({"jacobian rows vs closed form (20 draws)", worst <= 1e-10,
                 "max |J_fe - J_ref| = " + fmt(worst)});
}

// Gram determinants of every displacement-sensor subset against the exact
// integer increment product.
void check_min_matrix(std::vector<VerifyCheck>& out) {
  const BarSpec bar;
  const StructuralModel model = make_bar(bar);
  CandidatePool pool;
  for (int j = 1; j <= bar.n_elements; ++j) {
    pool.candidates.push_back(SensorSpec::displacement(j * bar.element_length));
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(bar.n_elements);
  const PlacementEvaluator eval(model, ParameterVector(alpha), pool);

  double worst = 0.0;
  int checked = 0;
  for (int mask = 1; mask < (1 << bar.n_elements); ++mask) {
    std::vector<int> subset, nodes;
    for (int j = 0; j < bar.n_elements; ++j) {
      if (mask & (1 << j)) {
        subset.push_back(j);
        nodes.push_back(j + 1);
      }
    }
    const double det_fe = eval.gram_determinant(subset);
    const double det_ref = static_cast<double>(min_matrix_det(nodes));
    worst = std::max(worst, std::abs(det_fe - det_ref) / std::max(1.0, det_ref));
    ++checked;
  }
  out.push_back({"gram determinants vs increment products (" +
                     std::to_string(checked) + " subsets)",
                 worst <= 1e-9, "max relative deviation = " + fmt(worst)});
}

// Balanced-increment optimal sets against brute-force enumeration.
void check_theorem(std::vector<VerifyCheck>& out) {
  bool ok = true;
  std::string detail = "N = 4..12, all m: sets match enumeration";
  for (int n = 4; n <= 12 && ok; ++n) {
    for (int m = 1; m <= n && ok; ++m) {
      std::vector<std::vector<int>> brute;
      std::int64_t best = -1;
      std::vector<int> pick(m);
      for (int i = 0; i < m; ++i) pick[i] = i + 1;
      while (true) {
        const std::int64_t det = min_matrix_det(pick);
        if (det > best) {
          best = det;
          brute.assign(1, pick);
        } else if (det == best) {
          brute.push_back(pick);
        }
        int i = m - 1;
        while (i >= 0 && pick[i] == n - m + i + 1) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < m; ++j) pick[j] = pick[j - 1] + 1;
      }
      std::sort(brute.begin(), brute.end());
      const auto sets = theorem_optimal_sets(m, n);
      if (sets != brute) {
        ok = false;
        detail = "mismatch at N=" + std::to_string(n) + ", m=" + std::to_string(m);
      }
    }
  }
  out.push_back({"balanced optimal sets vs enumeration", ok, detail});
}

// Single-sensor rules: displacement scores grow toward the free end, strain
// scores tie across all elements.
void check_single_sensor(std::vector<VerifyCheck>& out) {
  const BarSpec bar;
  const StructuralModel model = make_bar(bar);
  const ParameterVector q(Eigen::VectorXd::Ones(bar.n_elements));
  const SensorConfig disp = SensorConfig::broadcast(
      [&] {
        std::vector<SensorSpec> s;
        for (int j = 1; j <= bar.n_elements; ++j) {
          s.push_back(SensorSpec::displacement(j * bar.element_length));
        }
        return s;
      }(),
      1);
  JacobianBundle bundle(model, q, disp, true);
  std::vector<Eigen::MatrixXd> rows;
  for (int j = 0; j < bar.n_elements; ++j) rows.push_back(bundle.block(0).row(j));
  const auto disp_rank = single_sensor_avg_fisher(rows);

  const SensorConfig strain = SensorConfig::broadcast(
      [&] {
        std::vector<SensorSpec> s;
        for (int r = 1; r <= bar.n_elements; ++r) s.push_back(SensorSpec::strain(r));
        return s;
      }(),
      1);
  JacobianBundle bundle_s(model, q, strain, true);
  rows.clear();
  for (int r = 0; r < bar.n_elements; ++r) rows.push_back(bundle_s.block(0).row(r));
  const auto strain_rank = single_sensor_avg_fisher(rows);

  const bool disp_ok = disp_rank.best == bar.n_elements - 1 &&
                       disp_rank.tied_best.size() == 1;
  const bool strain_ok =
      strain_rank.best == 0 &&
      static_cast<int>(strain_rank.tied_best.size()) == bar.n_elements;
  out.push_back({"single-sensor rule, displacement picks the free end", disp_ok,
                 "best index " + std::to_string(disp_rank.best + 1)});
  out.push_back({"single-sensor rule, strain scores all tie", strain_ok,
                 std::to_string(strain_rank.tied_best.size()) + " tied candidates"});
}

}  // namespace

std::vector<VerifyCheck> run_verification(const VerifyOptions& opts) {
  std::vector<VerifyCheck> out;
  check_closed_forms(opts, out);
  check_jacobian_rows(opts, out);
  check_min_matrix(out);
  check_theorem(out);
  check_single_sensor(out);
  return out;
}

}  // namespace sensopt
