#include "sensopt/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>

#include "sensopt/problem_io.hpp"
#include "sensopt/results_io.hpp"
#include "sensopt/verify.hpp"

namespace sensopt {

namespace {

using nlohmann::ordered_json;

struct CliOptions {
  std::string problem;
  std::string out;
  std::string mode = "score";
  int m = -1;               // < 0: take design.m from the problem file
  std::string criterion;    // empty: take design.criterion
  double eps = -1.0;        // < 0: take design.eps
  std::uint64_t seed = 0;
  double fd_step = 1e-5;
  int max_steps = 200;
  bool timing = false;
  double inject_c_error = 0.0;
};

std::string out_base(const std::string& out) {
  if (out.ends_with(".json")) return out.substr(0, out.size() - 5);
  return out;
}

ordered_json sensor_json(const SensorSpec& s) {
  ordered_json j;
  j["kind"] = to_string(s.kind);
  if (s.kind == SensorKind::Displacement) {
    j["x"] = s.x;
  } else {
    j["element"] = s.element;
  }
  j["weight"] = s.weight;
  j["sigma"] = s.noise_sigma;
  return j;
}

std::string location_string(const SensorSpec& s) {
  return s.kind == SensorKind::Displacement ? format_double(s.x)
                                            : std::to_string(s.element);
}

// Resolved design settings: problem-file values overridden by flags.
struct DesignSettings {
  Criterion criterion;
  double eps;
  int m;
};

DesignSettings resolve_design(const ProblemFile& p, const CliOptions& opt) {
  DesignSettings s;
  s.criterion = opt.criterion.empty() ? p.criterion : criterion_from_string(opt.criterion);
  s.eps = opt.eps >= 0.0 ? opt.eps : p.eps;
  s.m = opt.m >= 0 ? opt.m : p.m;
  return s;
}

// Fixed sensors join the pool as must-include entries; a fixed sensor that
// coincides with a candidate reuses that slot instead of duplicating it.
CandidatePool merged_pool(const ProblemFile& p) {
  CandidatePool pool;
  pool.candidates = p.candidates;
  for (const auto& f : p.fixed_sensors) {
    int slot = -1;
    for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
      const auto& c = pool.candidates[i];
      if (c.kind != f.kind) continue;
      const bool same = c.kind == SensorKind::Displacement ? c.x == f.x
                                                           : c.element == f.element;
      if (same) {
        slot = static_cast<int>(i);
        break;
      }
    }
    if (slot < 0) {
      pool.candidates.push_back(f);
      slot = static_cast<int>(pool.candidates.size()) - 1;
    }
    pool.must_include.push_back(slot);
  }
  return pool;
}

// Reporting-only criterion value of a realized subset. Follows the branch
// rule for D; on a singular Cholesky with eps = 0 retries once with the
// documented trace-scaled regularization and warns, recording the value used.
ordered_json report_criterion(const PlacementEvaluator& eval,
                              const std::vector<int>& subset,
                              const DesignSettings& set) {
  ordered_json j;
  j["criterion"] = to_string(set.criterion);
  double eps_used = set.eps;
  double value;
  try {
    value = eval.goodness(subset, set.criterion, set.eps);
  } catch (const SingularFisher&) {
    if (set.eps > 0.0) throw;
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(eval.parameter_count(), eval.parameter_count());
    for (int c : subset) {
      const Eigen::MatrixXd& rows = eval.rows(c);
      const Eigen::VectorXd& sig = eval.sigmas(c);
      for (int r = 0; r < rows.rows(); ++r) {
        F.noalias() += rows.row(r).transpose() * rows.row(r) / (sig[r] * sig[r]);
      }
    }
    eps_used = 1e-10 * F.trace() / eval.parameter_count();
    std::cerr << "warning: information matrix singular at eps = 0; retrying "
                 "with eps = "
              << format_double(eps_used) << "\n";
    value = eval.goodness(subset, set.criterion, eps_used);
  }
  j["value"] = value;
  j["eps"] = eps_used;
  if (set.criterion == Criterion::D) j["determinant"] = std::exp(value);
  return j;
}

int cmd_solve(const CliOptions& opt) {
  const ProblemFile p = load_problem_file(opt.problem);
  const StructuralModel model = p.build_model();
  const ParameterVector q0 = p.build_parameters();
  const StiffnessMatrix K = model.assemble_stiffness(q0);
  const Eigen::VectorXd f_dT = model.thermal_force(q0);

  ordered_json result;
  result["command"] = "solve";
  result["problem_hash"] = p.content_hash;
  result["load_cases"] = ordered_json::array();

  std::vector<std::vector<std::string>> u_rows, eps_rows;
  const auto& coords = model.mesh().node_coords();
  u_rows.resize(coords.size());
  for (std::size_t j = 0; j < coords.size(); ++j) {
    u_rows[j] = {std::to_string(j), format_double(coords[j])};
  }
  eps_rows.resize(model.mesh().element_count());
  for (int e = 0; e < model.mesh().element_count(); ++e) {
    eps_rows[e] = {std::to_string(e + 1)};
  }
  std::vector<std::string> u_header = {"node", "x"};
  std::vector<std::string> eps_header = {"element"};

  for (int i = 0; i < model.load_case_count(); ++i) {
    const LoadCase& lc = model.load_case(i);
    const Eigen::VectorXd u = solve_state(K, model.mesh(), lc, f_dT);
    const Eigen::VectorXd strain = model.element_strain(u);

    ordered_json entry;
    entry["id"] = lc.id;
    entry["u"] = ordered_json::array();
    for (int j = 0; j < u.size(); ++j) entry["u"].push_back(u[j]);
    entry["strain"] = ordered_json::array();
    for (int e = 0; e < strain.size(); ++e) entry["strain"].push_back(strain[e]);
    result["load_cases"].push_back(std::move(entry));

    const std::string col = "case_" + std::to_string(lc.id);
    u_header.push_back(col);
    eps_header.push_back(col);
    for (int j = 0; j < u.size(); ++j) u_rows[j].push_back(format_double(u[j]));
    for (int e = 0; e < strain.size(); ++e) {
      eps_rows[e].push_back(format_double(strain[e]));
    }
  }

  write_text_file(opt.out, dump_json(result));
  write_text_file(out_base(opt.out) + "_u.csv", dump_csv(u_header, u_rows));
  write_text_file(out_base(opt.out) + "_strain.csv", dump_csv(eps_header, eps_rows));
  return exit_code::ok;
}

ordered_json mode_score(const ProblemFile& p, const StructuralModel& model) {
  if (p.candidates.empty()) throw EmptyPool("no sensor candidates to score");
  CandidatePool pool;
  pool.candidates = p.candidates;
  const PlacementEvaluator eval(model, p.build_scenarios(), pool);

  std::vector<Eigen::MatrixXd> rows;
  for (int c = 0; c < eval.candidate_count(); ++c) rows.push_back(eval.rows(c));
  const SingleSensorRanking ranking = single_sensor_avg_fisher(rows);
  const double f_min =
      p.detectability ? detectability_threshold(*p.detectability) : 0.0;

  ordered_json j;
  j["f_min"] = f_min;
  j["candidates"] = ordered_json::array();
  std::vector<std::vector<std::string>> csv_rows;
  for (int c = 0; c < eval.candidate_count(); ++c) {
    Eigen::VectorXd fisher_row = Eigen::VectorXd::Zero(eval.parameter_count());
    const Eigen::MatrixXd& rc = eval.rows(c);
    const Eigen::VectorXd& sig = eval.sigmas(c);
    for (int r = 0; r < rc.rows(); ++r) {
      fisher_row += rc.row(r).transpose().cwiseAbs2() / (sig[r] * sig[r]);
    }
    const SensorSpec& spec = pool.candidates[c];
    ordered_json entry = sensor_json(spec);
    ordered_json row;
    row["index"] = c;
    for (auto it = entry.begin(); it != entry.end(); ++it) row[it.key()] = it.value();
    row["score"] = ranking.scores[c];
    row["truncated_score"] = truncated_score(fisher_row, f_min);
    row["count_score"] = count_score(fisher_row, f_min);
    j["candidates"].push_back(std::move(row));
    csv_rows.push_back({std::to_string(c), to_string(spec.kind), location_string(spec),
                        format_double(ranking.scores[c]),
                        format_double(truncated_score(fisher_row, f_min)),
                        std::to_string(count_score(fisher_row, f_min))});
  }
  j["best"] = ranking.best;
  j["tied_best"] = ranking.tied_best;
  j["csv"] = dump_csv({"index", "kind", "location", "score", "truncated", "count"},
                      csv_rows);
  return j;
}

ordered_json mode_place(const ProblemFile& p, const StructuralModel& model,
                        const DesignSettings& set, bool greedy) {
  const CandidatePool pool = merged_pool(p);
  if (set.m < 1) throw InvalidParameter("design budget m must be at least 1");
  const PlacementEvaluator eval(model, p.build_scenarios(), pool);

  ordered_json j;
  j["m"] = set.m;
  if (!greedy) {
    const SelectionResult sel = exhaustive_select(eval, set.m, set.criterion, set.eps);
    j["chosen"] = sel.chosen;
    j["chosen_sensors"] = ordered_json::array();
    for (int c : sel.chosen) j["chosen_sensors"].push_back(sensor_json(pool.candidates[c]));
    ordered_json rep = report_criterion(eval, sel.chosen, set);
    for (auto it = rep.begin(); it != rep.end(); ++it) j[it.key()] = it.value();
    j["co_optimal"] = sel.co_optimal;
    return j;
  }

  const GreedyResult greedy_result = greedy_select(eval, set.m, set.criterion, set.eps);
  j["chain"] = greedy_result.chain;
  j["chain_values"] = greedy_result.values;
  std::vector<int> chosen(pool.must_include);
  chosen.insert(chosen.end(), greedy_result.chain.begin(), greedy_result.chain.end());
  std::sort(chosen.begin(), chosen.end());
  j["chosen"] = chosen;
  j["chosen_sensors"] = ordered_json::array();
  for (int c : chosen) j["chosen_sensors"].push_back(sensor_json(pool.candidates[c]));
  ordered_json rep = report_criterion(eval, chosen, set);
  for (auto it = rep.begin(); it != rep.end(); ++it) j[it.key()] = it.value();

  // Exhaustive reference when the enumeration fits the budget: report the
  // optimality gap and flag strict suboptimality.
  try {
    const SelectionResult ref = exhaustive_select(eval, set.m, set.criterion, set.eps);
    j["exhaustive_value"] = ref.value;
    if (set.criterion == Criterion::D) {
      j["exhaustive_determinant"] = std::exp(ref.value);
    }
    const double gap = ref.value - greedy_result.value;
    j["suboptimality_gap"] = gap;
    j["suboptimal"] = gap > 1e-9 * std::max(1.0, std::abs(ref.value));
  } catch (const CombinatorialBlowup&) {
    j["exhaustive_value"] = nullptr;
    j["suboptimality_gap"] = nullptr;
    j["suboptimal"] = nullptr;
  }
  return j;
}

ordered_json mode_refine(const ProblemFile& p, const StructuralModel& model,
                         const DesignSettings& set, const CliOptions& opt,
                         std::string* trajectory_csv) {
  if (!p.scenarios.empty()) {
    throw InvalidParameter(
        "refinement works at a single parameter point; drop design.scenarios");
  }
  std::vector<SensorSpec> sensors = p.fixed_sensors;
  std::vector<int> movable;
  for (const auto& c : p.candidates) {
    movable.push_back(static_cast<int>(sensors.size()));
    sensors.push_back(c);
  }
  const RefineResult res =
      continuous_descent(model, p.build_parameters(), sensors, movable,
                         std::max(set.eps, 0.0), opt.max_steps, StepRule{});

  ordered_json j;
  j["termination"] = res.termination;
  j["steps"] = res.trajectory.size() - 1;
  j["initial_phi"] = res.trajectory.front().phi;
  j["final_phi"] = res.trajectory.back().phi;
  j["sensors"] = ordered_json::array();
  for (const auto& s : res.sensors) j["sensors"].push_back(sensor_json(s));
  j["trajectory"] = ordered_json::array();
  std::vector<std::string> header = {"step", "phi"};
  for (std::size_t i = 0; i < movable.size(); ++i) {
    header.push_back("x" + std::to_string(i));
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t s = 0; s < res.trajectory.size(); ++s) {
    const DescentStep& st = res.trajectory[s];
    ordered_json entry;
    entry["positions"] = st.positions;
    entry["phi"] = st.phi;
    j["trajectory"].push_back(std::move(entry));
    std::vector<std::string> row = {std::to_string(s), format_double(st.phi)};
    for (double x : st.positions) row.push_back(format_double(x));
    rows.push_back(std::move(row));
  }
  *trajectory_csv = dump_csv(header, rows);
  return j;
}

ordered_json mode_gradcheck(const ProblemFile& p, const StructuralModel& model,
                            const DesignSettings& set, const CliOptions& opt) {
  if (!p.scenarios.empty()) {
    throw InvalidParameter(
        "gradient checks work at a single parameter point; drop design.scenarios");
  }
  std::vector<SensorSpec> sensors = p.fixed_sensors;
  std::vector<int> movable;
  for (const auto& c : p.candidates) {
    if (c.kind != SensorKind::Displacement) {
      throw NotDifferentiable("gradient checks move displacement sensors only");
    }
    movable.push_back(static_cast<int>(sensors.size()));
    sensors.push_back(c);
  }
  if (movable.empty()) throw EmptyPool("no candidate sensors to differentiate");

  const ParameterVector q0 = p.build_parameters();
  const int n_cases = model.load_case_count();
  const double eps = std::max(set.eps, 0.0);
  const NoiseModel R = NoiseModel::from_config(SensorConfig::broadcast(sensors, n_cases));

  auto phi_at = [&](const std::vector<SensorSpec>& specs) {
    JacobianBundle bundle(model, q0, SensorConfig::broadcast(specs, n_cases), true);
    return phi_d_value(bundle, R, eps);
  };

  JacobianBundle bundle(model, q0, SensorConfig::broadcast(sensors, n_cases), true);
  const AdjointWeight B = phi_d_adjoint_weight(bundle, R, eps);
  std::vector<SensorParamId> thetas;
  for (int idx : movable) thetas.push_back({SensorParamId::kShared, idx});
  const std::vector<double> analytic = grad_phiD(bundle, thetas, B);

  ordered_json j;
  j["fd_step"] = opt.fd_step;
  j["rows"] = ordered_json::array();
  double max_rel = 0.0;
  const double h = opt.fd_step;
  for (std::size_t i = 0; i < movable.size(); ++i) {
    std::vector<SensorSpec> plus = sensors, minus = sensors;
    plus[movable[i]].x += h;
    minus[movable[i]].x -= h;
    const double fd = (phi_at(plus) - phi_at(minus)) / (2.0 * h);
    const double rel =
        std::abs(analytic[i] - fd) / std::max({std::abs(fd), std::abs(analytic[i]), 1e-12});
    max_rel = std::max(max_rel, rel);
    ordered_json row;
    row["sensor"] = movable[i];
    row["x"] = sensors[movable[i]].x;
    row["analytic"] = analytic[i];
    row["fd"] = fd;
    row["rel_error"] = rel;
    j["rows"].push_back(std::move(row));
  }
  j["max_rel_error"] = max_rel;
  return j;
}

int cmd_design(const CliOptions& opt) {
  const ProblemFile p = load_problem_file(opt.problem);
  const StructuralModel model = p.build_model();
  const DesignSettings set = resolve_design(p, opt);

  const auto t0 = std::chrono::steady_clock::now();
  ordered_json result;
  result["command"] = "design";
  result["mode"] = opt.mode;
  result["problem_hash"] = p.content_hash;
  result["criterion"] = to_string(set.criterion);
  result["eps"] = set.eps;
  result["seed"] = opt.seed;

  std::string extra_csv;
  std::string extra_csv_name;
  ordered_json payload;
  if (opt.mode == "score") {
    payload = mode_score(p, model);
    extra_csv = payload["csv"].get<std::string>();
    payload.erase("csv");
    extra_csv_name = "_scores.csv";
  } else if (opt.mode == "place-exhaustive") {
    payload = mode_place(p, model, set, false);
  } else if (opt.mode == "place-greedy") {
    payload = mode_place(p, model, set, true);
  } else if (opt.mode == "refine") {
    payload = mode_refine(p, model, set, opt, &extra_csv);
    extra_csv_name = "_trajectory.csv";
  } else if (opt.mode == "gradcheck") {
    payload = mode_gradcheck(p, model, set, opt);
  } else {
    throw InvalidParameter("unknown design mode: " + opt.mode);
  }
  for (auto it = payload.begin(); it != payload.end(); ++it) {
    result[it.key()] = it.value();
  }

  if (opt.timing) {
    const auto t1 = std::chrono::steady_clock::now();
    result["timing_ms"] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  write_text_file(opt.out, dump_json(result));
  if (!extra_csv_name.empty()) {
    write_text_file(out_base(opt.out) + extra_csv_name, extra_csv);
  }
  return exit_code::ok;
}

int cmd_verify(const CliOptions& opt) {
  VerifyOptions vo;
  vo.seed = opt.seed;
  vo.inject_c_error = opt.inject_c_error;
  const std::vector<VerifyCheck> checks = run_verification(vo);

  bool all_ok = true;
  for (const auto& c : checks) {
    all_ok = all_ok && c.passed;
    std::cout << (c.passed ? "PASS" : "FAIL") << "  " << c.name << "  ("
              << c.detail << ")\n";
  }
  std::cout << (all_ok ? "all checks passed" : "some checks FAILED") << "\n";

  if (!opt.out.empty()) {
    ordered_json result;
    result["command"] = "verify";
    result["seed"] = opt.seed;
    result["passed"] = all_ok;
    result["checks"] = ordered_json::array();
    for (const auto& c : checks) {
      ordered_json entry;
      entry["name"] = c.name;
      entry["passed"] = c.passed;
      entry["detail"] = c.detail;
      result["checks"].push_back(std::move(entry));
    }
    write_text_file(opt.out, dump_json(result));
  }
  return all_ok ? exit_code::ok : exit_code::verification_failed;
}

int dispatch(const CLI::App& app, const CliOptions& opt) {
  if (app.got_subcommand("solve")) return cmd_solve(opt);
  if (app.got_subcommand("design")) return cmd_design(opt);
  return cmd_verify(opt);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CliOptions opt;
  CLI::App app{"Fisher-information sensor placement for bar structures"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "solve each load case, write u and strains");
  CLI::App* design = app.add_subcommand("design", "score, select or refine sensor layouts");
  CLI::App* verify = app.add_subcommand("verify", "run the analytic cross-check suite");

  for (CLI::App* sub : {solve, design}) {
    sub->add_option("--problem", opt.problem, "problem JSON file")->required();
    sub->add_option("--out", opt.out, "result JSON path")->required();
  }
  design->add_option("--mode", opt.mode, "score|place-exhaustive|place-greedy|refine|gradcheck")
      ->check(CLI::IsMember(
          {"score", "place-exhaustive", "place-greedy", "refine", "gradcheck"}));
  design->add_option("--m", opt.m, "sensor budget (overrides design.m)");
  design->add_option("--criterion", opt.criterion, "D|A|E (overrides design.criterion)")
      ->check(CLI::IsMember({"D", "A", "E"}));
  design->add_option("--eps", opt.eps, "regularization (overrides design.eps)");
  design->add_option("--fd-step", opt.fd_step, "finite-difference step for gradcheck");
  design->add_option("--max-steps", opt.max_steps, "descent step budget for refine");
  design->add_flag("--timing", opt.timing, "include wall-clock timing in the result");
  verify->add_option("--out", opt.out, "optional JSON report path");
  verify->add_option("--inject-c-error", opt.inject_c_error,
                     "negative control: relative perturbation of the reference scale");
  for (CLI::App* sub : {design, verify}) {
    sub->add_option("--seed", opt.seed, "seed for randomized checks");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::schema;
  }

  try {
    return dispatch(app, opt);
  } catch (const CombinatorialBlowup& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::blowup;
  } catch (const SingularFisher& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::singular;
  } catch (const NonSPD& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::solver;
  } catch (const SolveFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::solver;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::solver;
  } catch (const NoDescent& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::solver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::schema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::schema;
  }
}

}  // namespace sensopt
