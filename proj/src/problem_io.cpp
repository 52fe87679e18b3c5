#include "sensopt/problem_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace sensopt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw SchemaError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

const json& expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  return v;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_number_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SensorSpec parse_sensor(const json& v, const std::string& path,
                        double default_sigma, const std::vector<double>& coords) {
  expect_object(v, path);
  check_keys(v, path, {"kind", "x", "element", "weight", "sigma"});
  if (!v.contains("kind")) fail(path + ".kind", "missing");
  const std::string kind = get_string(v["kind"], path + ".kind");

  SensorSpec s;
  const int n_e = static_cast<int>(coords.size()) - 1;
  if (kind == "displacement") {
    s.kind = SensorKind::Displacement;
    if (!v.contains("x")) fail(path + ".x", "missing (displacement sensors need a position)");
    if (v.contains("element")) fail(path + ".element", "not allowed for displacement sensors");
    s.x = get_number(v["x"], path + ".x");
    if (s.x < coords.front() || s.x > coords.back()) {
      fail(path + ".x", "position outside the mesh domain");
    }
  } else if (kind == "strain") {
    s.kind = SensorKind::Strain;
    if (!v.contains("element")) fail(path + ".element", "missing (strain sensors need an element)");
    if (v.contains("x")) fail(path + ".x", "not allowed for strain sensors");
    s.element = get_int(v["element"], path + ".element");
    if (s.element < 1 || s.element > n_e) {
      fail(path + ".element", "element index out of range [1, " + std::to_string(n_e) + "]");
    }
  } else {
    fail(path + ".kind", "must be \"displacement\" or \"strain\"");
  }

  s.weight = v.contains("weight") ? get_number(v["weight"], path + ".weight") : 1.0;
  s.noise_sigma = v.contains("sigma") ? get_number(v["sigma"], path + ".sigma") : default_sigma;
  if (!(s.weight > 0.0)) fail(path + ".weight", "must be positive");
  if (!(s.noise_sigma > 0.0)) fail(path + ".sigma", "must be positive");
  return s;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemFile parse_problem_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (std::size_t i = 0; i < stop && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError("malformed JSON at line " + std::to_string(line) +
                      ", column " + std::to_string(col));
  }

  expect_object(doc, "$");
  check_keys(doc, "$", {"model", "parameters", "load_cases", "sensors", "noise", "design"});

  ProblemFile p;
  p.content_hash = fnv1a_hex(text);

  if (!doc.contains("model")) fail("$.model", "missing");
  const json& model = expect_object(doc["model"], "$.model");
  check_keys(model, "$.model", {"nodes", "N_e", "ell", "E", "A", "alpha_min", "fixed_dofs"});
  if (model.contains("nodes")) {
    if (model.contains("N_e") || model.contains("ell")) {
      fail("$.model.nodes", "give either explicit nodes or N_e with ell, not both");
    }
    p.node_coords = get_number_array(model["nodes"], "$.model.nodes");
    if (p.node_coords.size() < 2) fail("$.model.nodes", "need at least two nodes");
  } else {
    if (!model.contains("N_e")) fail("$.model.N_e", "missing (or give explicit nodes)");
    const int n_e = get_int(model["N_e"], "$.model.N_e");
    if (n_e < 1) fail("$.model.N_e", "must be at least 1");
    const double ell =
        model.contains("ell") ? get_number(model["ell"], "$.model.ell") : 1.0;
    if (!(ell > 0.0)) fail("$.model.ell", "must be positive");
    for (int j = 0; j <= n_e; ++j) p.node_coords.push_back(j * ell);
  }
  const int n_e = static_cast<int>(p.node_coords.size()) - 1;
  const int n_nodes = n_e + 1;

  if (model.contains("E")) p.youngs_modulus = get_number(model["E"], "$.model.E");
  if (model.contains("A")) p.area = get_number(model["A"], "$.model.A");
  if (!(p.youngs_modulus > 0.0)) fail("$.model.E", "must be positive");
  if (!(p.area > 0.0)) fail("$.model.A", "must be positive");
  if (model.contains("alpha_min")) {
    p.alpha_min = get_number(model["alpha_min"], "$.model.alpha_min");
    if (!(p.alpha_min > 0.0) || p.alpha_min > 1.0) {
      fail("$.model.alpha_min", "must lie in (0, 1]");
    }
  }
  if (model.contains("fixed_dofs")) {
    const json& fd = model["fixed_dofs"];
    if (!fd.is_array()) fail("$.model.fixed_dofs", "expected an array of node indices");
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const std::string path = "$.model.fixed_dofs[" + std::to_string(i) + "]";
      const int d = get_int(fd[i], path);
      if (d < 0 || d >= n_nodes) fail(path, "node index out of range");
      p.fixed_dofs.insert(d);
    }
  } else {
    p.fixed_dofs.insert(0);
  }

  if (doc.contains("parameters")) {
    const json& par = expect_object(doc["parameters"], "$.parameters");
    check_keys(par, "$.parameters", {"alpha", "beta", "f_dT_basis", "f_dT"});
    if (par.contains("alpha")) {
      auto a = get_number_array(par["alpha"], "$.parameters.alpha");
      if (static_cast<int>(a.size()) != n_e) {
        fail("$.parameters.alpha",
             "expected one entry per element (" + std::to_string(n_e) + ")");
      }
      p.alpha = std::move(a);
    }
    if (par.contains("beta")) {
      p.beta = get_number(par["beta"], "$.parameters.beta");
      if (!(*p.beta > 0.0)) fail("$.parameters.beta", "must be positive");
    }
    if (par.contains("f_dT_basis")) {
      const json& basis = par["f_dT_basis"];
      if (!basis.is_array()) fail("$.parameters.f_dT_basis", "expected an array of nodal vectors");
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::string path = "$.parameters.f_dT_basis[" + std::to_string(i) + "]";
        auto vec = get_number_array(basis[i], path);
        if (static_cast<int>(vec.size()) != n_nodes) {
          fail(path, "expected one entry per node (" + std::to_string(n_nodes) + ")");
        }
        p.thermal_basis.push_back(std::move(vec));
      }
    }
    if (par.contains("f_dT")) {
      p.thermal_coeff = get_number_array(par["f_dT"], "$.parameters.f_dT");
      if (p.thermal_coeff.size() != p.thermal_basis.size()) {
        fail("$.parameters.f_dT", "expected one coefficient per basis vector");
      }
    }
  }
  if (p.thermal_coeff.empty()) p.thermal_coeff.assign(p.thermal_basis.size(), 0.0);

  if (!doc.contains("load_cases")) fail("$.load_cases", "missing");
  const json& lcs = doc["load_cases"];
  if (!lcs.is_array() || lcs.empty()) fail("$.load_cases", "expected a non-empty array");
  for (std::size_t i = 0; i < lcs.size(); ++i) {
    const std::string path = "$.load_cases[" + std::to_string(i) + "]";
    const json& lc = expect_object(lcs[i], path);
    check_keys(lc, path, {"id", "forces", "tip_load"});
    ProblemFile::Load load;
    load.id = lc.contains("id") ? get_int(lc["id"], path + ".id") : static_cast<int>(i);
    if (lc.contains("forces")) {
      if (lc.contains("tip_load")) fail(path, "give either forces or tip_load, not both");
      load.forces = get_number_array(lc["forces"], path + ".forces");
      if (static_cast<int>(load.forces.size()) != n_nodes) {
        fail(path + ".forces", "expected one entry per node (" + std::to_string(n_nodes) + ")");
      }
    } else if (lc.contains("tip_load")) {
      load.forces.assign(n_nodes, 0.0);
      load.forces.back() = get_number(lc["tip_load"], path + ".tip_load");
    } else {
      fail(path, "needs forces or tip_load");
    }
    p.loads.push_back(std::move(load));
  }

  if (doc.contains("noise")) {
    const json& noise = expect_object(doc["noise"], "$.noise");
    check_keys(noise, "$.noise", {"default_sigma"});
    if (noise.contains("default_sigma")) {
      p.default_sigma = get_number(noise["default_sigma"], "$.noise.default_sigma");
      if (!(p.default_sigma > 0.0)) fail("$.noise.default_sigma", "must be positive");
    }
  }

  if (doc.contains("sensors")) {
    const json& sensors = expect_object(doc["sensors"], "$.sensors");
    check_keys(sensors, "$.sensors", {"candidates", "fixed"});
    for (const char* section : {"candidates", "fixed"}) {
      if (!sensors.contains(section)) continue;
      const std::string base = std::string("$.sensors.") + section;
      const json& arr = sensors[section];
      if (!arr.is_array()) fail(base, "expected an array");
      auto& dst = base.ends_with("candidates") ? p.candidates : p.fixed_sensors;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        dst.push_back(parse_sensor(arr[i], base + "[" + std::to_string(i) + "]",
                                   p.default_sigma, p.node_coords));
      }
    }
  }

  if (doc.contains("design")) {
    const json& design = expect_object(doc["design"], "$.design");
    check_keys(design, "$.design", {"criterion", "eps", "m", "scenarios", "detectability"});
    if (design.contains("criterion")) {
      const std::string c = get_string(design["criterion"], "$.design.criterion");
      try {
        p.criterion = criterion_from_string(c);
      } catch (const Error&) {
        fail("$.design.criterion", "must be \"D\", \"A\" or \"E\"");
      }
    }
    if (design.contains("eps")) {
      p.eps = get_number(design["eps"], "$.design.eps");
      if (p.eps < 0.0) fail("$.design.eps", "must be non-negative");
    }
    if (design.contains("m")) {
      p.m = get_int(design["m"], "$.design.m");
      if (p.m < 0) fail("$.design.m", "must be non-negative");
    }
    if (design.contains("scenarios")) {
      const json& sc = design["scenarios"];
      if (!sc.is_array()) fail("$.design.scenarios", "expected an array");
      for (std::size_t i = 0; i < sc.size(); ++i) {
        const std::string path = "$.design.scenarios[" + std::to_string(i) + "]";
        const json& entry = expect_object(sc[i], path);
        check_keys(entry, path, {"alpha", "weight"});
        if (!entry.contains("alpha")) fail(path + ".alpha", "missing");
        auto a = get_number_array(entry["alpha"], path + ".alpha");
        if (static_cast<int>(a.size()) != n_e) {
          fail(path + ".alpha",
               "expected one entry per element (" + std::to_string(n_e) + ")");
        }
        const double w =
            entry.contains("weight") ? get_number(entry["weight"], path + ".weight") : 1.0;
        if (!(w > 0.0)) fail(path + ".weight", "must be positive");
        p.scenarios.emplace_back(std::move(a), w);
      }
    }
    if (design.contains("detectability")) {
      const std::string base = "$.design.detectability";
      const json& det = expect_object(design["detectability"], base);
      check_keys(det, base, {"delta_y", "delta_alpha_min", "sigma"});
      DetectabilityConfig cfg;
      if (!det.contains("delta_y")) fail(base + ".delta_y", "missing");
      if (!det.contains("delta_alpha_min")) fail(base + ".delta_alpha_min", "missing");
      cfg.delta_y = get_number(det["delta_y"], base + ".delta_y");
      cfg.delta_alpha_min = get_number(det["delta_alpha_min"], base + ".delta_alpha_min");
      if (det.contains("sigma")) cfg.sigma = get_number(det["sigma"], base + ".sigma");
      p.detectability = cfg;
    }
  }

  return p;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_json(buf.str());
}

StructuralModel ProblemFile::build_model() const {
  Mesh1D mesh(node_coords, fixed_dofs);
  StructuralModel model(std::move(mesh), youngs_modulus, area);
  for (const auto& load : loads) {
    LoadCase lc;
    lc.id = load.id;
    lc.f = Eigen::Map<const Eigen::VectorXd>(load.forces.data(),
                                             static_cast<int>(load.forces.size()));
    model.add_load_case(std::move(lc));
  }
  for (const auto& vec : thermal_basis) {
    model.add_thermal_basis(Eigen::Map<const Eigen::VectorXd>(
        vec.data(), static_cast<int>(vec.size())));
  }
  return model;
}

namespace {

ParameterVector assemble_parameters(const ProblemFile& p,
                                    const std::vector<double>& alpha_values) {
  const int n_e = static_cast<int>(p.node_coords.size()) - 1;
  Eigen::VectorXd a(n_e);
  if (alpha_values.empty()) {
    a.setOnes();
  } else {
    a = Eigen::Map<const Eigen::VectorXd>(alpha_values.data(),
                                          static_cast<int>(alpha_values.size()));
  }
  Eigen::VectorXd b(p.beta ? 1 : 0);
  if (p.beta) b[0] = *p.beta;
  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(
      p.thermal_coeff.data(), static_cast<int>(p.thermal_coeff.size()));

  ParameterVector q(std::move(a), std::move(b), std::move(t), p.alpha_min);
  std::vector<ParamComponent> inverted;
  if (p.alpha || !alpha_values.empty()) inverted.push_back(ParamComponent::Alpha);
  if (p.beta) inverted.push_back(ParamComponent::Beta);
  if (!p.thermal_basis.empty()) inverted.push_back(ParamComponent::ThermalLoad);
  q.set_inverted(inverted);
  return q;
}

}  // namespace

ParameterVector ProblemFile::build_parameters() const {
  return assemble_parameters(*this, alpha.value_or(std::vector<double>{}));
}

std::vector<std::pair<ParameterVector, double>> ProblemFile::build_scenarios() const {
  std::vector<std::pair<ParameterVector, double>> out;
  if (scenarios.empty()) {
    out.emplace_back(build_parameters(), 1.0);
    return out;
  }
  for (const auto& [a, w] : scenarios) {
    out.emplace_back(assemble_parameters(*this, a), w);
  }
  return out;
}

}  // namespace sensopt
