#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sensopt/model.hpp"
#include "sensopt/placement.hpp"

namespace sensopt {

// Parsed and validated problem description. Mirrors the JSON layout; the
// build_* helpers realize the library objects. Presence of a parameter block
// decides what is inverted: "alpha" puts the stiffness factors into q,
// "beta" the Young's modulus, and each thermal basis vector contributes one
// coefficient (reference value zero unless given).
struct ProblemFile {
  // model
  std::vector<double> node_coords;
  double youngs_modulus = 1.0;
  double area = 1.0;
  double alpha_min = 1e-3;
  std::set<int> fixed_dofs;

  // parameters
  std::optional<std::vector<double>> alpha;
  std::optional<double> beta;
  std::vector<std::vector<double>> thermal_basis;
  std::vector<double> thermal_coeff;

  // load cases
  struct Load {
    int id = 0;
    std::vector<double> forces;
  };
  std::vector<Load> loads;

  // sensors
  std::vector<SensorSpec> candidates;
  std::vector<SensorSpec> fixed_sensors;
  double default_sigma = 1.0;

  // design
  Criterion criterion = Criterion::D;
  double eps = 0.0;
  int m = 0;
  std::vector<std::pair<std::vector<double>, double>> scenarios;  // alpha, weight
  std::optional<DetectabilityConfig> detectability;

  // FNV-1a hash of the raw input bytes, echoed into every result file.
  std::string content_hash;

  StructuralModel build_model() const;
  ParameterVector build_parameters() const;
  std::vector<std::pair<ParameterVector, double>> build_scenarios() const;
};

// Throws SchemaError with a path-qualified message ("$.model.ell: ...") on
// validation problems and with line/column information on malformed JSON.
ProblemFile parse_problem_json(const std::string& text);
ProblemFile load_problem_file(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace sensopt
