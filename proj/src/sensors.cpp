#include "sensopt/sensors.hpp"

#include <cmath>

namespace sensopt {

std::string to_string(SensorKind k) {
  return k == SensorKind::Displacement ? "displacement" : "strain";
}

SensorSpec SensorSpec::displacement(double x, double weight, double noise_sigma) {
  SensorSpec s;
  s.kind = SensorKind::Displacement;
  s.x = x;
  s.weight = weight;
  s.noise_sigma = noise_sigma;
  return s;
}

SensorSpec SensorSpec::strain(int element, double weight, double noise_sigma) {
  SensorSpec s;
  s.kind = SensorKind::Strain;
  s.element = element;
  s.weight = weight;
  s.noise_sigma = noise_sigma;
  return s;
}

namespace {

void check_spec(const SensorSpec& s) {
  if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
    throw InvalidParameter("sensor weight must be positive");
  }
  if (!(s.noise_sigma > 0.0) || !std::isfinite(s.noise_sigma)) {
    throw InvalidParameter("sensor noise level must be positive");
  }
}

}  // namespace

SensorConfig SensorConfig::broadcast(std::vector<SensorSpec> sensors, int n_cases) {
  if (n_cases < 1) throw InvalidParameter("need at least one load case");
  if (sensors.empty()) throw EmptyConfig("sensor configuration is empty");
  for (const auto& s : sensors) check_spec(s);
  SensorConfig cfg;
  cfg.broadcast_ = true;
  cfg.n_cases_ = n_cases;
  cfg.lists_.push_back(std::move(sensors));
  return cfg;
}

SensorConfig SensorConfig::per_case(std::vector<std::vector<SensorSpec>> sensors) {
  if (sensors.empty()) throw InvalidParameter("need at least one load case");
  std::size_t total = 0;
  for (const auto& list : sensors) {
    total += list.size();
    for (const auto& s : list) check_spec(s);
  }
  if (total == 0) throw EmptyConfig("sensor configuration is empty");
  SensorConfig cfg;
  cfg.broadcast_ = false;
  cfg.n_cases_ = static_cast<int>(sensors.size());
  cfg.lists_ = std::move(sensors);
  return cfg;
}

int SensorConfig::case_count() const { return n_cases_; }

const std::vector<SensorSpec>& SensorConfig::sensors(int load_case) const {
  if (load_case < 0 || load_case >= n_cases_) {
    throw IndexOutOfRange("load case index out of range");
  }
  return broadcast_ ? lists_[0] : lists_[load_case];
}

const std::vector<SensorSpec>& SensorConfig::shared() const {
  if (!broadcast_) throw InvalidParameter("configuration is not broadcast");
  return lists_[0];
}

int SensorConfig::measurement_count(int load_case) const {
  return static_cast<int>(sensors(load_case).size());
}

int SensorConfig::total_measurements() const {
  int total = 0;
  for (int i = 0; i < n_cases_; ++i) total += measurement_count(i);
  return total;
}

Eigen::RowVectorXd measurement_row_full(const SensorSpec& s, const Mesh1D& mesh) {
  check_spec(s);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(mesh.node_count());
  if (s.kind == SensorKind::Displacement) {
    const auto hit = mesh.locate(s.x);
    row[hit.element] = s.weight * (1.0 - hit.xi);
    row[hit.element + 1] = s.weight * hit.xi;
  } else {
    if (s.element < 1 || s.element > mesh.element_count()) {
      throw IndexOutOfRange("strain gauge element " + std::to_string(s.element) +
                            " outside [1, " + std::to_string(mesh.element_count()) + "]");
    }
    const int e = s.element - 1;
    const double inv_len = 1.0 / mesh.element_length(e);
    row[e] = -s.weight * inv_len;
    row[e + 1] = s.weight * inv_len;
  }
  return row;
}

MeasurementOperator build_measurement_operator(const SensorConfig& S,
                                               const Mesh1D& mesh,
                                               int load_case) {
  const auto& specs = S.sensors(load_case);
  MeasurementOperator op;
  op.specs = specs;
  op.rows.resize(static_cast<int>(specs.size()), mesh.free_count());
  for (std::size_t p = 0; p < specs.size(); ++p) {
    const Eigen::RowVectorXd full = measurement_row_full(specs[p], mesh);
    for (int i = 0; i < mesh.free_count(); ++i) {
      op.rows(static_cast<int>(p), i) = full[mesh.free_node(i)];
    }
  }
  return op;
}

Eigen::MatrixXd measurement_position_derivative(const SensorConfig& S,
                                                const Mesh1D& mesh,
                                                const SensorParamId& theta,
                                                int load_case) {
  const auto& specs = S.sensors(load_case);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<int>(specs.size()),
                                            mesh.free_count());

  const bool applies = theta.load_case == SensorParamId::kShared
                           ? S.is_broadcast()
                           : theta.load_case == load_case;
  if (theta.load_case == SensorParamId::kShared && !S.is_broadcast()) {
    throw InvalidParameter("shared sensor id used with a per-case configuration");
  }
  if (!applies) return d;

  if (theta.sensor_index < 0 ||
      theta.sensor_index >= static_cast<int>(specs.size())) {
    throw IndexOutOfRange("sensor index out of range");
  }
  const SensorSpec& s = specs[theta.sensor_index];
  if (s.kind != SensorKind::Displacement) {
    throw NotDifferentiable("strain gauges have no position derivative");
  }
  const auto hit = mesh.locate(s.x);
  if (hit.xi <= 0.0 || hit.xi >= 1.0) {
    throw NotDifferentiable("sensor at x = " + std::to_string(s.x) +
                            " sits exactly on a node");
  }
  const double inv_len = 1.0 / mesh.element_length(hit.element);
  auto set_node = [&](int node, double value) {
    const int i = mesh.free_index(node);
    if (i >= 0) d(theta.sensor_index, i) = value;
  };
  set_node(hit.element, -s.weight * inv_len);
  set_node(hit.element + 1, s.weight * inv_len);
  return d;
}

}  // namespace sensopt
