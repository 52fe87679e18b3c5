#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sensopt/mesh.hpp"

namespace sensopt {

enum class SensorKind { Displacement, Strain };

std::string to_string(SensorKind k);

// One sensor. Displacement sensors live at a continuous coordinate x inside
// the domain; strain gauges are attached to an element (1-based index).
// weight scales the measurement row; noise_sigma only enters the noise
// covariance.
struct SensorSpec {
  SensorKind kind = SensorKind::Displacement;
  double x = 0.0;
  int element = 0;
  double weight = 1.0;
  double noise_sigma = 1.0;

  static SensorSpec displacement(double x, double weight = 1.0,
                                 double noise_sigma = 1.0);
  static SensorSpec strain(int element, double weight = 1.0,
                           double noise_sigma = 1.0);
};

// Sensor layout across load cases. A shared list is broadcast to every load
// case; a per-case construction allows different instruments per case. The
// total measurement count must be positive.
class SensorConfig {
 public:
  static SensorConfig broadcast(std::vector<SensorSpec> sensors, int n_cases);
  static SensorConfig per_case(std::vector<std::vector<SensorSpec>> sensors);

  int case_count() const;
  bool is_broadcast() const { return broadcast_; }
  const std::vector<SensorSpec>& sensors(int load_case) const;
  const std::vector<SensorSpec>& shared() const;
  int measurement_count(int load_case) const;
  int total_measurements() const;

 private:
  SensorConfig() = default;
  bool broadcast_ = true;
  int n_cases_ = 0;
  std::vector<std::vector<SensorSpec>> lists_;
};

// Sparse selection-and-interpolation operator for one load case, stored
// densely at this problem scale: rows are sensors, columns free dofs, at most
// two nonzeros per row. Row p applied to u gives the weighted reading of
// sensor p.
struct MeasurementOperator {
  Eigen::MatrixXd rows;            // m_i x N_free
  std::vector<SensorSpec> specs;   // per row
};

// Full-width measurement row (one value per node, fixed dofs included), used
// for assembly and for invariant checks prior to elimination.
Eigen::RowVectorXd measurement_row_full(const SensorSpec& s, const Mesh1D& mesh);

MeasurementOperator build_measurement_operator(const SensorConfig& S,
                                               const Mesh1D& mesh,
                                               int load_case);

// Identifies one scalar position design variable: a displacement sensor in
// the shared list (load_case = kShared) or in one case's private list.
struct SensorParamId {
  static constexpr int kShared = -1;
  int load_case = kShared;
  int sensor_index = 0;
};

// Derivative of the measurement operator of `load_case` with respect to the
// position of the sensor named by theta. Rows of sensors unrelated to theta
// are zero. Throws NotDifferentiable for strain gauges and for sensors
// sitting exactly on a node.
Eigen::MatrixXd measurement_position_derivative(const SensorConfig& S,
                                                const Mesh1D& mesh,
                                                const SensorParamId& theta,
                                                int load_case);

}  // namespace sensopt
