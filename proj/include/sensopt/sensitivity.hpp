#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "sensopt/model.hpp"
#include "sensopt/sensors.hpp"

namespace sensopt {

// Diagonal measurement noise covariance R = diag(sigma_p^2), rows stacked
// case by case in the same order as the Jacobian.
class NoiseModel {
 public:
  explicit NoiseModel(Eigen::VectorXd variances);
  static NoiseModel from_config(const SensorConfig& S);

  int size() const { return static_cast<int>(var_.size()); }
  const Eigen::VectorXd& variances() const { return var_; }
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& y) const;

 private:
  Eigen::VectorXd var_;
};

// Measurement Jacobian of the stacked sensor readings with respect to the
// inverted parameters at a fixed parameter point. Holds everything needed to
// act with J, J^T and F without forming them: the cached stiffness
// factorization, per-case states and measurement operators. The explicit
// blocks J_i = M_i U_i (and the state sensitivities U_i) are assembled
// eagerly by default; the matrix-free products never touch them and go
// through directional right-hand sides and adjoint solves instead.
class JacobianBundle {
 public:
  JacobianBundle(const StructuralModel& model, ParameterVector q0,
                 SensorConfig S, bool keep_explicit = true);

  const StructuralModel& model() const { return *model_; }
  const ParameterVector& parameters() const { return q0_; }
  const SensorConfig& sensors() const { return S_; }
  const StiffnessMatrix& stiffness() const { return *K_; }

  int case_count() const { return static_cast<int>(ops_.size()); }
  int parameter_count() const { return q0_.size(); }
  int measurement_count() const;

  const Eigen::VectorXd& state_full(int load_case) const;
  const MeasurementOperator& measurement(int load_case) const;

  // Explicit pieces (assembled on demand if not kept eagerly).
  const Eigen::MatrixXd& block(int load_case) const;             // J_i
  const Eigen::MatrixXd& state_sensitivity(int load_case) const; // U_i
  Eigen::MatrixXd stacked() const;                               // all J_i

  // Matrix-free products.
  Eigen::VectorXd apply_J(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_Jt(const Eigen::VectorXd& w) const;
  Eigen::VectorXd apply_F(const Eigen::VectorXd& z, const NoiseModel& R) const;

 private:
  void ensure_explicit() const;

  const StructuralModel* model_;
  ParameterVector q0_;
  SensorConfig S_;
  std::shared_ptr<StiffnessMatrix> K_;
  std::vector<Eigen::VectorXd> states_;   // full nodal u_i
  std::vector<MeasurementOperator> ops_;  // M_i
  mutable std::vector<Eigen::MatrixXd> U_;
  mutable std::vector<Eigen::MatrixXd> J_;
  mutable bool explicit_ready_ = false;
};

// State sensitivities U = K^{-1} C, solved column by column against the
// cached factorization with a 1e-10 relative residual guard per column.
Eigen::MatrixXd solve_state_sensitivities(const StiffnessMatrix& K,
                                          const Eigen::MatrixXd& C);

JacobianBundle assemble_jacobian(const SensorConfig& S, const ParameterVector& q0,
                                 const StructuralModel& model);

// One-shot convenience wrappers; each builds a fresh bundle.
Eigen::VectorXd apply_J(const Eigen::VectorXd& v, const ParameterVector& q0,
                        const SensorConfig& S, const StructuralModel& model);
Eigen::VectorXd apply_Jt(const Eigen::VectorXd& w, const ParameterVector& q0,
                         const SensorConfig& S, const StructuralModel& model);
Eigen::VectorXd apply_F(const Eigen::VectorXd& z, const ParameterVector& q0,
                        const SensorConfig& S, const StructuralModel& model,
                        const NoiseModel& R);

}  // namespace sensopt
