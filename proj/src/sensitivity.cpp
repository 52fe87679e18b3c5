#include "sensopt/sensitivity.hpp"

#include <cmath>

namespace sensopt {

NoiseModel::NoiseModel(Eigen::VectorXd variances) : var_(std::move(variances)) {
  if (var_.size() == 0) throw EmptyConfig("noise model has no entries");
  for (int i = 0; i < var_.size(); ++i) {
    if (!(var_[i] > 0.0) || !std::isfinite(var_[i])) {
      throw InvalidParameter("noise variances must be positive");
    }
  }
}

NoiseModel NoiseModel::from_config(const SensorConfig& S) {
  Eigen::VectorXd var(S.total_measurements());
  int p = 0;
  for (int i = 0; i < S.case_count(); ++i) {
    for (const auto& s : S.sensors(i)) {
      var[p++] = s.noise_sigma * s.noise_sigma;
    }
  }
  return NoiseModel(std::move(var));
}

Eigen::VectorXd NoiseModel::apply_inverse(const Eigen::VectorXd& y) const {
  if (y.size() != var_.size()) throw InvalidParameter("vector length != noise size");
  return y.cwiseQuotient(var_);
}

JacobianBundle::JacobianBundle(const StructuralModel& model, ParameterVector q0,
                               SensorConfig S, bool keep_explicit)
    : model_(&model), q0_(std::move(q0)), S_(std::move(S)) {
  if (q0_.size() == 0) {
    throw InvalidParameter("no inverted parameters: the Jacobian would be empty");
  }
  model.validate_parameters(q0_);
  if (model.load_case_count() == 0) {
    throw InvalidParameter("model has no load cases");
  }
  if (S_.case_count() != model.load_case_count()) {
    throw InvalidParameter("sensor configuration covers " +
                           std::to_string(S_.case_count()) + " load cases, model has " +
                           std::to_string(model.load_case_count()));
  }

  K_ = std::make_shared<StiffnessMatrix>(model.assemble_stiffness(q0_));
  const Eigen::VectorXd f_dT = model.thermal_force(q0_);
  for (int i = 0; i < model.load_case_count(); ++i) {
    states_.push_back(solve_state(*K_, model.mesh(), model.load_case(i), f_dT));
    ops_.push_back(build_measurement_operator(S_, model.mesh(), i));
  }
  if (keep_explicit) ensure_explicit();
}

int JacobianBundle::measurement_count() const { return S_.total_measurements(); }

const Eigen::VectorXd& JacobianBundle::state_full(int load_case) const {
  return states_.at(load_case);
}

const MeasurementOperator& JacobianBundle::measurement(int load_case) const {
  return ops_.at(load_case);
}

void JacobianBundle::ensure_explicit() const {
  if (explicit_ready_) return;
  U_.clear();
  J_.clear();
  for (int i = 0; i < case_count(); ++i) {
    const Eigen::MatrixXd C = model_->assemble_param_rhs(q0_, states_[i]);
    U_.push_back(solve_state_sensitivities(*K_, C));
    J_.push_back(ops_[i].rows * U_.back());
  }
  explicit_ready_ = true;
}

const Eigen::MatrixXd& JacobianBundle::block(int load_case) const {
  ensure_explicit();
  return J_.at(load_case);
}

const Eigen::MatrixXd& JacobianBundle::state_sensitivity(int load_case) const {
  ensure_explicit();
  return U_.at(load_case);
}

Eigen::MatrixXd JacobianBundle::stacked() const {
  ensure_explicit();
  Eigen::MatrixXd J(measurement_count(), parameter_count());
  int row = 0;
  for (int i = 0; i < case_count(); ++i) {
    J.middleRows(row, J_[i].rows()) = J_[i];
    row += static_cast<int>(J_[i].rows());
  }
  return J;
}

Eigen::VectorXd JacobianBundle::apply_J(const Eigen::VectorXd& v) const {
  if (v.size() != parameter_count()) throw InvalidParameter("direction has wrong length");
  Eigen::VectorXd y(measurement_count());
  int row = 0;
  for (int i = 0; i < case_count(); ++i) {
    const Eigen::VectorXd rhs = model_->param_rhs_times(q0_, states_[i], v);
    const Eigen::VectorXd du = K_->solve(rhs);
    const double scale = rhs.norm();
    if ((K_->matrix() * du - rhs).norm() > 1e-10 * (scale > 0.0 ? scale : 1.0)) {
      throw SolveFailure("linearized state solve lost accuracy");
    }
    y.segment(row, ops_[i].rows.rows()) = ops_[i].rows * du;
    row += static_cast<int>(ops_[i].rows.rows());
  }
  return y;
}

Eigen::VectorXd JacobianBundle::apply_Jt(const Eigen::VectorXd& w) const {
  if (w.size() != measurement_count()) throw InvalidParameter("vector has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(parameter_count());
  int row = 0;
  for (int i = 0; i < case_count(); ++i) {
    const int m_i = static_cast<int>(ops_[i].rows.rows());
    const Eigen::VectorXd rhs = ops_[i].rows.transpose() * w.segment(row, m_i);
    // K is symmetric, so the adjoint solve reuses the same factorization.
    const Eigen::VectorXd lambda = K_->solve(rhs);
    const double scale = rhs.norm();
    if ((K_->matrix() * lambda - rhs).norm() > 1e-10 * (scale > 0.0 ? scale : 1.0)) {
      throw SolveFailure("adjoint solve lost accuracy");
    }
    out += model_->param_rhs_transpose_times(q0_, states_[i], lambda);
    row += m_i;
  }
  return out;
}

Eigen::VectorXd JacobianBundle::apply_F(const Eigen::VectorXd& z,
                                        const NoiseModel& R) const {
  return apply_Jt(R.apply_inverse(apply_J(z)));
}

Eigen::MatrixXd solve_state_sensitivities(const StiffnessMatrix& K,
                                          const Eigen::MatrixXd& C) {
  if (C.rows() != K.size()) throw InvalidParameter("right-hand side has wrong height");
  Eigen::MatrixXd U = K.solve(C);
  for (int k = 0; k < C.cols(); ++k) {
    const double scale = C.col(k).norm();
    const double resid = (K.matrix() * U.col(k) - C.col(k)).norm();
    if (!U.col(k).allFinite() || resid > 1e-10 * (scale > 0.0 ? scale : 1.0)) {
      throw SolveFailure("sensitivity solve residual " + std::to_string(resid) +
                         " exceeds tolerance in column " + std::to_string(k));
    }
  }
  return U;
}

JacobianBundle assemble_jacobian(const SensorConfig& S, const ParameterVector& q0,
                                 const StructuralModel& model) {
  return JacobianBundle(model, q0, S, true);
}

Eigen::VectorXd apply_J(const Eigen::VectorXd& v, const ParameterVector& q0,
                        const SensorConfig& S, const StructuralModel& model) {
  return JacobianBundle(model, q0, S, false).apply_J(v);
}

Eigen::VectorXd apply_Jt(const Eigen::VectorXd& w, const ParameterVector& q0,
                         const SensorConfig& S, const StructuralModel& model) {
  return JacobianBundle(model, q0, S, false).apply_Jt(w);
}

Eigen::VectorXd apply_F(const Eigen::VectorXd& z, const ParameterVector& q0,
                        const SensorConfig& S, const StructuralModel& model,
                        const NoiseModel& R) {
  return JacobianBundle(model, q0, S, false).apply_F(z, R);
}

}  // namespace sensopt
