#include "sensopt/model.hpp"

#include <cmath>

namespace sensopt {

StiffnessMatrix::StiffnessMatrix(Eigen::MatrixXd K_free) : K_(std::move(K_free)) {
  llt_.compute(K_);
  if (llt_.info() != Eigen::Success) {
    throw NonSPD("stiffness matrix is not symmetric positive definite "
                 "(check boundary conditions and parameter bounds)");
  }
}

Eigen::VectorXd StiffnessMatrix::solve(const Eigen::VectorXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::MatrixXd StiffnessMatrix::solve(const Eigen::MatrixXd& rhs) const {
  return llt_.solve(rhs);
}

StructuralModel::StructuralModel(Mesh1D mesh, double youngs_modulus, double area)
    : mesh_(std::move(mesh)), youngs_modulus_(youngs_modulus), area_(area) {
  if (!(youngs_modulus_ > 0.0) || !std::isfinite(youngs_modulus_)) {
    throw InvalidParameter("Young's modulus must be positive");
  }
  if (!(area_ > 0.0) || !std::isfinite(area_)) {
    throw InvalidParameter("cross-section area must be positive");
  }
}

double StructuralModel::youngs_modulus(const ParameterVector& q) const {
  return q.has_beta() ? q.beta()[0] : youngs_modulus_;
}

void StructuralModel::add_load_case(LoadCase lc) {
  if (lc.f.size() != mesh_.node_count()) {
    throw InvalidParameter("load case " + std::to_string(lc.id) +
                           ": force vector length != node count");
  }
  if (!lc.f.allFinite()) {
    throw InvalidParameter("load case " + std::to_string(lc.id) +
                           ": force entries must be finite");
  }
  load_cases_.push_back(std::move(lc));
}

void StructuralModel::add_thermal_basis(Eigen::VectorXd basis) {
  if (basis.size() != mesh_.node_count()) {
    throw InvalidParameter("thermal basis vector length != node count");
  }
  if (!basis.allFinite()) {
    throw InvalidParameter("thermal basis entries must be finite");
  }
  thermal_basis_.push_back(std::move(basis));
}

Eigen::VectorXd StructuralModel::thermal_force(const ParameterVector& q) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh_.node_count());
  const auto& coeff = q.thermal();
  if (coeff.size() == 0) return f;
  if (static_cast<std::size_t>(coeff.size()) != thermal_basis_.size()) {
    throw UnknownParameterComponent(
        "thermal coefficient count does not match the declared load basis");
  }
  for (int c = 0; c < coeff.size(); ++c) f += coeff[c] * thermal_basis_[c];
  return f;
}

void StructuralModel::validate_parameters(const ParameterVector& q) const {
  if (q.alpha().size() != mesh_.element_count()) {
    throw InvalidParameter("alpha must have one entry per element");
  }
  if (q.thermal().size() > 0 &&
      static_cast<std::size_t>(q.thermal().size()) != thermal_basis_.size()) {
    throw UnknownParameterComponent(
        "thermal coefficient count does not match the declared load basis");
  }
}

StiffnessMatrix StructuralModel::assemble_stiffness(const ParameterVector& q) const {
  validate_parameters(q);
  const double E = youngs_modulus(q);
  const int n_nodes = mesh_.node_count();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int e = 0; e < mesh_.element_count(); ++e) {
    const double k = q.alpha()[e] * E * area_ / mesh_.element_length(e);
    K(e, e) += k;
    K(e, e + 1) -= k;
    K(e + 1, e) -= k;
    K(e + 1, e + 1) += k;
  }
  const int nf = mesh_.free_count();
  Eigen::MatrixXd Kf(nf, nf);
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) {
      Kf(i, j) = K(mesh_.free_node(i), mesh_.free_node(j));
    }
  }
  return StiffnessMatrix(std::move(Kf));
}

Eigen::VectorXd StructuralModel::element_strain(const Eigen::VectorXd& u_full) const {
  if (u_full.size() != mesh_.node_count()) {
    throw InvalidParameter("displacement vector length != node count");
  }
  Eigen::VectorXd eps(mesh_.element_count());
  for (int e = 0; e < mesh_.element_count(); ++e) {
    eps[e] = (u_full[e + 1] - u_full[e]) / mesh_.element_length(e);
  }
  return eps;
}

Eigen::MatrixXd StructuralModel::assemble_param_rhs(
    const ParameterVector& q0, const Eigen::VectorXd& u_full) const {
  validate_parameters(q0);
  if (u_full.size() != mesh_.node_count()) {
    throw InvalidParameter("displacement vector length != node count");
  }
  const double E = youngs_modulus(q0);
  const int nf = mesh_.free_count();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nf, q0.size());

  auto add_at_node = [&](int node, int col, double value) {
    int i = mesh_.free_index(node);
    if (i >= 0) C(i, col) += value;
  };

  for (const auto& range : q0.layout()) {
    switch (range.component) {
      case ParamComponent::Alpha: {
        // d/d(alpha_e) of -K u: the unit element force, sign flipped.
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = E * area_ / mesh_.element_length(e) *
                           (u_full[e + 1] - u_full[e]);
          add_at_node(e, range.offset + e, g);
          add_at_node(e + 1, range.offset + e, -g);
        }
        break;
      }
      case ParamComponent::Beta: {
        // K is linear in E, so dK/dE u is the alpha-weighted element sum.
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = q0.alpha()[e] * area_ / mesh_.element_length(e) *
                           (u_full[e + 1] - u_full[e]);
          add_at_node(e, range.offset, g);
          add_at_node(e + 1, range.offset, -g);
        }
        break;
      }
      case ParamComponent::ThermalLoad: {
        if (static_cast<std::size_t>(range.size) != thermal_basis_.size()) {
          throw UnknownParameterComponent(
              "thermal coefficient count does not match the declared load basis");
        }
        for (int c = 0; c < range.size; ++c) {
          C.col(range.offset + c) = mesh_.restrict_to_free(thermal_basis_[c]);
        }
        break;
      }
    }
  }
  return C;
}

Eigen::VectorXd StructuralModel::param_rhs_times(const ParameterVector& q0,
                                                 const Eigen::VectorXd& u_full,
                                                 const Eigen::VectorXd& dq) const {
  validate_parameters(q0);
  if (dq.size() != q0.size()) throw InvalidParameter("direction has wrong length");
  const double E = youngs_modulus(q0);
  Eigen::VectorXd out_full = Eigen::VectorXd::Zero(mesh_.node_count());
  for (const auto& range : q0.layout()) {
    switch (range.component) {
      case ParamComponent::Alpha: {
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = dq[range.offset + e] * E * area_ /
                           mesh_.element_length(e) * (u_full[e + 1] - u_full[e]);
          out_full[e] += g;
          out_full[e + 1] -= g;
        }
        break;
      }
      case ParamComponent::Beta: {
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = dq[range.offset] * q0.alpha()[e] * area_ /
                           mesh_.element_length(e) * (u_full[e + 1] - u_full[e]);
          out_full[e] += g;
          out_full[e + 1] -= g;
        }
        break;
      }
      case ParamComponent::ThermalLoad: {
        if (static_cast<std::size_t>(range.size) != thermal_basis_.size()) {
          throw UnknownParameterComponent(
              "thermal coefficient count does not match the declared load basis");
        }
        for (int c = 0; c < range.size; ++c) {
          out_full += dq[range.offset + c] * thermal_basis_[c];
        }
        break;
      }
    }
  }
  return mesh_.restrict_to_free(out_full);
}

Eigen::VectorXd StructuralModel::param_rhs_transpose_times(
    const ParameterVector& q0, const Eigen::VectorXd& u_full,
    const Eigen::VectorXd& w_free) const {
  validate_parameters(q0);
  if (w_free.size() != mesh_.free_count()) {
    throw InvalidParameter("adjoint vector has wrong length");
  }
  const double E = youngs_modulus(q0);
  const Eigen::VectorXd w_full = mesh_.expand_to_full(w_free);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q0.size());
  for (const auto& range : q0.layout()) {
    switch (range.component) {
      case ParamComponent::Alpha: {
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = E * area_ / mesh_.element_length(e) *
                           (u_full[e + 1] - u_full[e]);
          out[range.offset + e] = g * (w_full[e] - w_full[e + 1]);
        }
        break;
      }
      case ParamComponent::Beta: {
        double acc = 0.0;
        for (int e = 0; e < mesh_.element_count(); ++e) {
          const double g = q0.alpha()[e] * area_ / mesh_.element_length(e) *
                           (u_full[e + 1] - u_full[e]);
          acc += g * (w_full[e] - w_full[e + 1]);
        }
        out[range.offset] = acc;
        break;
      }
      case ParamComponent::ThermalLoad: {
        if (static_cast<std::size_t>(range.size) != thermal_basis_.size()) {
          throw UnknownParameterComponent(
              "thermal coefficient count does not match the declared load basis");
        }
        for (int c = 0; c < range.size; ++c) {
          out[range.offset + c] = thermal_basis_[c].dot(w_full);
        }
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd solve_state(const StiffnessMatrix& K, const Mesh1D& mesh,
                            const LoadCase& load,
                            const Eigen::VectorXd& thermal_force) {
  if (load.f.size() != mesh.node_count()) {
    throw InvalidParameter("load vector length != node count");
  }
  Eigen::VectorXd rhs_full = load.f;
  if (thermal_force.size() > 0) {
    if (thermal_force.size() != mesh.node_count()) {
      throw InvalidParameter("thermal force length != node count");
    }
    rhs_full += thermal_force;
  }
  const Eigen::VectorXd rhs = mesh.restrict_to_free(rhs_full);
  const Eigen::VectorXd u = K.solve(rhs);
  const double rhs_norm = rhs.norm();
  const double resid = (K.matrix() * u - rhs).norm();
  if (!u.allFinite() || resid > 1e-10 * (rhs_norm > 0.0 ? rhs_norm : 1.0)) {
    throw SolveFailure("state solve residual " + std::to_string(resid) +
                       " exceeds tolerance for load case " +
                       std::to_string(load.id));
  }
  return mesh.expand_to_full(u);
}

}  // namespace sensopt
