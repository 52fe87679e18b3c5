#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sensopt/mesh.hpp"
#include "sensopt/parameters.hpp"

namespace sensopt {

// One static load case. f is a full nodal force vector; entries on fixed
// dofs are carried by the supports and drop out of the constrained system.
struct LoadCase {
  int id = 0;
  Eigen::VectorXd f;
};

// Constrained stiffness matrix together with its Cholesky factorization.
// The factorization is computed once at construction and reused by every
// solve against the same parameter point.
class StiffnessMatrix {
 public:
  // K_free is the free-dof block after elimination. Throws NonSPD when the
  // factorization fails.
  explicit StiffnessMatrix(Eigen::MatrixXd K_free);

  const Eigen::MatrixXd& matrix() const { return K_; }
  int size() const { return static_cast<int>(K_.rows()); }

  // Raw factorized solves, no residual policing.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  Eigen::MatrixXd K_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Linear-elastic bar model: mesh, section data, applied load cases and the
// optional thermal load basis. Young's modulus defaults to the value given
// here and is overridden by q when the parameter vector carries a beta entry.
class StructuralModel {
 public:
  StructuralModel(Mesh1D mesh, double youngs_modulus, double area);

  const Mesh1D& mesh() const { return mesh_; }
  double area() const { return area_; }
  double default_youngs_modulus() const { return youngs_modulus_; }
  // Effective modulus at a parameter point.
  double youngs_modulus(const ParameterVector& q) const;

  void add_load_case(LoadCase lc);
  const std::vector<LoadCase>& load_cases() const { return load_cases_; }
  const LoadCase& load_case(int i) const { return load_cases_.at(i); }
  int load_case_count() const { return static_cast<int>(load_cases_.size()); }

  // Thermal load basis vectors (full nodal length). The thermal force is
  // f_dT = sum_c q.thermal()[c] * basis_c and is shared by all load cases.
  void add_thermal_basis(Eigen::VectorXd basis);
  const std::vector<Eigen::VectorXd>& thermal_basis() const { return thermal_basis_; }
  Eigen::VectorXd thermal_force(const ParameterVector& q) const;

  // Constrained stiffness K(alpha, beta) with Dirichlet rows and columns
  // eliminated. Throws NonSPD when the Cholesky factorization fails (for
  // example with an empty fixed-dof set).
  StiffnessMatrix assemble_stiffness(const ParameterVector& q) const;

  // Full nodal strain recovery: one constant strain per element.
  Eigen::VectorXd element_strain(const Eigen::VectorXd& u_full) const;

  // Right-hand-side blocks of the linearized state equation, one column per
  // inverted parameter: d(f_dT)/dq - d(K u)/dq at fixed u, restricted to the
  // free dofs. Alpha and beta columns are assembled from the analytic element
  // stiffness derivatives; thermal columns are the basis vectors themselves.
  Eigen::MatrixXd assemble_param_rhs(const ParameterVector& q0,
                                     const Eigen::VectorXd& u_full) const;

  // Directional variant, C * dq, assembled without forming C.
  Eigen::VectorXd param_rhs_times(const ParameterVector& q0,
                                  const Eigen::VectorXd& u_full,
                                  const Eigen::VectorXd& dq) const;
  // Transpose action, C^T * w_free, for the adjoint path.
  Eigen::VectorXd param_rhs_transpose_times(const ParameterVector& q0,
                                            const Eigen::VectorXd& u_full,
                                            const Eigen::VectorXd& w_free) const;

  void validate_parameters(const ParameterVector& q) const;

 private:
  Mesh1D mesh_;
  double youngs_modulus_;
  double area_;
  std::vector<LoadCase> load_cases_;
  std::vector<Eigen::VectorXd> thermal_basis_;
};

// Displacement solve for one load case: K u = f + f_dT on the free dofs.
// Returns the full nodal vector with zeros on the fixed dofs and enforces a
// relative residual of 1e-10 (SolveFailure otherwise).
Eigen::VectorXd solve_state(const StiffnessMatrix& K, const Mesh1D& mesh,
                            const LoadCase& load,
                            const Eigen::VectorXd& thermal_force);

}  // namespace sensopt
