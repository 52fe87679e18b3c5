#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "sensopt/sensitivity.hpp"

namespace sensopt {

enum class Criterion { D, A, E };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

// Information matrix F = J^T R^{-1} J + eps*I for one parameter point (or a
// scenario average). The stored matrix already includes the regularization;
// provenance records the flat parameter point(s) the matrix was built at.
class FisherMatrix {
 public:
  FisherMatrix(Eigen::MatrixXd F, double eps);

  const Eigen::MatrixXd& matrix() const { return F_; }
  double eps() const { return eps_; }
  int size() const { return static_cast<int>(F_.rows()); }

  std::vector<Eigen::VectorXd> provenance;

 private:
  Eigen::MatrixXd F_;
  double eps_;
};

FisherMatrix fisher_matrix(const JacobianBundle& J, const NoiseModel& R,
                           double eps);

// D: -log det F, via Cholesky. A: tr(F^{-1}). E: smallest eigenvalue.
// D and A throw SingularFisher when the factorization fails.
double criterion_value(const FisherMatrix& F, Criterion c);

// Noise-weighted Gram matrix of the stacked measurement rows,
// G_pq = (J_p . J_q) / (sigma_p sigma_q). This is the determinant convention
// used to compare designs with fewer measurements than parameters, where F
// itself is singular; for a square invertible J the two D-values coincide.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& J_stacked, const NoiseModel& R);

// -log det of the Gram matrix; SingularFisher when it is not positive
// definite (coincident sensors).
double gram_criterion_value(const Eigen::MatrixXd& J_stacked, const NoiseModel& R);

// Adjoint weight matrix for design gradients, stacked like J.
struct AdjointWeight {
  Eigen::MatrixXd B;  // N_y x N_q
};

// B = R^{-1} J F^{-1}, computed by solving F B^T = J^T R^{-1} against the
// Cholesky factorization of F.
AdjointWeight adjoint_weight(const JacobianBundle& J, const FisherMatrix& F,
                             const NoiseModel& R);

// Gram-convention counterpart B = R^{-1/2} G^{-1} R^{-1/2} J, the weight that
// makes d(-log det G) = -2 tr(B^T dJ) for designs with N_y < N_q.
AdjointWeight adjoint_weight_gram(const Eigen::MatrixXd& J_stacked,
                                  const NoiseModel& R);

// Gradient of the D-objective with respect to the positions of the listed
// sensors: d(phi)/d(theta) = -2 sum_i tr(B_i^T (dM_i/dtheta) U_i).
std::vector<double> grad_phiD(const JacobianBundle& bundle,
                              const std::vector<SensorParamId>& thetas,
                              const AdjointWeight& B);

// Scenario-averaged information matrix sum_l w_l F(S; q0_l) + eps*I.
// Weights must be positive; provenance of each term is the scenario point.
FisherMatrix robust_fisher(const StructuralModel& model,
                           const std::vector<std::pair<ParameterVector, double>>& scenarios,
                           const SensorConfig& S, const NoiseModel& R, double eps);

// Conjugate-gradient solve of F x = g given only the action of F. Returns x;
// reports the iteration count through `iterations` when provided. Throws
// NoConvergence (carrying the final residual) when the relative residual
// tolerance is not reached within max_iterations.
Eigen::VectorXd solve_with_F(const Eigen::VectorXd& g,
                             const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F_apply,
                             double tol, int max_iterations,
                             int* iterations = nullptr);

// D-objective value with the branch rule used throughout placement and
// refinement: the Gram convention when there are fewer measurements than
// parameters, the regularized N_q x N_q form otherwise.
double phi_d_value(const JacobianBundle& bundle, const NoiseModel& R, double eps);

// Matching adjoint weight for phi_d_value's branch.
AdjointWeight phi_d_adjoint_weight(const JacobianBundle& bundle,
                                   const NoiseModel& R, double eps);

}  // namespace sensopt
