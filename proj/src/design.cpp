#include "sensopt/design.hpp"

#include <cmath>

namespace sensopt {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::D: return "D";
    case Criterion::A: return "A";
    case Criterion::E: return "E";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "D") return Criterion::D;
  if (s == "A") return Criterion::A;
  if (s == "E") return Criterion::E;
  throw InvalidParameter("unknown criterion '" + s + "' (expected D, A or E)");
}

FisherMatrix::FisherMatrix(Eigen::MatrixXd F, double eps)
    : F_(std::move(F)), eps_(eps) {
  if (F_.rows() != F_.cols()) throw InvalidParameter("information matrix must be square");
  if (eps_ < 0.0 || !std::isfinite(eps_)) {
    throw InvalidParameter("regularization must be non-negative");
  }
}

namespace {

// Scale the stacked rows by 1/sigma_p, the square root of R^{-1}.
Eigen::MatrixXd noise_scaled_rows(const Eigen::MatrixXd& J, const NoiseModel& R) {
  if (J.rows() != R.size()) {
    throw InvalidParameter("Jacobian rows do not match noise model");
  }
  Eigen::MatrixXd Y = J;
  for (int p = 0; p < Y.rows(); ++p) Y.row(p) /= std::sqrt(R.variances()[p]);
  return Y;
}

double logdet_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto& L = llt.matrixLLT();
  double acc = 0.0;
  for (int i = 0; i < L.rows(); ++i) acc += std::log(L(i, i));
  return 2.0 * acc;
}

}  // namespace

FisherMatrix fisher_matrix(const JacobianBundle& J, const NoiseModel& R,
                           double eps) {
  const Eigen::MatrixXd Y = noise_scaled_rows(J.stacked(), R);
  Eigen::MatrixXd F = Y.transpose() * Y;
  F = 0.5 * (F + F.transpose()).eval();
  F.diagonal().array() += eps;
  FisherMatrix out(std::move(F), eps);
  out.provenance.push_back(J.parameters().flat());
  return out;
}

double criterion_value(const FisherMatrix& F, Criterion c) {
  switch (c) {
    case Criterion::D: {
      Eigen::LLT<Eigen::MatrixXd> llt(F.matrix());
      if (llt.info() != Eigen::Success) {
        throw SingularFisher(
            F.eps() == 0.0
                ? "information matrix is singular (unregularized); the "
                  "configuration is locally unidentifiable"
                : "information matrix is singular despite regularization");
      }
      return -logdet_from_llt(llt);
    }
    case Criterion::A: {
      Eigen::LLT<Eigen::MatrixXd> llt(F.matrix());
      if (llt.info() != Eigen::Success) {
        throw SingularFisher("information matrix is singular; trace of the "
                             "inverse is undefined");
      }
      // tr(F^{-1}) = ||L^{-1}||_F^2 for F = L L^T.
      const Eigen::MatrixXd Linv =
          llt.matrixL().solve(Eigen::MatrixXd::Identity(F.size(), F.size()));
      return Linv.squaredNorm();
    }
    case Criterion::E: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F.matrix());
      return es.eigenvalues().minCoeff();
    }
  }
  throw InvalidParameter("unknown criterion");
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& J_stacked, const NoiseModel& R) {
  const Eigen::MatrixXd Y = noise_scaled_rows(J_stacked, R);
  Eigen::MatrixXd G = Y * Y.transpose();
  return 0.5 * (G + G.transpose()).eval();
}

double gram_criterion_value(const Eigen::MatrixXd& J_stacked, const NoiseModel& R) {
  const Eigen::MatrixXd G = gram_matrix(J_stacked, R);
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw SingularFisher("measurement rows are linearly dependent "
                         "(coincident sensors?)");
  }
  return -logdet_from_llt(llt);
}

AdjointWeight adjoint_weight(const JacobianBundle& J, const FisherMatrix& F,
                             const NoiseModel& R) {
  const Eigen::MatrixXd Js = J.stacked();
  if (Js.cols() != F.size()) throw InvalidParameter("Jacobian and F disagree on N_q");
  Eigen::MatrixXd JtRinv = Js.transpose();  // N_q x N_y
  for (int p = 0; p < Js.rows(); ++p) JtRinv.col(p) /= R.variances()[p];
  Eigen::LLT<Eigen::MatrixXd> llt(F.matrix());
  if (llt.info() != Eigen::Success) {
    throw SingularFisher("information matrix is singular; adjoint weight is "
                         "undefined");
  }
  AdjointWeight out;
  out.B = llt.solve(JtRinv).transpose();  // (F^{-1} J^T R^{-1})^T = R^{-1} J F^{-1}
  return out;
}

AdjointWeight adjoint_weight_gram(const Eigen::MatrixXd& J_stacked,
                                  const NoiseModel& R) {
  const Eigen::MatrixXd Y = noise_scaled_rows(J_stacked, R);
  Eigen::MatrixXd G = Y * Y.transpose();
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw SingularFisher("measurement rows are linearly dependent; Gram "
                         "weight is undefined");
  }
  Eigen::MatrixXd Z = llt.solve(Y);  // G^{-1} R^{-1/2} J
  for (int p = 0; p < Z.rows(); ++p) Z.row(p) /= std::sqrt(R.variances()[p]);
  AdjointWeight out;
  out.B = std::move(Z);
  return out;
}

std::vector<double> grad_phiD(const JacobianBundle& bundle,
                              const std::vector<SensorParamId>& thetas,
                              const AdjointWeight& B) {
  if (B.B.rows() != bundle.measurement_count() ||
      B.B.cols() != bundle.parameter_count()) {
    throw InvalidParameter("adjoint weight has wrong shape");
  }
  std::vector<double> grad(thetas.size(), 0.0);
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    double acc = 0.0;
    int row = 0;
    for (int i = 0; i < bundle.case_count(); ++i) {
      const int m_i = static_cast<int>(bundle.measurement(i).rows.rows());
      const Eigen::MatrixXd dM = measurement_position_derivative(
          bundle.sensors(), bundle.model().mesh(), thetas[t], i);
      if (!dM.isZero(0.0)) {
        const Eigen::MatrixXd dJ = dM * bundle.state_sensitivity(i);
        acc += (B.B.middleRows(row, m_i).array() * dJ.array()).sum();
      }
      row += m_i;
    }
    grad[t] = -2.0 * acc;
  }
  return grad;
}

FisherMatrix robust_fisher(
    const StructuralModel& model,
    const std::vector<std::pair<ParameterVector, double>>& scenarios,
    const SensorConfig& S, const NoiseModel& R, double eps) {
  if (scenarios.empty()) throw InvalidParameter("no scenarios given");
  Eigen::MatrixXd F;
  std::vector<Eigen::VectorXd> provenance;
  for (const auto& [q0, w] : scenarios) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidParameter("scenario weights must be positive");
    }
    JacobianBundle bundle(model, q0, S, true);
    const Eigen::MatrixXd Y = noise_scaled_rows(bundle.stacked(), R);
    Eigen::MatrixXd Fl = w * (Y.transpose() * Y);
    if (F.size() == 0) {
      F = std::move(Fl);
    } else {
      if (Fl.rows() != F.rows()) {
        throw InvalidParameter("scenarios disagree on the parameter layout");
      }
      F += Fl;
    }
    provenance.push_back(q0.flat());
  }
  F = 0.5 * (F + F.transpose()).eval();
  F.diagonal().array() += eps;
  FisherMatrix result(std::move(F), eps);
  result.provenance = std::move(provenance);
  return result;
}

Eigen::VectorXd solve_with_F(
    const Eigen::VectorXd& g,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F_apply,
    double tol, int max_iterations, int* iterations) {
  if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size());
  if (iterations) *iterations = 0;
  const double g_norm = g.norm();
  if (g_norm == 0.0) return x;

  Eigen::VectorXd r = g;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int k = 1; k <= max_iterations; ++k) {
    const Eigen::VectorXd Fp = F_apply(p);
    const double pFp = p.dot(Fp);
    if (!(pFp > 0.0)) {
      throw NoConvergence("operator is not positive definite along the "
                          "search direction", std::sqrt(rs));
    }
    const double alpha = rs / pFp;
    x += alpha * p;
    r -= alpha * Fp;
    const double rs_new = r.squaredNorm();
    if (iterations) *iterations = k;
    if (std::sqrt(rs_new) <= tol * g_norm) {
      const double true_resid = (F_apply(x) - g).norm();
      if (true_resid <= 10.0 * tol * g_norm) return x;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  throw NoConvergence("conjugate gradients did not converge in " +
                          std::to_string(max_iterations) + " iterations",
                      std::sqrt(rs));
}

double phi_d_value(const JacobianBundle& bundle, const NoiseModel& R, double eps) {
  if (bundle.measurement_count() < bundle.parameter_count()) {
    return gram_criterion_value(bundle.stacked(), R);
  }
  return criterion_value(fisher_matrix(bundle, R, eps), Criterion::D);
}

AdjointWeight phi_d_adjoint_weight(const JacobianBundle& bundle,
                                   const NoiseModel& R, double eps) {
  if (bundle.measurement_count() < bundle.parameter_count()) {
    return adjoint_weight_gram(bundle.stacked(), R);
  }
  return adjoint_weight(bundle, fisher_matrix(bundle, R, eps), R);
}

}  // namespace sensopt
