#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sensopt/errors.hpp"

namespace sensopt {

// Components of the inversion parameter vector q.
enum class ParamComponent {
  Alpha,        // per-element stiffness scaling factors, alpha_e in [alpha_min, 1]
  Beta,         // material scalar (Young's modulus), at most one in this version
  ThermalLoad,  // coefficients on the model's thermal load basis vectors
};

std::string to_string(ParamComponent c);

struct ComponentRange {
  ParamComponent component;
  int offset;  // first index in the flat vector q
  int size;
};

// Model parameters plus the layout of the flat inversion vector q.
//
// alpha always carries one value per element and is needed for assembly even
// when it is not inverted. beta (Young's modulus) and the thermal-load
// coefficients are optional; when present they both enter the model and take
// a slot in q. Which components are inverted is controlled at construction:
// by default every component that has values participates. The flat layout
// is ordered alpha, beta, thermal and covers [0, N_q) without gaps.
class ParameterVector {
 public:
  ParameterVector(Eigen::VectorXd alpha, double alpha_min = 1e-3);
  ParameterVector(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                  Eigen::VectorXd thermal, double alpha_min = 1e-3);

  // Restrict which components are exposed in q (values are kept either way).
  ParameterVector& set_inverted(const std::vector<ParamComponent>& comps);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& thermal() const { return thermal_; }
  double alpha_min() const { return alpha_min_; }
  bool has_beta() const { return beta_.size() > 0; }

  const std::vector<ComponentRange>& layout() const { return layout_; }
  // Total inverted size N_q.
  int size() const;

  Eigen::VectorXd flat() const;
  // Copy with the inverted components replaced by the entries of q.
  ParameterVector with_flat(const Eigen::VectorXd& q) const;

 private:
  void validate() const;
  void rebuild_layout(const std::vector<ParamComponent>& inverted);

  Eigen::VectorXd alpha_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd thermal_;
  double alpha_min_;
  std::vector<ParamComponent> inverted_;
  std::vector<ComponentRange> layout_;
};

}  // namespace sensopt
