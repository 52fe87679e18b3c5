#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "sensopt/errors.hpp"

namespace sensopt {

// 1D mesh of two-node bar elements. Nodes are numbered 0..N_e from left to
// right; element e (0-based) spans nodes e and e+1. Dirichlet constraints are
// homogeneous and handled by row/column elimination, so the solver works on
// the free dofs only.
//
// An empty fixed_dofs set is accepted here; the resulting stiffness matrix is
// singular and assembly rejects it with NonSPD.
class Mesh1D {
 public:
  Mesh1D(std::vector<double> node_coords, std::set<int> fixed_dofs);

  // Uniform mesh with n_elements elements of length element_length,
  // left end at x = 0.
  static Mesh1D uniform(int n_elements, double element_length,
                        std::set<int> fixed_dofs = {0});

  int node_count() const { return static_cast<int>(coords_.size()); }
  int element_count() const { return node_count() - 1; }
  double node_coord(int node) const { return coords_.at(node); }
  const std::vector<double>& node_coords() const { return coords_; }

  // Length of element e, 0-based.
  double element_length(int e) const { return coords_.at(e + 1) - coords_.at(e); }
  double domain_length() const { return coords_.back() - coords_.front(); }
  double min_element_length() const;

  bool is_fixed(int node) const { return fixed_.count(node) > 0; }
  const std::set<int>& fixed_dofs() const { return fixed_; }

  int free_count() const { return static_cast<int>(free_nodes_.size()); }
  // Node index of the i-th free dof (ascending).
  int free_node(int i) const { return free_nodes_.at(i); }
  // Position of a node in the free numbering, -1 if fixed.
  int free_index(int node) const { return free_index_.at(node); }

  // Drop fixed entries from a full nodal vector.
  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
  // Scatter a free-dof vector back to full length, zeros at fixed nodes.
  Eigen::VectorXd expand_to_full(const Eigen::VectorXd& free) const;

  // Element containing coordinate x, 0-based, together with the local
  // coordinate xi in [0, 1]. x exactly on an interior node belongs to the
  // element on its right (xi = 0); x at the right end maps to the last
  // element with xi = 1. Throws LocationOutOfDomain outside [x_0, x_N].
  struct ElementHit {
    int element;
    double xi;
  };
  ElementHit locate(double x) const;

 private:
  std::vector<double> coords_;
  std::set<int> fixed_;
  std::vector<int> free_nodes_;
  std::vector<int> free_index_;
};

}  // namespace sensopt
