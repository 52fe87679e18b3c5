#include "sensopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sensopt {

Mesh1D::Mesh1D(std::vector<double> node_coords, std::set<int> fixed_dofs)
    : coords_(std::move(node_coords)), fixed_(std::move(fixed_dofs)) {
  if (coords_.size() < 2) throw InvalidParameter("mesh needs at least two nodes");
  for (double x : coords_) {
    if (!std::isfinite(x)) throw InvalidParameter("mesh coordinates must be finite");
  }
  for (std::size_t i = 0; i + 1 < coords_.size(); ++i) {
    if (!(coords_[i] < coords_[i + 1])) {
      throw InvalidParameter("mesh node coordinates must be strictly increasing");
    }
  }
  for (int node : fixed_) {
    if (node < 0 || node >= node_count()) {
      throw InvalidParameter("fixed dof index outside the mesh");
    }
  }
  free_index_.assign(node_count(), -1);
  for (int node = 0; node < node_count(); ++node) {
    if (!is_fixed(node)) {
      free_index_[node] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(node);
    }
  }
  if (free_nodes_.empty()) throw InvalidParameter("all dofs are fixed");
}

Mesh1D Mesh1D::uniform(int n_elements, double element_length,
                       std::set<int> fixed_dofs) {
  if (n_elements < 1) throw InvalidParameter("need at least one element");
  if (!(element_length > 0.0)) throw InvalidParameter("element length must be positive");
  std::vector<double> coords(n_elements + 1);
  for (int j = 0; j <= n_elements; ++j) coords[j] = j * element_length;
  return Mesh1D(std::move(coords), std::move(fixed_dofs));
}

double Mesh1D::min_element_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (int e = 0; e < element_count(); ++e) m = std::min(m, element_length(e));
  return m;
}

Eigen::VectorXd Mesh1D::restrict_to_free(const Eigen::VectorXd& full) const {
  if (full.size() != node_count()) throw InvalidParameter("vector length != node count");
  Eigen::VectorXd out(free_count());
  for (int i = 0; i < free_count(); ++i) out[i] = full[free_nodes_[i]];
  return out;
}

Eigen::VectorXd Mesh1D::expand_to_full(const Eigen::VectorXd& free) const {
  if (free.size() != free_count()) throw InvalidParameter("vector length != free dof count");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(node_count());
  for (int i = 0; i < free_count(); ++i) out[free_nodes_[i]] = free[i];
  return out;
}

Mesh1D::ElementHit Mesh1D::locate(double x) const {
  if (!std::isfinite(x) || x < coords_.front() || x > coords_.back()) {
    throw LocationOutOfDomain("coordinate " + std::to_string(x) +
                              " outside [" + std::to_string(coords_.front()) +
                              ", " + std::to_string(coords_.back()) + "]");
  }
  if (x == coords_.back()) return {element_count() - 1, 1.0};
  auto it = std::upper_bound(coords_.begin(), coords_.end(), x);
  int e = static_cast<int>(it - coords_.begin()) - 1;
  double xi = (x - coords_[e]) / element_length(e);
  return {e, xi};
}

}  // namespace sensopt
