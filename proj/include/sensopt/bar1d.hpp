#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sensopt/errors.hpp"

namespace sensopt {

// Closed-form reference results for the uniform cantilever bar under a tip
// load: N_e equal elements, left end clamped, point load P at the free end.
// Everything here is independent of the finite-element pipeline so the two
// routes can be checked against each other.
struct BarSpec {
  int n_elements = 10;
  double tip_load = 1.0;
  double youngs_modulus = 1.0;
  double area = 1.0;
  double element_length = 1.0;

  // Tip-load extension of one healthy element, P*l/(E*A).
  double extension_scale() const {
    return tip_load * element_length / (youngs_modulus * area);
  }
  // Strain of one healthy element, P/(E*A).
  double strain_scale() const { return tip_load / (youngs_modulus * area); }
};

enum class BarSensorKind { Displacement, Strain };

// Nodal displacements u_j = c * sum_{e<=j} 1/alpha_e, j = 0..N_e.
Eigen::VectorXd analytic_displacement(const BarSpec& bar,
                                      const Eigen::VectorXd& alpha);

// Row of the measurement Jacobian with respect to alpha for a sensor on the
// healthy bar (alpha = 1): displacement at node j gives j leading entries of
// -c, a strain gauge in element r gives a single -P/(EA) at position r.
// Indices are 1-based; node 0 is clamped and rejected as uninformative.
Eigen::RowVectorXd analytic_jacobian_row(const BarSpec& bar, BarSensorKind kind,
                                         int index);

// Same rows at a general damage state: displacement entries -c/alpha_k^2 for
// k <= j, strain entry -P/(EA alpha_r^2).
Eigen::RowVectorXd analytic_jacobian_row(const BarSpec& bar, BarSensorKind kind,
                                         int index, const Eigen::VectorXd& alpha);

// Determinant of the min-matrix K(S)_pq = min(j_p, j_q) for an increasing set
// of node indices 0 < j_1 < ... < j_m: the product of the increments
// (j_1 - 0)(j_2 - j_1)...(j_m - j_{m-1}), evaluated in exact integer
// arithmetic. Cross-checked internally against a floating-point determinant
// of the assembled matrix (must agree to 1e-9 relative). Throws NotIncreasing
// for unsorted or non-positive sets.
std::int64_t min_matrix_det(const std::vector<int>& nodes);

// All D-optimal node sets for m displacement sensors on the healthy N-element
// bar: every arrangement of the balanced increment multiset
// {q+1 (r times), q (m-r times)} with q = floor(N/m), r = N - m*q, as
// cumulative sums. Sorted lexicographically; every set ends at node N.
std::vector<std::vector<int>> theorem_optimal_sets(int m, int n_elements);

}  // namespace sensopt
