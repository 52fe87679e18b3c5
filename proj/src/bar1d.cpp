#include "sensopt/bar1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sensopt {

namespace {

void check_alpha(const BarSpec& bar, const Eigen::VectorXd& alpha) {
  if (alpha.size() != bar.n_elements) {
    throw InvalidParameter("alpha must have one entry per element");
  }
  for (int i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw InvalidParameter("alpha entries must be positive");
  }
}

}  // namespace

Eigen::VectorXd analytic_displacement(const BarSpec& bar,
                                      const Eigen::VectorXd& alpha) {
  check_alpha(bar, alpha);
  const double c = bar.extension_scale();
  Eigen::VectorXd u(bar.n_elements + 1);
  u[0] = 0.0;
  for (int j = 1; j <= bar.n_elements; ++j) u[j] = u[j - 1] + c / alpha[j - 1];
  return u;
}

Eigen::RowVectorXd analytic_jacobian_row(const BarSpec& bar, BarSensorKind kind,
                                         int index) {
  return analytic_jacobian_row(bar, kind, index,
                               Eigen::VectorXd::Ones(bar.n_elements));
}

Eigen::RowVectorXd analytic_jacobian_row(const BarSpec& bar, BarSensorKind kind,
                                         int index,
                                         const Eigen::VectorXd& alpha) {
  check_alpha(bar, alpha);
  if (index < 1 || index > bar.n_elements) {
    // index 0 is the clamped node / no element; its row carries no information.
    throw IndexOutOfRange("sensor index " + std::to_string(index) +
                          " outside [1, " + std::to_string(bar.n_elements) + "]");
  }
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(bar.n_elements);
  if (kind == BarSensorKind::Displacement) {
    const double c = bar.extension_scale();
    for (int k = 0; k < index; ++k) row[k] = -c / (alpha[k] * alpha[k]);
  } else {
    const double cs = bar.strain_scale();
    row[index - 1] = -cs / (alpha[index - 1] * alpha[index - 1]);
  }
  return row;
}

std::int64_t min_matrix_det(const std::vector<int>& nodes) {
  if (nodes.empty()) throw NotIncreasing("node set is empty");
  int prev = 0;
  std::int64_t det = 1;
  for (int j : nodes) {
    if (j <= prev) {
      throw NotIncreasing("node indices must be strictly increasing and positive");
    }
    const std::int64_t inc = j - prev;
    if (det > std::numeric_limits<std::int64_t>::max() / inc) {
      throw Error("increment product overflows 64-bit integer range");
    }
    det *= inc;
    prev = j;
  }

  // Second route: floating-point determinant of the assembled min-matrix.
  const int m = static_cast<int>(nodes.size());
  Eigen::MatrixXd M(m, m);
  for (int p = 0; p < m; ++p) {
    for (int q = 0; q < m; ++q) M(p, q) = static_cast<double>(std::min(nodes[p], nodes[q]));
  }
  const double numeric = M.partialPivLu().determinant();
  const double expected = static_cast<double>(det);
  if (std::abs(numeric - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
    throw Error("min-matrix determinant cross-check failed: product " +
                std::to_string(expected) + " vs LU " + std::to_string(numeric));
  }
  return det;
}

std::vector<std::vector<int>> theorem_optimal_sets(int m, int n_elements) {
  if (m < 1 || m > n_elements) {
    throw InvalidParameter("sensor count must be between 1 and the element count");
  }
  const int q = n_elements / m;
  const int r = n_elements - m * q;

  // All distinct arrangements of r increments of q+1 and m-r of q. Walking
  // std::next_permutation from the ascending start enumerates them in
  // lexicographic order of the increment sequence, which coincides with
  // lexicographic order of the cumulative node sets.
  std::vector<int> inc(m, q);
  for (int i = m - r; i < m; ++i) inc[i] = q + 1;
  std::sort(inc.begin(), inc.end());

  std::vector<std::vector<int>> sets;
  do {
    std::vector<int> s(m);
    int acc = 0;
    for (int i = 0; i < m; ++i) {
      acc += inc[i];
      s[i] = acc;
    }
    sets.push_back(std::move(s));
  } while (std::next_permutation(inc.begin(), inc.end()));
  return sets;
}

}  // namespace sensopt
