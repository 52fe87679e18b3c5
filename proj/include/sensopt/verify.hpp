#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sensopt {

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Negative-control hook: perturbs the closed-form extension scale by the
  // given relative amount so the Jacobian cross-check must fail.
  double inject_c_error = 0.0;
};

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Cross-checks the finite-element pipeline against the closed-form bar
// results and the combinatorial optima: displacements, strains, Jacobian
// rows, min-matrix determinants, balanced-increment optimal sets, and the
// single-sensor ranking rule.
std::vector<VerifyCheck> run_verification(const VerifyOptions& opts);

}  // namespace sensopt
