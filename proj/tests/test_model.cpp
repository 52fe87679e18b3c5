#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>

#include "sensopt/model.hpp"

using namespace sensopt;

namespace {

StructuralModel two_element_bar() {
  StructuralModel model(Mesh1D::uniform(2, 1.0), 1.0, 1.0);
  LoadCase lc;
  lc.f = Eigen::VectorXd::Zero(3);
  lc.f[2] = 1.0;
  model.add_load_case(std::move(lc));
  return model;
}

}  // namespace

TEST_CASE("mesh requires strictly increasing coordinates") {
  CHECK_THROWS_AS(Mesh1D({0.0, 1.0, 1.0}, {0}), InvalidParameter);
  CHECK_THROWS_AS(Mesh1D({0.0, 2.0, 1.0}, {0}), InvalidParameter);
  CHECK_THROWS_AS(Mesh1D({0.0}, {0}), InvalidParameter);
}

TEST_CASE("uniform mesh geometry") {
  const Mesh1D mesh = Mesh1D::uniform(4, 0.5);
  CHECK(mesh.node_count() == 5);
  CHECK(mesh.element_count() == 4);
  CHECK(mesh.element_length(2) == doctest::Approx(0.5));
  CHECK(mesh.min_element_length() == doctest::Approx(0.5));
  CHECK(mesh.free_count() == 4);
  CHECK(mesh.free_index(0) == -1);
  CHECK(mesh.free_index(3) == 2);
}

TEST_CASE("locating a coordinate in the mesh") {
  const Mesh1D mesh = Mesh1D::uniform(4, 1.0);
  const auto mid = mesh.locate(2.25);
  CHECK(mid.element == 2);
  CHECK(mid.xi == doctest::Approx(0.25));

  const auto node = mesh.locate(2.0);  // interior node: right element
  CHECK(node.element == 2);
  CHECK(node.xi == doctest::Approx(0.0));

  const auto end = mesh.locate(4.0);
  CHECK(end.element == 3);
  CHECK(end.xi == doctest::Approx(1.0));

  CHECK_THROWS_AS(mesh.locate(-0.1), LocationOutOfDomain);
  CHECK_THROWS_AS(mesh.locate(4.1), LocationOutOfDomain);
}

TEST_CASE("restriction and expansion are inverse on free dofs") {
  const Mesh1D mesh({0.0, 1.0, 2.5, 3.0}, {0, 2});
  Eigen::VectorXd full(4);
  full << 7.0, 1.0, 9.0, 2.0;
  const Eigen::VectorXd reduced = mesh.restrict_to_free(full);
  REQUIRE(reduced.size() == 2);
  CHECK(reduced[0] == 1.0);
  CHECK(reduced[1] == 2.0);
  const Eigen::VectorXd back = mesh.expand_to_full(reduced);
  CHECK(back[0] == 0.0);
  CHECK(back[1] == 1.0);
  CHECK(back[2] == 0.0);
  CHECK(back[3] == 2.0);
}

TEST_CASE("parameter bounds and layout") {
  Eigen::VectorXd alpha(3);
  alpha << 0.5, 1.0, 0.25;
  const ParameterVector q(alpha);
  CHECK(q.size() == 3);
  CHECK(q.flat() == alpha);

  alpha[1] = 1.5;
  CHECK_THROWS_AS(ParameterVector{alpha}, InvalidParameter);
  alpha[1] = 1e-6;
  CHECK_THROWS_AS(ParameterVector{alpha}, InvalidParameter);
  CHECK_NOTHROW(ParameterVector(alpha, 1e-7));
}

TEST_CASE("inversion layout selects components") {
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(4, 0.5);
  Eigen::VectorXd beta(1);
  beta << 2.0;
  Eigen::VectorXd thermal(2);
  thermal << 0.1, -0.3;
  ParameterVector q(alpha, beta, thermal);
  CHECK(q.size() == 7);
  REQUIRE(q.layout().size() == 3);
  CHECK(q.layout()[0].component == ParamComponent::Alpha);
  CHECK(q.layout()[1].offset == 4);
  CHECK(q.layout()[2].size == 2);

  q.set_inverted({ParamComponent::Beta, ParamComponent::ThermalLoad});
  CHECK(q.size() == 3);
  Eigen::VectorXd flat = q.flat();
  CHECK(flat[0] == 2.0);
  CHECK(flat[1] == 0.1);
  CHECK(flat[2] == -0.3);

  Eigen::VectorXd bumped = flat;
  bumped[0] = 3.0;
  const ParameterVector q2 = q.with_flat(bumped);
  CHECK(q2.beta()[0] == 3.0);
  CHECK(q2.alpha() == alpha);
}

TEST_CASE("stiffness assembly matches hand values") {
  const StructuralModel model = two_element_bar();

  const StiffnessMatrix K1 =
      model.assemble_stiffness(ParameterVector(Eigen::VectorXd::Ones(2)));
  Eigen::MatrixXd expect(2, 2);
  expect << 2.0, -1.0, -1.0, 1.0;
  CHECK((K1.matrix() - expect).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::VectorXd alpha(2);
  alpha << 0.5, 1.0;
  const StiffnessMatrix K2 = model.assemble_stiffness(ParameterVector(alpha));
  expect << 1.5, -1.0, -1.0, 1.0;
  CHECK((K2.matrix() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("no supports means no factorization") {
  StructuralModel model(Mesh1D({0.0, 1.0, 2.0}, {}), 1.0, 1.0);
  CHECK_THROWS_AS(model.assemble_stiffness(ParameterVector(Eigen::VectorXd::Ones(2))),
                  NonSPD);
}

TEST_CASE("state solve reproduces the tip-loaded bar") {
  const StructuralModel model = two_element_bar();
  const ParameterVector q(Eigen::VectorXd::Ones(2));
  const StiffnessMatrix K = model.assemble_stiffness(q);
  const Eigen::VectorXd u =
      solve_state(K, model.mesh(), model.load_case(0), Eigen::VectorXd());
  CHECK(u[0] == 0.0);
  CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u[2] == doctest::Approx(2.0).epsilon(1e-12));

  const Eigen::VectorXd strain = model.element_strain(u);
  CHECK(strain[0] == doctest::Approx(1.0));
  CHECK(strain[1] == doctest::Approx(1.0));
}

TEST_CASE("beta overrides the default modulus") {
  const StructuralModel model = two_element_bar();
  Eigen::VectorXd beta(1);
  beta << 2.0;
  const ParameterVector q(Eigen::VectorXd::Ones(2), beta, Eigen::VectorXd());
  CHECK(model.youngs_modulus(q) == 2.0);
  const StiffnessMatrix K = model.assemble_stiffness(q);
  CHECK(K.matrix()(0, 0) == doctest::Approx(4.0));
  const Eigen::VectorXd u =
      solve_state(K, model.mesh(), model.load_case(0), Eigen::VectorXd());
  CHECK(u[2] == doctest::Approx(1.0));
}

TEST_CASE("thermal basis accumulates into the load") {
  StructuralModel model = two_element_bar();
  Eigen::VectorXd b1(3), b2(3);
  b1 << 0.0, 1.0, 0.0;
  b2 << 0.0, 0.0, 1.0;
  model.add_thermal_basis(b1);
  model.add_thermal_basis(b2);

  Eigen::VectorXd thermal(2);
  thermal << 2.0, -1.0;
  const ParameterVector q(Eigen::VectorXd::Ones(2), Eigen::VectorXd(), thermal);
  const Eigen::VectorXd f = model.thermal_force(q);
  CHECK(f[1] == doctest::Approx(2.0));
  CHECK(f[2] == doctest::Approx(-1.0));

  Eigen::VectorXd bad(1);
  bad << 1.0;
  const ParameterVector qbad(Eigen::VectorXd::Ones(2), Eigen::VectorXd(), bad);
  CHECK_THROWS_AS(model.thermal_force(qbad), UnknownParameterComponent);
}

TEST_CASE("linearized rhs columns carry the element extension signs") {
  StructuralModel model = two_element_bar();
  Eigen::VectorXd basis(3);
  basis << 0.0, 0.5, 1.0;
  model.add_thermal_basis(basis);

  Eigen::VectorXd thermal(1);
  thermal << 0.0;
  Eigen::VectorXd beta(1);
  beta << 1.0;
  const ParameterVector q(Eigen::VectorXd::Ones(2), beta, thermal);
  const StiffnessMatrix K = model.assemble_stiffness(q);
  const Eigen::VectorXd u =
      solve_state(K, model.mesh(), model.load_case(0), model.thermal_force(q));

  const Eigen::MatrixXd C = model.assemble_param_rhs(q, u);
  REQUIRE(C.rows() == 2);
  REQUIRE(C.cols() == 4);  // two alpha, one beta, one thermal

  // alpha columns: +EA/l * extension at the left node, minus at the right
  CHECK(C(0, 0) == doctest::Approx(-1.0));
  CHECK(C(1, 0) == doctest::Approx(0.0));
  CHECK(C(0, 1) == doctest::Approx(1.0));
  CHECK(C(1, 1) == doctest::Approx(-1.0));
  // beta column: -dK/dE * u = -(K/E) u
  CHECK(C(0, 2) == doctest::Approx(0.0));
  CHECK(C(1, 2) == doctest::Approx(-1.0));
  // thermal column: the basis vector on the free dofs
  CHECK(C(0, 3) == doctest::Approx(0.5));
  CHECK(C(1, 3) == doctest::Approx(1.0));
}

TEST_CASE("directional rhs products match the assembled matrix") {
  StructuralModel model = two_element_bar();
  Eigen::VectorXd basis(3);
  basis << 0.0, 1.0, -2.0;
  model.add_thermal_basis(basis);

  Eigen::VectorXd alpha(2), beta(1), thermal(1);
  alpha << 0.7, 0.4;
  beta << 1.5;
  thermal << 0.2;
  const ParameterVector q(alpha, beta, thermal);
  const StiffnessMatrix K = model.assemble_stiffness(q);
  const Eigen::VectorXd u =
      solve_state(K, model.mesh(), model.load_case(0), model.thermal_force(q));
  const Eigen::MatrixXd C = model.assemble_param_rhs(q, u);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd dq(4), w(2);
    for (int i = 0; i < 4; ++i) dq[i] = dist(rng);
    for (int i = 0; i < 2; ++i) w[i] = dist(rng);
    const Eigen::VectorXd lhs = model.param_rhs_times(q, u, dq);
    CHECK((lhs - C * dq).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd rhs = model.param_rhs_transpose_times(q, u, w);
    CHECK((rhs - C.transpose() * w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("load case validation") {
  StructuralModel model(Mesh1D::uniform(2, 1.0), 1.0, 1.0);
  LoadCase wrong;
  wrong.f = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(model.add_load_case(std::move(wrong)), InvalidParameter);

  LoadCase nan_case;
  nan_case.f = Eigen::VectorXd::Zero(3);
  nan_case.f[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(model.add_load_case(std::move(nan_case)), InvalidParameter);
}
