#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sensopt/bar1d.hpp"
#include "sensopt/sensitivity.hpp"

using namespace sensopt;

namespace {

StructuralModel tip_loaded_bar(int n_elements) {
  StructuralModel model(Mesh1D::uniform(n_elements, 1.0), 1.0, 1.0);
  LoadCase lc;
  lc.f = Eigen::VectorXd::Zero(n_elements + 1);
  lc.f[n_elements] = 1.0;
  model.add_load_case(std::move(lc));
  return model;
}

// Five elements, two load cases, alpha + modulus + two thermal coefficients
// inverted: N_q = 8 with every column source exercised.
struct MixedFixture {
  StructuralModel model;
  ParameterVector q0;
  SensorConfig S;

  MixedFixture()
      : model(Mesh1D::uniform(5, 1.0), 2.0, 1.0),
        q0(make_q0()),
        S(SensorConfig::per_case(
            {{SensorSpec::displacement(1.5), SensorSpec::strain(2, 1.0, 0.5)},
             {SensorSpec::displacement(4.5, 2.0), SensorSpec::strain(5),
              SensorSpec::displacement(2.0)}})) {
    LoadCase a;
    a.f = Eigen::VectorXd::Zero(6);
    a.f[5] = 1.0;
    model.add_load_case(std::move(a));
    LoadCase b;
    b.f = Eigen::VectorXd::Zero(6);
    b.f[2] = -0.5;
    b.f[4] = 2.0;
    model.add_load_case(std::move(b));

    Eigen::VectorXd basis1 = Eigen::VectorXd::Zero(6);
    basis1[1] = 0.3;
    basis1[3] = -0.2;
    Eigen::VectorXd basis2 = Eigen::VectorXd::Zero(6);
    basis2[4] = 1.0;
    basis2[5] = -1.0;
    model.add_thermal_basis(basis1);
    model.add_thermal_basis(basis2);
  }

  static ParameterVector make_q0() {
    Eigen::VectorXd alpha(5);
    alpha << 0.9, 0.7, 1.0, 0.5, 0.8;
    Eigen::VectorXd beta(1);
    beta << 2.0;
    Eigen::VectorXd thermal(2);
    thermal << 0.1, -0.4;
    return ParameterVector(alpha, beta, thermal);
  }
};

}  // namespace

TEST_CASE("state sensitivity of the healthy bar is lower triangular") {
  const StructuralModel model = tip_loaded_bar(10);
  const ParameterVector q0(Eigen::VectorXd::Ones(10));
  const SensorConfig S = SensorConfig::broadcast({SensorSpec::displacement(5.0)}, 1);
  const JacobianBundle bundle(model, q0, S);

  const Eigen::MatrixXd& U = bundle.state_sensitivity(0);
  REQUIRE(U.rows() == 10);
  REQUIRE(U.cols() == 10);
  for (int r = 0; r < 10; ++r) {
    for (int k = 0; k < 10; ++k) {
      CHECK(U(r, k) == doctest::Approx(r >= k ? -1.0 : 0.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("jacobian rows reproduce the closed forms") {
  const BarSpec bar;
  const StructuralModel model = tip_loaded_bar(10);

  SUBCASE("healthy state") {
    const ParameterVector q0(Eigen::VectorXd::Ones(10));
    const SensorConfig S = SensorConfig::broadcast(
        {SensorSpec::displacement(5.0), SensorSpec::strain(4)}, 1);
    const JacobianBundle bundle(model, q0, S);
    const Eigen::MatrixXd J = bundle.stacked();
    REQUIRE(J.rows() == 2);
    const Eigen::RowVectorXd disp =
        analytic_jacobian_row(bar, BarSensorKind::Displacement, 5);
    const Eigen::RowVectorXd strain =
        analytic_jacobian_row(bar, BarSensorKind::Strain, 4);
    CHECK((J.row(0) - disp).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((J.row(1) - strain).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("damaged state") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.5, 1.0);
    Eigen::VectorXd alpha(10);
    for (int e = 0; e < 10; ++e) alpha[e] = dist(rng);
    const ParameterVector q0(alpha);
    const SensorConfig S = SensorConfig::broadcast(
        {SensorSpec::displacement(7.0), SensorSpec::strain(2)}, 1);
    const JacobianBundle bundle(model, q0, S);
    const Eigen::MatrixXd J = bundle.stacked();
    const Eigen::RowVectorXd disp =
        analytic_jacobian_row(bar, BarSensorKind::Displacement, 7, alpha);
    const Eigen::RowVectorXd strain =
        analytic_jacobian_row(bar, BarSensorKind::Strain, 2, alpha);
    CHECK((J.row(0) - disp).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((J.row(1) - strain).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("matrix-free products agree with the explicit blocks") {
  const MixedFixture fix;
  const JacobianBundle bundle(fix.model, fix.q0, fix.S);
  REQUIRE(bundle.parameter_count() == 8);
  REQUIRE(bundle.measurement_count() == 5);

  const Eigen::MatrixXd J = bundle.stacked();
  REQUIRE(J.rows() == 5);
  REQUIRE(J.cols() == 8);
  CHECK((J.topRows(2) - bundle.block(0)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((J.bottomRows(3) - bundle.block(1)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  const NoiseModel R = NoiseModel::from_config(fix.S);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(8), w(5);
    for (int i = 0; i < 8; ++i) v[i] = gauss(rng);
    for (int i = 0; i < 5; ++i) w[i] = gauss(rng);

    const Eigen::VectorXd Jv = bundle.apply_J(v);
    const Eigen::VectorXd Jtw = bundle.apply_Jt(w);
    const Eigen::VectorXd Fv = bundle.apply_F(v, R);

    CHECK((Jv - J * v).norm() < 1e-10 * (1.0 + Jv.norm()));
    CHECK((Jtw - J.transpose() * w).norm() < 1e-10 * (1.0 + Jtw.norm()));
    const Eigen::VectorXd F_ref =
        J.transpose() * R.apply_inverse(J * v);
    CHECK((Fv - F_ref).norm() < 1e-10 * (1.0 + Fv.norm()));
    CHECK(v.dot(Fv) >= -1e-12);
  }
}

TEST_CASE("forward and adjoint products are transposes of each other") {
  const MixedFixture fix;
  const JacobianBundle bundle(fix.model, fix.q0, fix.S, /*keep_explicit=*/false);
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(8), w(5);
    for (int i = 0; i < 8; ++i) v[i] = gauss(rng);
    for (int i = 0; i < 5; ++i) w[i] = gauss(rng);
    const double forward = w.dot(bundle.apply_J(v));
    const double adjoint = bundle.apply_Jt(w).dot(v);
    CHECK(forward == doctest::Approx(adjoint).epsilon(1e-10));
  }
}

TEST_CASE("lazy bundle assembles explicit blocks on demand") {
  const MixedFixture fix;
  const JacobianBundle eager(fix.model, fix.q0, fix.S, true);
  const JacobianBundle lazy(fix.model, fix.q0, fix.S, false);

  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  CHECK((eager.apply_J(v) - lazy.apply_J(v)).norm() < 1e-12);
  CHECK((lazy.block(1) - eager.block(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((lazy.stacked() - eager.stacked()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bundle construction rejects inconsistent inputs") {
  const StructuralModel model = tip_loaded_bar(4);
  const SensorConfig S = SensorConfig::broadcast({SensorSpec::displacement(2.0)}, 1);

  ParameterVector empty_q(Eigen::VectorXd::Ones(4));
  empty_q.set_inverted({});
  CHECK_THROWS_AS(JacobianBundle(model, empty_q, S), InvalidParameter);

  const ParameterVector q0(Eigen::VectorXd::Ones(4));
  const SensorConfig two_cases =
      SensorConfig::broadcast({SensorSpec::displacement(2.0)}, 2);
  CHECK_THROWS_AS(JacobianBundle(model, q0, two_cases), InvalidParameter);

  StructuralModel unloaded(Mesh1D::uniform(4, 1.0), 1.0, 1.0);
  CHECK_THROWS_AS(JacobianBundle(unloaded, q0, S), InvalidParameter);

  const StiffnessMatrix K = model.assemble_stiffness(q0);
  CHECK_THROWS_AS(solve_state_sensitivities(K, Eigen::MatrixXd::Zero(7, 2)),
                  InvalidParameter);
}

TEST_CASE("one-shot wrappers match the bundle products") {
  const MixedFixture fix;
  const JacobianBundle bundle(fix.model, fix.q0, fix.S);
  const NoiseModel R = NoiseModel::from_config(fix.S);

  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(8, 0.2, 1.4);
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, -0.5, 0.5);
  CHECK((apply_J(v, fix.q0, fix.S, fix.model) - bundle.apply_J(v)).norm() < 1e-12);
  CHECK((apply_Jt(w, fix.q0, fix.S, fix.model) - bundle.apply_Jt(w)).norm() < 1e-12);
  CHECK((apply_F(v, fix.q0, fix.S, fix.model, R) - bundle.apply_F(v, R)).norm() < 1e-12);

  const JacobianBundle direct = assemble_jacobian(fix.S, fix.q0, fix.model);
  CHECK((direct.stacked() - bundle.stacked()).cwiseAbs().maxCoeff() < 1e-12);
}
