#include "doctest.h"

#include "stlcbot/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace stlcbot;

namespace {

State unicycle(double x, double y, double theta, double v, double omega) {
  State s(5);
  s << x, y, theta, v, omega;
  return s;
}

Control control(double a, double b) {
  Control u(2);
  u << a, b;
  return u;
}

/// Endpoint error of RK4 on x' = -x, x(0) = 1, integrated to t = 1.
double decay_error(double h) {
  using V = Eigen::Matrix<double, 1, 1>;
  const int steps = static_cast<int>(std::lround(1.0 / h));
  const auto xs = rk4_integrate([](const V& x) -> V { return -x; }, V(1.0), h, steps);
  return std::abs(xs.back()(0) - std::exp(-1.0));
}

}  // namespace

TEST_CASE("model derivatives") {
  const RobotModel uni;
  CHECK(uni.derivative(unicycle(1, 2, 0.3, 0, 0), control(0, 0)).isZero());
  const State d = uni.derivative(unicycle(0, 0, 0, 1, 0), control(0.2, -0.1));
  CHECK(d(0) == 1.0);
  CHECK(d(1) == 0.0);
  CHECK(d(2) == 0.0);
  CHECK(d(3) == 0.2);
  CHECK(d(4) == -0.1);

  const RobotModel integ(ModelKind::SingleIntegrator2D);
  State p(2);
  p << 3.0, 4.0;
  const State dp = integ.derivative(p, control(0.3, -0.4));
  CHECK(dp(0) == 0.3);
  CHECK(dp(1) == -0.4);
}

TEST_CASE("limit validation") {
  KinodynamicLimits l;
  CHECK_NOTHROW(l.validate());
  l.v_min = 2.0;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
  l = {};
  l.a_max = -1.0;
  CHECK_THROWS_AS(RobotModel(ModelKind::SecondOrderUnicycle, l), std::invalid_argument);
  CHECK(model_kind_from_string(to_string(ModelKind::SingleIntegrator2D)) == ModelKind::SingleIntegrator2D);
  CHECK_THROWS_AS(model_kind_from_string("hovercraft"), std::invalid_argument);
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  for (double t = -20.0; t < 20.0; t += 0.37) {
    const double w = wrap_angle(t);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::remainder(w - t, 2 * pi) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("straight-line motion of the integrator is exact") {
  const RobotModel integ(ModelKind::SingleIntegrator2D);
  State p(2);
  p << 1.0, -2.0;
  const Trajectory tr = rk4_propagate(integ, p, control(0.3, -0.4), kGridStep, 2.0);
  REQUIRE(tr.size() == 21);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double t = kGridStep * static_cast<double>(k);
    CHECK(tr[k](0) == doctest::Approx(1.0 + 0.3 * t).epsilon(1e-14));
    CHECK(tr[k](1) == doctest::Approx(-2.0 - 0.4 * t).epsilon(1e-14));
  }
}

TEST_CASE("RK4 is fourth order on exponential decay") {
  double h = 0.1;
  for (int halving = 0; halving < 3; ++halving) {
    const double ratio = decay_error(h) / decay_error(h / 2);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
    h /= 2;
  }
}

TEST_CASE("constant turn rate traces a circular arc") {
  const RobotModel uni;
  const Trajectory tr = rk4_propagate(uni, unicycle(0, 0, 0, 1.0, 0.5), control(0, 0), kGridStep, 1.0);
  REQUIRE(tr.size() == 11);
  const double radius = 2.0;
  const double phi = 0.5;
  CHECK(std::abs(tr.back()(0) - radius * std::sin(phi)) <= 1e-6);
  CHECK(std::abs(tr.back()(1) - radius * (1 - std::cos(phi))) <= 1e-6);
  CHECK(tr.back()(2) == doctest::Approx(phi));
}

TEST_CASE("propagation keeps every state inside the limits") {
  const RobotModel uni;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-0.5, 0.5);
  std::uniform_real_distribution<double> alpha(-2.0472, 2.0472);
  std::uniform_real_distribution<double> theta(-3.0, 3.0);
  for (int n = 0; n < 200; ++n) {
    const State x0 = unicycle(0, 0, theta(rng), 0.9, 0.6);
    const Trajectory tr = rk4_propagate(uni, x0, control(a(rng), alpha(rng)), kGridStep, 3.0);
    for (const State& s : tr) CHECK(uni.state_valid(s));
  }
  // Full acceleration saturates at v_max rather than overshooting it.
  const Trajectory tr = rk4_propagate(uni, unicycle(0, 0, 0, 0.95, 0), control(0.5, 0), kGridStep, 2.0);
  CHECK(tr.back()(3) == 1.0);
}

TEST_CASE("propagation is deterministic and validates its grid") {
  const RobotModel uni;
  const State x0 = unicycle(0.3, -0.1, 1.0, 0.4, 0.2);
  const Trajectory a = rk4_propagate(uni, x0, control(0.1, -0.3), kGridStep, 1.0);
  const Trajectory b = rk4_propagate(uni, x0, control(0.1, -0.3), kGridStep, 1.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k].array() == b[k].array()).all());

  CHECK_THROWS_AS(rk4_propagate(uni, x0, control(0, 0), kGridStep, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(rk4_propagate(uni, x0, control(0, 0), kGridStep, 0.0), std::invalid_argument);
  CHECK(grid_steps(1.0, kGridStep) == 10);
  CHECK(grid_steps(0.3, kGridStep) == 3);
}

TEST_CASE("non-finite integration is reported") {
  const RobotModel integ(ModelKind::SingleIntegrator2D);
  State p(2);
  p << 1e308, 0.0;
  CHECK_THROWS_AS(rk4_propagate(integ, p, control(1e308, 0), kGridStep, 1.0), NumericalBlowUp);
}

TEST_CASE("control windows") {
  const RobotModel uni;
  std::mt19937_64 rng(2);

  SUBCASE("a window at the box corner is clipped to the box") {
    const ControlWindow w = control_window(uni.control_upper(), 0.4, uni);
    for (int n = 0; n < 500; ++n) {
      const Control u = w.sample(rng);
      CHECK(uni.control_admissible(u));
      CHECK((u - w.center()).norm() <= 0.4 + 1e-12);
    }
    CHECK(w.upper().isApprox(uni.control_upper()));
  }
  SUBCASE("a radius beyond the box diameter covers the whole box") {
    const ControlWindow w = control_window(uni.zero_control(), 100.0, uni);
    CHECK(w.lower().isApprox(uni.control_lower()));
    CHECK(w.upper().isApprox(uni.control_upper()));
    CHECK(w.contains(uni.control_lower()));
    CHECK(w.contains(uni.control_upper()));
  }
  SUBCASE("rejection samples stay in the ball") {
    const ControlWindow w = control_window(control(0.1, -0.5), 0.3, uni);
    double max_norm = 0.0;
    for (int n = 0; n < 2000; ++n) {
      const Control u = w.sample(rng);
      max_norm = std::max(max_norm, (u - control(0.1, -0.5)).norm());
      CHECK(w.contains(u));
    }
    CHECK(max_norm <= 0.3);
    CHECK(max_norm > 0.25);  // the ball is filled, not just its core
  }
  SUBCASE("non-positive radius is rejected") {
    CHECK_THROWS_AS(control_window(uni.zero_control(), 0.0, uni), std::invalid_argument);
  }
}
