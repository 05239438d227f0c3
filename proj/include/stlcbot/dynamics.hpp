#pragma once

#include <Eigen/Core>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlcbot {

/// Fixed-capacity dynamic vectors: at most 5 state and 2 control components.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 5, 1>;
using Control = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using Trajectory = std::vector<State>;

/// Simulation grid step (seconds).
inline constexpr double kGridStep = 0.1;

enum class ModelKind { SecondOrderUnicycle, SingleIntegrator2D };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct KinodynamicLimits {
  double v_max = 1.0;
  double v_min = 0.0;
  double a_max = 0.5;
  double yaw_rate_max = 0.6981;
  double yaw_accel_max = 2.0472;

  void validate() const;
  friend bool operator==(const KinodynamicLimits&, const KinodynamicLimits&) = default;
};

class NumericalBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unicycle state (x, y, theta, v, omega), control (a, alpha).
/// Integrator state (x, y), control (vx, vy).
class RobotModel {
 public:
  explicit RobotModel(ModelKind kind = ModelKind::SecondOrderUnicycle, KinodynamicLimits limits = {});

  ModelKind kind() const { return kind_; }
  const KinodynamicLimits& limits() const { return limits_; }
  int state_dim() const { return kind_ == ModelKind::SecondOrderUnicycle ? 5 : 2; }
  int control_dim() const { return 2; }

  State derivative(const State& x, const Control& u) const;

  /// Clamps v and omega into their limits and wraps theta to (-pi, pi].
  State project(State x) const;
  bool state_valid(const State& x, double tol = 1e-9) const;

  Control control_lower() const;
  Control control_upper() const;
  bool control_admissible(const Control& u, double tol = 1e-12) const;
  Control zero_control() const { return Control::Zero(control_dim()); }

  static Eigen::Vector2d position(const State& x) { return {x(0), x(1)}; }

 private:
  ModelKind kind_;
  KinodynamicLimits limits_;
};

double wrap_angle(double theta);

/// One classical RK4 step of x' = f(x).
template <class F, class V>
V rk4_step(F&& f, const V& x, double h) {
  const V k1 = f(x);
  const V k2 = f(V(x + 0.5 * h * k1));
  const V k3 = f(V(x + 0.5 * h * k2));
  const V k4 = f(V(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 integration of x' = f(x) over `steps` steps; returns the
/// states including the initial one.
template <class F, class V>
std::vector<V> rk4_integrate(F&& f, V x, double h, int steps) {
  std::vector<V> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x);
  for (int k = 0; k < steps; ++k) {
    x = rk4_step(f, x, h);
    out.push_back(x);
  }
  return out;
}

/// Number of grid steps in `horizon`; throws unless it is a positive multiple of `step`.
int grid_steps(double horizon, double step);

/// Holds u constant, integrates with RK4 at `step`, projecting after every
/// step. Returns floor(horizon/step) + 1 states starting at x.
Trajectory rk4_propagate(const RobotModel& model, const State& x, const Control& u, double step,
                         double horizon);

/// Local control window: admissible controls within `radius` (2-norm) of `center`.
class ControlWindow {
 public:
  ControlWindow(Control center, double radius, Control lower, Control upper);

  const Control& center() const { return center_; }
  double radius() const { return radius_; }
  /// Bounding box of ball intersected with the limit box.
  const Control& lower() const { return lo_; }
  const Control& upper() const { return hi_; }

  bool contains(const Control& u, double tol = 1e-12) const;
  /// Uniform sample by rejection from the bounding box.
  Control sample(std::mt19937_64& rng) const;

 private:
  Control center_;
  double radius_;
  Control box_lo_;
  Control box_hi_;
  Control lo_;
  Control hi_;
};

ControlWindow control_window(const Control& center, double radius, const RobotModel& model);

}  // namespace stlcbot
