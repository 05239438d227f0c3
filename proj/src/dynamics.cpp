#include "stlcbot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stlcbot {

std::string to_string(ModelKind k) {
  return k == ModelKind::SecondOrderUnicycle ? "unicycle" : "integrator";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "unicycle") return ModelKind::SecondOrderUnicycle;
  if (s == "integrator") return ModelKind::SingleIntegrator2D;
  throw std::invalid_argument("unknown robot model '" + s + "'");
}

void KinodynamicLimits::validate() const {
  if (v_min < 0 || v_max < 0 || a_max < 0 || yaw_rate_max < 0 || yaw_accel_max < 0)
    throw std::invalid_argument("kinodynamic limits must be nonnegative");
  if (v_min > v_max) throw std::invalid_argument("v_min exceeds v_max");
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(theta, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

RobotModel::RobotModel(ModelKind kind, KinodynamicLimits limits) : kind_(kind), limits_(limits) {
  limits_.validate();
}

State RobotModel::derivative(const State& x, const Control& u) const {
  State dx(state_dim());
  if (kind_ == ModelKind::SecondOrderUnicycle) {
    dx << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), x(4), u(0), u(1);
  } else {
    dx << u(0), u(1);
  }
  return dx;
}

State RobotModel::project(State x) const {
  if (kind_ == ModelKind::SecondOrderUnicycle) {
    x(2) = wrap_angle(x(2));
    x(3) = std::clamp(x(3), limits_.v_min, limits_.v_max);
    x(4) = std::clamp(x(4), -limits_.yaw_rate_max, limits_.yaw_rate_max);
  }
  return x;
}

bool RobotModel::state_valid(const State& x, double tol) const {
  if (x.size() != state_dim() || !x.allFinite()) return false;
  if (kind_ == ModelKind::SingleIntegrator2D) return true;
  constexpr double pi = std::numbers::pi;
  return x(3) >= limits_.v_min - tol && x(3) <= limits_.v_max + tol &&
         std::abs(x(4)) <= limits_.yaw_rate_max + tol && x(2) > -pi - tol && x(2) <= pi + tol;
}

Control RobotModel::control_lower() const {
  Control c(2);
  if (kind_ == ModelKind::SecondOrderUnicycle)
    c << -limits_.a_max, -limits_.yaw_accel_max;
  else
    c << -limits_.v_max, -limits_.v_max;
  return c;
}

Control RobotModel::control_upper() const { return -control_lower(); }

bool RobotModel::control_admissible(const Control& u, double tol) const {
  if (u.size() != control_dim() || !u.allFinite()) return false;
  if (kind_ == ModelKind::SingleIntegrator2D) return u.norm() <= limits_.v_max + tol;
  return ((u - control_lower()).array() >= -tol).all() && ((control_upper() - u).array() >= -tol).all();
}

int grid_steps(double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("step and horizon must be positive");
  const double ratio = horizon / step;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6)
    throw std::invalid_argument("horizon must be a positive multiple of the step");
  return static_cast<int>(n);
}

Trajectory rk4_propagate(const RobotModel& model, const State& x, const Control& u, double step,
                         double horizon) {
  const int steps = grid_steps(horizon, step);
  Trajectory out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x);
  const auto f = [&](const State& s) { return model.derivative(s, u); };
  State cur = x;
  for (int k = 0; k < steps; ++k) {
    cur = model.project(rk4_step(f, cur, step));
    if (!cur.allFinite()) throw NumericalBlowUp("non-finite state during RK4 propagation");
    out.push_back(cur);
  }
  return out;
}

ControlWindow::ControlWindow(Control center, double radius, Control lower, Control upper)
    : center_(std::move(center)), radius_(radius), box_lo_(std::move(lower)), box_hi_(std::move(upper)) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("window radius must be positive");
  center_ = center_.cwiseMax(box_lo_).cwiseMin(box_hi_);
  lo_ = (center_.array() - radius_).matrix().cwiseMax(box_lo_);
  hi_ = (center_.array() + radius_).matrix().cwiseMin(box_hi_);
}

bool ControlWindow::contains(const Control& u, double tol) const {
  return (u - center_).norm() <= radius_ + tol && ((u - box_lo_).array() >= -tol).all() &&
         ((box_hi_ - u).array() >= -tol).all();
}

Control ControlWindow::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Control u(center_.size());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (Eigen::Index d = 0; d < u.size(); ++d) u(d) = lo_(d) + (hi_(d) - lo_(d)) * unit(rng);
    if ((u - center_).norm() <= radius_) return u;
  }
  return center_;
}

ControlWindow control_window(const Control& center, double radius, const RobotModel& model) {
  Control lo = model.control_lower();
  Control hi = model.control_upper();
  return ControlWindow(center, radius, lo, hi);
}

}  // namespace stlcbot
