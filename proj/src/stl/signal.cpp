#include "stlcbot/stl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stlcbot::stl {

int SignalLayout::block_of(int robot) const {
  if (robots.empty()) return robot;
  const auto it = std::find(robots.begin(), robots.end(), robot);
  return it == robots.end() ? -1 : static_cast<int>(it - robots.begin());
}

Signal::Signal(Eigen::MatrixXd samples, double dt, double t0, SignalLayout layout)
    : samples_(std::move(samples)), dt_(dt), t0_(t0), layout_(std::move(layout)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("signal dt must be positive");
  if (!std::isfinite(t0_)) throw std::invalid_argument("signal t0 must be finite");
  if (samples_.rows() == 0) throw std::invalid_argument("signal must have at least one sample");
  if (layout_.stride < 2 || layout_.offset < 0) throw std::invalid_argument("invalid signal layout");
  if (!layout_.robots.empty() && layout_.columns_for(static_cast<int>(layout_.robots.size())) > dimension())
    throw std::invalid_argument("signal layout needs more columns than the samples have");
}

Signal Signal::positions(int robot, const Eigen::Matrix<double, Eigen::Dynamic, 2>& xy, double dt,
                         double t0) {
  return Signal(Eigen::MatrixXd(xy), dt, t0, SignalLayout{{robot}, 2, 0});
}

bool Signal::has_robot(int robot) const {
  const int b = layout_.block_of(robot);
  return b >= 0 && layout_.offset + layout_.stride * (b + 1) <= dimension();
}

Eigen::Vector2d Signal::position(int robot, Eigen::Index k) const {
  const int b = layout_.block_of(robot);
  if (b < 0 || layout_.offset + layout_.stride * (b + 1) > dimension())
    throw EvaluationError("signal has no samples for robot " + std::to_string(robot));
  const int c = layout_.offset + layout_.stride * b;
  return {samples_(k, c), samples_(k, c + 1)};
}

}  // namespace stlcbot::stl
