#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace stlcbot::stl {

/// Column layout of a sample vector: `offset` leading columns, then one block
/// of `stride` columns per robot with the position in the first two.
/// An empty robot list maps robot r to block r.
struct SignalLayout {
  std::vector<int> robots;
  int stride = 2;
  int offset = 0;

  int block_of(int robot) const;  // -1 if absent
  int columns_for(int n_robots) const { return offset + stride * n_robots; }
};

/// Uniformly sampled signal; row k is the sample at time t0 + k * dt.
class Signal {
 public:
  Signal(Eigen::MatrixXd samples, double dt, double t0 = 0.0, SignalLayout layout = {});

  /// Signal of a single robot's positions (n x 2).
  static Signal positions(int robot, const Eigen::Matrix<double, Eigen::Dynamic, 2>& xy,
                          double dt, double t0 = 0.0);

  Eigen::Index size() const { return samples_.rows(); }
  int dimension() const { return static_cast<int>(samples_.cols()); }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  double time(Eigen::Index k) const { return t0_ + static_cast<double>(k) * dt_; }
  double end_time() const { return time(size() - 1); }
  const SignalLayout& layout() const { return layout_; }
  const Eigen::MatrixXd& samples() const { return samples_; }

  bool has_robot(int robot) const;
  /// Throws EvaluationError if the robot has no block in this signal.
  Eigen::Vector2d position(int robot, Eigen::Index k) const;

 private:
  Eigen::MatrixXd samples_;
  double dt_;
  double t0_;
  SignalLayout layout_;
};

/// Raised when a formula cannot be evaluated on the given signal
/// (empty effective window, missing robot, unbound goal).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stlcbot::stl
