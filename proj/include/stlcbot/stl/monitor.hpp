#pragma once

#include "stlcbot/stl/formula.hpp"
#include "stlcbot/stl/signal.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace stlcbot::stl {

class InsufficientHorizon : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental robustness monitor. Samples arrive in time order at a fixed dt;
/// robustness at a timestep becomes available once every sample its windows
/// read has been appended. Results equal eval_robustness on the accumulated
/// signal.
class Monitor {
 public:
  Monitor(Formula f, double dt, double t0 = 0.0, SignalLayout layout = {});
  ~Monitor();
  Monitor(Monitor&&) noexcept;
  Monitor& operator=(Monitor&&) noexcept;

  void add_sample(const Eigen::Ref<const Eigen::VectorXd>& sample);

  long samples() const;
  /// Number of leading timesteps whose robustness is computable.
  long covered() const;
  /// Throws InsufficientHorizon when the window of `step` is not covered.
  double robustness_at(long step) const;

  const Formula& formula() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stlcbot::stl
