#pragma once

#include "stlcbot/dynamics.hpp"
#include "stlcbot/stl/formula.hpp"
#include "stlcbot/stl/signal.hpp"
#include "stlcbot/world.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace stlcbot {

class PlanningError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time-stamped plan on the 0.1 s grid: states[k] at k * dt, controls[k]
/// applied on [k * dt, (k + 1) * dt).
struct PlanResult {
  Trajectory states;
  std::vector<Control> controls;
  double dt = kGridStep;
  double path_length = 0.0;
  bool solved = false;
  int iterations = 0;
  int nodes = 0;
  double wall_time = 0.0;
  /// Smallest distance to the goal reached by the tree after each iteration.
  std::vector<double> progress;

  double duration() const { return states.empty() ? 0.0 : dt * static_cast<double>(states.size() - 1); }
  /// Position of the plan at grid step k, holding the final state beyond the end.
  Vec2 position_at(long k) const;
};

/// Sum of Euclidean position increments.
double path_length(const Trajectory& states);

/// Position-only signal of a plan for robot `robot`, optionally held at its
/// final position until `hold_until` seconds.
stl::Signal plan_signal(const PlanResult& plan, int robot, double hold_until = 0.0);

/// One low-level planning problem: a robot of a scenario with the extra STL
/// constraints imposed on it by a coordinator.
struct PlanRequest {
  int robot = 0;
  RobotSpec spec;
  const Environment* env = nullptr;
  double epsilon = 0.0;  // tracking slack added to the footprint
  double horizon = 50.0;
  std::vector<stl::Formula> constraints;
  std::uint64_t seed = 0;
  /// Wall-clock limit in seconds imposed by the caller; the planner stops at
  /// the earlier of this and its own time budget.
  double time_limit = std::numeric_limits<double>::infinity();

  double footprint() const { return spec.size + epsilon; }
};

/// Interchangeable low-level planner (cBOT or kinodynamic RRT).
using LowLevelPlanner = std::function<PlanResult(const PlanRequest&)>;

struct CbotParams {
  double window_radius = 0.0;  // 0 selects the control-box half-diagonal
  int candidates = 15;
  double step_horizon = 1.0;
  int max_iterations = 3000;
  double time_budget = std::numeric_limits<double>::infinity();  // seconds
  double noise_variance = 1e-4;
  bool refine_lengthscales = false;
  KinodynamicLimits limits;

  void validate(double horizon) const;
  double resolved_window_radius(const RobotModel& model) const;
};

/// Outcome of propagating one candidate control.
struct CandidateEvaluation {
  Trajectory segment;
  double cost = std::numeric_limits<double>::infinity();
  /// c_1 (static clearance) followed by one entry per active constraint;
  /// every entry is <= 0 when feasible, +inf after a numerical blow-up.
  Eigen::VectorXd margins;
  bool finite() const { return std::isfinite(cost) && margins.allFinite(); }
  bool feasible() const { return finite() && (margins.array() <= 0.0).all(); }
};

/// Static clearance formula, extra constraints and the time-shift helpers the
/// planners share.
class SegmentChecker {
 public:
  explicit SegmentChecker(const PlanRequest& request);

  /// Indices of constraints whose support overlaps [t0, t1].
  std::vector<int> active(double t0, double t1) const;
  /// Robustness of the static clearance and of each listed constraint on the
  /// segment starting at time t0.
  Eigen::VectorXd margins(const Trajectory& segment, double t0, std::span<const int> active) const;
  /// Every sample satisfies clearance and all extra constraints.
  bool satisfied(const Trajectory& segment, double t0) const;
  /// Holding `x` from t0 on violates no extra constraint.
  bool hold_satisfied(const State& x, double t0) const;
  stl::Signal segment_signal(const Trajectory& segment, double t0) const;

  const stl::Formula& clearance() const { return clearance_; }

 private:
  const PlanRequest& request_;
  stl::Formula clearance_;
  double hold_until_;
};

/// Evaluates J = endpoint distance to goal and the constraint margins of a
/// candidate control applied at (x, t0).
CandidateEvaluation evaluate_candidate(const RobotModel& model, const SegmentChecker& checker,
                                       const PlanRequest& request, const State& x, double t0,
                                       const Control& u, double step_horizon,
                                       std::span<const int> active);

/// CEI selection over evaluated candidates. Returns the chosen index or -1
/// if no candidate has finite evaluations.
int select_control(std::span<const Control> controls, std::span<const CandidateEvaluation> evaluations,
                   double noise_variance = 1e-4, bool refine = false);

/// First index of `segment` within goal_radius of the goal (max-norm), or -1.
int goal_arrival(const Trajectory& segment, const RobotSpec& spec);

/// Constrained BO tree search for one robot.
PlanResult cbot_plan(const PlanRequest& request, const CbotParams& params = {});

LowLevelPlanner make_cbot_planner(CbotParams params = {});

}  // namespace stlcbot
