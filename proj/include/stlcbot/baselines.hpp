#pragma once

#include "stlcbot/cbot.hpp"
#include "stlcbot/kcbs.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace stlcbot {

struct RrtParams {
  double goal_bias = 0.05;
  int max_iterations = 200000;
  double step_horizon = 1.0;
  /// Random controls tried per extension; the one ending closest to the
  /// sampled position is propagated (1 = a single random control).
  int controls_per_extension = 1;
  double time_budget = std::numeric_limits<double>::infinity();
  KinodynamicLimits limits;

  void validate(double horizon) const;
};

/// Kinodynamic RRT with the same request/constraint contract as cbot_plan.
PlanResult rrt_plan(const PlanRequest& request, const RrtParams& params = {});

LowLevelPlanner make_rrt_planner(RrtParams params = {});

/// Plans robots one after another in `order`; robot order[k] keeps out of the
/// plans of order[0..k) over [0, T]. Stops at the first robot that cannot be
/// planned (reported in failed_robot). Each low-level call is limited to the
/// time left of `time_budget` seconds.
MultiRobotPlan priority_plan(const Scenario& scenario, std::span<const int> order, const LowLevelPlanner& planner,
                             std::uint64_t seed = 0,
                             double time_budget = std::numeric_limits<double>::infinity());

/// Ascending order, or a permutation shuffled with `seed` when `shuffle` is set.
std::vector<int> priority_order(int robots, bool shuffle, std::uint64_t seed);

}  // namespace stlcbot
