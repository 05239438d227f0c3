#include "stlcbot/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace stlcbot {

void RrtParams::validate(double horizon) const {
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw PlanningError("goal bias must lie in [0, 1]");
  if (max_iterations < 1) throw PlanningError("max_iterations must be positive");
  if (controls_per_extension < 1) throw PlanningError("at least one control per extension is required");
  grid_steps(step_horizon, kGridStep);
  if (!(horizon > 0.0) || step_horizon > horizon) throw PlanningError("propagation horizon exceeds the plan horizon");
  limits.validate();
}

namespace {

struct RrtNode {
  State state;
  long step;
  int parent;
  Control control;
  Trajectory segment;
};

}  // namespace

PlanResult rrt_plan(const PlanRequest& request, const RrtParams& params) {
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  if (request.env == nullptr) throw PlanningError("plan request has no environment");
  params.validate(request.horizon);
  const RobotModel model(request.spec.model, request.spec.limits.value_or(params.limits));
  const SegmentChecker checker(request);
  const State& x0 = request.spec.start;
  if (x0.size() != model.state_dim() || !model.state_valid(x0)) throw PlanningError("invalid start state");
  if (!checker.satisfied(Trajectory{x0}, 0.0)) throw PlanningError("start state violates the constraints");

  const long steps_per = grid_steps(params.step_horizon, kGridStep);
  const long max_steps = static_cast<long>(std::floor(request.horizon / kGridStep + 1e-9));
  std::vector<RrtNode> tree{{x0, 0, -1, model.zero_control(), Trajectory{x0}}};
  std::vector<Vec2> positions{RobotModel::position(x0)};
  double closest = (positions.front() - request.spec.goal).norm();

  auto build = [&](int leaf, bool solved, int iterations, std::vector<double> progress) {
    std::vector<int> chain;
    for (int n = leaf; n >= 0; n = tree[static_cast<std::size_t>(n)].parent) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());
    PlanResult r;
    r.states.push_back(x0);
    for (std::size_t c = 1; c < chain.size(); ++c) {
      const RrtNode& node = tree[static_cast<std::size_t>(chain[c])];
      for (std::size_t k = 1; k < node.segment.size(); ++k) {
        r.states.push_back(node.segment[k]);
        r.controls.push_back(node.control);
      }
    }
    r.path_length = path_length(r.states);
    r.solved = solved;
    r.iterations = iterations;
    r.nodes = static_cast<int>(tree.size());
    r.progress = std::move(progress);
    r.wall_time = elapsed();
    return r;
  };

  if (goal_arrival(tree.front().segment, request.spec) == 0 && checker.hold_satisfied(x0, 0.0))
    return build(0, true, 0, {});

  std::mt19937_64 rng(request.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box& b = request.env->bounds;
  const Control lo = model.control_lower();
  const Control hi = model.control_upper();
  std::vector<double> progress;

  int iteration = 0;
  const double budget = std::min(params.time_budget, request.time_limit);
  while (iteration < params.max_iterations && elapsed() < budget) {
    ++iteration;
    const Vec2 target = unit(rng) < params.goal_bias
                            ? request.spec.goal
                            : Vec2(b.lower().x() + unit(rng) * 2.0 * b.half.x(), b.lower().y() + unit(rng) * 2.0 * b.half.y());
    int near = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const double d = (positions[k] - target).squaredNorm();
      if (d < best) {
        best = d;
        near = static_cast<int>(k);
      }
    }
    const RrtNode node = tree[static_cast<std::size_t>(near)];
    if (node.step + steps_per > max_steps) {
      progress.push_back(closest);
      continue;
    }
    Trajectory segment;
    Control u;
    double seg_best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < params.controls_per_extension; ++c) {
      Control cand(model.control_dim());
      for (Eigen::Index d = 0; d < cand.size(); ++d) cand(d) = lo(d) + unit(rng) * (hi(d) - lo(d));
      if (!model.control_admissible(cand)) cand = cand.cwiseMax(lo).cwiseMin(hi);
      try {
        Trajectory seg = rk4_propagate(model, node.state, cand, kGridStep, params.step_horizon);
        const double d = (RobotModel::position(seg.back()) - target).squaredNorm();
        if (d < seg_best) {
          seg_best = d;
          segment = std::move(seg);
          u = cand;
        }
      } catch (const NumericalBlowUp&) {
      }
    }
    if (segment.empty()) {
      progress.push_back(closest);
      continue;
    }
    const double t0 = static_cast<double>(node.step) * kGridStep;
    const int arrival = goal_arrival(segment, request.spec);
    bool at_goal = false;
    if (arrival > 0) {
      Trajectory truncated(segment.begin(), segment.begin() + arrival + 1);
      if (checker.satisfied(truncated, t0) && checker.hold_satisfied(truncated.back(), t0 + arrival * kGridStep)) {
        segment = std::move(truncated);
        at_goal = true;
      }
    }
    if (at_goal || checker.satisfied(segment, t0)) {
      const long step = node.step + static_cast<long>(segment.size()) - 1;
      tree.push_back({segment.back(), step, near, u, std::move(segment)});
      positions.push_back(RobotModel::position(tree.back().state));
      closest = std::min(closest, (positions.back() - request.spec.goal).norm());
      if (at_goal) {
        progress.push_back(closest);
        return build(static_cast<int>(tree.size()) - 1, true, iteration, std::move(progress));
      }
    }
    progress.push_back(closest);
  }

  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double d = (positions[k] - request.spec.goal).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return build(best, false, iteration, std::move(progress));
}

LowLevelPlanner make_rrt_planner(RrtParams params) {
  return [params](const PlanRequest& request) { return rrt_plan(request, params); };
}

std::vector<int> priority_order(int robots, bool shuffle, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(robots));
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

MultiRobotPlan priority_plan(const Scenario& scenario, std::span<const int> order, const LowLevelPlanner& planner,
                             std::uint64_t seed, double time_budget) {
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
  scenario.validate();
  const int n = scenario.team_size();
  std::vector<int> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < n; ++k)
    if (static_cast<int>(sorted.size()) != n || sorted[static_cast<std::size_t>(k)] != k)
      throw std::invalid_argument("priority order must be a permutation of the robots");

  MultiRobotPlan out;
  out.plans.resize(static_cast<std::size_t>(n));
  const long last = static_cast<long>(std::floor(scenario.horizon / kGridStep + 1e-9));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int r = order[k];
    std::vector<stl::Formula> constraints;
    for (std::size_t q = 0; q < k; ++q) {
      const int p = order[q];
      constraints.push_back(moving_keep_out(
          r, out.plans[static_cast<std::size_t>(p)],
          pair_threshold(scenario.robots[static_cast<std::size_t>(r)].size,
                         scenario.robots[static_cast<std::size_t>(p)].size, scenario.epsilon, scenario.env.d_min),
          0, last));
    }
    PlanRequest request = make_request(scenario, r, std::move(constraints), seed + static_cast<std::uint64_t>(r));
    request.time_limit = time_budget - elapsed();
    PlanResult plan = planner(request);
    ++out.nodes_expanded;
    const bool ok = plan.solved;
    out.plans[static_cast<std::size_t>(r)] = std::move(plan);
    if (!ok) {
      out.failed_robot = r;
      out.diagnostics = "robot " + std::to_string(r) + " could not be planned";
      out.plans.clear();
      out.wall_time = elapsed();
      return out;
    }
  }
  for (const auto& p : out.plans) out.cost += p.path_length;
  const PlanValidation v = validate_plan(scenario, out.plans);
  out.solved = v.satisfied;
  if (!v.satisfied) out.diagnostics = "prioritised plan failed validation";
  out.wall_time = elapsed();
  return out;
}

}  // namespace stlcbot
