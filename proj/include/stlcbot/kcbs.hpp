#pragma once

#include "stlcbot/cbot.hpp"
#include "stlcbot/stl/formula.hpp"
#include "stlcbot/world.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace stlcbot {

/// s_i + s_j + 2 epsilon + d_min.
double pair_threshold(double s_i, double s_j, double epsilon, double d_min);

/// G[0, T](pairdist(i, j) > s_i + s_j + 2 epsilon + d_min).
stl::Formula pair_safety_formula(int i, int j, double d_min, double s_i, double s_j, double epsilon,
                                 double horizon);

/// Pairwise safety requirement of a team: robots, footprints and the formula.
struct SafetyPair {
  int i;
  int j;
  double s_i;
  double s_j;
  double margin;  // 2 epsilon + d_min
  stl::Formula formula;

  double threshold() const { return s_i + s_j + margin; }
};

std::vector<SafetyPair> team_safety(const Scenario& scenario);

/// A pair and grid timestep (or coalesced step interval [t, t_end]) where the
/// pair's safety robustness is negative.
struct Conflict {
  int i;
  int j;
  long t;
  long t_end;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Streams [t, p_i(t), p_j(t)] for every pair i < j into a monitor of the
/// pair's safety body and reports every timestep with negative robustness.
/// Shorter plans hold their final state until the longest one ends. Conflicts
/// are grouped by pair and sorted by time.
std::vector<Conflict> stl_conflict_search(std::span<const PlanResult> plans, std::span<const SafetyPair> pairs);

/// Same contract with footprint-box intersection (world.footprints_overlap).
std::vector<Conflict> geometric_conflict_search(std::span<const PlanResult> plans, std::span<const SafetyPair> pairs);

/// Merges consecutive timesteps of the same pair into intervals.
std::vector<Conflict> coalesce(std::span<const Conflict> conflicts);

/// Keep-out constraint for `robot`: for every grid step in [from, to] its
/// position must stay more than `threshold` (max-norm) away from `other` at
/// that step. Evaluates on the constrained robot's signal alone.
stl::Formula moving_keep_out(int robot, const PlanResult& other, double threshold, long from, long to);

struct StlConstraint {
  int robot;
  stl::Formula formula;
  Conflict source;
};

/// Constraint for `robot` (one of the conflict's pair) against the other
/// robot's plan over the conflict interval padded by `padding` seconds and
/// clipped to [0, horizon].
StlConstraint constraint_from_conflict(const Conflict& conflict, int robot, const PlanResult& other_plan,
                                       double threshold, double padding, double horizon);

enum class ConflictDetector { Stl, Geometric };

struct KcbsParams {
  int merge_bound = 25;
  int node_budget = 2000;
  double time_budget = 60.0;  // seconds
  double padding = 0.5;       // seconds
  int root_attempts = 3;
  ConflictDetector detector = ConflictDetector::Stl;
  std::uint64_t seed = 0;
};

struct MultiRobotPlan {
  std::vector<PlanResult> plans;
  bool solved = false;
  double cost = 0.0;  // sum of path lengths
  int conflicts_resolved = 0;
  int nodes_expanded = 0;
  int merges = 0;
  double wall_time = 0.0;
  int failed_robot = -1;  // prioritised planning: first robot that could not be planned
  std::string diagnostics;
};

/// Robustness of phi_safety and phi_reachability on a plan: pairwise
/// separation on the stacked team signal and per-robot clearance and goal
/// reach through eval_ma_stl.
struct PlanValidation {
  bool satisfied = false;
  double min_robustness = -std::numeric_limits<double>::infinity();  // pairwise and clearance
  double reach_robustness = -std::numeric_limits<double>::infinity();
};

PlanValidation validate_plan(const Scenario& scenario, std::span<const PlanResult> plans);

/// Low-level request for robot `robot` of a scenario.
PlanRequest make_request(const Scenario& scenario, int robot, std::vector<stl::Formula> constraints,
                         std::uint64_t seed);

/// Kinodynamic conflict-based search with STL (or geometric) conflict detection
/// and merge-and-restart.
MultiRobotPlan kcbs_solve(const Scenario& scenario, const LowLevelPlanner& planner, const KcbsParams& params = {});

}  // namespace stlcbot
