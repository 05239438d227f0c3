#pragma once

#include "stlcbot/dynamics.hpp"
#include "stlcbot/geometry.hpp"
#include "stlcbot/stl/formula.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlcbot {

/// Workspace bounds, static box obstacles and the minimum clearance d_min.
struct Environment {
  std::string name = "empty";
  Box bounds = Box{Vec2::Zero(), Vec2(15.0, 15.0)};
  std::vector<Box> obstacles;
  double d_min = 0.1;

  void validate() const;
};

bool footprints_overlap(const Vec2& p_i, double s_i, const Vec2& p_j, double s_j, double margin);

/// Smallest max-norm distance to any obstacle (infinity without obstacles).
double obstacle_distance(const Environment& env, const Vec2& p);
/// Max-norm distance from p to the workspace boundary (negative outside).
double boundary_distance(const Environment& env, const Vec2& p);

/// Every sample keeps dist_inf >= d_min + footprint to all obstacles and stays
/// inside the bounds deflated by the footprint.
bool segment_clear(const Environment& env, std::span<const State> states, double footprint);
bool position_clear(const Environment& env, const Vec2& p, double footprint);

/// Static clearance of one robot as an STL formula over [0, horizon]:
/// distbox to every obstacle above d_min + footprint and the four bound half-spaces.
stl::Formula clearance_formula(const Environment& env, int robot, double footprint, double horizon);

enum class EnvironmentKind { Empty, CrossHall, Forest, BugTrap };

std::string to_string(EnvironmentKind k);
EnvironmentKind environment_kind_from_string(const std::string& s);

struct KeepOut {
  Vec2 center;
  double radius;
};

/// Generator sizes; defaults are the desk-scale benchmark layout.
struct EnvironmentParams {
  double size = 30.0;
  double corridor_width = 3.0;
  double forest_intensity = 40.0 / 900.0;  // obstacles per square metre
  double forest_obstacle_size = 1.0;
  double trap_size = 10.0;
  double trap_opening = 2.0;
  double trap_wall = 0.5;
  double d_min = 0.1;
  std::vector<KeepOut> keep_out;  // forest obstacles may not touch these discs
};

Environment make_environment(EnvironmentKind kind, std::uint64_t seed, const EnvironmentParams& params = {});

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RobotSpec {
  ModelKind model = ModelKind::SecondOrderUnicycle;
  double size = 0.2;  // half extent s_i
  State start;
  Vec2 goal = Vec2::Zero();
  double goal_radius = 0.3;
  /// Per-robot limits; planners fall back to their own defaults when unset.
  std::optional<KinodynamicLimits> limits;

  Vec2 start_position() const { return {start(0), start(1)}; }
};

/// (W, N, T, {s_i}, epsilon, robots) with start and goal placement.
struct Scenario {
  std::string name;
  Environment env;
  std::vector<RobotSpec> robots;
  double horizon = 50.0;
  double epsilon = 0.05;

  int team_size() const { return static_cast<int>(robots.size()); }
  /// Throws ScenarioError naming the violated invariant.
  void validate() const;
};

/// Robot-team placement for a benchmark environment: boundary ring with
/// antipodal goals (empty, bugtrap), corridor arms (crosshall), seeded random
/// positions (forest).
Scenario make_scenario(EnvironmentKind kind, int robots, std::uint64_t seed, EnvironmentParams params = {});

/// The 3-robot indoor layout (6.5 m x 5.5 m, six 0.2 m obstacles).
Scenario indoor_scenario();

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

bool operator==(const Environment& a, const Environment& b);
bool operator==(const RobotSpec& a, const RobotSpec& b);
bool operator==(const Scenario& a, const Scenario& b);

}  // namespace stlcbot
