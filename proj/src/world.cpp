#include "stlcbot/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace stlcbot {

void Environment::validate() const {
  if (!bounds.center.allFinite() || !(bounds.half.array() > 0.0).all())
    throw ScenarioError("environment bounds must have positive extent");
  if (!(d_min >= 0.0)) throw ScenarioError("d_min must be nonnegative");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const Box& o = obstacles[k];
    if (!(o.half.array() > 0.0).all() || !o.center.allFinite())
      throw ScenarioError("obstacles[" + std::to_string(k) + "] must have positive extent");
    if (!bounds.contains(o)) throw ScenarioError("obstacles[" + std::to_string(k) + "] leaves the bounds");
  }
}

bool footprints_overlap(const Vec2& p_i, double s_i, const Vec2& p_j, double s_j, double margin) {
  return (p_i - p_j).cwiseAbs().maxCoeff() < s_i + s_j + margin;
}

double obstacle_distance(const Environment& env, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const Box& o : env.obstacles) d = std::min(d, dist_inf(p, o));
  return d;
}

double boundary_distance(const Environment& env, const Vec2& p) {
  const Vec2 lo = p - env.bounds.lower();
  const Vec2 hi = env.bounds.upper() - p;
  return std::min(lo.minCoeff(), hi.minCoeff());
}

bool position_clear(const Environment& env, const Vec2& p, double footprint) {
  const Vec2 lo = env.bounds.lower().array() + footprint;
  const Vec2 hi = env.bounds.upper().array() - footprint;
  if ((p.array() < lo.array()).any() || (p.array() > hi.array()).any()) return false;
  const double need = env.d_min + footprint;
  for (const Box& o : env.obstacles)
    if (dist_inf(p, o) < need) return false;
  return true;
}

bool segment_clear(const Environment& env, std::span<const State> states, double footprint) {
  return std::all_of(states.begin(), states.end(),
                     [&](const State& x) { return position_clear(env, RobotModel::position(x), footprint); });
}

stl::Formula clearance_formula(const Environment& env, int robot, double footprint, double horizon) {
  using stl::Formula;
  using stl::Predicate;
  std::vector<Formula> parts;
  for (const Box& o : env.obstacles)
    parts.push_back(Formula::atom(Predicate::dist_to_box(robot, o.center, o.half, env.d_min + footprint)));
  const Vec2 lo = env.bounds.lower().array() + footprint;
  const Vec2 hi = env.bounds.upper().array() - footprint;
  parts.push_back(Formula::atom(Predicate::half_space(robot, Vec2(1, 0), lo.x())));
  parts.push_back(Formula::atom(Predicate::half_space(robot, Vec2(0, 1), lo.y())));
  parts.push_back(Formula::atom(Predicate::half_space(robot, Vec2(-1, 0), -hi.x())));
  parts.push_back(Formula::atom(Predicate::half_space(robot, Vec2(0, -1), -hi.y())));
  return Formula::always({0.0, horizon}, Formula::conjunction(parts));
}

std::string to_string(EnvironmentKind k) {
  switch (k) {
    case EnvironmentKind::Empty:
      return "empty";
    case EnvironmentKind::CrossHall:
      return "crosshall";
    case EnvironmentKind::Forest:
      return "forest";
    case EnvironmentKind::BugTrap:
      return "bugtrap";
  }
  return {};
}

EnvironmentKind environment_kind_from_string(const std::string& s) {
  if (s == "empty") return EnvironmentKind::Empty;
  if (s == "crosshall") return EnvironmentKind::CrossHall;
  if (s == "forest") return EnvironmentKind::Forest;
  if (s == "bugtrap") return EnvironmentKind::BugTrap;
  throw std::invalid_argument("unknown environment kind '" + s + "'");
}

namespace {

Box square_bounds(double size) { return Box{Vec2::Zero(), Vec2::Constant(0.5 * size)}; }

std::vector<Box> crosshall_blocks(double size, double width) {
  const double inner = 0.5 * width;
  const double outer = 0.5 * size;
  std::vector<Box> blocks;
  for (double sx : {1.0, -1.0})
    for (double sy : {1.0, -1.0}) {
      const Vec2 a(sx * inner, sy * inner);
      const Vec2 b(sx * outer, sy * outer);
      blocks.push_back(Box::from_corners(a.cwiseMin(b), a.cwiseMax(b)));
    }
  return blocks;
}

std::vector<Box> forest_obstacles(std::uint64_t seed, const EnvironmentParams& p) {
  std::mt19937_64 rng(seed);
  const double area = p.size * p.size;
  std::poisson_distribution<int> count(p.forest_intensity * area);
  const int n = count(rng);
  const double h = 0.5 * p.forest_obstacle_size;
  std::uniform_real_distribution<double> coord(-0.5 * p.size + h, 0.5 * p.size - h);
  std::vector<Box> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > 10000) throw ScenarioError("forest rejection sampling exceeded 10^4 attempts");
    const Box b{Vec2(coord(rng), coord(rng)), Vec2::Constant(h)};
    const bool blocked = std::any_of(p.keep_out.begin(), p.keep_out.end(),
                                     [&](const KeepOut& k) { return dist_inf(k.center, b) <= k.radius; });
    if (!blocked) out.push_back(b);
  }
  return out;
}

std::vector<Box> bugtrap_walls(const EnvironmentParams& p) {
  const double a = 0.5 * p.trap_size;
  const double t = p.trap_wall;
  const double o = 0.5 * p.trap_opening;
  return {
      Box::from_corners({-a, -a}, {-a + t, a}),         // back wall
      Box::from_corners({-a, a - t}, {a, a}),           // top wall
      Box::from_corners({-a, -a}, {a, -a + t}),         // bottom wall
      Box::from_corners({a - t, o}, {a, a - t}),        // upper lip
      Box::from_corners({a - t, -a + t}, {a, -o}),      // lower lip
  };
}

}  // namespace

Environment make_environment(EnvironmentKind kind, std::uint64_t seed, const EnvironmentParams& params) {
  Environment env;
  env.name = to_string(kind);
  env.bounds = square_bounds(params.size);
  env.d_min = params.d_min;
  switch (kind) {
    case EnvironmentKind::Empty:
      break;
    case EnvironmentKind::CrossHall:
      env.obstacles = crosshall_blocks(params.size, params.corridor_width);
      break;
    case EnvironmentKind::Forest:
      env.obstacles = forest_obstacles(seed, params);
      break;
    case EnvironmentKind::BugTrap:
      env.obstacles = bugtrap_walls(params);
      break;
  }
  env.validate();
  return env;
}

void Scenario::validate() const {
  env.validate();
  if (!(horizon > 0.0)) throw ScenarioError("horizon_T must be positive");
  if (!(epsilon >= 0.0)) throw ScenarioError("epsilon must be nonnegative");
  if (robots.empty()) throw ScenarioError("robots: scenario has no robots");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const RobotSpec& r = robots[i];
    const std::string at = "robots[" + std::to_string(i) + "]";
    if (r.limits) r.limits->validate();
    const RobotModel model(r.model, r.limits.value_or(KinodynamicLimits{}));
    if (!(r.size > 0.0)) throw ScenarioError(at + ".s_i must be positive");
    if (!(r.goal_radius > 0.0)) throw ScenarioError(at + ".r_goal must be positive");
    if (!model.state_valid(r.start)) throw ScenarioError(at + ".start is not a valid state");
    auto clear = [&](const Vec2& p) {
      return boundary_distance(env, p) >= r.size && obstacle_distance(env, p) >= r.size + env.d_min;
    };
    if (!clear(r.start_position())) throw ScenarioError(at + ".start is not in free space");
    if (!clear(r.goal)) throw ScenarioError(at + ".goal is not in free space");
    for (std::size_t j = 0; j < i; ++j) {
      const RobotSpec& o = robots[j];
      if (norm_inf(r.start_position() - o.start_position()) < r.size + o.size + 2.0 * epsilon)
        throw ScenarioError(at + ".start overlaps robots[" + std::to_string(j) + "].start");
    }
  }
}

namespace {

State unicycle_start(const Vec2& p, const Vec2& goal) {
  State s(5);
  s << p.x(), p.y(), wrap_angle(std::atan2(goal.y() - p.y(), goal.x() - p.x())), 0.0, 0.0;
  return s;
}

RobotSpec robot_at(const Vec2& start, const Vec2& goal) {
  RobotSpec r;
  r.start = unicycle_start(start, goal);
  r.goal = goal;
  return r;
}

}  // namespace

Scenario make_scenario(EnvironmentKind kind, int robots, std::uint64_t seed, EnvironmentParams params) {
  if (robots < 1) throw std::invalid_argument("team size must be positive");
  Scenario sc;
  sc.name = to_string(kind) + "_n" + std::to_string(robots) + "_s" + std::to_string(seed);
  const double ring = 0.4 * params.size;

  std::vector<std::pair<Vec2, Vec2>> tasks;
  switch (kind) {
    case EnvironmentKind::Empty:
    case EnvironmentKind::BugTrap:
      for (int k = 0; k < robots; ++k) {
        const double a = 2.0 * std::numbers::pi * k / robots;
        const Vec2 p = ring * Vec2(std::cos(a), std::sin(a));
        tasks.emplace_back(p, -p);
      }
      break;
    case EnvironmentKind::CrossHall: {
      // one lane per direction: outbound robots drive on their right
      const Vec2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      const double lane = std::min(0.7, 0.25 * params.corridor_width);
      const double spacing = 2.0;
      for (int k = 0; k < robots; ++k) {
        const Vec2 d = dirs[k % 4];
        const Vec2 lateral(-d.y(), d.x());
        // robots queued in one arm: the one nearest the centre drives furthest
        const int in_arm = (robots - k % 4 + 3) / 4;
        const int q = k / 4;
        const double r_start = ring - spacing * q;
        const double r_goal = ring - spacing * (in_arm - 1 - q);
        tasks.emplace_back(r_start * d + lane * lateral, -r_goal * d + lane * lateral);
      }
      break;
    }
    case EnvironmentKind::Forest: {
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
      const double margin = 1.5;
      std::uniform_real_distribution<double> coord(-0.5 * params.size + margin, 0.5 * params.size - margin);
      std::vector<Vec2> used;
      auto far_from_used = [&](const Vec2& p) {
        return std::all_of(used.begin(), used.end(), [&](const Vec2& q) { return norm_inf(p - q) >= 2.0; });
      };
      int attempts = 0;
      while (static_cast<int>(tasks.size()) < robots) {
        if (++attempts > 100000) throw ScenarioError("could not place forest robots");
        const Vec2 s(coord(rng), coord(rng));
        const Vec2 g(coord(rng), coord(rng));
        if ((s - g).norm() < 0.5 * params.size || !far_from_used(s) || !far_from_used(g) ||
            norm_inf(s - g) < 2.0)
          continue;
        used.push_back(s);
        used.push_back(g);
        tasks.emplace_back(s, g);
      }
      for (const Vec2& p : used) params.keep_out.push_back({p, margin});
      break;
    }
  }
  sc.env = make_environment(kind, seed, params);
  for (const auto& [s, g] : tasks) sc.robots.push_back(robot_at(s, g));
  sc.validate();
  return sc;
}

Scenario indoor_scenario() {
  Scenario sc;
  sc.name = "indoor";
  sc.env.name = "indoor";
  sc.env.bounds = Box{Vec2::Zero(), Vec2(3.25, 2.75)};
  sc.env.d_min = 0.1;
  const Vec2 half = Vec2::Constant(0.1);
  for (const Vec2& c : {Vec2(0.2, 0.2), Vec2(-0.9, -0.75), Vec2(1.2, -0.2), Vec2(0.6, -1.3),
                        Vec2(-1.4, 1.3), Vec2(2.0, 1.4)})
    sc.env.obstacles.push_back(Box{c, half});
  const Vec2 starts[3] = {{0.50, 1.35}, {-1.87, -0.57}, {0.16, -2.00}};
  const Vec2 goals[3] = {{-0.18, -0.9}, {2.8, 0.1}, {0.05, 0.82}};
  const double sizes[3] = {0.17, 0.17, 0.1};
  for (int k = 0; k < 3; ++k) {
    RobotSpec r = robot_at(starts[k], goals[k]);
    r.size = sizes[k];
    r.goal_radius = 0.1;
    KinodynamicLimits lim;
    lim.v_max = 0.5;
    r.limits = lim;
    sc.robots.push_back(r);
  }
  sc.horizon = 50.0;
  sc.epsilon = 0.05;
  sc.validate();
  return sc;
}

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

Eigen::VectorXd numbers(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

Vec2 vec2(const json& j, const std::string& path) {
  const Eigen::VectorXd v = numbers(j, path);
  if (v.size() != 2) schema_error(path, "expected two numbers");
  return v;
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  Scenario sc;
  const std::string r = "scenario";
  if (!root.is_object()) schema_error(r, "expected an object");
  if (root.contains("name")) {
    if (!root["name"].is_string()) schema_error("name", "expected a string");
    sc.name = root["name"].get<std::string>();
  }
  const json& bounds = field(root, "bounds", r);
  sc.env.bounds = Box::from_corners(vec2(field(bounds, "min", "bounds"), "bounds.min"),
                                    vec2(field(bounds, "max", "bounds"), "bounds.max"));
  sc.env.name = root.value("environment", sc.name.empty() ? std::string("custom") : sc.name);
  if (root.contains("obstacles")) {
    const json& obs = root["obstacles"];
    if (!obs.is_array()) schema_error("obstacles", "expected an array");
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const std::string at = "obstacles[" + std::to_string(k) + "]";
      sc.env.obstacles.push_back(
          Box{vec2(field(obs[k], "center", at), at + ".center"), vec2(field(obs[k], "half", at), at + ".half")});
    }
  }
  sc.env.d_min = number(field(root, "d_min", r), "d_min");
  sc.epsilon = number(field(root, "epsilon", r), "epsilon");
  sc.horizon = number(field(root, "horizon_T", r), "horizon_T");
  const json& robots = field(root, "robots", r);
  if (!robots.is_array()) schema_error("robots", "expected an array");
  for (std::size_t k = 0; k < robots.size(); ++k) {
    const std::string at = "robots[" + std::to_string(k) + "]";
    const json& jr = robots[k];
    RobotSpec spec;
    const json& model = field(jr, "model", at);
    if (!model.is_string()) schema_error(at + ".model", "expected a string");
    try {
      spec.model = model_kind_from_string(model.get<std::string>());
    } catch (const std::invalid_argument& e) {
      schema_error(at + ".model", e.what());
    }
    spec.size = number(field(jr, "s_i", at), at + ".s_i");
    const Eigen::VectorXd start = numbers(field(jr, "start", at), at + ".start");
    const int dim = RobotModel(spec.model).state_dim();
    if (start.size() == dim) {
      spec.start = start;
    } else if (start.size() == 2 && dim == 5) {
      spec.start = State::Zero(5);
      spec.start.head<2>() = start;
    } else {
      schema_error(at + ".start", "expected " + std::to_string(dim) + " numbers");
    }
    spec.goal = vec2(field(jr, "goal", at), at + ".goal");
    spec.goal_radius = number(field(jr, "r_goal", at), at + ".r_goal");
    if (jr.contains("limits")) {
      const json& jl = jr["limits"];
      const std::string lp = at + ".limits";
      KinodynamicLimits lim;
      lim.v_max = number(field(jl, "v_max", lp), lp + ".v_max");
      lim.v_min = number(field(jl, "v_min", lp), lp + ".v_min");
      lim.a_max = number(field(jl, "a_max", lp), lp + ".a_max");
      lim.yaw_rate_max = number(field(jl, "yaw_rate_max", lp), lp + ".yaw_rate_max");
      lim.yaw_accel_max = number(field(jl, "yaw_accel_max", lp), lp + ".yaw_accel_max");
      try {
        lim.validate();
      } catch (const std::invalid_argument& e) {
        schema_error(lp, e.what());
      }
      spec.limits = lim;
    }
    sc.robots.push_back(std::move(spec));
  }
  sc.validate();
  return sc;
}

std::string scenario_to_json(const Scenario& sc) {
  json root;
  root["name"] = sc.name;
  root["environment"] = sc.env.name;
  root["bounds"] = {{"min", to_json(sc.env.bounds.lower())}, {"max", to_json(sc.env.bounds.upper())}};
  json obs = json::array();
  for (const Box& b : sc.env.obstacles) obs.push_back({{"center", to_json(b.center)}, {"half", to_json(b.half)}});
  root["obstacles"] = obs;
  root["d_min"] = sc.env.d_min;
  root["epsilon"] = sc.epsilon;
  root["horizon_T"] = sc.horizon;
  json robots = json::array();
  for (const RobotSpec& r : sc.robots) {
    json start = json::array();
    for (Eigen::Index k = 0; k < r.start.size(); ++k) start.push_back(r.start(k));
    json jr = {{"model", to_string(r.model)},
               {"s_i", r.size},
               {"start", start},
               {"goal", to_json(r.goal)},
               {"r_goal", r.goal_radius}};
    if (r.limits)
      jr["limits"] = {{"v_max", r.limits->v_max},
                      {"v_min", r.limits->v_min},
                      {"a_max", r.limits->a_max},
                      {"yaw_rate_max", r.limits->yaw_rate_max},
                      {"yaw_accel_max", r.limits->yaw_accel_max}};
    robots.push_back(jr);
  }
  root["robots"] = robots;
  return root.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file " + path.string());
  out << scenario_to_json(scenario);
  if (!out) throw ScenarioError("write failed for " + path.string());
}

bool operator==(const Environment& a, const Environment& b) {
  return a.name == b.name && a.bounds == b.bounds && a.obstacles == b.obstacles && a.d_min == b.d_min;
}

bool operator==(const RobotSpec& a, const RobotSpec& b) {
  return a.model == b.model && a.size == b.size && a.start == b.start && a.goal == b.goal &&
         a.goal_radius == b.goal_radius && a.limits == b.limits;
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.name == b.name && a.env == b.env && a.robots == b.robots && a.horizon == b.horizon &&
         a.epsilon == b.epsilon;
}

}  // namespace stlcbot
