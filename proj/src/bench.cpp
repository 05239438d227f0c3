#include "stlcbot/bench.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace stlcbot::bench {

namespace {

constexpr std::pair<Arm, const char*> kArms[] = {
    {Arm::STLcBOT, "STLcBOT"}, {Arm::KcBOT, "KcBOT"},   {Arm::KRRT, "KRRT"},
    {Arm::STLRRT, "STLRRT"},   {Arm::PPcBOT, "PPcBOT"}, {Arm::PPRRT, "PPRRT"},
};

}  // namespace

std::string to_string(Arm arm) {
  for (const auto& [a, name] : kArms)
    if (a == arm) return name;
  return {};
}

Arm arm_from_string(const std::string& name) {
  for (const auto& [a, n] : kArms)
    if (name == n) return a;
  const auto& reserved = reserved_arm_names();
  if (std::find(reserved.begin(), reserved.end(), name) != reserved.end())
    throw ConfigError("arm '" + name + "' is reserved for external results and cannot be run");
  throw ConfigError("unknown arm '" + name + "'");
}

const std::vector<std::string>& reserved_arm_names() {
  static const std::vector<std::string> names{"STGCS", "PBS-STGCS", "MILP"};
  return names;
}

// ---------------------------------------------------------------------------
// configuration

std::uint64_t BenchConfig::trial_seed(int trial) const {
  if (!seeds.empty()) return seeds.at(static_cast<std::size_t>(trial));
  return base_seed + static_cast<std::uint64_t>(trial);
}

void BenchConfig::validate() const {
  if (envs.empty() || arms.empty() || robots.empty()) throw ConfigError("envs, arms and robots must be non-empty");
  if (trials < 1) throw ConfigError("trials must be positive");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != trials)
    throw ConfigError("seeds must list exactly one seed per trial");
  for (int n : robots)
    if (n < 1) throw ConfigError("team sizes must be positive");
  if (!(time_budget > 0.0)) throw ConfigError("time_budget must be positive");
  if (!(robot_size > 0.0) || !(epsilon >= 0.0) || !(goal_radius > 0.0)) throw ConfigError("invalid robot geometry");
  try {
    cbot.validate(horizon);
    rrt.validate(horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

using nlohmann::json;

template <class T>
T get(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(path + "." + key + ": unknown key");
  }
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& path) {
  if (obj.contains(key)) target = get<T>(obj[key], path + "." + key);
}

}  // namespace

BenchConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  const std::string r = "config";
  check_keys(root, r,
             {"envs", "arms", "robots", "trials", "seed", "seeds", "time_budget", "record_timing", "shuffle_priority",
              "strict", "robot_size", "epsilon", "horizon_T", "r_goal", "environment", "kcbs", "cbot", "rrt"});
  BenchConfig c;
  if (root.contains("envs")) {
    c.envs.clear();
    for (const auto& e : get<std::vector<std::string>>(root["envs"], "envs")) {
      try {
        c.envs.push_back(environment_kind_from_string(e));
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("envs: ") + ex.what());
      }
    }
  }
  if (root.contains("arms")) {
    c.arms.clear();
    for (const auto& a : get<std::vector<std::string>>(root["arms"], "arms")) c.arms.push_back(arm_from_string(a));
  }
  read(root, "robots", c.robots, r);
  read(root, "trials", c.trials, r);
  read(root, "seed", c.base_seed, r);
  read(root, "seeds", c.seeds, r);
  read(root, "time_budget", c.time_budget, r);
  read(root, "record_timing", c.record_timing, r);
  read(root, "shuffle_priority", c.shuffle_priority, r);
  read(root, "strict", c.strict, r);
  read(root, "robot_size", c.robot_size, r);
  read(root, "epsilon", c.epsilon, r);
  read(root, "horizon_T", c.horizon, r);
  read(root, "r_goal", c.goal_radius, r);
  if (root.contains("environment")) {
    const json& e = root["environment"];
    check_keys(e, "environment",
               {"size", "corridor_width", "forest_intensity", "forest_obstacle_size", "trap_size", "trap_opening",
                "trap_wall", "d_min"});
    read(e, "size", c.env_params.size, "environment");
    read(e, "corridor_width", c.env_params.corridor_width, "environment");
    read(e, "forest_intensity", c.env_params.forest_intensity, "environment");
    read(e, "forest_obstacle_size", c.env_params.forest_obstacle_size, "environment");
    read(e, "trap_size", c.env_params.trap_size, "environment");
    read(e, "trap_opening", c.env_params.trap_opening, "environment");
    read(e, "trap_wall", c.env_params.trap_wall, "environment");
    read(e, "d_min", c.env_params.d_min, "environment");
  }
  if (root.contains("kcbs")) {
    const json& k = root["kcbs"];
    check_keys(k, "kcbs", {"merge_bound", "node_budget", "padding", "root_attempts"});
    read(k, "merge_bound", c.kcbs.merge_bound, "kcbs");
    read(k, "node_budget", c.kcbs.node_budget, "kcbs");
    read(k, "padding", c.kcbs.padding, "kcbs");
    read(k, "root_attempts", c.kcbs.root_attempts, "kcbs");
  }
  if (root.contains("cbot")) {
    const json& k = root["cbot"];
    check_keys(k, "cbot", {"window_radius", "candidates", "step_horizon", "max_iterations", "noise_variance"});
    read(k, "window_radius", c.cbot.window_radius, "cbot");
    read(k, "candidates", c.cbot.candidates, "cbot");
    read(k, "step_horizon", c.cbot.step_horizon, "cbot");
    read(k, "max_iterations", c.cbot.max_iterations, "cbot");
    read(k, "noise_variance", c.cbot.noise_variance, "cbot");
  }
  if (root.contains("rrt")) {
    const json& k = root["rrt"];
    check_keys(k, "rrt", {"goal_bias", "max_iterations", "step_horizon", "controls_per_extension"});
    read(k, "goal_bias", c.rrt.goal_bias, "rrt");
    read(k, "max_iterations", c.rrt.max_iterations, "rrt");
    read(k, "step_horizon", c.rrt.step_horizon, "rrt");
    read(k, "controls_per_extension", c.rrt.controls_per_extension, "rrt");
  }
  c.validate();
  return c;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// execution

Scenario trial_scenario(const BenchConfig& config, EnvironmentKind env, int robots, std::uint64_t seed) {
  Scenario sc = make_scenario(env, robots, seed, config.env_params);
  sc.epsilon = config.epsilon;
  sc.horizon = config.horizon;
  for (RobotSpec& r : sc.robots) {
    r.size = config.robot_size;
    r.goal_radius = config.goal_radius;
  }
  sc.validate();
  return sc;
}

MultiRobotPlan run_arm(Arm arm, const Scenario& scenario, const BenchConfig& config, std::uint64_t seed) {
  CbotParams cp = config.cbot;
  cp.time_budget = config.time_budget;
  RrtParams rp = config.rrt;
  rp.time_budget = config.time_budget;
  const bool rrt = arm == Arm::KRRT || arm == Arm::STLRRT || arm == Arm::PPRRT;
  const LowLevelPlanner planner = rrt ? make_rrt_planner(rp) : make_cbot_planner(cp);
  if (arm == Arm::PPcBOT || arm == Arm::PPRRT) {
    const auto order = priority_order(scenario.team_size(), config.shuffle_priority, seed);
    MultiRobotPlan p = priority_plan(scenario, order, planner, seed, config.time_budget);
    if (p.wall_time > config.time_budget) {
      p.solved = false;
      p.diagnostics = "time budget exhausted";
    }
    return p;
  }
  KcbsParams kp = config.kcbs;
  kp.seed = seed;
  kp.time_budget = config.time_budget;
  kp.detector = arm == Arm::STLcBOT || arm == Arm::STLRRT ? ConflictDetector::Stl : ConflictDetector::Geometric;
  return kcbs_solve(scenario, planner, kp);
}

TrialRecord run_trial(const BenchConfig& config, EnvironmentKind env, Arm arm, int robots, int trial,
                      MultiRobotPlan* plan_out) {
  TrialRecord rec;
  rec.env = stlcbot::to_string(env);
  rec.arm = to_string(arm);
  rec.robots = robots;
  rec.trial = trial;
  rec.seed = config.trial_seed(trial);
  const Scenario sc = trial_scenario(config, env, robots, rec.seed);
  MultiRobotPlan plan = run_arm(arm, sc, config, rec.seed);
  rec.conflicts_resolved = plan.conflicts_resolved;
  rec.nodes_expanded = plan.nodes_expanded;
  rec.wall_time = config.record_timing ? plan.wall_time : 0.0;
  rec.min_robustness = std::numeric_limits<double>::quiet_NaN();
  if (plan.solved) {
    const PlanValidation v = validate_plan(sc, plan.plans);
    if (!v.satisfied) {
      if (config.strict)
        throw std::logic_error("solved plan failed validation: " + rec.env + " " + rec.arm + " N=" +
                               std::to_string(robots) + " trial " + std::to_string(trial));
      plan.solved = false;
    } else {
      rec.solved = true;
      rec.min_robustness = v.min_robustness;
      rec.total_path_length = plan.cost;
    }
  }
  if (plan_out != nullptr) *plan_out = std::move(plan);
  return rec;
}

std::vector<TrialRecord> run_matrix(const BenchConfig& config, int workers,
                                    const std::function<void(const TrialRecord&)>& on_record) {
  config.validate();
  struct Cell {
    EnvironmentKind env;
    Arm arm;
    int robots;
    int trial;
  };
  std::vector<Cell> cells;
  for (EnvironmentKind e : config.envs)
    for (Arm a : config.arms)
      for (int n : config.robots)
        for (int t = 0; t < config.trials; ++t) cells.push_back({e, a, n, t});

  std::vector<TrialRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;
  auto work = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      TrialRecord rec;
      try {
        rec = run_trial(config, c.env, c.arm, c.robots, c.trial);
      } catch (const std::logic_error&) {
        throw;
      } catch (const std::exception&) {
        // a failing trial is recorded as unsolved; the matrix continues
        rec.env = stlcbot::to_string(c.env);
        rec.arm = to_string(c.arm);
        rec.robots = c.robots;
        rec.trial = c.trial;
        rec.seed = config.trial_seed(c.trial);
        rec.min_robustness = std::numeric_limits<double>::quiet_NaN();
      }
      std::lock_guard lock(sink);
      records[k] = rec;
      if (on_record) on_record(rec);
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_lock;
    for (int w = 0; w < n; ++w)
      pool.emplace_back([&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(failure_lock);
          if (!failure) failure = std::current_exception();
          next = cells.size();
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return records;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

std::string number(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string csv_header() {
  return "env,arm,N,trial,seed,solved,wall_time,total_path_length,min_robustness,conflicts_resolved,nodes_expanded";
}

std::string csv_line(const TrialRecord& r) {
  std::ostringstream s;
  s << r.env << ',' << r.arm << ',' << r.robots << ',' << r.trial << ',' << r.seed << ',' << (r.solved ? 1 : 0) << ','
    << number(r.wall_time, 4) << ',' << number(r.total_path_length) << ',' << number(r.min_robustness) << ','
    << r.conflicts_resolved << ',' << r.nodes_expanded;
  return s.str();
}

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& r : records) out << csv_line(r) << '\n';
}

void emit_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(records, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TrialRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw std::runtime_error(path.string() + ": header does not match the record schema");
  std::vector<TrialRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) throw std::runtime_error(path.string() + ":" + std::to_string(row) + ": expected 11 fields");
    try {
      TrialRecord r;
      r.env = f[0];
      r.arm = f[1];
      r.robots = std::stoi(f[2]);
      r.trial = std::stoi(f[3]);
      r.seed = std::stoull(f[4]);
      r.solved = f[5] == "1" || f[5] == "true";
      r.wall_time = std::stod(f[6]);
      r.total_path_length = std::stod(f[7]);
      r.min_robustness = std::stod(f[8]);
      r.conflicts_resolved = std::stoi(f[9]);
      r.nodes_expanded = std::stoi(f[10]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(row) + ": malformed field");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// aggregation

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::vector<std::tuple<std::string, std::string, int>> keys;
  std::map<std::tuple<std::string, std::string, int>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.env, r.arm, r.robots);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : keys) {
    const auto& g = groups[key];
    SummaryRow row;
    std::tie(row.env, row.arm, row.robots) = key;
    row.trials = static_cast<int>(g.size());
    std::vector<double> times;
    std::vector<double> lengths;
    for (const TrialRecord* r : g)
      if (r->solved) {
        ++row.solved;
        times.push_back(r->wall_time);
        lengths.push_back(r->total_path_length);
      }
    row.success_percent = 100.0 * row.solved / row.trials;
    std::tie(row.runtime_mean, row.runtime_sd) = mean_sd(times);
    std::tie(row.path_mean, row.path_sd) = mean_sd(lengths);
    out.push_back(row);
  }
  return out;
}

std::string emit_summary(const std::vector<TrialRecord>& records) {
  std::ostringstream s;
  s << "# runtime and path length: mean +- sd over solved trials only\n";
  s << std::left << std::setw(10) << "env" << std::setw(9) << "arm" << std::right << std::setw(4) << "N"
    << std::setw(8) << "trials" << std::setw(10) << "success%" << std::setw(22) << "runtime [s]" << std::setw(24)
    << "path length [m]" << '\n';
  for (const auto& r : summarize(records)) {
    s << std::left << std::setw(10) << r.env << std::setw(9) << r.arm << std::right << std::setw(4) << r.robots
      << std::setw(8) << r.trials << std::setw(10) << number(r.success_percent, 1) << std::setw(22)
      << (number(r.runtime_mean, 3) + " +- " + number(r.runtime_sd, 3)) << std::setw(24)
      << (number(r.path_mean, 2) + " +- " + number(r.path_sd, 2)) << '\n';
  }
  return s.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};

const char* color(std::size_t k) { return kPalette[k % (sizeof kPalette / sizeof *kPalette)]; }

struct Frame {
  Box bounds;
  double scale;
  double pad;
  double x(double wx) const { return pad + (wx - bounds.lower().x()) * scale; }
  double y(double wy) const { return pad + (bounds.upper().y() - wy) * scale; }
  double width() const { return 2.0 * pad + 2.0 * bounds.half.x() * scale; }
  double height() const { return 2.0 * pad + 2.0 * bounds.half.y() * scale; }
};

std::string fmt(double v) { return number(v, 2); }

void rect(std::ostream& s, const Frame& f, const Box& b, const std::string& attrs) {
  s << "<rect x=\"" << fmt(f.x(b.lower().x())) << "\" y=\"" << fmt(f.y(b.upper().y())) << "\" width=\""
    << fmt(2.0 * b.half.x() * f.scale) << "\" height=\"" << fmt(2.0 * b.half.y() * f.scale) << "\" " << attrs
    << "/>\n";
}

}  // namespace

std::string trajectory_svg(const Scenario& sc, const std::vector<PlanResult>& plans) {
  const double longest = std::max(2.0 * sc.env.bounds.half.x(), 2.0 * sc.env.bounds.half.y());
  const Frame f{sc.env.bounds, 600.0 / longest, 20.0};
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(f.width()) << "\" height=\""
    << fmt(f.height()) << "\" viewBox=\"0 0 " << fmt(f.width()) << ' ' << fmt(f.height()) << "\">\n";
  s << "<title>" << sc.name << "</title>\n";
  rect(s, f, sc.env.bounds, "class=\"bounds\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"");
  for (const Box& o : sc.env.obstacles) rect(s, f, o, "class=\"obstacle\" fill=\"#555555\" stroke=\"none\"");
  for (std::size_t r = 0; r < plans.size(); ++r) {
    const PlanResult& p = plans[r];
    if (p.states.empty()) continue;
    s << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"" << color(r) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < p.states.size(); ++k)
      s << (k ? " " : "") << fmt(f.x(p.states[k](0))) << ',' << fmt(f.y(p.states[k](1)));
    s << "\"/>\n";
    if (r < sc.robots.size()) {
      const double size = sc.robots[r].size;
      const std::size_t n = p.states.size();
      for (int q = 0; q < 5; ++q) {
        const std::size_t k = n == 1 ? 0 : (n - 1) * static_cast<std::size_t>(q) / 4;
        rect(s, f, Box{RobotModel::position(p.states[k]), Vec2::Constant(size)},
             std::string("class=\"footprint\" fill=\"none\" stroke=\"") + color(r) + "\" stroke-opacity=\"0.6\"");
      }
    }
  }
  for (std::size_t r = 0; r < sc.robots.size(); ++r) {
    const RobotSpec& spec = sc.robots[r];
    const Vec2 st = spec.start_position();
    s << "<circle class=\"start\" cx=\"" << fmt(f.x(st.x())) << "\" cy=\"" << fmt(f.y(st.y())) << "\" r=\"4\" fill=\""
      << color(r) << "\"/>\n";
    rect(s, f, Box{spec.goal, Vec2::Constant(spec.goal_radius)},
         std::string("class=\"goal\" fill=\"") + color(r) + "\" fill-opacity=\"0.25\" stroke=\"" + color(r) + "\"");
  }
  s << "</svg>\n";
  return s.str();
}

void emit_trajectory_svg(const Scenario& scenario, const std::vector<PlanResult>& plans,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << trajectory_svg(scenario, plans);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::filesystem::path> emit_plots(const std::vector<TrialRecord>& records,
                                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto rows = summarize(records);
  std::vector<std::string> envs;
  for (const auto& r : rows)
    if (std::find(envs.begin(), envs.end(), r.env) == envs.end()) envs.push_back(r.env);

  std::vector<std::filesystem::path> written;
  for (const std::string& env : envs) {
    std::vector<std::string> arms;
    std::set<int> sizes;
    for (const auto& r : rows)
      if (r.env == env) {
        if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
        sizes.insert(r.robots);
      }
    const double pw = 300, ph = 220, left = 60, top = 40, gap = 80;
    const double width = left + 3 * (pw + gap), height = top + ph + 60 + 20.0 * static_cast<double>(arms.size());
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<title>" << env << "</title>\n";
    const int n_lo = *sizes.begin(), n_hi = *sizes.rbegin();
    struct Panel {
      const char* label;
      double SummaryRow::*field;
    };
    const Panel panels[] = {{"success rate [%]", &SummaryRow::success_percent},
                            {"runtime [s] (solved)", &SummaryRow::runtime_mean},
                            {"path length [m] (solved)", &SummaryRow::path_mean}};
    for (int p = 0; p < 3; ++p) {
      const double x0 = left + p * (pw + gap);
      double y_hi = p == 0 ? 100.0 : 0.0;
      for (const auto& r : rows)
        if (r.env == env) y_hi = std::max(y_hi, r.*(panels[p].field));
      if (y_hi <= 0.0) y_hi = 1.0;
      auto px = [&](int n) { return x0 + (n_hi == n_lo ? pw / 2 : pw * (n - n_lo) / double(n_hi - n_lo)); };
      auto py = [&](double v) { return top + ph - ph * v / y_hi; };
      s << "<g class=\"panel\">\n";
      s << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
      s << "<text x=\"" << fmt(x0 + pw / 2) << "\" y=\"" << fmt(top - 10) << "\" text-anchor=\"middle\">"
        << panels[p].label << "</text>\n";
      for (int n : sizes)
        s << "<text x=\"" << fmt(px(n)) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"middle\">" << n
          << "</text>\n";
      s << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(top + 4) << "\" text-anchor=\"end\">" << number(y_hi, 1)
        << "</text>\n<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(top + ph) << "\" text-anchor=\"end\">0</text>\n";
      for (std::size_t a = 0; a < arms.size(); ++a) {
        s << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color(a) << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& r : rows)
          if (r.env == env && r.arm == arms[a]) {
            s << (first ? "" : " ") << fmt(px(r.robots)) << ',' << fmt(py(r.*(panels[p].field)));
            first = false;
          }
        s << "\"/>\n";
      }
      s << "</g>\n";
    }
    s << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top + ph + 36) << "\">team size N</text>\n";
    for (std::size_t a = 0; a < arms.size(); ++a)
      s << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top + ph + 56 + 20.0 * static_cast<double>(a))
        << "\" fill=\"" << color(a) << "\">" << arms[a] << "</text>\n";
    s << "</svg>\n";
    const auto path = dir / (env + ".svg");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << s.str();
    written.push_back(path);
  }
  return written;
}

}  // namespace stlcbot::bench
