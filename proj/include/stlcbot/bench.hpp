#pragma once

#include "stlcbot/baselines.hpp"
#include "stlcbot/cbot.hpp"
#include "stlcbot/kcbs.hpp"
#include "stlcbot/world.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlcbot::bench {

enum class Arm { STLcBOT, KcBOT, KRRT, STLRRT, PPcBOT, PPRRT };

std::string to_string(Arm arm);
Arm arm_from_string(const std::string& name);
/// Arm names produced by external planners; accepted when merging CSVs but
/// not runnable here.
const std::vector<std::string>& reserved_arm_names();

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrialRecord {
  std::string env;
  std::string arm;
  int robots = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool solved = false;
  double wall_time = 0.0;
  double total_path_length = 0.0;
  double min_robustness = 0.0;
  int conflicts_resolved = 0;
  int nodes_expanded = 0;
};

struct BenchConfig {
  std::vector<EnvironmentKind> envs{EnvironmentKind::Empty};
  std::vector<Arm> arms{Arm::STLcBOT};
  std::vector<int> robots{2};
  int trials = 10;
  std::uint64_t base_seed = 0;
  /// Optional explicit per-trial seeds (overrides base_seed + trial).
  std::vector<std::uint64_t> seeds;
  double time_budget = 60.0;  // per trial, seconds
  bool record_timing = true;
  bool shuffle_priority = true;
  bool strict = false;  // a solved plan failing validation throws
  double robot_size = 0.2;
  double epsilon = 0.05;
  double horizon = 50.0;
  double goal_radius = 0.3;
  EnvironmentParams env_params;
  KcbsParams kcbs;
  CbotParams cbot;
  RrtParams rrt;

  std::uint64_t trial_seed(int trial) const;
  void validate() const;
};

BenchConfig config_from_json(const std::string& text);
BenchConfig load_config(const std::filesystem::path& path);

/// Scenario of one benchmark cell and trial.
Scenario trial_scenario(const BenchConfig& config, EnvironmentKind env, int robots, std::uint64_t seed);

/// Result of one arm on one scenario.
MultiRobotPlan run_arm(Arm arm, const Scenario& scenario, const BenchConfig& config, std::uint64_t seed);

TrialRecord run_trial(const BenchConfig& config, EnvironmentKind env, Arm arm, int robots, int trial,
                      MultiRobotPlan* plan_out = nullptr);

/// Executes every (env, arm, N, trial) cell with up to `workers` threads.
/// `on_record` is called (serialised) after each finished trial. Records are
/// returned in canonical cell order.
std::vector<TrialRecord> run_matrix(const BenchConfig& config, int workers = 1,
                                    const std::function<void(const TrialRecord&)>& on_record = {});

std::string csv_header();
std::string csv_line(const TrialRecord& r);
void write_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void emit_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path);
std::vector<TrialRecord> read_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string env;
  std::string arm;
  int robots = 0;
  int trials = 0;
  int solved = 0;
  double success_percent = 0.0;
  /// Over solved trials only (sample standard deviation; 0 below two trials).
  double runtime_mean = 0.0;
  double runtime_sd = 0.0;
  double path_mean = 0.0;
  double path_sd = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);
/// Human-readable table of summarize().
std::string emit_summary(const std::vector<TrialRecord>& records);

/// Self-contained SVG of a (possibly partial) multi-robot plan.
std::string trajectory_svg(const Scenario& scenario, const std::vector<PlanResult>& plans);
void emit_trajectory_svg(const Scenario& scenario, const std::vector<PlanResult>& plans,
                         const std::filesystem::path& path);

/// One SVG per environment with success rate, runtime and path length
/// against team size, one series per arm. Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::vector<TrialRecord>& records,
                                               const std::filesystem::path& dir);

}  // namespace stlcbot::bench
