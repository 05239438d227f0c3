// Plans one scenario file with one arm and reports the certified result.
#include "stlcbot/bench.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace fs = std::filesystem;
using namespace stlcbot;

int main(int argc, char** argv) {
  CLI::App app{"Plan a multi-robot scenario"};
  fs::path scenario_path, svg_path;
  std::string arm_name = "STLcBOT";
  std::uint64_t seed = 0;
  double time_budget = 60.0;
  app.add_option("--scenario", scenario_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--arm", arm_name, "STLcBOT, KcBOT, KRRT, STLRRT, PPcBOT or PPRRT");
  app.add_option("--seed", seed, "Planner seed");
  app.add_option("--svg", svg_path, "Write the trajectories as SVG");
  app.add_option("--time-budget", time_budget, "Seconds")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    const Scenario sc = load_scenario(scenario_path);
    bench::BenchConfig config;
    config.time_budget = time_budget;
    config.horizon = sc.horizon;
    const bench::Arm arm = bench::arm_from_string(arm_name);
    const MultiRobotPlan plan = bench::run_arm(arm, sc, config, seed);
    std::cout << "arm " << arm_name << " robots " << sc.team_size() << (plan.solved ? " solved" : " unsolved")
              << " in " << plan.wall_time << " s\n";
    if (!plan.diagnostics.empty()) std::cout << "diagnostics: " << plan.diagnostics << '\n';
    if (plan.solved) {
      const PlanValidation v = validate_plan(sc, plan.plans);
      std::cout << "total path length " << plan.cost << " m, min robustness " << v.min_robustness
                << ", conflicts resolved " << plan.conflicts_resolved << ", nodes " << plan.nodes_expanded
                << ", merges " << plan.merges << '\n';
      for (std::size_t r = 0; r < plan.plans.size(); ++r)
        std::cout << "  robot " << r << ": " << plan.plans[r].path_length << " m, " << plan.plans[r].duration()
                  << " s\n";
    }
    if (!svg_path.empty()) bench::emit_trajectory_svg(sc, plan.plans, svg_path);
    return plan.solved ? 0 : 3;
  } catch (const bench::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
