// Benchmark harness: run a configured matrix, plot records, generate scenarios.
#include "stlcbot/bench.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace stlcbot;

namespace {

int run(const fs::path& config_path, const fs::path& out, int workers, bool svg) {
  const bench::BenchConfig config = bench::load_config(config_path);
  fs::create_directories(out);
  const fs::path partial = out / "records.csv.partial";
  {
    std::ofstream p(partial);
    p << bench::csv_header() << '\n';
  }
  int done = 0;
  std::size_t total = config.envs.size() * config.arms.size() * config.robots.size() * static_cast<std::size_t>(config.trials);
  auto records = bench::run_matrix(config, workers, [&](const bench::TrialRecord& r) {
    std::ofstream p(partial, std::ios::app);
    p << bench::csv_line(r) << '\n';
    ++done;
    std::cerr << '[' << done << '/' << total << "] " << r.env << ' ' << r.arm << " N=" << r.robots << " trial "
              << r.trial << (r.solved ? " solved" : " unsolved") << '\n';
  });
  bench::emit_csv(records, out / "records.csv");
  fs::remove(partial);
  std::ofstream(out / "summary.txt") << bench::emit_summary(records);
  std::cout << bench::emit_summary(records);
  if (svg) bench::emit_plots(records, out / "plots");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot STL planning benchmark harness"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Execute a benchmark matrix");
  fs::path config_path, out_dir = "results";
  int workers = 1;
  bool plots = true;
  run_cmd->add_option("--config", config_path, "Matrix configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--workers", workers, "Parallel trials")->check(CLI::PositiveNumber);
  run_cmd->add_flag("!--no-plots", plots, "Skip plot emission");

  auto* plot_cmd = app.add_subcommand("plot", "Plot success rate, runtime and path length from record CSVs");
  std::vector<fs::path> record_files;
  fs::path plot_dir = "plots";
  plot_cmd->add_option("--records", record_files, "Record CSV files (external arms may be merged)")
      ->required()
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_dir, "Output directory");

  auto* scen_cmd = app.add_subcommand("scenario", "Generate a benchmark scenario file");
  std::string env = "empty";
  int robots = 2;
  std::uint64_t seed = 0;
  fs::path scen_out;
  scen_cmd->add_option("--env", env, "Environment")
      ->check(CLI::IsMember({"empty", "crosshall", "forest", "bugtrap", "indoor"}));
  scen_cmd->add_option("--robots", robots, "Team size")->check(CLI::PositiveNumber);
  scen_cmd->add_option("--seed", seed, "Generator seed");
  scen_cmd->add_option("--out", scen_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, out_dir, workers, plots);
    if (*plot_cmd) {
      std::vector<bench::TrialRecord> records;
      for (const auto& f : record_files) {
        auto r = bench::read_csv(f);
        records.insert(records.end(), r.begin(), r.end());
      }
      for (const auto& p : bench::emit_plots(records, plot_dir)) std::cout << p.string() << '\n';
      std::cout << bench::emit_summary(records);
      return 0;
    }
    if (*scen_cmd) {
      const Scenario sc = env == "indoor" ? indoor_scenario()
                                          : make_scenario(environment_kind_from_string(env), robots, seed);
      save_scenario(sc, scen_out);
      return 0;
    }
  } catch (const bench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
