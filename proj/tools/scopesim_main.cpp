// Command-line front end: simulate / tune / compare experiment configs and
// write the CSV artifacts described in the README.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scopesim/harness.hpp"
#include "scopesim/version.hpp"

namespace {

// Exit codes, also shown in --help.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "GA seed (overrides config)");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

scopesim::RunOptions to_options(const CommonArgs& args) {
  return scopesim::RunOptions{args.out_dir, args.seed, args.quiet};
}

void print_results(const std::vector<scopesim::ControllerResult>& results,
                   bool quiet) {
  if (quiet) return;
  for (const auto& r : results) {
    if (r.failed) {
      std::cout << r.spec.name << ": FAILED (" << r.failure << ")\n";
      continue;
    }
    auto cell = [](const std::optional<double>& v) {
      return v ? scopesim::format_double(*v) : std::string("--");
    };
    std::cout << r.spec.name << ": rise " << cell(r.metrics.rise_time[0])
              << "/" << cell(r.metrics.rise_time[1]) << " s, settle "
              << cell(r.metrics.settling_time[0]) << "/"
              << cell(r.metrics.settling_time[1]) << " s, overshoot "
              << cell(r.metrics.overshoot_pct[0]) << "/"
              << cell(r.metrics.overshoot_pct[1]) << " %, itae "
              << scopesim::format_double(r.metrics.itae_value) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "scopesim: two-axis telescope mount simulation and controller tuning\n"
      "exit codes: 0 ok, 1 usage, 2 config error, 3 simulation diverged, "
      "4 i/o error"};
  app.require_subcommand(1);

  CommonArgs sim_args, tune_args, cmp_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "run one controller and write its trace");
  add_common(simulate, sim_args);
  CLI::App* tune = app.add_subcommand(
      "tune", "GA-tune a controller, then run and persist the result");
  add_common(tune, tune_args);
  CLI::App* compare = app.add_subcommand(
      "compare", "run several controllers and write a comparison table");
  add_common(compare, cmp_args);
  CLI::App* version = app.add_subcommand("version", "print version and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (version->parsed()) {
      std::cout << "scopesim " << scopesim::kVersion << "\n";
      return kExitOk;
    }
    if (simulate->parsed()) {
      const auto results =
          scopesim::run_experiment(sim_args.config_path, to_options(sim_args),
                                   /*expect_tune=*/false);
      print_results(results, sim_args.quiet);
      return kExitOk;
    }
    if (tune->parsed()) {
      const auto results =
          scopesim::run_experiment(tune_args.config_path, to_options(tune_args),
                                   /*expect_tune=*/true);
      print_results(results, tune_args.quiet);
      return kExitOk;
    }
    if (compare->parsed()) {
      const auto results =
          scopesim::run_comparison(cmp_args.config_path, to_options(cmp_args));
      print_results(results, cmp_args.quiet);
      for (const auto& r : results) {
        if (r.failed) {
          std::cerr << "error: controller '" << r.spec.name
                    << "' failed: " << r.failure << "\n";
          return kExitDiverged;
        }
      }
      return kExitOk;
    }
  } catch (const scopesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const scopesim::DivergedError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const scopesim::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const scopesim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}
