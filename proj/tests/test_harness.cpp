#include "scopesim/harness.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

using namespace scopesim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("scopesim_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "exp.cfg";
  atomic_write(path, body);
  return path;
}

std::string pd_config(const std::string& out_dir, const std::string& extra = "") {
  return "[plant]\nprofile = kao-14in-default\n"
         "[sim]\nstep_size = 1e-3\nduration = 2.0\n"
         "theta_desired = 60 deg 50 deg\n" +
         extra +
         "[controller]\ntype = pd\ngains = baseline\n"
         "[output]\ndir = " + out_dir + "\n";
}

}  // namespace

TEST(Harness, SimulateWritesArtifacts) {
  const fs::path dir = temp_dir("sim");
  const fs::path cfg = write_config(dir, pd_config((dir / "out").string()));
  const auto results = run_experiment(cfg, RunOptions{}, /*expect_tune=*/false);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_FALSE(results[0].failed);
  EXPECT_TRUE(fs::exists(dir / "out" / "pd_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "pd_metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.txt"));
  // the emitted trace re-parses and matches the in-memory run
  const SimTrace back = trace_from_csv(read_file(dir / "out" / "pd_trace.csv"));
  ASSERT_EQ(back.size(), results[0].trace.size());
  EXPECT_EQ(back.states.back().theta[0],
            results[0].trace.states.back().theta[0]);
}

TEST(Harness, InvalidConfigLeavesNoArtifacts) {
  const fs::path dir = temp_dir("bad");
  const fs::path out = dir / "out";
  std::string body = pd_config(out.string());
  body.replace(body.find("step_size = 1e-3"), 16, "step_size = 0    ");
  const fs::path cfg = write_config(dir, body);
  EXPECT_THROW(run_experiment(cfg, RunOptions{}, false), ConfigError);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Harness, OutDirAndSeedOverridesApply) {
  const fs::path dir = temp_dir("override");
  const fs::path cfg = write_config(dir, pd_config((dir / "ignored").string()));
  RunOptions opts;
  opts.out_dir = (dir / "actual").string();
  run_experiment(cfg, opts, false);
  EXPECT_TRUE(fs::exists(dir / "actual" / "pd_trace.csv"));
  EXPECT_FALSE(fs::exists(dir / "ignored"));
}

TEST(Harness, SimulateRejectsTuneSourceAndViceVersa) {
  const fs::path dir = temp_dir("verbs");
  const std::string tune_body =
      "[sim]\ntheta_desired = 60 deg 50 deg\n"
      "[controller]\ntype = ga-pd\nsource = tune\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  const fs::path tune_cfg = write_config(dir, tune_body);
  EXPECT_THROW(run_experiment(tune_cfg, RunOptions{}, /*expect_tune=*/false),
               ConfigError);
  const fs::path sim_cfg = write_config(dir, pd_config((dir / "out").string()));
  EXPECT_THROW(run_experiment(sim_cfg, RunOptions{}, /*expect_tune=*/true),
               ConfigError);
}

TEST(Harness, TuneProducesLogAndDefinitionThatReload) {
  const fs::path dir = temp_dir("tune");
  const std::string body =
      "[plant]\nprofile = kao-14in-default\n"
      "[sim]\nstep_size = 5e-3\nduration = 1.0\n"
      "theta_desired = 60 deg 50 deg\n"
      "[controller]\ntype = ga-pd\nsource = tune\n"
      "[ga]\npopulation = 8\ngenerations = 4\nseed = 11\n"
      "fitness_step_size = 5e-3\nfitness_duration = 1.0\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  const fs::path cfg = write_config(dir, body);
  const auto results = run_experiment(cfg, RunOptions{}, /*expect_tune=*/true);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_TRUE(results[0].tuned);
  ASSERT_EQ(results[0].best_history.size(), 5u);
  for (std::size_t g = 1; g < 5; ++g) {
    EXPECT_LE(results[0].best_history[g], results[0].best_history[g - 1]);
  }
  const fs::path gains_path = dir / "out" / "ga-pd_tuned_gains.txt";
  ASSERT_TRUE(fs::exists(gains_path));
  EXPECT_NO_THROW(load_gains(gains_path));
  EXPECT_TRUE(fs::exists(dir / "out" / "ga-pd_generations.csv"));
}

TEST(Harness, RepeatedSeededRunsAreByteIdentical) {
  const fs::path dir = temp_dir("det");
  auto run_once = [&](const std::string& out) {
    const std::string body =
        "[sim]\nstep_size = 5e-3\nduration = 1.0\n"
        "theta_desired = 60 deg 50 deg\n"
        "[controller]\ntype = ga-pd\nsource = tune\n"
        "[ga]\npopulation = 6\ngenerations = 3\nseed = 5\n"
        "fitness_step_size = 5e-3\nfitness_duration = 1.0\n"
        "[output]\ndir = " + out + "\n";
    run_experiment(write_config(dir, body), RunOptions{}, true);
  };
  run_once((dir / "a").string());
  run_once((dir / "b").string());
  for (const char* name :
       {"ga-pd_trace.csv", "ga-pd_metrics.csv", "ga-pd_generations.csv",
        "ga-pd_tuned_gains.txt"}) {
    EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name))
        << name;
  }
}

TEST(Harness, ComparisonNeedsTwoControllers) {
  const fs::path dir = temp_dir("cmp1");
  const fs::path cfg = write_config(dir, pd_config((dir / "out").string()));
  EXPECT_THROW(run_comparison(cfg, RunOptions{}), ConfigError);
}

TEST(Harness, ComparisonRejectsDuplicateNames) {
  const fs::path dir = temp_dir("dup");
  const std::string body =
      "[sim]\ntheta_desired = 1 rad 1 rad\n"
      "[controller]\ntype = pd\ngains = baseline\n"
      "[controller]\ntype = pd\nkp = 30 30\nkd = 12 12\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  EXPECT_THROW(run_comparison(write_config(dir, body), RunOptions{}),
               ConfigError);
}

TEST(Harness, ComparisonOrdersColumnsAndRoundTrips) {
  const fs::path dir = temp_dir("cmp");
  const std::string body =
      "[plant]\nprofile = kao-14in-default\n"
      "[sim]\nstep_size = 2e-3\nduration = 2.0\n"
      "theta_desired = 60 deg 50 deg\n"
      "[controller]\ntype = pd\ngains = baseline\n"
      "[controller]\ntype = flc\nfuzzy = default\ncoa_resolution = 251\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  const fs::path cfg = write_config(dir, body);
  const auto results = run_comparison(cfg, RunOptions{});
  ASSERT_EQ(results.size(), 2u);
  // the fixed report order puts flc before pd
  EXPECT_EQ(results[0].spec.kind, ControllerKind::flc);
  EXPECT_EQ(results[1].spec.kind, ControllerKind::pd);
  const std::string csv = read_file(dir / "out" / "comparison.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "metric,flc_joint1,flc_joint2,pd_joint1,pd_joint2");
  EXPECT_TRUE(fs::exists(dir / "out" / "comparison.txt"));
  EXPECT_TRUE(fs::exists(dir / "out" / "flc_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "pd_trace.csv"));
}

TEST(Harness, EmittedCsvArtifactsReParse) {
  const fs::path dir = temp_dir("reparse");
  const std::string body =
      "[sim]\nstep_size = 2e-3\nduration = 1.0\n"
      "theta_desired = 60 deg 50 deg\n"
      "[controller]\ntype = ga-pd\nsource = tune\n"
      "[ga]\npopulation = 6\ngenerations = 3\nseed = 2\n"
      "fitness_step_size = 5e-3\nfitness_duration = 1.0\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  run_experiment(write_config(dir, body), RunOptions{}, /*expect_tune=*/true);
  EXPECT_NO_THROW(trace_from_csv(read_file(dir / "out" / "ga-pd_trace.csv")));
  EXPECT_NO_THROW(metrics_from_csv(read_file(dir / "out" / "ga-pd_metrics.csv")));
  const auto [best, mean] = generation_log_from_csv(
      read_file(dir / "out" / "ga-pd_generations.csv"));
  EXPECT_EQ(best.size(), 4u);
  EXPECT_EQ(mean.size(), 4u);
}

// A comparison rerun from the persisted tuned definition (no re-tuning) must
// reproduce the tuned controller's table columns exactly.
TEST(Harness, ComparisonRerunFromPersistedDefinitions) {
  const fs::path dir = temp_dir("rerun");
  const std::string shared_sim =
      "[sim]\nstep_size = 2e-3\nduration = 1.5\n"
      "theta_desired = 60 deg 50 deg\n";
  const std::string tuned_body =
      shared_sim +
      "[controller]\ntype = ga-flc\nsource = tune\ncoa_resolution = 251\n"
      "[controller]\ntype = pd\ngains = baseline\n"
      "[ga]\npopulation = 6\ngenerations = 3\nseed = 9\n"
      "fitness_step_size = 0.01\nfitness_duration = 1.0\n"
      "[output]\ndir = " + (dir / "first").string() + "\n";
  run_comparison(write_config(dir, tuned_body), RunOptions{});
  const fs::path tuned_def = dir / "first" / "ga-flc_tuned_fuzzy.txt";
  ASSERT_TRUE(fs::exists(tuned_def));
  const std::string rerun_body =
      shared_sim +
      "[controller]\ntype = ga-flc\nfuzzy_file = " + tuned_def.string() +
      "\ncoa_resolution = 251\n"
      "[controller]\ntype = pd\ngains = baseline\n"
      "[output]\ndir = " + (dir / "second").string() + "\n";
  run_comparison(write_config(dir, rerun_body), RunOptions{});
  EXPECT_EQ(read_file(dir / "first" / "comparison.csv"),
            read_file(dir / "second" / "comparison.csv"));
}

TEST(Harness, BundledConfigsLoadAndRun) {
  const fs::path config_dir = SCOPESIM_BUNDLED_CONFIG_DIR;
  for (const char* name :
       {"pd_step.cfg", "flc_step.cfg", "tune_ga_pd.cfg", "tune_ga_flc.cfg",
        "compare_default.cfg"}) {
    EXPECT_NO_THROW(load_experiment_config(config_dir / name)) << name;
  }
  // the pd step experiment runs end to end as shipped
  const fs::path dir = temp_dir("bundled");
  RunOptions opts;
  opts.out_dir = (dir / "out").string();
  const auto results =
      run_experiment(config_dir / "pd_step.cfg", opts, /*expect_tune=*/false);
  EXPECT_FALSE(results[0].failed);
  EXPECT_NO_THROW(metrics_from_csv(read_file(dir / "out" / "pd_metrics.csv")));
}

TEST(Harness, FailedMemberYieldsPartialTable) {
  const fs::path dir = temp_dir("partial");
  // an enormous initial rate blows up both runs within a step; the table must
  // still be written with absent cells and the results flagged failed
  const std::string body =
      "[sim]\nstep_size = 1e-3\nduration = 1.0\n"
      "theta_desired = 60 deg 50 deg\n"
      "initial_theta_dot = 1e200 rad/s -1e200 rad/s\n"
      "[controller]\ntype = pd\ngains = baseline\n"
      "[controller]\ntype = flc\nfuzzy = default\ncoa_resolution = 251\n"
      "[output]\ndir = " + (dir / "out").string() + "\n";
  const fs::path cfg = write_config(dir, body);
  const auto results = run_comparison(cfg, RunOptions{});
  ASSERT_EQ(results.size(), 2u);
  EXPECT_TRUE(results[0].failed);
  EXPECT_TRUE(results[1].failed);
  const std::string csv = read_file(dir / "out" / "comparison.csv");
  EXPECT_NE(csv.find("rise_time_s,,,,"), std::string::npos);
}
