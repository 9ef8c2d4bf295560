#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scopesim/config.hpp"
#include "scopesim/controllers.hpp"
#include "scopesim/ga.hpp"
#include "scopesim/integrator.hpp"
#include "scopesim/io.hpp"
#include "scopesim/metrics.hpp"
#include "scopesim/version.hpp"

namespace scopesim {

/// Command-line overrides applied on top of a config file.
struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Everything one resolved controller produced during a run.
struct ControllerResult {
  ControllerSpec spec;
  Controller controller;
  bool failed = false;
  std::string failure;
  SimTrace trace;
  TransientMetrics metrics{};
  // tuning artifacts, when the controller came from a GA run
  bool tuned = false;
  std::vector<double> best_history;
  std::vector<double> mean_history;
};

namespace detail {

inline void apply_overrides(ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  if (opt.seed) cfg.ga.seed = *opt.seed;
}

/// Fails fast (before any long tuning run) when the output directory cannot
/// be created.
inline void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("output directory not writable: " + dir.string());
  }
}

inline SimConfig fitness_sim_config(const ExperimentConfig& cfg) {
  SimConfig fit = cfg.sim;
  fit.step_size = cfg.ga_fitness_step_size;
  fit.duration = cfg.ga_fitness_duration;
  return fit;
}

/// Resolves a controller spec into a concrete controller, running the GA when
/// the spec says `tune`.
inline ControllerResult resolve_controller(const ControllerSpec& spec,
                                           const ExperimentConfig& cfg) {
  ControllerResult res;
  res.spec = spec;
  res.controller.kind = spec.kind;
  res.controller.coa_resolution = spec.coa_resolution;
  switch (spec.source) {
    case ParamSource::inline_values:
      if (is_fuzzy(spec.kind)) {
        res.controller.fuzzy = default_fuzzy_controller();
      } else if (spec.baseline_gains) {
        res.controller.gains =
            ziegler_nichols_baseline(cfg.plant, spec.baseline_omega);
      } else {
        res.controller.gains = spec.gains;
      }
      break;
    case ParamSource::file:
      if (is_fuzzy(spec.kind)) {
        res.controller.fuzzy = load_fuzzy(spec.path);
      } else {
        res.controller.gains = load_gains(spec.path);
      }
      break;
    case ParamSource::tune: {
      const TuningTask task = spec.kind == ControllerKind::ga_pd
                                  ? TuningTask::ga_pd
                                  : TuningTask::ga_flc;
      const OptimizeResult opt = optimize(task, cfg.plant,
                                          fitness_sim_config(cfg), cfg.ga,
                                          spec.coa_resolution);
      res.controller = decode(task, opt.best, spec.coa_resolution);
      res.tuned = true;
      res.best_history = opt.best_history;
      res.mean_history = opt.mean_history;
      break;
    }
  }
  validate(res.controller);
  return res;
}

inline std::string metric_cell_text(const std::optional<double>& v) {
  if (!v) return "--";
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << *v;
  return out.str();
}

/// Fixed presentation order for comparison artifacts.
inline int comparison_rank(ControllerKind k) {
  switch (k) {
    case ControllerKind::ga_flc: return 0;
    case ControllerKind::ga_pd: return 1;
    case ControllerKind::flc: return 2;
    case ControllerKind::pd: return 3;
  }
  return 4;
}

inline std::string comparison_csv(const std::vector<ControllerResult>& rs) {
  std::ostringstream out;
  out << "metric";
  for (const auto& r : rs) {
    out << ',' << r.spec.name << "_joint1," << r.spec.name << "_joint2";
  }
  out << '\n';
  auto cell = [](bool failed, const std::optional<double>& v) {
    return (failed || !v) ? std::string{} : format_double(*v);
  };
  const struct {
    const char* label;
    std::array<std::optional<double>, 2> TransientMetrics::* field;
  } rows[] = {{"rise_time_s", &TransientMetrics::rise_time},
              {"settling_time_s", &TransientMetrics::settling_time},
              {"overshoot_pct", &TransientMetrics::overshoot_pct}};
  for (const auto& row : rows) {
    out << row.label;
    for (const auto& r : rs) {
      const auto& pair = r.metrics.*row.field;
      out << ',' << cell(r.failed, pair[0]) << ',' << cell(r.failed, pair[1]);
    }
    out << '\n';
  }
  out << "itae";
  for (const auto& r : rs) {
    const auto v = r.failed ? std::string{} : format_double(r.metrics.itae_value);
    out << ',' << v << ',' << v;
  }
  out << '\n';
  return out.str();
}

inline std::string comparison_text(const std::vector<ControllerResult>& rs) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "metric";
  for (const auto& r : rs) {
    out << std::right << std::setw(20) << (r.spec.name + " (j1 / j2)");
  }
  out << '\n';
  auto line = [&](const char* label, auto getter) {
    out << std::left << std::setw(16) << label;
    for (const auto& r : rs) {
      std::string cell = r.failed ? std::string("failed") : getter(r);
      out << std::right << std::setw(20) << cell;
    }
    out << '\n';
  };
  line("rise_time_s", [](const ControllerResult& r) {
    return metric_cell_text(r.metrics.rise_time[0]) + " / " +
           metric_cell_text(r.metrics.rise_time[1]);
  });
  line("settling_time_s", [](const ControllerResult& r) {
    return metric_cell_text(r.metrics.settling_time[0]) + " / " +
           metric_cell_text(r.metrics.settling_time[1]);
  });
  line("overshoot_pct", [](const ControllerResult& r) {
    return metric_cell_text(r.metrics.overshoot_pct[0]) + " / " +
           metric_cell_text(r.metrics.overshoot_pct[1]);
  });
  line("itae", [](const ControllerResult& r) {
    return metric_cell_text(r.metrics.itae_value);
  });
  return out.str();
}

inline std::string summary_text(const ExperimentConfig& cfg,
                                const std::vector<ControllerResult>& rs) {
  std::ostringstream out;
  out << "scopesim " << kVersion << " experiment summary\n";
  out << "plant: a1=" << format_double(cfg.plant.a1)
      << " a2=" << format_double(cfg.plant.a2)
      << " a3=" << format_double(cfg.plant.a3)
      << " gravity=" << (cfg.plant.gravity_enabled ? "on" : "off") << "\n";
  out << "sim: h=" << format_double(cfg.sim.step_size)
      << " s, duration=" << format_double(cfg.sim.duration)
      << " s, theta_desired=[" << format_double(cfg.sim.theta_desired[0])
      << ", " << format_double(cfg.sim.theta_desired[1]) << "] rad\n\n";
  for (const auto& r : rs) {
    out << "controller " << r.spec.name << " (" << kind_name(r.spec.kind)
        << ")";
    if (r.failed) {
      out << ": FAILED: " << r.failure << "\n";
      continue;
    }
    out << "\n";
    if (r.tuned) {
      out << "  tuned by GA: seed=" << cfg.ga.seed
          << " pop=" << cfg.ga.population_size
          << " generations=" << cfg.ga.generations
          << " best_fitness=" << format_double(r.best_history.back()) << "\n";
    }
    out << "  rise_time_s: " << metric_cell_text(r.metrics.rise_time[0])
        << " / " << metric_cell_text(r.metrics.rise_time[1]) << "\n";
    out << "  settling_time_s: " << metric_cell_text(r.metrics.settling_time[0])
        << " / " << metric_cell_text(r.metrics.settling_time[1]) << "\n";
    out << "  overshoot_pct: " << metric_cell_text(r.metrics.overshoot_pct[0])
        << " / " << metric_cell_text(r.metrics.overshoot_pct[1]) << "\n";
    out << "  itae: " << format_double(r.metrics.itae_value) << "\n";
  }
  return out.str();
}

/// Simulates one resolved controller at the full-resolution sim settings and
/// writes its per-controller artifacts.
inline void run_and_persist(ControllerResult& res, const ExperimentConfig& cfg,
                            const std::filesystem::path& dir,
                            const std::string& stem) {
  const Reference ref = reference_from(cfg.sim);
  try {
    const TorqueLaw law(res.controller, cfg.plant);
    res.trace = simulate(cfg.plant, law, cfg.sim);
    res.metrics = analyze(res.trace, ref, cfg.metrics);
  } catch (const Error& e) {
    res.failed = true;
    res.failure = e.what();
    return;
  }
  atomic_write(dir / (stem + "_trace.csv"), trace_to_csv(res.trace));
  atomic_write(dir / (stem + "_metrics.csv"), metrics_to_csv(res.metrics));
  if (res.tuned) {
    atomic_write(dir / (stem + "_generations.csv"),
                 generation_log_to_csv(res.best_history, res.mean_history));
    if (is_fuzzy(res.controller.kind)) {
      save_fuzzy(dir / (stem + "_tuned_fuzzy.txt"), res.controller.fuzzy);
    } else {
      save_gains(dir / (stem + "_tuned_gains.txt"), res.controller.gains);
    }
  }
}

}  // namespace detail

/// Runs a single-controller experiment (the `simulate` and `tune` verbs).
/// Artifacts land in the output directory: trace CSV, metrics CSV, summary,
/// and for tuned controllers the generation log and tuned definition.
inline std::vector<ControllerResult> run_experiment(
    const std::filesystem::path& config_path, const RunOptions& opts,
    bool expect_tune) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  detail::apply_overrides(cfg, opts);
  if (cfg.controllers.size() != 1) {
    throw ConfigError("this verb needs exactly one [controller] section");
  }
  const bool is_tune = cfg.controllers[0].source == ParamSource::tune;
  if (expect_tune && !is_tune) {
    throw ConfigError("tune needs a controller with 'source = tune'");
  }
  if (!expect_tune && is_tune) {
    throw ConfigError("simulate cannot take 'source = tune'; use the tune verb");
  }
  const std::filesystem::path dir = cfg.output_dir;
  detail::ensure_output_dir(dir);
  std::vector<ControllerResult> results;
  if (!opts.quiet && is_tune) {
    std::cout << "tuning " << cfg.controllers[0].name << " (population "
              << cfg.ga.population_size << ", " << cfg.ga.generations
              << " generations, seed " << cfg.ga.seed << ")...\n";
  }
  results.push_back(detail::resolve_controller(cfg.controllers[0], cfg));
  detail::run_and_persist(results[0], cfg, dir, results[0].spec.name);
  if (results[0].failed) {
    throw DivergedError("controller run failed: " + results[0].failure, 0);
  }
  atomic_write(dir / "summary.txt", detail::summary_text(cfg, results));
  return results;
}

/// Runs every controller in the config on the shared plant/sim settings and
/// emits a comparison table in a fixed column order (GA-FLC, GA-PD, FLC, PD).
/// A failed member
/// leaves absent cells and makes the run report failure.
inline std::vector<ControllerResult> run_comparison(
    const std::filesystem::path& config_path, const RunOptions& opts) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  detail::apply_overrides(cfg, opts);
  if (cfg.controllers.size() < 2) {
    throw ConfigError("compare needs at least two [controller] sections");
  }
  std::vector<ControllerSpec> specs = cfg.controllers;
  std::stable_sort(specs.begin(), specs.end(),
                   [](const ControllerSpec& a, const ControllerSpec& b) {
                     return detail::comparison_rank(a.kind) <
                            detail::comparison_rank(b.kind);
                   });
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t j = i + 1; j < specs.size(); ++j) {
      if (specs[i].name == specs[j].name) {
        throw ConfigError("duplicate controller name '" + specs[i].name +
                          "'; set distinct 'name =' keys");
      }
    }
  }
  const std::filesystem::path dir = cfg.output_dir;
  detail::ensure_output_dir(dir);
  std::vector<ControllerResult> results;
  for (const auto& spec : specs) {
    if (!opts.quiet) {
      std::cout << (spec.source == ParamSource::tune ? "tuning and running "
                                                     : "running ")
                << spec.name << "...\n";
    }
    ControllerResult res;
    try {
      res = detail::resolve_controller(spec, cfg);
      detail::run_and_persist(res, cfg, dir, spec.name);
    } catch (const Error& e) {
      res.spec = spec;
      res.failed = true;
      res.failure = e.what();
    }
    results.push_back(std::move(res));
  }
  atomic_write(dir / "comparison.csv", detail::comparison_csv(results));
  atomic_write(dir / "comparison.txt", detail::comparison_text(results));
  atomic_write(dir / "summary.txt", detail::summary_text(cfg, results));
  return results;
}

}  // namespace scopesim
