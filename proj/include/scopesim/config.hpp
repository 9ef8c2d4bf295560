#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scopesim/controllers.hpp"
#include "scopesim/errors.hpp"
#include "scopesim/ga.hpp"
#include "scopesim/integrator.hpp"
#include "scopesim/io.hpp"
#include "scopesim/metrics.hpp"
#include "scopesim/plant.hpp"

namespace scopesim {

/// Where a controller's parameters come from: written inline in the config,
/// loaded from a definition file, or produced by a GA tuning run.
enum class ParamSource { inline_values, file, tune };

struct ControllerSpec {
  ControllerKind kind = ControllerKind::pd;
  ParamSource source = ParamSource::inline_values;
  std::string name;            // defaults to the kind name
  PDGains gains{};             // inline pd / ga-pd
  bool baseline_gains = false; // pd: use the documented baseline
  double baseline_omega = 5.0;
  bool default_fuzzy = true;   // flc / ga-flc: stock geometry
  std::string path;            // file source
  int coa_resolution = kDefaultCoaResolution;
};

/// Parsed experiment description: plant, simulation settings, one or more
/// controllers, optional GA settings, output directory.
struct ExperimentConfig {
  PlantParams plant;
  SimConfig sim;
  std::vector<ControllerSpec> controllers;
  GAConfig ga;
  // GA fitness runs its own (coarser, fixed-length) step experiment so the
  // tuning objective does not drift with the presentation sim settings.
  double ga_fitness_step_size = 5e-3;
  double ga_fitness_duration = 3.0;
  MetricsOptions metrics;
  std::string output_dir = "out";
};

namespace detail {

struct ConfigLine {
  std::size_t number;
  std::string key;
  std::vector<std::string> values;
};

struct ConfigSection {
  std::size_t number;
  std::string header;
  std::vector<ConfigLine> lines;
};

inline std::vector<ConfigSection> parse_sections(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      sections.push_back(
          ConfigSection{lineno, trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    if (sections.empty()) throw ConfigError("key before any [section]", lineno);
    sections.back().lines.push_back(ConfigLine{
        lineno, trim(line.substr(0, eq)), split_ws(line.substr(eq + 1))});
  }
  return sections;
}

/// Angle-like quantities carry a mandatory unit token: deg / rad for angles,
/// deg/s / rad/s for rates, deg/s2 / rad/s2 for accelerations.
inline double parse_with_unit(const std::string& value, const std::string& unit,
                              const std::string& base_unit, std::size_t lineno) {
  const double v = [&] {
    try {
      return parse_double(value);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), lineno);
    }
  }();
  const std::string deg_unit = std::string("deg") + base_unit;
  const std::string rad_unit = std::string("rad") + base_unit;
  if (unit == rad_unit) return v;
  if (unit == deg_unit) return v * M_PI / 180.0;
  throw ConfigError("expected unit '" + deg_unit + "' or '" + rad_unit +
                        "' after each value, got '" + unit + "'",
                    lineno);
}

inline Vec2 parse_angle_pair(const ConfigLine& line, const std::string& base_unit) {
  if (line.values.size() != 4) {
    throw ConfigError(line.key + " needs 'v unit v unit'", line.number);
  }
  return Vec2{{parse_with_unit(line.values[0], line.values[1], base_unit, line.number),
               parse_with_unit(line.values[2], line.values[3], base_unit, line.number)}};
}

inline double parse_number(const ConfigLine& line, std::size_t index = 0) {
  try {
    return parse_double(line.values.at(index));
  } catch (const DomainError& e) {
    throw ConfigError(std::string(e.what()) + " for key '" + line.key + "'",
                      line.number);
  } catch (const std::out_of_range&) {
    throw ConfigError("missing value for key '" + line.key + "'", line.number);
  }
}

inline bool parse_bool(const ConfigLine& line) {
  const std::string& v = line.values.at(0);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true/false for key '" + line.key + "'",
                    line.number);
}

inline void apply_plant(const ConfigSection& sec, PlantParams& p) {
  for (const auto& line : sec.lines) {
    if (line.key == "profile") {
      try {
        p = plant_profile(line.values.at(0));
      } catch (const DomainError& e) {
        throw ConfigError(e.what(), line.number);
      }
    } else if (line.key == "a1") p.a1 = parse_number(line);
    else if (line.key == "a2") p.a2 = parse_number(line);
    else if (line.key == "a3") p.a3 = parse_number(line);
    else if (line.key == "gravity_enabled") p.gravity_enabled = parse_bool(line);
    else if (line.key == "g1_coeff") p.g1_coeff = parse_number(line);
    else if (line.key == "g2_coeff") p.g2_coeff = parse_number(line);
    else if (line.key == "tau_d") {
      if (line.values.size() != 2) throw ConfigError("tau_d needs two values", line.number);
      p.tau_d = Vec2{{parse_number(line, 0), parse_number(line, 1)}};
    } else {
      throw ConfigError("unknown plant key '" + line.key + "'", line.number);
    }
  }
  try {
    validate_plant(p);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), sec.number);
  }
}

inline void apply_sim(const ConfigSection& sec, SimConfig& s) {
  for (const auto& line : sec.lines) {
    if (line.key == "step_size") s.step_size = parse_number(line);
    else if (line.key == "duration") s.duration = parse_number(line);
    else if (line.key == "theta_desired") s.theta_desired = parse_angle_pair(line, "");
    else if (line.key == "theta_dot_desired") s.theta_dot_desired = parse_angle_pair(line, "/s");
    else if (line.key == "theta_ddot_desired") s.theta_ddot_desired = parse_angle_pair(line, "/s2");
    else if (line.key == "initial_theta") s.initial_state.theta = parse_angle_pair(line, "");
    else if (line.key == "initial_theta_dot") s.initial_state.theta_dot = parse_angle_pair(line, "/s");
    else throw ConfigError("unknown sim key '" + line.key + "'", line.number);
  }
  try {
    validate_sim_config(s);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), sec.number);
  }
}

inline ControllerKind parse_kind(const std::string& v, std::size_t lineno) {
  if (v == "pd") return ControllerKind::pd;
  if (v == "flc") return ControllerKind::flc;
  if (v == "ga-pd") return ControllerKind::ga_pd;
  if (v == "ga-flc") return ControllerKind::ga_flc;
  throw ConfigError("controller type must be pd | flc | ga-pd | ga-flc", lineno);
}

inline ControllerSpec parse_controller(const ConfigSection& sec) {
  ControllerSpec spec;
  bool have_type = false;
  bool have_kp = false, have_kd = false;
  bool saw_gains_file = false, saw_fuzzy_file = false, saw_default_fuzzy = false;
  int sources = 0;
  for (const auto& line : sec.lines) {
    if (line.key == "type") {
      spec.kind = parse_kind(line.values.at(0), line.number);
      have_type = true;
    } else if (line.key == "name") {
      spec.name = line.values.at(0);
    } else if (line.key == "kp") {
      if (line.values.size() != 2) throw ConfigError("kp needs two values", line.number);
      spec.gains.kp = Vec2{{parse_number(line, 0), parse_number(line, 1)}};
      have_kp = true;
    } else if (line.key == "kd") {
      if (line.values.size() != 2) throw ConfigError("kd needs two values", line.number);
      spec.gains.kd = Vec2{{parse_number(line, 0), parse_number(line, 1)}};
      have_kd = true;
    } else if (line.key == "gains") {
      if (line.values.at(0) != "baseline") {
        throw ConfigError("only 'gains = baseline' is recognized", line.number);
      }
      spec.baseline_gains = true;
      ++sources;
    } else if (line.key == "baseline_omega") {
      spec.baseline_omega = parse_number(line);
    } else if (line.key == "fuzzy") {
      if (line.values.at(0) != "default") {
        throw ConfigError("only 'fuzzy = default' is recognized", line.number);
      }
      saw_default_fuzzy = true;
      ++sources;
    } else if (line.key == "gains_file") {
      spec.source = ParamSource::file;
      spec.path = line.values.at(0);
      saw_gains_file = true;
      ++sources;
    } else if (line.key == "fuzzy_file") {
      spec.source = ParamSource::file;
      spec.path = line.values.at(0);
      saw_fuzzy_file = true;
      ++sources;
    } else if (line.key == "source") {
      if (line.values.at(0) != "tune") {
        throw ConfigError("only 'source = tune' is recognized", line.number);
      }
      spec.source = ParamSource::tune;
      ++sources;
    } else if (line.key == "coa_resolution") {
      spec.coa_resolution = static_cast<int>(parse_number(line));
    } else {
      throw ConfigError("unknown controller key '" + line.key + "'", line.number);
    }
  }
  if (!have_type) throw ConfigError("controller section needs a type", sec.number);
  if (have_kp != have_kd) {
    throw ConfigError("inline gains need both kp and kd", sec.number);
  }
  if (have_kp) ++sources;
  if (sources != 1) {
    throw ConfigError(
        "controller needs exactly one parameter source "
        "(inline kp/kd, gains = baseline, fuzzy = default, *_file, or source = tune)",
        sec.number);
  }
  const bool fuzzy_kind = is_fuzzy(spec.kind);
  if ((have_kp || spec.baseline_gains || saw_gains_file) && fuzzy_kind) {
    throw ConfigError("gain parameters do not apply to a fuzzy controller",
                      sec.number);
  }
  if ((saw_default_fuzzy || saw_fuzzy_file) && !fuzzy_kind) {
    throw ConfigError("fuzzy parameters do not apply to a gain controller",
                      sec.number);
  }
  if (spec.source == ParamSource::tune &&
      spec.kind != ControllerKind::ga_pd && spec.kind != ControllerKind::ga_flc) {
    throw ConfigError("source = tune requires type ga-pd or ga-flc", sec.number);
  }
  if (spec.name.empty()) spec.name = kind_name(spec.kind);
  return spec;
}

inline void apply_ga(const ConfigSection& sec, GAConfig& g, double& fitness_h,
                     double& fitness_duration) {
  for (const auto& line : sec.lines) {
    if (line.key == "population") g.population_size = static_cast<int>(parse_number(line));
    else if (line.key == "generations") g.generations = static_cast<int>(parse_number(line));
    else if (line.key == "crossover_rate") g.crossover_rate = parse_number(line);
    else if (line.key == "mutation_rate") g.mutation_rate = parse_number(line);
    else if (line.key == "mutation_sigma") g.mutation_sigma = parse_number(line);
    else if (line.key == "tournament") g.tournament_size = static_cast<int>(parse_number(line));
    else if (line.key == "elites") g.elite_count = static_cast<int>(parse_number(line));
    else if (line.key == "seed") g.seed = static_cast<std::uint64_t>(parse_number(line));
    else if (line.key == "fitness_step_size") fitness_h = parse_number(line);
    else if (line.key == "fitness_duration") fitness_duration = parse_number(line);
    else throw ConfigError("unknown ga key '" + line.key + "'", line.number);
  }
  try {
    validate(g);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), sec.number);
  }
}

}  // namespace detail

/// Parses the experiment config format: flat `key = value` lines grouped
/// under [plant], [sim], [controller] (repeatable), [ga] and [output]
/// sections. Angles take a mandatory deg/rad unit token. Errors carry the
/// offending line number.
inline ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  const auto sections = detail::parse_sections(text);
  if (sections.empty()) throw ConfigError("empty config");
  for (const auto& sec : sections) {
    if (sec.header == "plant") detail::apply_plant(sec, cfg.plant);
    else if (sec.header == "sim") detail::apply_sim(sec, cfg.sim);
    else if (sec.header == "controller") cfg.controllers.push_back(detail::parse_controller(sec));
    else if (sec.header == "ga")
      detail::apply_ga(sec, cfg.ga, cfg.ga_fitness_step_size,
                       cfg.ga_fitness_duration);
    else if (sec.header == "metrics") {
      for (const auto& line : sec.lines) {
        if (line.key == "rise_low") cfg.metrics.rise_low = detail::parse_number(line);
        else if (line.key == "rise_high") cfg.metrics.rise_high = detail::parse_number(line);
        else if (line.key == "settling_band") cfg.metrics.settling_band = detail::parse_number(line);
        else throw ConfigError("unknown metrics key '" + line.key + "'", line.number);
      }
      try {
        validate(cfg.metrics);
      } catch (const DomainError& e) {
        throw ConfigError(e.what(), sec.number);
      }
    } else if (sec.header == "output") {
      for (const auto& line : sec.lines) {
        if (line.key == "dir") cfg.output_dir = line.values.at(0);
        else throw ConfigError("unknown output key '" + line.key + "'", line.number);
      }
    } else {
      throw ConfigError("unknown section [" + sec.header + "]", sec.number);
    }
  }
  if (cfg.controllers.empty()) {
    throw ConfigError("config needs at least one [controller] section");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  ExperimentConfig cfg = parse_experiment_config(read_file(path));
  // referenced files must exist at load time
  for (const auto& spec : cfg.controllers) {
    if (spec.source == ParamSource::file &&
        !std::filesystem::exists(spec.path)) {
      throw ConfigError("referenced file does not exist: " + spec.path);
    }
  }
  return cfg;
}

}  // namespace scopesim
