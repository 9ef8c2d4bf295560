#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "scopesim/controllers.hpp"
#include "scopesim/errors.hpp"
#include "scopesim/fuzzy.hpp"
#include "scopesim/integrator.hpp"
#include "scopesim/metrics.hpp"

namespace scopesim {

/// Shortest decimal form that parses back to the identical double, so the
/// write -> read -> write cycle is byte-stable.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw DomainError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::vector<std::string> split_char(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

/// Writes content to `path` atomically: a temp sibling is written, flushed,
/// and renamed over the target, so failures never leave partial artifacts.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Fuzzy controller definition: line-oriented text, lossless round-trip.
// ---------------------------------------------------------------------------

inline constexpr const char* kFuzzyFormatTag = "scopesim-fuzzy-v1";
inline constexpr const char* kGainsFormatTag = "scopesim-pd-gains-v1";

inline std::string to_text(const FuzzyControllerDef& def) {
  std::ostringstream out;
  out << "format = " << kFuzzyFormatTag << "\n";
  const struct {
    const char* name;
    const FuzzyVariable* var;
  } vars[] = {{"error", &def.error},
              {"error_rate", &def.error_rate},
              {"output", &def.output}};
  for (const auto& [name, var] : vars) {
    out << "\n[variable " << name << "]\n";
    out << "universe = " << format_double(var->universe_min) << " "
        << format_double(var->universe_max) << "\n";
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      out << "mf " << kLabelNames[k] << " = "
          << format_double(var->mfs[k].left) << " "
          << format_double(var->mfs[k].peak) << " "
          << format_double(var->mfs[k].right) << "\n";
    }
  }
  out << "\n[rules]\n";
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    out << kLabelNames[i] << " =";
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      out << " " << kLabelNames[static_cast<std::size_t>(def.rules.table[i][j])];
    }
    out << "\n";
  }
  return out.str();
}

inline std::optional<std::size_t> label_index(std::string_view name) {
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    if (name == kLabelNames[k]) return k;
  }
  return std::nullopt;
}

inline FuzzyControllerDef fuzzy_from_text(const std::string& text) {
  FuzzyControllerDef def;
  FuzzyVariable* current = nullptr;
  bool in_rules = false;
  bool seen_format = false;
  std::size_t lineno = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line == "[rules]") {
        in_rules = true;
        current = nullptr;
        continue;
      }
      in_rules = false;
      if (line == "[variable error]") current = &def.error;
      else if (line == "[variable error_rate]") current = &def.error_rate;
      else if (line == "[variable output]") current = &def.output;
      else throw ConfigError("unknown section " + line, lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value'", lineno);
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const auto vals = detail::split_ws(line.substr(eq + 1));
    if (key == "format") {
      if (vals.size() != 1 || vals[0] != kFuzzyFormatTag) {
        throw ConfigError("unsupported format tag", lineno);
      }
      seen_format = true;
      continue;
    }
    if (in_rules) {
      const auto row = label_index(key);
      if (!row || vals.size() != kLabelCount) {
        throw ConfigError("rule rows need a label key and 5 label cells",
                          lineno);
      }
      for (std::size_t j = 0; j < kLabelCount; ++j) {
        const auto cell = label_index(vals[j]);
        if (!cell) throw ConfigError("unknown label " + vals[j], lineno);
        def.rules.table[*row][j] = static_cast<Label>(*cell);
      }
      continue;
    }
    if (current == nullptr) {
      throw ConfigError("key outside any section", lineno);
    }
    if (key == "universe") {
      if (vals.size() != 2) throw ConfigError("universe needs two values", lineno);
      current->universe_min = parse_double(vals[0]);
      current->universe_max = parse_double(vals[1]);
      continue;
    }
    const auto keyparts = detail::split_ws(key);
    if (keyparts.size() == 2 && keyparts[0] == "mf") {
      const auto k = label_index(keyparts[1]);
      if (!k || vals.size() != 3) {
        throw ConfigError("mf lines need a label and three vertices", lineno);
      }
      current->mfs[*k] = TriangularMF{parse_double(vals[0]),
                                      parse_double(vals[1]),
                                      parse_double(vals[2])};
      continue;
    }
    throw ConfigError("unknown key '" + key + "'", lineno);
  }
  if (!seen_format) throw ConfigError("missing format tag");
  validate(def);
  return def;
}

inline void save_fuzzy(const std::filesystem::path& path,
                       const FuzzyControllerDef& def) {
  atomic_write(path, to_text(def));
}

inline FuzzyControllerDef load_fuzzy(const std::filesystem::path& path) {
  return fuzzy_from_text(read_file(path));
}

// ---------------------------------------------------------------------------
// PD gain files.
// ---------------------------------------------------------------------------

inline std::string to_text(const PDGains& g) {
  std::ostringstream out;
  out << "format = " << kGainsFormatTag << "\n";
  out << "kp = " << format_double(g.kp[0]) << " " << format_double(g.kp[1])
      << "\n";
  out << "kd = " << format_double(g.kd[0]) << " " << format_double(g.kd[1])
      << "\n";
  return out.str();
}

inline PDGains gains_from_text(const std::string& text) {
  PDGains g;
  bool seen_format = false, seen_kp = false, seen_kd = false;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    const std::string key = detail::trim(line.substr(0, eq));
    const auto vals = detail::split_ws(line.substr(eq + 1));
    if (key == "format") {
      if (vals.size() != 1 || vals[0] != kGainsFormatTag) {
        throw ConfigError("unsupported format tag", lineno);
      }
      seen_format = true;
    } else if (key == "kp" || key == "kd") {
      if (vals.size() != 2) throw ConfigError(key + " needs two values", lineno);
      Vec2 v{{parse_double(vals[0]), parse_double(vals[1])}};
      (key == "kp" ? g.kp : g.kd) = v;
      (key == "kp" ? seen_kp : seen_kd) = true;
    } else {
      throw ConfigError("unknown key '" + key + "'", lineno);
    }
  }
  if (!seen_format || !seen_kp || !seen_kd) {
    throw ConfigError("gain file needs format, kp and kd lines");
  }
  validate(g);
  return g;
}

inline void save_gains(const std::filesystem::path& path, const PDGains& g) {
  atomic_write(path, to_text(g));
}

inline PDGains load_gains(const std::filesystem::path& path) {
  return gains_from_text(read_file(path));
}

// ---------------------------------------------------------------------------
// Trace CSV: t,theta1,theta2,theta1_dot,theta2_dot,tau1,tau2,e1,e2
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t,theta1,theta2,theta1_dot,theta2_dot,tau1,tau2,e1,e2";

inline std::string trace_to_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << kTraceHeader << "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << format_double(trace.times[k]) << ','
        << format_double(trace.states[k].theta[0]) << ','
        << format_double(trace.states[k].theta[1]) << ','
        << format_double(trace.states[k].theta_dot[0]) << ','
        << format_double(trace.states[k].theta_dot[1]) << ','
        << format_double(trace.torques[k][0]) << ','
        << format_double(trace.torques[k][1]) << ','
        << format_double(trace.errors[k][0]) << ','
        << format_double(trace.errors[k][1]) << '\n';
  }
  return out.str();
}

inline SimTrace trace_from_csv(const std::string& csv) {
  SimTrace trace;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kTraceHeader) {
    throw ConfigError("trace csv: bad or missing header", 1);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (cells.size() != 9) {
      throw ConfigError("trace csv: expected 9 columns", lineno);
    }
    trace.times.push_back(parse_double(cells[0]));
    trace.states.push_back(
        JointState{Vec2{{parse_double(cells[1]), parse_double(cells[2])}},
                   Vec2{{parse_double(cells[3]), parse_double(cells[4])}}});
    trace.torques.push_back(Vec2{{parse_double(cells[5]), parse_double(cells[6])}});
    trace.errors.push_back(Vec2{{parse_double(cells[7]), parse_double(cells[8])}});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Metrics / generation-log CSV.
// ---------------------------------------------------------------------------

inline std::string metrics_to_csv(const TransientMetrics& m) {
  auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
  };
  std::ostringstream out;
  out << "metric,joint1,joint2\n";
  out << "rise_time_s," << cell(m.rise_time[0]) << ',' << cell(m.rise_time[1])
      << "\n";
  out << "settling_time_s," << cell(m.settling_time[0]) << ','
      << cell(m.settling_time[1]) << "\n";
  out << "overshoot_pct," << cell(m.overshoot_pct[0]) << ','
      << cell(m.overshoot_pct[1]) << "\n";
  out << "itae," << format_double(m.itae_value) << ','
      << format_double(m.itae_value) << "\n";
  return out.str();
}

inline std::string generation_log_to_csv(const std::vector<double>& best,
                                         const std::vector<double>& mean) {
  std::ostringstream out;
  out << "generation,best_fitness,mean_fitness\n";
  for (std::size_t g = 0; g < best.size(); ++g) {
    out << g << ',' << format_double(best[g]) << ',' << format_double(mean[g])
        << '\n';
  }
  return out.str();
}

namespace detail {

inline std::optional<double> parse_optional_cell(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  return parse_double(t);
}

}  // namespace detail

inline TransientMetrics metrics_from_csv(const std::string& csv) {
  TransientMetrics m;
  std::istringstream in(csv);
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false, saw_itae = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (cells.size() != 3) {
      throw ConfigError("metrics csv: expected 3 columns", lineno);
    }
    if (!saw_header) {
      if (cells[0] != "metric") throw ConfigError("metrics csv: bad header", 1);
      saw_header = true;
      continue;
    }
    const auto j1 = detail::parse_optional_cell(cells[1]);
    const auto j2 = detail::parse_optional_cell(cells[2]);
    if (cells[0] == "rise_time_s") m.rise_time = {j1, j2};
    else if (cells[0] == "settling_time_s") m.settling_time = {j1, j2};
    else if (cells[0] == "overshoot_pct") m.overshoot_pct = {j1, j2};
    else if (cells[0] == "itae") {
      if (!j1) throw ConfigError("metrics csv: itae must be present", lineno);
      m.itae_value = *j1;
      saw_itae = true;
    } else {
      throw ConfigError("metrics csv: unknown row '" + cells[0] + "'", lineno);
    }
  }
  if (!saw_header || !saw_itae) throw ConfigError("metrics csv: incomplete");
  return m;
}

inline std::pair<std::vector<double>, std::vector<double>>
generation_log_from_csv(const std::string& csv) {
  std::vector<double> best, mean;
  std::istringstream in(csv);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (cells.size() != 3) {
      throw ConfigError("generation log: expected 3 columns", lineno);
    }
    if (lineno == 1) {
      if (cells[0] != "generation") {
        throw ConfigError("generation log: bad header", 1);
      }
      continue;
    }
    if (parse_double(cells[0]) != static_cast<double>(best.size())) {
      throw ConfigError("generation log: non-contiguous generations", lineno);
    }
    best.push_back(parse_double(cells[1]));
    mean.push_back(parse_double(cells[2]));
  }
  return {best, mean};
}

/// Comparison table as emitted by the harness: one labelled row per metric,
/// absent cells empty.
struct ComparisonTable {
  std::vector<std::string> columns;  // e.g. "ga-flc_joint1"
  std::vector<std::string> row_labels;
  std::vector<std::vector<std::optional<double>>> rows;
};

inline ComparisonTable comparison_from_csv(const std::string& csv) {
  ComparisonTable table;
  std::istringstream in(csv);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (lineno == 1) {
      if (cells.empty() || cells[0] != "metric") {
        throw ConfigError("comparison csv: bad header", 1);
      }
      table.columns.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != table.columns.size() + 1) {
      throw ConfigError("comparison csv: ragged row", lineno);
    }
    table.row_labels.push_back(cells[0]);
    std::vector<std::optional<double>> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      row.push_back(detail::parse_optional_cell(cells[i]));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty() || table.rows.empty()) {
    throw ConfigError("comparison csv: empty table");
  }
  return table;
}

}  // namespace scopesim
