#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "scopesim/errors.hpp"

namespace scopesim {

/// The five linguistic labels, ordered negative-large to positive-large.
enum class Label : int { NL = 0, NS = 1, Z = 2, PS = 3, PL = 4 };

inline constexpr std::size_t kLabelCount = 5;
inline constexpr std::array<const char*, kLabelCount> kLabelNames = {
    "NL", "NS", "Z", "PS", "PL"};

inline constexpr int kDefaultCoaResolution = 1001;

/// Triangle with support (left, right) and prototype at peak. A coincident
/// left == peak (or peak == right) makes that flank a vertical shoulder.
struct TriangularMF {
  double left{};
  double peak{};
  double right{};
};

inline void validate(const TriangularMF& mf) {
  if (!(std::isfinite(mf.left) && std::isfinite(mf.peak) &&
        std::isfinite(mf.right))) {
    throw DomainError("membership vertices must be finite");
  }
  if (!(mf.left <= mf.peak && mf.peak <= mf.right && mf.left < mf.right)) {
    throw DomainError("membership requires left <= peak <= right, left < right");
  }
}

/// Membership grade in [0, 1]: 1 at the peak, linear flanks, 0 at and outside
/// the support edges.
inline double membership(const TriangularMF& mf, double x) {
  if (x < mf.left || x > mf.right) return 0.0;
  if (x == mf.peak) return 1.0;
  if (x < mf.peak) {
    return mf.peak > mf.left ? (x - mf.left) / (mf.peak - mf.left) : 0.0;
  }
  return mf.right > mf.peak ? (mf.right - x) / (mf.right - mf.peak) : 0.0;
}

/// Five-label linguistic variable over [universe_min, universe_max].
struct FuzzyVariable {
  std::array<TriangularMF, kLabelCount> mfs{};
  double universe_min{};
  double universe_max{};
};

using Grades = std::array<double, kLabelCount>;

/// Checks vertex validity, strictly increasing peaks, and completeness
/// (every universe point carries at least one nonzero grade; probed on a
/// 2001-point grid and at every vertex).
inline void validate(const FuzzyVariable& var) {
  if (!(var.universe_min < var.universe_max)) {
    throw DomainError("universe must be a nonempty interval");
  }
  for (const auto& mf : var.mfs) validate(mf);
  for (std::size_t k = 1; k < kLabelCount; ++k) {
    if (!(var.mfs[k - 1].peak < var.mfs[k].peak)) {
      throw DomainError("membership peaks must be strictly increasing");
    }
  }
  auto covered = [&](double x) {
    for (const auto& mf : var.mfs) {
      if (membership(mf, x) > 0.0) return true;
    }
    return false;
  };
  constexpr int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double x = var.universe_min + (var.universe_max - var.universe_min) *
                                            i / (kGrid - 1);
    if (!covered(x)) {
      throw DomainError("universe not fully covered at x = " +
                        std::to_string(x));
    }
  }
  for (const auto& mf : var.mfs) {
    for (double x : {mf.left, mf.peak, mf.right}) {
      if (x >= var.universe_min && x <= var.universe_max && !covered(x)) {
        throw DomainError("universe not fully covered at vertex " +
                          std::to_string(x));
      }
    }
  }
}

/// Grades of all five labels at x, after clamping x to the universe.
inline Grades fuzzify(const FuzzyVariable& var, double x) {
  x = std::clamp(x, var.universe_min, var.universe_max);
  Grades g{};
  for (std::size_t k = 0; k < kLabelCount; ++k) g[k] = membership(var.mfs[k], x);
  return g;
}

/// 5x5 consequent table indexed by (error label, error-rate label).
struct RuleBase {
  std::array<std::array<Label, kLabelCount>, kLabelCount> table{};
};

/// The stock rule table: consequents saturate the label-index sum of the two
/// antecedents, giving an antisymmetric surface.
///
///   e \ de |  NL  NS  Z   PS  PL
///   -------+--------------------
///   NL     |  NL  NL  NL  NS  Z
///   NS     |  NL  NL  NS  Z   PS
///   Z      |  NL  NS  Z   PS  PL
///   PS     |  NS  Z   PS  PL  PL
///   PL     |  Z   PS  PL  PL  PL
inline RuleBase default_rule_table() {
  using enum Label;
  return RuleBase{{{{{NL, NL, NL, NS, Z}},
                    {{NL, NL, NS, Z, PS}},
                    {{NL, NS, Z, PS, PL}},
                    {{NS, Z, PS, PL, PL}},
                    {{Z, PS, PL, PL, PL}}}}};
}

/// One fired rule: consequent label and min-composed strength.
struct RuleActivation {
  Label consequent{};
  double strength{};
};

using Activations = std::array<RuleActivation, kLabelCount * kLabelCount>;

/// Mamdani composition: strength of cell (i, j) is min(grade_e[i],
/// grade_de[j]). Duplicate consequents are aggregated with max at
/// defuzzification.
inline Activations infer(const RuleBase& rules, const Grades& grades_e,
                         const Grades& grades_de) {
  Activations out{};
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      out[i * kLabelCount + j] = RuleActivation{
          rules.table[i][j], std::min(grades_e[i], grades_de[j])};
    }
  }
  return out;
}

/// Max-aggregated strength per output label.
inline Grades aggregate(const Activations& acts) {
  Grades s{};
  for (const auto& a : acts) {
    auto k = static_cast<std::size_t>(a.consequent);
    s[k] = std::max(s[k], a.strength);
  }
  return s;
}

namespace detail {

/// Discrete centroid of mu over uniform samples ys. Endpoint samples carry
/// half weight (the clipped edge sets are nonzero at the universe bounds, so
/// plain equal weights would bias the centroid by O(sample spacing)).
inline double centroid(const std::vector<double>& ys,
                       const std::vector<double>& mu, double midpoint) {
  const std::size_t n = ys.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    num += w * ys[i] * mu[i];
    den += w * mu[i];
  }
  if (den <= 0.0) return midpoint;
  return num / den;
}

}  // namespace detail

/// Center-of-area defuzzification: clips each consequent set at its
/// aggregated strength, max-combines, and returns the centroid of the
/// resulting set sampled at `resolution` uniform points across the output
/// universe. Returns the universe midpoint when nothing fired.
inline double defuzzify_coa(const FuzzyVariable& var_out,
                            const Activations& activations, int resolution) {
  if (resolution < 100) throw DomainError("coa resolution must be >= 100");
  const Grades s = aggregate(activations);
  const double lo = var_out.universe_min, hi = var_out.universe_max;
  std::vector<double> ys(static_cast<std::size_t>(resolution));
  std::vector<double> mu(static_cast<std::size_t>(resolution), 0.0);
  for (int i = 0; i < resolution; ++i) {
    const double y = lo + (hi - lo) * i / (resolution - 1);
    ys[static_cast<std::size_t>(i)] = y;
    double m = 0.0;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      if (s[k] <= m) continue;
      m = std::max(m, std::min(s[k], membership(var_out.mfs[k], y)));
    }
    mu[static_cast<std::size_t>(i)] = m;
  }
  return detail::centroid(ys, mu, 0.5 * (lo + hi));
}

/// Complete two-input, one-output controller definition: position error,
/// error rate, and commanded output variables plus the rule table.
struct FuzzyControllerDef {
  FuzzyVariable error;
  FuzzyVariable error_rate;
  FuzzyVariable output;
  RuleBase rules = default_rule_table();
};

inline void validate(const FuzzyControllerDef& def) {
  validate(def.error);
  validate(def.error_rate);
  validate(def.output);
}

namespace detail {

/// Uniform five-label variable: peaks at {-2, -1, 0, 1, 2} * half_width,
/// symmetric triangles with 50% overlap, universe spanning the peak range.
inline FuzzyVariable uniform_variable(double half_width) {
  FuzzyVariable var;
  for (int k = 0; k < static_cast<int>(kLabelCount); ++k) {
    const double peak = (k - 2) * half_width;
    var.mfs[static_cast<std::size_t>(k)] =
        TriangularMF{peak - half_width, peak, peak + half_width};
  }
  var.universe_min = -2.0 * half_width;
  var.universe_max = 2.0 * half_width;
  return var;
}

}  // namespace detail

inline constexpr double kErrorHalfWidth = M_PI / 2.0;    // rad
inline constexpr double kRateHalfWidth = 0.5;            // rad/s
inline constexpr double kOutputHalfWidth = 50.0 / 3.0;   // commanded accel

/// The untuned controller geometry: error peaks at multiples of pi/2 over
/// [-pi, pi], rate peaks at multiples of 0.5 over [-1, 1], output peaks at
/// multiples of 50/3 over [-100/3, 100/3]. Inputs beyond a universe edge are
/// clamped, so the edge sets saturate.
inline FuzzyControllerDef default_fuzzy_controller() {
  FuzzyControllerDef def;
  def.error = detail::uniform_variable(kErrorHalfWidth);
  def.error_rate = detail::uniform_variable(kRateHalfWidth);
  def.output = detail::uniform_variable(kOutputHalfWidth);
  def.rules = default_rule_table();
  return def;
}

/// Evaluates a fuzzy controller repeatedly with the output sets pre-sampled
/// at a fixed resolution. Immutable after construction; safe to share across
/// threads.
class FlcEvaluator {
 public:
  FlcEvaluator(const FuzzyControllerDef& def, int resolution)
      : def_(def), resolution_(resolution) {
    if (resolution < 100) throw DomainError("coa resolution must be >= 100");
    validate(def_);
    const double lo = def_.output.universe_min;
    const double hi = def_.output.universe_max;
    midpoint_ = 0.5 * (lo + hi);
    const auto n = static_cast<std::size_t>(resolution);
    ys_.resize(n);
    for (std::size_t k = 0; k < kLabelCount; ++k) mf_samples_[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
      ys_[i] = y;
      for (std::size_t k = 0; k < kLabelCount; ++k) {
        mf_samples_[k][i] = membership(def_.output.mfs[k], y);
      }
    }
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      std::size_t first = 0, past = n;
      while (first < n && mf_samples_[k][first] == 0.0) ++first;
      while (past > first && mf_samples_[k][past - 1] == 0.0) --past;
      support_begin_[k] = first < n ? first : 0;
      support_end_[k] = past > first ? past - 1 : 0;
    }
  }

  /// fuzzify -> infer -> center-of-area. The sample sweep only visits labels
  /// that fired and the index range their supports cover.
  double operator()(double e, double e_dot) const {
    const Grades ge = fuzzify(def_.error, e);
    const Grades gd = fuzzify(def_.error_rate, e_dot);
    Grades s{};
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      if (ge[i] <= 0.0) continue;
      for (std::size_t j = 0; j < kLabelCount; ++j) {
        const auto k = static_cast<std::size_t>(def_.rules.table[i][j]);
        s[k] = std::max(s[k], std::min(ge[i], gd[j]));
      }
    }
    std::size_t active[kLabelCount];
    std::size_t n_active = 0;
    std::size_t lo = ys_.size(), hi = 0;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      if (s[k] > 0.0) {
        active[n_active++] = k;
        lo = std::min(lo, support_begin_[k]);
        hi = std::max(hi, support_end_[k]);
      }
    }
    if (n_active == 0) return midpoint_;
    const std::size_t last = ys_.size() - 1;
    double num = 0.0, den = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      double m = 0.0;
      for (std::size_t a = 0; a < n_active; ++a) {
        const std::size_t k = active[a];
        const double c = std::min(s[k], mf_samples_[k][i]);
        m = c > m ? c : m;
      }
      const double w = (i == 0 || i == last) ? 0.5 : 1.0;
      num += w * ys_[i] * m;
      den += w * m;
    }
    if (den <= 0.0) return midpoint_;
    return num / den;
  }

  const FuzzyControllerDef& definition() const { return def_; }
  int resolution() const { return resolution_; }

 private:
  FuzzyControllerDef def_;
  int resolution_;
  double midpoint_;
  std::vector<double> ys_;
  std::array<std::vector<double>, kLabelCount> mf_samples_;
  std::array<std::size_t, kLabelCount> support_begin_{};
  std::array<std::size_t, kLabelCount> support_end_{};
};

/// One-shot convenience for tests and spot checks; builds a fresh evaluator.
inline double flc_output(double e, double e_dot, const FuzzyControllerDef& def,
                         int resolution = kDefaultCoaResolution) {
  return FlcEvaluator(def, resolution)(e, e_dot);
}

}  // namespace scopesim
