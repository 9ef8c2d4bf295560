#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "scopesim/controllers.hpp"
#include "scopesim/errors.hpp"
#include "scopesim/integrator.hpp"

namespace scopesim {

inline constexpr double kFitnessWeightAlpha = 0.01;
inline constexpr double kFitnessWeightBeta = 0.01;
inline constexpr double kDefaultSettlingBand = 0.02;
inline constexpr double kDefaultRiseLow = 0.1;
inline constexpr double kDefaultRiseHigh = 0.9;

/// Conventions used by the step-response metrics; the defaults are the
/// common textbook choices (10-90% rise, +-2% settling band).
struct MetricsOptions {
  double rise_low = kDefaultRiseLow;
  double rise_high = kDefaultRiseHigh;
  double settling_band = kDefaultSettlingBand;
};

inline void validate(const MetricsOptions& o) {
  if (!(0.0 < o.rise_low && o.rise_low < o.rise_high && o.rise_high < 1.0)) {
    throw DomainError("rise thresholds must satisfy 0 < low < high < 1");
  }
  if (!(o.settling_band > 0.0)) {
    throw DomainError("settling band must be positive");
  }
}

/// Step-response numbers per joint. Metrics that never trigger within the
/// trace are absent rather than carrying a sentinel.
struct TransientMetrics {
  std::array<std::optional<double>, 2> rise_time{};     // s
  std::array<std::optional<double>, 2> settling_time{}; // s
  std::array<std::optional<double>, 2> overshoot_pct{}; // %
  double itae_value = 0.0;
};

namespace detail {

inline void check_series(std::span<const double> series,
                         std::span<const double> times, double final_value) {
  if (series.empty() || series.size() != times.size()) {
    throw DomainError("metrics: series and times must be nonempty and equal");
  }
  if (final_value == 0.0) {
    throw DomainError("metrics: degenerate reference (final value is zero)");
  }
}

/// First time the normalized response reaches `level`, linearly interpolated
/// between samples; nullopt if never reached.
inline std::optional<double> first_crossing(std::span<const double> series,
                                            std::span<const double> times,
                                            double final_value, double level) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = series[i] / final_value;
    if (y >= level) {
      if (i == 0) return times[0];
      const double y0 = series[i - 1] / final_value;
      const double frac = (level - y0) / (y - y0);
      return times[i - 1] + frac * (times[i] - times[i - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// 10-90% rise time: duration between the first crossings of 10% and 90% of
/// the final value. Absent when the upper threshold is never reached.
inline std::optional<double> rise_time(std::span<const double> series,
                                       double final_value,
                                       std::span<const double> times,
                                       double low = kDefaultRiseLow,
                                       double high = kDefaultRiseHigh) {
  detail::check_series(series, times, final_value);
  const auto t_lo = detail::first_crossing(series, times, final_value, low);
  const auto t_hi = detail::first_crossing(series, times, final_value, high);
  if (!t_lo || !t_hi) return std::nullopt;
  return *t_hi - *t_lo;
}

/// Earliest time (relative to the trace start) after which every sample stays
/// within +-band_fraction * |final_value| of the final value; measured from
/// the last re-entry when the response leaves the band again. Absent when the
/// trace ends outside the band.
inline std::optional<double> settling_time(
    std::span<const double> series, double final_value,
    std::span<const double> times, double band_fraction = kDefaultSettlingBand) {
  detail::check_series(series, times, final_value);
  const double band = band_fraction * std::abs(final_value);
  std::size_t last_outside = series.size();  // size() = none outside
  for (std::size_t i = series.size(); i-- > 0;) {
    if (std::abs(series[i] - final_value) > band) {
      last_outside = i;
      break;
    }
  }
  if (last_outside == series.size()) return 0.0;
  if (last_outside + 1 == series.size()) return std::nullopt;
  return times[last_outside + 1] - times.front();
}

/// Peak excursion beyond the final value, in percent of |final value|;
/// mirrored for negative steps. Never negative.
inline double overshoot_pct(std::span<const double> series,
                            double final_value) {
  std::vector<double> dummy_times(series.size(), 0.0);
  detail::check_series(series, dummy_times, final_value);
  double peak = series.front() / final_value;
  for (double v : series) peak = std::max(peak, v / final_value);
  return 100.0 * std::max(0.0, peak - 1.0);
}

/// Weighted absolute-error integral over the trace,
///
///   sum over joints of integral_0^T (alpha |e| + beta |edot|) dt
///
/// with alpha = beta = 0.01, discretized as a left-rectangle sum at the trace
/// step (the final sample starts no step and contributes nothing).
inline double itae_value(const SimTrace& trace, const Vec2& theta_dot_desired) {
  if (trace.size() < 2) return 0.0;
  const double h = trace.times[1] - trace.times[0];
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      const double e = trace.errors[k][i];
      const double e_dot = theta_dot_desired[i] - trace.states[k].theta_dot[i];
      acc += (kFitnessWeightAlpha * std::abs(e) +
              kFitnessWeightBeta * std::abs(e_dot)) *
             h;
    }
  }
  return acc;
}

inline double itae_value(const SimTrace& trace) {
  return itae_value(trace, Vec2{});
}

/// Applies the three per-joint step metrics plus the error integral.
/// Degenerate references (zero target) surface as absent fields.
inline TransientMetrics analyze(const SimTrace& trace, const Reference& ref,
                                const MetricsOptions& opts = {}) {
  validate(opts);
  TransientMetrics m;
  std::vector<double> series(trace.size());
  for (int i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < trace.size(); ++k) {
      series[k] = trace.states[k].theta[i];
    }
    const double final_value = ref.theta_d[i];
    try {
      m.rise_time[i] = rise_time(series, final_value, trace.times,
                                 opts.rise_low, opts.rise_high);
      m.settling_time[i] =
          settling_time(series, final_value, trace.times, opts.settling_band);
      m.overshoot_pct[i] = overshoot_pct(series, final_value);
    } catch (const DomainError&) {
      m.rise_time[i] = std::nullopt;
      m.settling_time[i] = std::nullopt;
      m.overshoot_pct[i] = std::nullopt;
    }
  }
  m.itae_value = itae_value(trace, ref.theta_dot_d);
  return m;
}

}  // namespace scopesim
