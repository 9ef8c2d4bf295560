#include "scopesim/metrics.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

using namespace scopesim;

namespace {

std::vector<double> uniform_times(std::size_t n, double h, double t0 = 0.0) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = t0 + static_cast<double>(k) * h;
  return t;
}

/// Critically damped unit step with natural frequency omega.
std::vector<double> critically_damped(std::size_t n, double h, double omega) {
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    y[k] = 1.0 - (1.0 + omega * t) * std::exp(-omega * t);
  }
  return y;
}

SimTrace constant_error_trace(std::size_t steps, double h, double e1, double e2) {
  SimTrace trace;
  for (std::size_t k = 0; k <= steps; ++k) {
    trace.times.push_back(static_cast<double>(k) * h);
    trace.states.push_back(JointState{Vec2{{1.0 - e1, 1.0 - e2}}, Vec2{}});
    trace.torques.push_back(Vec2{});
    trace.errors.push_back(Vec2{{e1, e2}});
  }
  return trace;
}

}  // namespace

TEST(RiseTime, InstantAndAbsentCases) {
  const auto t = uniform_times(11, 0.1);
  const std::vector<double> pinned(11, 2.0);
  EXPECT_EQ(rise_time(pinned, 2.0, t), 0.0);
  std::vector<double> stuck(11, 0.5);  // never reaches 90% of 1.0
  EXPECT_FALSE(rise_time(stuck, 1.0, t).has_value());
}

TEST(RiseTime, FirstOrderAnalyticOracle) {
  // 1 - exp(-t): 10-90% rise = ln 9 = 2.19722...
  const double h = 1e-3;
  const std::size_t n = 10001;
  const auto t = uniform_times(n, h);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = 1.0 - std::exp(-t[k]);
  const auto rise = rise_time(y, 1.0, t);
  ASSERT_TRUE(rise.has_value());
  EXPECT_NEAR(*rise, std::log(9.0), 1e-3);
}

TEST(RiseTime, DegenerateReferenceThrows) {
  const auto t = uniform_times(5, 0.1);
  const std::vector<double> y(5, 0.0);
  EXPECT_THROW(rise_time(y, 0.0, t), DomainError);
}

TEST(SettlingTime, ConstantAndReEntryCases) {
  const auto t = uniform_times(8, 0.5);
  const std::vector<double> pinned(8, 1.0);
  EXPECT_EQ(settling_time(pinned, 1.0, t), 0.0);
  // enters the band, leaves at index 3, re-enters for good at index 4
  const std::vector<double> wobble = {0.0, 1.0, 1.0, 1.05, 1.0, 1.0, 1.0, 1.0};
  const auto settle = settling_time(wobble, 1.0, t);
  ASSERT_TRUE(settle.has_value());
  EXPECT_DOUBLE_EQ(*settle, t[4]);
  // trace ending outside the band has no settling time
  std::vector<double> bad = pinned;
  bad.back() = 1.5;
  EXPECT_FALSE(settling_time(bad, 1.0, t).has_value());
}

TEST(SettlingTime, CriticallyDampedAnalyticOracle) {
  // (1 + 5t) e^{-5t} = 0.02 has its last crossing at t = 1.166784...
  const double h = 1e-3;
  const auto y = critically_damped(4001, h, 5.0);
  const auto t = uniform_times(4001, h);
  const auto settle = settling_time(y, 1.0, t);
  ASSERT_TRUE(settle.has_value());
  EXPECT_NEAR(*settle, 1.1667843403834781, h + 1e-12);
}

TEST(Overshoot, MonotoneAndPeakCases) {
  const auto rising = critically_damped(2001, 1e-3, 5.0);
  EXPECT_EQ(overshoot_pct(rising, 1.0), 0.0);
  const std::vector<double> peaked = {0.0, 1.0, 2.034, 2.0, 2.0};
  EXPECT_NEAR(overshoot_pct(peaked, 2.0), 1.7, 1e-9);
}

TEST(Overshoot, UnderdampedAnalyticOracle) {
  // zeta = 0.5: peak overshoot is 100 exp(-zeta pi / sqrt(1 - zeta^2)).
  const double zeta = 0.5, wn = 3.0;
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double h = 1e-4;
  const std::size_t n = 100001;
  std::vector<double> y(n);
  const auto t = uniform_times(n, h);
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = 1.0 - std::exp(-zeta * wn * t[k]) *
                     (std::cos(wd * t[k]) +
                      zeta / std::sqrt(1.0 - zeta * zeta) * std::sin(wd * t[k]));
  }
  const double expected = 100.0 * std::exp(-zeta * M_PI / std::sqrt(1.0 - zeta * zeta));
  EXPECT_NEAR(overshoot_pct(y, 1.0), expected, 0.1);
  EXPECT_NEAR(expected, 16.3034, 1e-3);
}

TEST(Overshoot, MirroredForNegativeSteps) {
  const std::vector<double> y = {0.0, -1.0, -2.034, -2.0};
  EXPECT_NEAR(overshoot_pct(y, -2.0), 1.7, 1e-9);
}

TEST(Metrics, TimeShiftInvariance) {
  const double h = 1e-3;
  const auto y = critically_damped(4001, h, 5.0);
  const auto t0 = uniform_times(4001, h);
  const auto t5 = uniform_times(4001, h, 5.0);
  // interpolation rounds differently on shifted times; invariance holds to
  // far below the sample spacing
  EXPECT_NEAR(*rise_time(y, 1.0, t0), *rise_time(y, 1.0, t5), 1e-12);
  EXPECT_NEAR(*settling_time(y, 1.0, t0), *settling_time(y, 1.0, t5), 1e-12);
}

TEST(Metrics, TimeDilationScalesLinearly) {
  const double h = 1e-3;
  const std::size_t n = 8001;
  auto make = [&](double scale) {
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * h / scale;
      y[k] = 1.0 - (1.0 + 5.0 * t) * std::exp(-5.0 * t);
    }
    return y;
  };
  const auto t = uniform_times(n, h);
  const auto base = make(1.0);
  const auto slow = make(2.0);  // same curve traversed at half speed
  EXPECT_NEAR(*rise_time(slow, 1.0, t), 2.0 * *rise_time(base, 1.0, t), 2e-3);
  EXPECT_NEAR(*settling_time(slow, 1.0, t), 2.0 * *settling_time(base, 1.0, t),
              2e-3);
}

TEST(Metrics, OvershootScaleInvariance) {
  const std::vector<double> y = {0.0, 1.0, 1.1, 1.05};
  const double base = overshoot_pct(y, 1.05);
  std::vector<double> scaled(y);
  for (auto& v : scaled) v *= 37.5;
  EXPECT_NEAR(overshoot_pct(scaled, 1.05 * 37.5), base, 1e-9);
}

TEST(Itae, ConstantErrorClosedForm) {
  // e = [1, 0] held for 1 s: 0.01 * 1 * 1 = 0.01.
  const SimTrace trace = constant_error_trace(1000, 1e-3, 1.0, 0.0);
  EXPECT_NEAR(itae_value(trace), 0.01, 1e-6);
}

TEST(Itae, BothJointsAndRatesAccumulate) {
  SimTrace trace = constant_error_trace(100, 1e-2, 0.5, 0.25);
  for (auto& s : trace.states) s.theta_dot = Vec2{{2.0, 0.0}};
  // |e| sum = 0.75, |edot| sum = 2.0, over 1 s at weights 0.01
  EXPECT_NEAR(itae_value(trace), 0.01 * (0.75 + 2.0), 1e-9);
}

TEST(Analyze, PinnedTraceIsAllZero) {
  SimTrace trace;
  for (std::size_t k = 0; k <= 100; ++k) {
    trace.times.push_back(static_cast<double>(k) * 0.01);
    trace.states.push_back(JointState{Vec2{{1.0, 0.9}}, Vec2{}});
    trace.torques.push_back(Vec2{});
    trace.errors.push_back(Vec2{});
  }
  const Reference ref{Vec2{{1.0, 0.9}}, Vec2{}, Vec2{}};
  const TransientMetrics m = analyze(trace, ref);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(m.rise_time[i], 0.0);
    EXPECT_EQ(m.settling_time[i], 0.0);
    EXPECT_EQ(m.overshoot_pct[i], 0.0);
  }
  EXPECT_EQ(m.itae_value, 0.0);
}

TEST(Analyze, DegenerateReferenceYieldsAbsentFields) {
  const SimTrace trace = constant_error_trace(10, 0.1, 0.0, 0.5);
  const Reference ref{Vec2{{1.0, 0.0}}, Vec2{}, Vec2{}};  // joint 2 target 0
  const TransientMetrics m = analyze(trace, ref);
  EXPECT_TRUE(m.rise_time[0].has_value());
  EXPECT_FALSE(m.rise_time[1].has_value());
  EXPECT_FALSE(m.settling_time[1].has_value());
  EXPECT_FALSE(m.overshoot_pct[1].has_value());
}

TEST(Analyze, RiseNotLaterThanSettle) {
  const double h = 1e-3;
  const auto y = critically_damped(4001, h, 5.0);
  const auto t = uniform_times(4001, h);
  const auto rise = rise_time(y, 1.0, t);
  const auto settle = settling_time(y, 1.0, t);
  ASSERT_TRUE(rise && settle);
  EXPECT_LE(*rise, *settle);
}
