#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "scopesim/controllers.hpp"
#include "scopesim/errors.hpp"
#include "scopesim/plant.hpp"
#include "scopesim/vec.hpp"

namespace scopesim {

/// Coefficients of the Dormand-Prince 5(4) pair, restricted to the six stages
/// that form its fifth-order solution. Used with a fixed step; the embedded
/// fourth-order estimate is not evaluated.
template <typename Real>
struct Dopri5 {
  static constexpr Real a21 = Real(1) / 5;
  static constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
  static constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15,
                        a43 = Real(32) / 9;
  static constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187,
                        a53 = Real(64448) / 6561, a54 = Real(-212) / 729;
  static constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33,
                        a63 = Real(46732) / 5247, a64 = Real(49) / 176,
                        a65 = Real(-5103) / 18656;
  static constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5,
                        c5 = Real(8) / 9, c6 = Real(1);
  static constexpr Real b1 = Real(35) / 384, b3 = Real(500) / 1113,
                        b4 = Real(125) / 192, b5 = Real(-2187) / 6784,
                        b6 = Real(11) / 84;
};

/// One-step increment h * sum(b_i k_i). Exposed separately so multi-step
/// drivers can accumulate increments with compensation (the convergence study
/// resolves errors near the rounding floor).
template <typename Real, std::size_t N, typename Fn>
Vec<Real, N> rk5_increment(Fn&& f, Real t, const Vec<Real, N>& y, Real h) {
  using T = Dopri5<Real>;
  if (!(h > Real(0))) throw DomainError("rk5: step size must be positive");
  auto eval = [&](Real ts, const Vec<Real, N>& ys) {
    Vec<Real, N> k = f(ts, ys);
    if (!all_finite(k)) {
      throw IntegrationError("rk5: derivative is not finite",
                             static_cast<double>(ts));
    }
    return k;
  };
  const Vec<Real, N> k1 = eval(t, y);
  const Vec<Real, N> k2 = eval(t + T::c2 * h, y + h * (T::a21 * k1));
  const Vec<Real, N> k3 =
      eval(t + T::c3 * h, y + h * (T::a31 * k1 + T::a32 * k2));
  const Vec<Real, N> k4 =
      eval(t + T::c4 * h, y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
  const Vec<Real, N> k5 =
      eval(t + T::c5 * h,
           y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4));
  const Vec<Real, N> k6 =
      eval(t + T::c6 * h, y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 +
                                   T::a64 * k4 + T::a65 * k5));
  return h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
}

/// Advances y by one step of the fifth-order scheme. Local truncation error
/// O(h^6).
template <typename Real, std::size_t N, typename Fn>
Vec<Real, N> rk5_step(Fn&& f, Real t, const Vec<Real, N>& y, Real h) {
  return y + rk5_increment(std::forward<Fn>(f), t, y, h);
}

/// Fixed-step drive over n steps with Kahan-compensated state accumulation,
/// so the per-step rounding of y + dy does not swamp the O(h^5) global error
/// in convergence measurements.
template <typename Real, std::size_t N, typename Fn>
Vec<Real, N> integrate_fixed(Fn&& f, Real t0, Vec<Real, N> y, Real h,
                             std::size_t n_steps) {
  Vec<Real, N> comp{};
  for (std::size_t i = 0; i < n_steps; ++i) {
    const Real t = t0 + static_cast<Real>(i) * h;
    const Vec<Real, N> d = rk5_increment(f, t, y, h) - comp;
    const Vec<Real, N> next = y + d;
    comp = (next - y) - d;
    y = next;
  }
  return y;
}

/// Closed-loop simulation settings. Angles are radians here; degree handling
/// is a config-file concern.
struct SimConfig {
  double step_size = 1e-3;  // s
  double duration = 3.0;    // s
  Vec2 theta_desired{};
  Vec2 theta_dot_desired{};
  Vec2 theta_ddot_desired{};
  JointState initial_state{};
};

inline void validate_sim_config(const SimConfig& c) {
  if (!(c.step_size > 0.0)) throw DomainError("step_size must be positive");
  if (!(c.duration >= c.step_size)) {
    throw DomainError("duration must be at least one step");
  }
  if (c.duration / c.step_size > 1e7) {
    throw DomainError("duration / step_size exceeds 1e7");
  }
  if (!all_finite(c.theta_desired) || !all_finite(c.theta_dot_desired) ||
      !all_finite(c.theta_ddot_desired) || !all_finite(c.initial_state)) {
    throw DomainError("sim config values must be finite");
  }
}

/// Number of steps = floor(duration / step_size), tolerant of the usual
/// representation noise in the quotient.
inline std::size_t step_count(const SimConfig& c) {
  const double q = c.duration / c.step_size;
  auto n = static_cast<std::size_t>(q);
  if (q - static_cast<double>(n) > 1.0 - 1e-9) ++n;
  return n;
}

/// Time-indexed record of a closed-loop run. All sequences share one length;
/// torques hold the start-of-step controller output, errors the position
/// error theta_d - theta.
struct SimTrace {
  std::vector<double> times;
  std::vector<JointState> states;
  std::vector<Vec2> torques;
  std::vector<Vec2> errors;

  std::size_t size() const { return times.size(); }
};

inline Reference reference_from(const SimConfig& cfg) {
  return Reference{cfg.theta_desired, cfg.theta_dot_desired,
                   cfg.theta_ddot_desired};
}

/// Integrates the closed loop theta_dd = forward_dynamics(state, law(state),
/// plant) over [0, duration]. The control law is re-evaluated inside every
/// Runge-Kutta stage (continuous-control idealization); the recorded torque
/// is the start-of-step evaluation. Throws DivergedError with the step index
/// when the state leaves the finite domain.
template <typename ControlLaw>
SimTrace simulate(const PlantParams& plant, ControlLaw&& law,
                  const SimConfig& cfg) {
  validate_sim_config(cfg);
  const Reference ref = reference_from(cfg);
  const std::size_t n = step_count(cfg);
  const double h = cfg.step_size;

  auto unpack = [](const Vec<double, 4>& y) {
    return JointState{Vec2{{y[0], y[1]}}, Vec2{{y[2], y[3]}}};
  };
  auto deriv = [&](double /*t*/, const Vec<double, 4>& y) -> Vec<double, 4> {
    const JointState s = unpack(y);
    const Vec2 tau = law(s, ref);
    const Vec2 acc = forward_dynamics(s, tau, plant);
    return Vec<double, 4>{{y[2], y[3], acc[0], acc[1]}};
  };

  SimTrace trace;
  trace.times.reserve(n + 1);
  trace.states.reserve(n + 1);
  trace.torques.reserve(n + 1);
  trace.errors.reserve(n + 1);

  Vec<double, 4> y{{cfg.initial_state.theta[0], cfg.initial_state.theta[1],
                    cfg.initial_state.theta_dot[0],
                    cfg.initial_state.theta_dot[1]}};
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * h;
    const JointState s = unpack(y);
    trace.times.push_back(t);
    trace.states.push_back(s);
    trace.torques.push_back(law(s, ref));
    trace.errors.push_back(cfg.theta_desired - s.theta);
    if (i == n) break;
    try {
      y = rk5_step(deriv, t, y, h);
    } catch (const IntegrationError&) {
      throw DivergedError("simulation diverged at step " + std::to_string(i),
                          i);
    } catch (const DomainError&) {
      // stage inputs blew past the finite range (runaway controller)
      throw DivergedError("simulation diverged at step " + std::to_string(i),
                          i);
    }
    if (!all_finite(y)) {
      throw DivergedError("simulation diverged at step " + std::to_string(i),
                          i);
    }
  }
  return trace;
}

}  // namespace scopesim
