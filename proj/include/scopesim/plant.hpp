#pragma once

#include <cmath>
#include <string>

#include "scopesim/errors.hpp"
#include "scopesim/vec.hpp"

namespace scopesim {

/// Joint-space state of the two-axis mount. Angles in radians, velocities in
/// rad/s. Accelerations are produced by forward_dynamics and never stored.
struct JointState {
  Vec2 theta{};
  Vec2 theta_dot{};
};

inline bool all_finite(const JointState& s) {
  return all_finite(s.theta) && all_finite(s.theta_dot);
}

/// Parameters of the coupled two-link rigid-body model
///
///   M(theta) theta_dd + C(theta, theta_d) + G(theta) + tau_d = tau
///
/// with
///
///   M = [[a1 + 2 a2 cos t2,  a3 + a2 cos t2],
///        [a3 + a2 cos t2,    a3            ]]
///   C = [-a2 sin t2 (td2^2 + 2 td1 td2),  a2 sin t2 td1^2]
///
/// A balanced mount carries counterweights, so gravity defaults to off; when
/// enabled, G = [g1 cos t1, g2 cos(t1 + t2)] with per-axis coefficients.
/// tau_d is a constant disturbance torque, default zero.
struct PlantParams {
  double a1 = 0.12;  // kg m^2
  double a2 = 0.03;  // kg m^2
  double a3 = 0.02;  // kg m^2
  bool gravity_enabled = false;
  double g1_coeff = 0.0;  // N m
  double g2_coeff = 0.0;  // N m
  Vec2 tau_d{};           // N m
};

/// The stock profile used by the bundled experiments. The inertia values are
/// configuration, not measurements.
inline constexpr const char* kDefaultPlantProfile = "kao-14in-default";

inline PlantParams default_plant() { return PlantParams{}; }

inline PlantParams plant_profile(const std::string& name) {
  if (name == kDefaultPlantProfile) return default_plant();
  throw DomainError("unknown plant profile '" + name + "'");
}

/// Validates inertia coefficients: a1, a3 positive and M(theta) positive
/// definite over a 1000-point grid of the elbow angle.
inline void validate_plant(const PlantParams& p) {
  if (!std::isfinite(p.a1) || !std::isfinite(p.a2) || !std::isfinite(p.a3) ||
      !std::isfinite(p.g1_coeff) || !std::isfinite(p.g2_coeff) ||
      !all_finite(p.tau_d)) {
    throw DomainError("plant parameters must be finite");
  }
  if (p.a1 <= 0.0 || p.a3 <= 0.0) {
    throw DomainError("inertia coefficients a1 and a3 must be positive");
  }
  constexpr int kGrid = 1000;
  const double two_pi = 2.0 * M_PI;
  const double scale = p.a1 * p.a3;
  for (int i = 0; i < kGrid; ++i) {
    const double t2 = -M_PI + two_pi * i / (kGrid - 1);
    const double m11 = p.a1 + 2.0 * p.a2 * std::cos(t2);
    const double off = p.a3 + p.a2 * std::cos(t2);
    const double det = m11 * p.a3 - off * off;
    if (m11 <= 0.0 || det <= 1e-9 * scale) {
      throw DomainError("inertia matrix not positive definite at theta2 = " +
                        std::to_string(t2));
    }
  }
}

/// M(theta); symmetric, depends on the elbow angle only.
inline Mat2 inertia_matrix(const Vec2& theta, const PlantParams& p) {
  if (!all_finite(theta)) throw DomainError("inertia_matrix: non-finite angle");
  const double c2 = std::cos(theta[1]);
  const double off = p.a3 + p.a2 * c2;
  return Mat2{p.a1 + 2.0 * p.a2 * c2, off, off, p.a3};
}

/// Coriolis/centrifugal torque vector C(theta, theta_dot).
inline Vec2 coriolis_vector(const JointState& s, const PlantParams& p) {
  if (!all_finite(s)) throw DomainError("coriolis_vector: non-finite state");
  const double s2 = std::sin(s.theta[1]);
  const double td1 = s.theta_dot[0];
  const double td2 = s.theta_dot[1];
  return Vec2{{-p.a2 * s2 * (td2 * td2 + 2.0 * td1 * td2),
               p.a2 * s2 * td1 * td1}};
}

/// Gravity torque vector; identically zero for a balanced mount.
inline Vec2 gravity_vector(const Vec2& theta, const PlantParams& p) {
  if (!all_finite(theta)) throw DomainError("gravity_vector: non-finite angle");
  if (!p.gravity_enabled) return Vec2{};
  return Vec2{{p.g1_coeff * std::cos(theta[0]),
               p.g2_coeff * std::cos(theta[0] + theta[1])}};
}

/// Forward dynamics: theta_dd = M^-1 (tau - C - G - tau_d).
inline Vec2 forward_dynamics(const JointState& s, const Vec2& tau,
                             const PlantParams& p) {
  if (!all_finite(s) || !all_finite(tau)) {
    throw DomainError("forward_dynamics: non-finite input");
  }
  const Mat2 m = inertia_matrix(s.theta, p);
  if (std::abs(m.det()) < 1e-12 * p.a1 * p.a3) {
    throw SingularMatrixError("forward_dynamics: inertia matrix singular");
  }
  const Vec2 c = coriolis_vector(s, p);
  const Vec2 g = gravity_vector(s.theta, p);
  return m.solve(tau - c - g - p.tau_d);
}

/// Kinetic energy 1/2 td^T M td, plus the conventional potential term when
/// gravity is enabled. Non-negative with gravity off.
inline double total_energy(const JointState& s, const PlantParams& p) {
  const Mat2 m = inertia_matrix(s.theta, p);
  double e = 0.5 * dot(s.theta_dot, m * s.theta_dot);
  if (p.gravity_enabled) {
    e += p.g1_coeff * std::sin(s.theta[0]) +
         p.g2_coeff * std::sin(s.theta[0] + s.theta[1]);
  }
  return e;
}

}  // namespace scopesim
