#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "scopesim/errors.hpp"
#include "scopesim/fuzzy.hpp"
#include "scopesim/plant.hpp"
#include "scopesim/vec.hpp"

namespace scopesim {

/// Proportional and derivative gains of the auxiliary acceleration loop,
/// per joint. Units 1/s^2 and 1/s.
struct PDGains {
  Vec2 kp{};
  Vec2 kd{};
};

inline void validate(const PDGains& g) {
  if (!all_finite(g.kp) || !all_finite(g.kd)) {
    throw DomainError("gains must be finite");
  }
  for (int i = 0; i < 2; ++i) {
    if (!(g.kp[i] > 0.0 && g.kd[i] > 0.0)) {
      throw DomainError("gains must be positive");
    }
  }
}

/// Desired trajectory sample: position, velocity, acceleration per joint.
struct Reference {
  Vec2 theta_d{};
  Vec2 theta_dot_d{};
  Vec2 theta_ddot_d{};
};

/// Computed-torque PD law:
///
///   tau = M(theta) (theta_ddot_d + Kd edot + Kp e) + C(theta, theta_dot)
///
/// with e = theta_d - theta. Substituted into the plant equation this makes
/// each joint's error obey edd + Kd edot + Kp e = 0 exactly.
inline Vec2 pd_computed_torque(const JointState& state, const Reference& ref,
                               const PDGains& gains, const PlantParams& plant) {
  const Vec2 e = ref.theta_d - state.theta;
  const Vec2 e_dot = ref.theta_dot_d - state.theta_dot;
  const Vec2 u{{ref.theta_ddot_d[0] + gains.kd[0] * e_dot[0] + gains.kp[0] * e[0],
                ref.theta_ddot_d[1] + gains.kd[1] * e_dot[1] + gains.kp[1] * e[1]}};
  return inertia_matrix(state.theta, plant) * u + coriolis_vector(state, plant);
}

/// Computed-torque fuzzy law: the controller surface supplies the auxiliary
/// acceleration command per joint, pushed through the same compensator as the
/// PD law (tau = M u + C). One surface serves both joints.
inline Vec2 flc_computed_torque(const JointState& state, const Reference& ref,
                                const FlcEvaluator& flc,
                                const PlantParams& plant) {
  const Vec2 e = ref.theta_d - state.theta;
  const Vec2 e_dot = ref.theta_dot_d - state.theta_dot;
  const Vec2 u{{flc(e[0], e_dot[0]), flc(e[1], e_dot[1])}};
  return inertia_matrix(state.theta, plant) * u + coriolis_vector(state, plant);
}

inline Vec2 flc_computed_torque(const JointState& state, const Reference& ref,
                                const FuzzyControllerDef& def,
                                const PlantParams& plant,
                                int resolution = kDefaultCoaResolution) {
  return flc_computed_torque(state, ref, FlcEvaluator(def, resolution), plant);
}

/// Baseline gains for the compensated loop. Classical ultimate-cycle tuning
/// is ill-posed on a pure double integrator (no finite ultimate gain under
/// P-only control), so the baseline is critically damped pole placement:
/// kp = omega^2, kd = 2 omega per joint.
inline PDGains ziegler_nichols_baseline(const PlantParams& plant,
                                        double omega = 5.0) {
  validate_plant(plant);
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("omega must be positive and finite");
  }
  const double kp = omega * omega;
  const double kd = 2.0 * omega;
  return PDGains{Vec2{{kp, kp}}, Vec2{{kd, kd}}};
}

enum class ControllerKind { pd, flc, ga_pd, ga_flc };

inline const char* kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::pd: return "pd";
    case ControllerKind::flc: return "flc";
    case ControllerKind::ga_pd: return "ga-pd";
    case ControllerKind::ga_flc: return "ga-flc";
  }
  return "?";
}

inline bool is_fuzzy(ControllerKind k) {
  return k == ControllerKind::flc || k == ControllerKind::ga_flc;
}

/// Value describing one of the four control laws. The GA-tuned variants reuse
/// the plain PD / fuzzy evaluation paths; only the parameters differ.
struct Controller {
  ControllerKind kind = ControllerKind::pd;
  PDGains gains{};
  FuzzyControllerDef fuzzy{};
  int coa_resolution = kDefaultCoaResolution;
};

inline void validate(const Controller& c) {
  if (is_fuzzy(c.kind)) {
    validate(c.fuzzy);
  } else {
    validate(c.gains);
  }
}

/// Controller bound to a plant, ready for the simulation loop. For fuzzy
/// kinds the output sets are pre-sampled once. Immutable and const-callable
/// from any number of threads.
class TorqueLaw {
 public:
  TorqueLaw(const Controller& c, const PlantParams& plant) : plant_(plant) {
    validate(c);
    if (is_fuzzy(c.kind)) {
      flc_ = std::make_shared<FlcEvaluator>(c.fuzzy, c.coa_resolution);
    } else {
      gains_ = c.gains;
    }
  }

  Vec2 operator()(const JointState& state, const Reference& ref) const {
    if (flc_) return flc_computed_torque(state, ref, *flc_, plant_);
    return pd_computed_torque(state, ref, gains_, plant_);
  }

 private:
  PlantParams plant_;
  PDGains gains_{};
  std::shared_ptr<const FlcEvaluator> flc_;
};

}  // namespace scopesim
