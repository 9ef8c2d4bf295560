#include "scopesim/controllers.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "scopesim/integrator.hpp"

using namespace scopesim;

namespace {

constexpr double kPi = M_PI;

JointState make_state(double t1, double t2, double td1, double td2) {
  return JointState{Vec2{{t1, t2}}, Vec2{{td1, td2}}};
}

}  // namespace

TEST(PdLaw, ZeroErrorAtRestGivesZeroTorque) {
  const PlantParams plant = default_plant();
  const PDGains gains = ziegler_nichols_baseline(plant);
  const JointState s = make_state(0.7, -0.4, 0.0, 0.0);
  const Reference ref{s.theta, Vec2{}, Vec2{}};
  const Vec2 tau = pd_computed_torque(s, ref, gains, plant);
  EXPECT_EQ(tau[0], 0.0);
  EXPECT_EQ(tau[1], 0.0);
}

TEST(PdLaw, ZeroGainsLeaveOnlyCoriolisFeedforward) {
  const PlantParams plant = default_plant();
  const PDGains zero{};  // exercises the formula; validate() would reject it
  const JointState s = make_state(0.2, 0.9, 1.1, -2.0);
  const Reference ref{Vec2{{1.0, 1.0}}, Vec2{}, Vec2{}};
  const Vec2 tau = pd_computed_torque(s, ref, zero, plant);
  const Vec2 c = coriolis_vector(s, plant);
  EXPECT_DOUBLE_EQ(tau[0], c[0]);
  EXPECT_DOUBLE_EQ(tau[1], c[1]);
}

// Substituting the computed-torque law into the plant makes each joint's
// error follow edd + kd edot + kp e = 0 exactly; with kp = 25, kd = 10 the
// critically damped solution is theta_d (1 - (1 + 5t) e^{-5t}).
TEST(PdLaw, ClosedLoopMatchesAnalyticSolution) {
  const PlantParams plant = default_plant();
  const PDGains gains = ziegler_nichols_baseline(plant);  // kp 25, kd 10
  SimConfig cfg;
  cfg.step_size = 1e-3;
  cfg.duration = 3.0;
  cfg.theta_desired = Vec2{{60.0 * kPi / 180.0, 50.0 * kPi / 180.0}};
  auto law = [&](const JointState& s, const Reference& r) {
    return pd_computed_torque(s, r, gains, plant);
  };
  const SimTrace trace = simulate(plant, law, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double t = trace.times[k];
    const double decay = (1.0 + 5.0 * t) * std::exp(-5.0 * t);
    for (int i = 0; i < 2; ++i) {
      const double analytic = cfg.theta_desired[i] * (1.0 - decay);
      worst = std::max(worst, std::abs(trace.states[k].theta[i] - analytic));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(ZieglerNicholsBaseline, PolePlacementFormula) {
  const PlantParams plant = default_plant();
  const PDGains g5 = ziegler_nichols_baseline(plant, 5.0);
  EXPECT_DOUBLE_EQ(g5.kp[0], 25.0);
  EXPECT_DOUBLE_EQ(g5.kp[1], 25.0);
  EXPECT_DOUBLE_EQ(g5.kd[0], 10.0);
  EXPECT_DOUBLE_EQ(g5.kd[1], 10.0);
  const PDGains g1 = ziegler_nichols_baseline(plant, 1.0);
  EXPECT_DOUBLE_EQ(g1.kp[0], 1.0);
  EXPECT_DOUBLE_EQ(g1.kd[0], 2.0);
  EXPECT_THROW(ziegler_nichols_baseline(plant, 0.0), DomainError);
}

TEST(ZieglerNicholsBaseline, StepResponseHasNoOvershoot) {
  const PlantParams plant = default_plant();
  const PDGains gains = ziegler_nichols_baseline(plant);
  SimConfig cfg;
  cfg.duration = 3.0;
  cfg.theta_desired = Vec2{{1.0, 1.0}};
  auto law = [&](const JointState& s, const Reference& r) {
    return pd_computed_torque(s, r, gains, plant);
  };
  const SimTrace trace = simulate(plant, law, cfg);
  for (const auto& s : trace.states) {
    EXPECT_LE(s.theta[0], 1.0 + 1e-12);
    EXPECT_LE(s.theta[1], 1.0 + 1e-12);
  }
}

TEST(FlcLaw, SymmetricEquilibriumIsZeroTorque) {
  const PlantParams plant = default_plant();
  const FlcEvaluator flc(default_fuzzy_controller(), kDefaultCoaResolution);
  const JointState s = make_state(0.5, -0.2, 0.0, 0.0);
  const Reference ref{s.theta, Vec2{}, Vec2{}};
  const Vec2 tau = flc_computed_torque(s, ref, flc, plant);
  EXPECT_NEAR(tau[0], 0.0, 1e-12);
  EXPECT_NEAR(tau[1], 0.0, 1e-12);
}

TEST(FlcLaw, PositiveErrorPushesPositiveTorque) {
  const PlantParams plant = default_plant();
  const FlcEvaluator flc(default_fuzzy_controller(), kDefaultCoaResolution);
  const JointState s = make_state(0.0, kPi / 2, 0.0, 0.0);
  const Reference ref{Vec2{{0.5, kPi / 2}}, Vec2{}, Vec2{}};
  const Vec2 tau = flc_computed_torque(s, ref, flc, plant);
  EXPECT_GT(tau[0], 0.0);
}

// The compensator decouples the axes: a step on joint 1 alone must not move
// joint 2 beyond numerical noise.
TEST(FlcLaw, CompensatorDecouplesJoints) {
  const PlantParams plant = default_plant();
  Controller c;
  c.kind = ControllerKind::flc;
  c.fuzzy = default_fuzzy_controller();
  const TorqueLaw law(c, plant);
  SimConfig cfg;
  cfg.step_size = 1e-3;
  cfg.duration = 3.0;
  cfg.theta_desired = Vec2{{0.3, 0.0}};
  const SimTrace trace = simulate(plant, law, cfg);
  for (const auto& s : trace.states) {
    EXPECT_LE(std::abs(s.theta[1]), 1e-9);
  }
  // and joint 1 must actually move
  EXPECT_GT(trace.states.back().theta[0], 0.01);
}

TEST(TorqueLaw, TunedFuzzyKindSharesTheFuzzyPath) {
  const PlantParams plant = default_plant();
  SimConfig cfg;
  cfg.step_size = 1e-3;
  cfg.duration = 1.0;
  cfg.theta_desired = Vec2{{1.0, 0.8}};
  Controller flc;
  flc.kind = ControllerKind::flc;
  flc.fuzzy = default_fuzzy_controller();
  Controller ga_flc = flc;
  ga_flc.kind = ControllerKind::ga_flc;
  const SimTrace a = simulate(plant, TorqueLaw(flc, plant), cfg);
  const SimTrace b = simulate(plant, TorqueLaw(ga_flc, plant), cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.states[k].theta[0], b.states[k].theta[0]);
    EXPECT_EQ(a.states[k].theta[1], b.states[k].theta[1]);
    EXPECT_EQ(a.torques[k][0], b.torques[k][0]);
    EXPECT_EQ(a.torques[k][1], b.torques[k][1]);
  }
}

TEST(TorqueLaw, OutputsFiniteForRandomFiniteStates) {
  const PlantParams plant = default_plant();
  Controller pd;
  pd.kind = ControllerKind::pd;
  pd.gains = ziegler_nichols_baseline(plant);
  Controller flc;
  flc.kind = ControllerKind::flc;
  flc.fuzzy = default_fuzzy_controller();
  const TorqueLaw laws[] = {TorqueLaw(pd, plant), TorqueLaw(flc, plant)};
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const JointState s = make_state(u(rng), u(rng), u(rng), u(rng));
    const Reference ref{Vec2{{u(rng), u(rng)}}, Vec2{}, Vec2{}};
    for (const auto& law : laws) {
      EXPECT_TRUE(all_finite(law(s, ref)));
    }
  }
}

TEST(Validation, ControllerInvariants) {
  Controller c;
  c.kind = ControllerKind::pd;
  c.gains = PDGains{Vec2{{25.0, 25.0}}, Vec2{{10.0, 10.0}}};
  EXPECT_NO_THROW(validate(c));
  c.gains.kp[1] = 0.0;
  EXPECT_THROW(validate(c), DomainError);
  c.kind = ControllerKind::flc;
  c.fuzzy = default_fuzzy_controller();
  EXPECT_NO_THROW(validate(c));
  c.fuzzy.error.mfs[0].peak = 100.0;  // peaks no longer increasing
  EXPECT_THROW(validate(c), DomainError);
}
