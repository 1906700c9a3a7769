#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mrsq/common/errors.h"
#include "mrsq/env/cartbalance.h"
#include "mrsq/env/nchain.h"
#include "mrsq/env/pendulum.h"
#include "mrsq/env/registry.h"

namespace mrsq::env {
namespace {

TEST(NChain, Advance) {
  NChainSpec spec{.n = 5, .actions = 2};
  NChainTransition t = NChainStep(spec, 0, 0);
  EXPECT_EQ(t.next_state, 1);
  EXPECT_EQ(t.reward, 0.0);
  EXPECT_FALSE(t.terminated);
}

TEST(NChain, OtherActionAbsorbs) {
  NChainSpec spec{.n = 5, .actions = 2};
  NChainTransition t = NChainStep(spec, 0, 1);
  EXPECT_EQ(t.next_state, spec.absorbing_state());
  EXPECT_EQ(t.reward, 0.0);
  for (int a = 0; a < 2; ++a) {
    t = NChainStep(spec, spec.absorbing_state(), a);
    EXPECT_EQ(t.next_state, spec.absorbing_state());
    EXPECT_EQ(t.reward, 0.0);
    EXPECT_FALSE(t.terminated);
  }
}

TEST(NChain, FinalTransitionPaysAndTerminates) {
  NChainSpec spec{.n = 5, .actions = 2};
  NChainTransition t = NChainStep(spec, 3, 0);
  EXPECT_EQ(t.next_state, 4);
  EXPECT_EQ(t.reward, 1.0);
  EXPECT_TRUE(t.terminated);
}

TEST(NChain, OutOfRangeActionThrows) {
  NChainSpec spec{.n = 5, .actions = 2};
  EXPECT_THROW(NChainStep(spec, 0, 2), InputError);
  EXPECT_THROW(NChainStep(spec, 0, -1), InputError);
}

TEST(NChain, OptimalQExamples) {
  NChainSpec spec{.n = 5, .actions = 3, .gamma = 0.99};
  EXPECT_EQ(NChainOptimalQ(spec, 3, 0), 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(NChainOptimalQ(spec, i, 1), 0.0);
  EXPECT_NEAR(NChainOptimalQ(spec, 0, 0), 0.99 * 0.99 * 0.99, 1e-15);
  EXPECT_EQ(NChainOptimalQ(spec, spec.absorbing_state(), 0), 0.0);
}

// Value iteration on the explicit MDP as an independent oracle.
std::vector<std::vector<double>> ValueIteration(const NChainSpec& spec) {
  const int S = spec.num_states();
  std::vector<std::vector<double>> q(S, std::vector<double>(spec.actions, 0.0));
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double delta = 0.0;
    auto next = q;
    for (int s = 0; s < S; ++s) {
      if (s == spec.n - 1) continue;  // terminal
      for (int a = 0; a < spec.actions; ++a) {
        const NChainTransition t = NChainStep(spec, s, a);
        double v = 0.0;
        if (!t.terminated) {
          for (double x : q[t.next_state]) v = std::max(v, x);
        }
        next[s][a] = t.reward + spec.gamma * v;
        delta = std::max(delta, std::abs(next[s][a] - q[s][a]));
      }
    }
    q = next;
    if (delta == 0.0) break;
  }
  return q;
}

TEST(NChain, OptimalQMatchesValueIteration) {
  for (int n = 2; n <= 10; ++n) {
    for (int A = 1; A <= 10; ++A) {
      NChainSpec spec{.n = n, .actions = A, .gamma = 0.97};
      const auto q = ValueIteration(spec);
      for (int s = 0; s < spec.num_states(); ++s) {
        if (s == n - 1) continue;
        for (int a = 0; a < A; ++a) {
          EXPECT_NEAR(NChainOptimalQ(spec, s, a), q[s][a], 1e-12) << n << " " << A;
        }
      }
    }
  }
}

// Exhaustive over all A^(N-1) sequences: only all-a0 earns reward.
TEST(NChain, UniqueRewardingSequence) {
  for (int n = 2; n <= 6; ++n) {
    for (int A = 1; A <= 4; ++A) {
      NChainSpec spec{.n = n, .actions = A};
      const int len = n - 1;
      int64_t total = 1;
      for (int i = 0; i < len; ++i) total *= A;
      int rewarding = 0;
      for (int64_t code = 0; code < total; ++code) {
        int64_t c = code;
        int s = 0;
        double ret = 0.0;
        bool all_zero = true;
        for (int t = 0; t < len; ++t) {
          const int a = static_cast<int>(c % A);
          c /= A;
          all_zero &= (a == 0);
          const NChainTransition tr = NChainStep(spec, s, a);
          ret += tr.reward;
          s = tr.next_state;
          if (tr.terminated) break;
        }
        if (ret > 0.0) {
          ++rewarding;
          EXPECT_TRUE(all_zero);
        }
      }
      EXPECT_EQ(rewarding, 1);
    }
  }
}

TEST(NChain, EnvTruncatesAtTimeLimit) {
  NChainEnv env(NChainSpec{.n = 4, .actions = 2});
  Rng rng(0);
  env.Reset(rng);
  Vector a1 = Vector::Zero(2);
  a1(1) = 1.0;
  StepResult r;
  for (int t = 0; t < 8; ++t) {
    r = env.Step(a1);
    EXPECT_FALSE(r.terminated);
    EXPECT_EQ(r.truncated, t == 7);
  }
}

TEST(NChain, RelaxedActionUsesArgmax) {
  NChainEnv env(NChainSpec{.n = 4, .actions = 3});
  Rng rng(0);
  env.Reset(rng);
  Vector a(3);
  a << 0.9, -0.2, 0.3;
  env.Step(a);
  EXPECT_EQ(env.state(), 1);
  a << 0.1, 0.5, 0.3;
  env.Step(a);
  EXPECT_EQ(env.state(), env.spec().absorbing_state());
}

TEST(Pendulum, HangingAtRestStays) {
  PendulumEnv env;
  env.set_state({M_PI, 0.0});
  Vector zero = Vector::Zero(1);
  StepResult r = env.Step(zero);
  EXPECT_NEAR(std::abs(env.state().theta), M_PI, 1e-9);
  EXPECT_NEAR(env.state().theta_dot, 0.0, 1e-9);
  // Most negative reward attainable with zero speed and torque.
  const PendulumParams p;
  const double worst = -M_PI * M_PI / (M_PI * M_PI + 0.1 * p.max_speed * p.max_speed +
                                      0.001 * p.max_torque * p.max_torque);
  EXPECT_NEAR(r.reward, worst, 1e-12);
  EXPECT_FALSE(r.terminated);
}

TEST(Pendulum, UnforcedEnergyConserved) {
  PendulumParams p;
  PendulumState s{1.0, 0.0};
  const double e0 = PendulumEnergy(p, s);
  for (int t = 0; t < 100; ++t) {
    PendulumStep(p, s, 0.0);
    ASSERT_LT(std::abs(s.theta_dot), p.max_speed);
  }
  EXPECT_LE(std::abs(PendulumEnergy(p, s) - e0), 0.01 * std::abs(e0));
}

TEST(Pendulum, TruncatesAt200NeverTerminates) {
  PendulumEnv env;
  Rng rng(3);
  env.Reset(rng);
  for (int t = 0; t < 200; ++t) {
    Vector a(1);
    a << rng.Uniform(-1.0, 1.0);
    StepResult r = env.Step(a);
    EXPECT_TRUE(r.observation.allFinite());
    EXPECT_FALSE(r.terminated);
    EXPECT_EQ(r.truncated, t == 199);
    EXPECT_LE(r.reward, 0.0);
    EXPECT_GE(r.reward, -1.0);
  }
}

TEST(CartBalance, UprightZeroForceSurvivesFirstStep) {
  CartBalanceEnv env;
  env.set_state({});
  StepResult r = env.Step(Vector::Zero(1));
  EXPECT_FALSE(r.terminated);
  EXPECT_EQ(r.reward, 1.0);
}

TEST(CartBalance, FallsUnderConstantPush) {
  CartBalanceEnv env;
  Rng rng(1);
  env.Reset(rng);
  Vector push = Vector::Ones(1);
  bool terminated = false;
  for (int t = 0; t < 500 && !terminated; ++t) {
    StepResult r = env.Step(push);
    EXPECT_TRUE(r.observation.allFinite());
    EXPECT_FALSE(r.terminated && r.truncated);
    terminated = r.terminated;
  }
  EXPECT_TRUE(terminated);
}

TEST(Envs, SaveRestoreRoundTrip) {
  for (const char* name : {"pendulum", "cartbalance", "nchain"}) {
    auto env = MakeEnvironment(name);
    Rng rng(5);
    env->Reset(rng);
    Vector a = Vector::Zero(env->action_dim());
    env->Step(a);
    const auto saved = env->SaveState();
    const Vector obs = env->Observe();
    auto clone = env->Clone();
    env->Step(a);
    env->RestoreState(saved);
    EXPECT_EQ(env->Observe(), obs) << name;
    EXPECT_EQ(env->episode_step(), 1) << name;
    EXPECT_EQ(clone->Observe(), obs) << name;
  }
}

TEST(Envs, RegistryRejectsUnknown) {
  EXPECT_THROW(MakeEnvironment("mujoco"), ConfigError);
  EXPECT_THROW(MakeEnvironment("nchain", {{"bogus", 1.0}}), ConfigError);
  auto env = MakeEnvironment("nchain", {{"n", 7}, {"actions", 3}});
  EXPECT_EQ(env->obs_dim(), 8);
  EXPECT_EQ(env->action_dim(), 3);
  EXPECT_TRUE(env->discrete());
}

TEST(Envs, ClipAndOneHot) {
  Vector a(3);
  a << -4.0, 0.5, 2.0;
  Vector c = ClipAction(a);
  EXPECT_EQ(c(0), -1.0);
  EXPECT_EQ(c(1), 0.5);
  EXPECT_EQ(c(2), 1.0);
  Vector tie = Vector::Ones(3);
  EXPECT_EQ(OneHotArgmax(tie), Vector::Unit(3, 0));
}

}  // namespace
}  // namespace mrsq::env
