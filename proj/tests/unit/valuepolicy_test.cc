#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "mrsq/common/errors.h"
#include "mrsq/model/world_model.h"
#include "mrsq/nn/finite_diff.h"
#include "mrsq/value/policy.h"
#include "mrsq/value/q_ensemble.h"
#include "mrsq/value/replay.h"
#include "mrsq/value/td.h"
#include "mrsq/value/updates.h"
#include "test_util.h"

namespace mrsq::value {
namespace {

using testing::RandomMatrix;

model::WorldModelDims SmallDims(int action_dim = 1) {
  model::WorldModelDims d;
  d.obs_dim = 3;
  d.action_dim = action_dim;
  d.zs_dim = 16;
  d.za_dim = 8;
  d.zsa_dim = 16;
  d.hidden_dim = 16;
  return d;
}

// Makes member k output `value` regardless of its input.
void SetConstantMember(nn::ParameterStore& store, int k, double value) {
  const std::string p = "q" + std::to_string(k) + ".l4.";
  store.value(store.Find(p + "weight")).setZero();
  store.value(store.Find(p + "bias")).setConstant(value);
}

TEST(Ensemble, HandSetMinimum) {
  Rng rng(1);
  QEnsemble q({16, 8, 3}, rng);
  SetConstantMember(q.params(), 0, 2.0);
  SetConstantMember(q.params(), 1, 3.0);
  SetConstantMember(q.params(), 2, 5.0);
  Matrix qs = q.Forward(RandomMatrix(rng, 4, 16));
  Vector m = Reduce(qs, Reduction::kMin);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(m(i), 2.0);
  EXPECT_NEAR(Reduce(qs, Reduction::kMean)(0), 10.0 / 3.0, 1e-15);
}

TEST(Ensemble, MinimumBoundsOnRandomInputs) {
  Rng rng(2);
  QEnsemble q({16, 8, 10}, rng);
  Matrix qs = q.Forward(RandomMatrix(rng, 1000, 16));
  Vector mn = Reduce(qs, Reduction::kMin);
  Vector mean = Reduce(qs, Reduction::kMean);
  for (int i = 0; i < 1000; ++i) {
    for (int k = 0; k < 10; ++k) EXPECT_LE(mn(i), qs(i, k));
    EXPECT_LE(mn(i), mean(i));
  }
}

TEST(Ensemble, IdenticalMembersGiveTheTie) {
  Rng rng(3);
  QEnsemble q({16, 8, 5}, rng);
  nn::ParameterStore& s = q.params();
  for (int id = 0; id < s.size(); ++id) {
    const std::string& name = s[id].name;
    if (name.rfind("q0.", 0) == 0) continue;
    const std::string src = "q0." + name.substr(name.find('.') + 1);
    s.value(id) = s.value(s.Find(src));
  }
  Matrix qs = q.Forward(RandomMatrix(rng, 50, 16));
  Vector mn = Reduce(qs, Reduction::kMin);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(mn(i), qs(i, 0));
}

TEST(Ensemble, TargetsFrozenUntilRefresh) {
  Rng rng(4);
  model::WorldModel wm(SmallDims(), rng);
  QEnsemble q({16, 8, 2}, rng);
  const auto frozen = q.target_params().FlatValues();
  Matrix obs = RandomMatrix(rng, 8, 3);
  Matrix act = RandomMatrix(rng, 8, 1, 0.5);
  Vector targets = RandomMatrix(rng, 8, 1).col(0);
  for (int i = 0; i < 5; ++i) ValueUpdate(wm, q, obs, act, targets, {});
  EXPECT_EQ(q.target_params().FlatValues(), frozen);
  EXPECT_NE(q.params().FlatValues(), frozen);
  q.RefreshTargets();
  EXPECT_TRUE(q.target_params().ValuesEqual(q.params()));
}

TEST(NStep, Examples) {
  const double r1[] = {1.0};
  EXPECT_EQ(NStepTarget(r1, true, 0.99, 123.0), 1.0);
  const double r0[] = {0.0};
  EXPECT_DOUBLE_EQ(NStepTarget(r0, false, 0.99, 2.0), 1.98);
  const double r3[] = {1.0, 1.0, 1.0};
  EXPECT_NEAR(NStepTarget(r3, false, 0.99, 0.0), 2.9701, 1e-12);
}

struct TdFixture {
  Rng rng{5};
  model::WorldModel wm{SmallDims(), rng};
  PolicyNet policy{16, 1, 8, rng};
  QEnsemble q{{16, 8, 3}, rng};
  LapReplayBuffer replay{3, 1, 100};

  void AddEpisode(const std::vector<double>& rewards, bool terminal_end) {
    for (size_t i = 0; i < rewards.size(); ++i) {
      Transition t;
      t.obs = RandomMatrix(rng, 3, 1).col(0);
      t.action = Vector::Constant(1, 0.3);
      t.next_obs = RandomMatrix(rng, 3, 1).col(0);
      t.reward = rewards[i];
      const bool last = i + 1 == rewards.size();
      t.terminated = last && terminal_end;
      t.truncated = last && !terminal_end;
      replay.Add(t);
    }
  }
};

TEST(TdTargetsOp, HandExamples) {
  TdFixture f;
  f.AddEpisode({1.0}, true);              // slot 0
  f.AddEpisode({0.0}, false);             // slot 1, truncated after one step
  f.AddEpisode({1.0, 1.0, 1.0, 1.0}, false);  // slots 2..5
  for (int k = 0; k < 3; ++k) SetConstantMember(f.q.target_params(), k, 2.0 + k);
  TdConfig td;
  TrainingBatch b = BuildTrainingBatch(f.replay, {0, 1, 2}, 5, td);
  TargetOptions opt;
  opt.zero_noise = true;
  Vector y = TdTargets(f.wm, f.policy, f.q, b.value, td, opt, f.rng);
  EXPECT_EQ(y(0), 1.0);
  EXPECT_DOUBLE_EQ(y(1), 1.98);
  EXPECT_NEAR(y(2), 2.9701 + 0.99 * 0.99 * 0.99 * 2.0, 1e-12);

  for (int k = 0; k < 3; ++k) SetConstantMember(f.q.target_params(), k, 0.0);
  y = TdTargets(f.wm, f.policy, f.q, b.value, td, opt, f.rng);
  EXPECT_NEAR(y(2), 2.9701, 1e-12);
}

TEST(TdTargetsOp, SegmentStopsAtEpisodeEnd) {
  TdFixture f;
  f.AddEpisode({0.5, 0.25}, true);
  f.AddEpisode({3.0}, false);
  TdConfig td;
  TrainingBatch b = BuildTrainingBatch(f.replay, {0, 1, 2}, 5, td);
  EXPECT_DOUBLE_EQ(b.value.return_sum(0), 0.5 + 0.99 * 0.25);
  EXPECT_EQ(b.value.bootstrap_discount(0), 0.0);
  EXPECT_EQ(b.value.return_sum(1), 0.25);
  EXPECT_EQ(b.value.bootstrap_discount(1), 0.0);
  EXPECT_EQ(b.value.return_sum(2), 3.0);
  EXPECT_DOUBLE_EQ(b.value.bootstrap_discount(2), 0.99);
  EXPECT_EQ(b.model.mask.row(0).sum(), 2.0);
  EXPECT_EQ(b.model.mask.row(2).sum(), 1.0);
}

TEST(TdTargetsOp, PairMinEqualsFullMinForTwoMembers) {
  Rng rng(6);
  model::WorldModel wm(SmallDims(), rng);
  PolicyNet policy(16, 1, 8, rng);
  QEnsemble q({16, 8, 2}, rng);
  ValueBatch vb;
  vb.bootstrap_obs = RandomMatrix(rng, 20, 3);
  vb.return_sum = RandomMatrix(rng, 20, 1).col(0);
  vb.bootstrap_discount = Vector::Constant(20, 0.97);
  TargetOptions full, pair;
  full.zero_noise = pair.zero_noise = true;
  pair.reduction = TargetReduction::kRandomPairMin;
  Rng r1(1), r2(1);
  EXPECT_EQ(TdTargets(wm, policy, q, vb, {}, full, r1), TdTargets(wm, policy, q, vb, {}, pair, r2));
}

TEST(TdTargetsOp, NoiseIsClipped) {
  // With a constant-in-action target Q the noise cannot change the target;
  // with the clip it must stay within +-0.3 of the policy action.
  Rng rng(7);
  model::WorldModel wm(SmallDims(), rng);
  PolicyNet policy(16, 1, 8, rng);
  QEnsemble q({16, 8, 2}, rng);
  for (int k = 0; k < 2; ++k) SetConstantMember(q.target_params(), k, 4.0);
  ValueBatch vb;
  vb.bootstrap_obs = RandomMatrix(rng, 10, 3);
  vb.return_sum = Vector::Zero(10);
  vb.bootstrap_discount = Vector::Ones(10);
  Vector y = TdTargets(wm, policy, q, vb, {}, {}, rng);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(y(i), 4.0);
}

TEST(ValueLossOp, ZeroErrorClampsPriorities) {
  Rng rng(8);
  QEnsemble q({16, 8, 3}, rng);
  Matrix zsa = RandomMatrix(rng, 6, 16);
  for (int k = 0; k < 3; ++k) SetConstantMember(q.params(), k, 1.5);
  ValueLossResult r = ValueLoss(q, zsa, Vector::Constant(6, 1.5), 1.0, nullptr);
  EXPECT_EQ(r.loss, 0.0);
  for (double p : r.priorities) EXPECT_EQ(p, 1.0);
}

TEST(ValueLossOp, NonNegativeAndMaxMemberPriority) {
  Rng rng(9);
  QEnsemble q({16, 8, 3}, rng);
  for (int t = 0; t < 50; ++t) {
    Matrix zsa = RandomMatrix(rng, 5, 16);
    Vector y = RandomMatrix(rng, 5, 1, 5.0).col(0);
    ValueLossResult r = ValueLoss(q, zsa, y, 1.0, nullptr);
    EXPECT_GE(r.loss, 0.0);
    Matrix qs = q.Forward(zsa);
    for (int i = 0; i < 5; ++i) {
      const double td = (qs.row(i).array() - y(i)).abs().maxCoeff();
      EXPECT_EQ(r.priorities[i], std::max(1.0, td));
    }
  }
}

TEST(ValueLossOp, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    QEnsemble q({16, 8, 2}, rng);
    Matrix zsa = RandomMatrix(rng, 2, 16);
    Vector y = RandomMatrix(rng, 2, 1, 2.0).col(0);
    nn::Gradients g(q.params());
    ValueLoss(q, zsa, y, 1.0, &g);
    auto f = [&](const nn::ParameterStore& s) {
      QEnsemble m = q;
      m.params() = s;
      return ValueLoss(m, zsa, y, 1.0, nullptr).loss;
    };
    EXPECT_LE(nn::RelativeError(g, nn::FiniteDiffGradient(f, q.params())), 1e-3) << trial;
  }
}

TEST(PolicyLossOp, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    model::WorldModel wm(SmallDims(2), rng);
    PolicyNet policy(16, 2, 8, rng);
    QEnsemble q({16, 8, 3}, rng);
    Matrix zs = wm.Encode(RandomMatrix(rng, 2, 3));
    for (Reduction red : {Reduction::kMin, Reduction::kMean}) {
      nn::Gradients g(policy.params());
      PolicyLoss(wm, policy, q, zs, red, &g);
      auto f = [&](const nn::ParameterStore& s) {
        PolicyNet p = policy;
        p.params() = s;
        return PolicyLoss(wm, p, q, zs, red, nullptr);
      };
      EXPECT_LE(nn::RelativeError(g, nn::FiniteDiffGradient(f, policy.params())), 1e-3)
          << trial;
    }
  }
}

TEST(PolicyLossOp, ConstantQGivesZeroGradient) {
  Rng rng(12);
  model::WorldModel wm(SmallDims(), rng);
  PolicyNet policy(16, 1, 8, rng);
  QEnsemble q({16, 8, 3}, rng);
  for (int k = 0; k < 3; ++k) SetConstantMember(q.params(), k, 0.7 * k);
  nn::Gradients g(policy.params());
  PolicyLoss(wm, policy, q, wm.Encode(RandomMatrix(rng, 6, 3)), Reduction::kMin, &g);
  EXPECT_EQ(g.Norm(), 0.0);
}

// The update moves each action along the ascent direction of min-Q at that
// action, measured by finite differences in action space.
TEST(PolicyLossOp, UpdateAscendsMinQ) {
  Rng rng(13);
  model::WorldModel wm(SmallDims(), rng);
  PolicyNet policy(16, 1, 8, rng);
  QEnsemble q({16, 8, 3}, rng);
  const Matrix zs = wm.Encode(RandomMatrix(rng, 16, 3));
  auto min_q = [&](const Matrix& a) {
    return Reduce(q.Forward(wm.StateAction(zs, a)), Reduction::kMin);
  };
  nn::AdamWOptions adam;
  adam.lr = 1e-4;
  adam.weight_decay = 0.0;
  double before = -PolicyLoss(wm, policy, q, zs, Reduction::kMin, nullptr);
  for (int step = 0; step < 50; ++step) {
    const Matrix a0 = policy.Forward(zs);
    PolicyUpdate(wm, policy, q, zs, Reduction::kMin, adam,
                 std::numeric_limits<double>::infinity());
    const double after = -PolicyLoss(wm, policy, q, zs, Reduction::kMin, nullptr);
    EXPECT_GT(after, before) << step;
    before = after;
    const Matrix a1 = policy.Forward(zs);
    EXPECT_LT(a1.cwiseAbs().maxCoeff(), 1.0);
    // First-order check of the batch mean.
    const Vector slope = (min_q(a0.array() + 1e-6) - min_q(a0.array() - 1e-6)) / 2e-6;
    EXPECT_GT(slope.dot((a1 - a0).col(0)), 0.0) << step;
  }
}

TEST(PolicyNetOp, OutputsStayInOpenBox) {
  Rng rng(14);
  model::WorldModel wm(SmallDims(), rng);
  PolicyNet policy(16, 1, 8, rng);
  QEnsemble q({16, 8, 2}, rng);
  const Matrix zs = wm.Encode(RandomMatrix(rng, 32, 3));
  for (int step = 0; step < 300; ++step) {
    PolicyUpdate(wm, policy, q, zs, Reduction::kMin, {}, 20.0);
  }
  const Matrix a = policy.Forward(zs);
  EXPECT_LT(a.cwiseAbs().maxCoeff(), 1.0);
}

Transition SimpleTransition(double r, bool terminated = false, bool truncated = false) {
  Transition t;
  t.obs = Vector::Constant(2, r);
  t.action = Vector::Constant(1, 0.0);
  t.next_obs = Vector::Constant(2, r + 1);
  t.reward = r;
  t.terminated = terminated;
  t.truncated = truncated;
  return t;
}

// Sampling needs batch <= size, so large draws are taken in chunks.
std::vector<int64_t> Draw(const LapReplayBuffer& buf, int n, Rng& rng) {
  std::vector<int64_t> out;
  while (static_cast<int>(out.size()) < n) {
    const int k = static_cast<int>(std::min<int64_t>(buf.size(), n - out.size()));
    for (int64_t s : buf.Sample(k, rng)) out.push_back(s);
  }
  return out;
}

TEST(Replay, EmptyAndSmallBuffersThrow) {
  LapReplayBuffer buf(2, 1, 10);
  Rng rng(0);
  EXPECT_THROW(buf.Sample(1, rng), PreconditionError);
  buf.Add(SimpleTransition(0));
  EXPECT_THROW(buf.Sample(2, rng), PreconditionError);
  EXPECT_NO_THROW(buf.Sample(1, rng));
}

// Chi-square goodness of fit; 27.877 is the 0.999 quantile with 9 degrees
// of freedom.
TEST(Replay, UniformPrioritiesSampleUniformly) {
  LapReplayBuffer buf(2, 1, 10);
  for (int i = 0; i < 10; ++i) buf.Add(SimpleTransition(i));
  Rng rng(17);
  std::vector<int> counts(10, 0);
  const int draws = 100000;
  for (int64_t s : Draw(buf, draws, rng)) ++counts[s];
  double chi2 = 0.0;
  const double e = draws / 10.0;
  for (int c : counts) chi2 += (c - e) * (c - e) / e;
  EXPECT_LT(chi2, 27.877);
}

TEST(Replay, DominantPriorityDominatesSampling) {
  LapReplayBuffer buf(2, 1, 10);
  for (int i = 0; i < 10; ++i) buf.Add(SimpleTransition(i));
  std::vector<int64_t> slots(10);
  std::vector<double> pr(10, 1.0);
  for (int i = 0; i < 10; ++i) slots[i] = i;
  pr[3] = 1e15;
  buf.UpdatePriorities(slots, pr);
  Rng rng(1);
  int hits = 0;
  for (int64_t s : Draw(buf, 10000, rng)) hits += (s == 3);
  EXPECT_GE(hits, 9990);
  EXPECT_GT(buf.SampleProbability(3), 0.9999);
}

TEST(Replay, PowerSmoothedOdds) {
  LapReplayBuffer buf(2, 1, 10, 0.4, 1.0);
  buf.Add(SimpleTransition(0));
  buf.Add(SimpleTransition(1));
  buf.UpdatePriorities({0, 1}, {1.0, 16.0});
  const double odds = std::pow(16.0, 0.4);
  EXPECT_NEAR(odds, 3.0314, 1e-4);
  EXPECT_NEAR(buf.SampleProbability(1) / buf.SampleProbability(0), odds, 1e-12);
  Rng rng(2);
  const int n = 100000;
  int ones = 0;
  for (int64_t s : Draw(buf, n, rng)) ones += (s == 1);
  const double p = odds / (1.0 + odds);
  EXPECT_NEAR(static_cast<double>(ones) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Replay, PrioritiesFlooredAndNewItemsAtMax) {
  LapReplayBuffer buf(2, 1, 10);
  buf.Add(SimpleTransition(0));
  buf.Add(SimpleTransition(1));
  buf.UpdatePriorities({0, 1}, {0.2, 5.0});
  EXPECT_EQ(buf.priority(0), 1.0);
  EXPECT_EQ(buf.priority(1), 5.0);
  buf.Add(SimpleTransition(2));
  EXPECT_EQ(buf.priority(2), 5.0);
}

TEST(Replay, SegmentsRespectEpisodeBoundaries) {
  LapReplayBuffer buf(2, 1, 8);
  buf.Add(SimpleTransition(0));
  buf.Add(SimpleTransition(1, true));
  buf.Add(SimpleTransition(2));
  buf.Add(SimpleTransition(3, false, true));
  buf.Add(SimpleTransition(4));
  buf.Add(SimpleTransition(5));
  EXPECT_EQ(buf.SegmentLength(0, 5), 2);
  EXPECT_EQ(buf.SegmentLength(1, 5), 1);
  EXPECT_EQ(buf.SegmentLength(2, 5), 2);
  EXPECT_EQ(buf.SegmentLength(4, 5), 2);  // newest stored step
  EXPECT_EQ(buf.SegmentLength(4, 1), 1);
}

TEST(Replay, RingBufferWrapsAndPersists) {
  LapReplayBuffer buf(2, 1, 4);
  for (int i = 0; i < 6; ++i) buf.Add(SimpleTransition(i));
  EXPECT_EQ(buf.size(), 4);
  EXPECT_EQ(buf.total_added(), 6);
  EXPECT_EQ(buf.reward(0), 4.0);
  EXPECT_EQ(buf.reward(1), 5.0);
  EXPECT_EQ(buf.SegmentLength(1, 3), 1);
  buf.UpdatePriorities({2}, {9.0});
  LapReplayBuffer copy(2, 1, 4);
  copy.RestoreMeta(buf.SaveMeta());
  copy.RestoreTransitions(buf.SaveTransitions());
  EXPECT_TRUE(copy == buf);
  Rng a(3), b(3);
  EXPECT_EQ(Draw(copy, 50, a), Draw(buf, 50, b));
}

}  // namespace
}  // namespace mrsq::value
