#include <cmath>
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "mrsq/common/errors.h"
#include "mrsq/nn/finite_diff.h"
#include "mrsq/nn/layers.h"
#include "mrsq/nn/mlp.h"
#include "mrsq/nn/optim.h"
#include "mrsq/nn/params.h"
#include "mrsq/nn/two_hot.h"
#include "test_util.h"

namespace mrsq::nn {
namespace {

using testing::RandomMatrix;

// Plain triple loop, independent of Eigen's product kernels.
Matrix NaiveDense(const Matrix& x, const Matrix& w, const RowVector& b) {
  Matrix y(x.rows(), w.rows());
  for (int i = 0; i < x.rows(); ++i) {
    for (int o = 0; o < w.rows(); ++o) {
      double acc = b(o);
      for (int k = 0; k < x.cols(); ++k) acc += x(i, k) * w(o, k);
      y(i, o) = acc;
    }
  }
  return y;
}

TEST(Dense, IdentityAndBias) {
  Matrix x(1, 2);
  x << 1, 2;
  EXPECT_EQ(DenseForward(x, Matrix::Identity(2, 2), RowVector::Zero(2)), x);

  RowVector b(1);
  b << 3;
  Rng rng(1);
  Matrix y = DenseForward(RandomMatrix(rng, 4, 5), Matrix::Zero(1, 5), b);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(y(i, 0), 3.0);
}

TEST(Dense, MatchesNaiveProduct) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    Matrix x = RandomMatrix(rng, 3, 2);
    Matrix w = RandomMatrix(rng, 4, 2);
    RowVector b = RandomMatrix(rng, 1, 4).row(0);
    EXPECT_LE((DenseForward(x, w, b) - NaiveDense(x, w, b)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dense, ShapeMismatchThrows) {
  EXPECT_THROW(DenseForward(Matrix::Zero(1, 3), Matrix::Zero(2, 2), RowVector::Zero(2)),
               ConfigError);
}

TEST(LayerNormOp, ConstantRowIsZero) {
  Matrix x = Matrix::Constant(1, 4, 5.0);
  EXPECT_EQ(LayerNorm(x), Matrix::Zero(1, 4));
}

TEST(LayerNormOp, AlreadyNormalized) {
  Matrix x(1, 2);
  x << 1, -1;
  Matrix y = LayerNorm(x);
  EXPECT_NEAR(y(0, 0), 1.0, 1e-5);
  EXPECT_NEAR(y(0, 1), -1.0, 1e-5);
}

TEST(LayerNormOp, RowMomentsOnRandomRows) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.UniformInt(60));
    Matrix x = RandomMatrix(rng, 3, n, 1.0 + 10.0 * rng.Uniform());
    Matrix y = LayerNorm(x);
    for (int r = 0; r < y.rows(); ++r) {
      const double mean = y.row(r).mean();
      const double var = (y.row(r).array() - mean).square().mean();
      const double xvar = (x.row(r).array() - x.row(r).mean()).square().mean();
      EXPECT_LE(std::abs(mean), 1e-9);
      // The epsilon shrinks the variance by xvar / (xvar + eps).
      EXPECT_NEAR(var, xvar / (xvar + kLayerNormEps), 1e-12);
      if (xvar > 1.0) EXPECT_NEAR(var, 1.0, 1e-5);
    }
  }
}

TEST(LayerNormOp, UnitScaleRowWithinTolerance) {
  Rng rng(11);
  Matrix x = RandomMatrix(rng, 1, 512, 20.0);
  Matrix y = LayerNorm(x);
  const double mean = y.row(0).mean();
  EXPECT_LE(std::abs(mean), 1e-9);
  EXPECT_NEAR((y.row(0).array() - mean).square().mean(), 1.0, 1e-6);
}

TEST(SemOp, ZerosGiveUniform) {
  Matrix y = Sem(Matrix::Zero(1, 8));
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(y(0, i), 0.125);
}

TEST(SemOp, HandSoftmax) {
  Matrix x = Matrix::Zero(1, 8);
  x(0, 0) = std::log(3.0);
  Matrix y = Sem(x);
  EXPECT_NEAR(y(0, 0), 0.3, 1e-15);
  for (int i = 1; i < 8; ++i) EXPECT_NEAR(y(0, i), 0.1, 1e-15);
}

TEST(SemOp, GroupSumsAndShiftInvariance) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int groups = 1 + static_cast<int>(rng.UniformInt(8));
    Matrix x = RandomMatrix(rng, 4, groups * 8, 5.0);
    Matrix y = Sem(x);
    for (int r = 0; r < y.rows(); ++r) {
      for (int g = 0; g < groups; ++g) {
        EXPECT_NEAR(y.row(r).segment(8 * g, 8).sum(), 1.0, 1e-9);
        EXPECT_GT(y.row(r).segment(8 * g, 8).minCoeff(), 0.0);
        EXPECT_LT(y.row(r).segment(8 * g, 8).maxCoeff(), 1.0);
      }
    }
    const int g = static_cast<int>(rng.UniformInt(groups));
    Matrix shifted = x;
    shifted.middleCols(8 * g, 8).array() += rng.Uniform(-50.0, 50.0);
    EXPECT_LE((Sem(shifted) - y).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SemOp, ConstantGroupIsUniform) {
  for (double c : {-30.0, 0.0, 2.5, 700.0}) {
    Matrix y = Sem(Matrix::Constant(1, 8, c));
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(y(0, i), 0.125, 1e-15);
  }
}

TEST(SemOp, IndivisibleWidthThrows) {
  EXPECT_THROW(Sem(Matrix::Zero(1, 12)), ConfigError);
}

TEST(TwoHotCodec, ZeroOnCenterBin) {
  TwoHot th;
  RowVector p = th.Encode(0.0);
  EXPECT_EQ(p(32), 1.0);
  EXPECT_EQ(p.sum(), 1.0);
  EXPECT_EQ(th.DecodeProbs(p), 0.0);
}

TEST(TwoHotCodec, EdgeOfEffectiveRange) {
  TwoHot th;
  RowVector p = th.Encode(Symexp(10.0));
  EXPECT_NEAR(Symexp(10.0), 22025.465794806718, 1e-9);
  EXPECT_EQ(p(64), 1.0);
  // Beyond the range clamps to the end bins.
  EXPECT_EQ(th.Encode(1e9)(64), 1.0);
  EXPECT_EQ(th.Encode(-1e9)(0), 1.0);
}

TEST(TwoHotCodec, TwoEntriesSummingToOne) {
  TwoHot th;
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double r = Symexp(rng.Uniform(-10.0, 10.0));
    RowVector p = th.Encode(r);
    EXPECT_EQ(p.sum(), 1.0);
    EXPECT_LE((p.array() != 0.0).count(), 2);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST(TwoHotCodec, RoundTripWithinLocalQuantum) {
  TwoHot th;
  for (int i = 0; i < 1000; ++i) {
    const double r = Symexp(-10.0 + 20.0 * i / 999.0);
    const double back = th.DecodeProbs(th.Encode(r));
    EXPECT_LE(std::abs(back - r), th.LocalQuantum(r)) << "r=" << r;
  }
  EXPECT_LE(std::abs(th.DecodeProbs(th.Encode(5.0)) - 5.0), 0.5 * th.LocalQuantum(5.0));
}

TEST(TwoHotCodec, NonFiniteRewardThrows) {
  TwoHot th;
  EXPECT_THROW(th.Encode(std::numeric_limits<double>::quiet_NaN()), InputError);
  EXPECT_THROW(th.Encode(std::numeric_limits<double>::infinity()), InputError);
}

TEST(TwoHotCodec, LogitDecodeMatchesProbDecode) {
  TwoHot th;
  Rng rng(9);
  RowVector logits = RandomMatrix(rng, 1, 65).row(0);
  RowVector probs = SoftmaxRows(logits).row(0);
  EXPECT_NEAR(th.Decode(logits), th.DecodeProbs(probs), 1e-12);
}

TEST(FiniteDiff, SumHasUnitGradient) {
  ParameterStore s;
  Rng rng(1);
  s.Add("a", 2, 3);
  s.Add("b", 1, 4);
  s.value(0) = RandomMatrix(rng, 2, 3);
  auto f = [](const ParameterStore& st) { return st.value(0).sum() + st.value(1).sum(); };
  Gradients g = FiniteDiffGradient(f, s);
  for (int i = 0; i < g.size(); ++i) {
    EXPECT_LE((g[i].array() - 1.0).abs().maxCoeff(), 1e-9);
  }
}

TEST(FiniteDiff, SquareAtThree) {
  ParameterStore s;
  s.Add("w", 1, 1);
  s.value(0)(0, 0) = 3.0;
  auto f = [](const ParameterStore& st) { return st.value(0)(0, 0) * st.value(0)(0, 0); };
  EXPECT_NEAR(FiniteDiffGradient(f, s)[0](0, 0), 6.0, 1e-8);
}

// Random MLPs with every norm/activation combination: analytic parameter
// and input gradients against central differences.
TEST(MlpBackward, MatchesFiniteDifferences) {
  Rng rng(42);
  const Activation acts[] = {Activation::kNone, Activation::kElu, Activation::kRelu,
                             Activation::kTanh};
  const Norm norms[] = {Norm::kNone, Norm::kLayerNorm, Norm::kLayerNormAffine};
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    MlpSpec spec;
    spec.input_dim = 2 + static_cast<int>(rng.UniformInt(4));
    const int depth = 1 + static_cast<int>(rng.UniformInt(3));
    for (int l = 0; l < depth; ++l) {
      LayerSpec ls;
      // Width 2 LayerNorm outputs are constant (+-1), leaving only roundoff
      // in the input gradient.
      ls.width = 3 + static_cast<int>(rng.UniformInt(5));
      ls.norm = norms[rng.UniformInt(3)];
      ls.activation = acts[rng.UniformInt(4)];
      spec.layers.push_back(ls);
    }
    spec.sem_output = rng.Uniform() < 0.3;
    if (spec.sem_output) spec.layers.back().width = 8 * (1 + static_cast<int>(rng.UniformInt(2)));

    ParameterStore store;
    Mlp mlp(store, "m", spec, rng);
    // Perturb LayerNorm affine terms away from their identity init.
    for (int id = 0; id < store.size(); ++id) {
      store.value(id) += RandomMatrix(rng, store.value(id).rows(), store.value(id).cols(), 0.1);
    }
    const int batch = 1 + static_cast<int>(rng.UniformInt(3));
    const Matrix x = RandomMatrix(rng, batch, spec.input_dim);
    const Matrix w = RandomMatrix(rng, batch, spec.output_dim());

    Mlp::Cache cache;
    mlp.Forward(store, x, &cache);
    Gradients grads(store);
    const Matrix dx = mlp.Backward(store, cache, w, &grads);

    auto f = [&](const ParameterStore& s) {
      return mlp.Forward(s, x).cwiseProduct(w).sum();
    };
    const Gradients fd = FiniteDiffGradient(f, store);
    EXPECT_LE(RelativeError(grads, fd), 1e-3) << "trial " << trial;

    ParameterStore xs;
    xs.Add("x", batch, spec.input_dim);
    xs.value(0) = x;
    auto fx = [&](const ParameterStore& s) {
      return mlp.Forward(store, s.value(0)).cwiseProduct(w).sum();
    };
    EXPECT_LE(RelativeError(dx, FiniteDiffGradient(fx, xs)[0]), 1e-3) << "trial " << trial;
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(MlpForward, BitwiseDeterministic) {
  Rng rng(4);
  ParameterStore store;
  MlpSpec spec{5, {{16, Norm::kLayerNorm, Activation::kElu}, {16, Norm::kLayerNormAffine, Activation::kNone}}, true};
  Mlp mlp(store, "m", spec, rng);
  Matrix x = RandomMatrix(rng, 7, 5);
  Matrix a = mlp.Forward(store, x);
  Matrix b = mlp.Forward(store, x);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
}

TEST(MlpSpecCheck, SemWidthMustDivide) {
  MlpSpec spec{3, {{12, Norm::kNone, Activation::kNone}}, true};
  EXPECT_THROW(spec.Validate(), ConfigError);
}

TEST(AdamW, ZeroGradZeroDecayIsNoop) {
  ParameterStore s;
  Rng rng(1);
  s.Add("w", 3, 3);
  s.value(0) = RandomMatrix(rng, 3, 3);
  const Matrix before = s.value(0);
  Gradients g(s);
  AdamWOptions opt;
  opt.weight_decay = 0.0;
  AdamWStep(s, g, opt);
  EXPECT_EQ(s.value(0), before);
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  ParameterStore s;
  s.Add("w", 1, 1);
  s.value(0)(0, 0) = 1.0;
  Gradients g(s);
  g[0](0, 0) = 2.0;  // d/dw w^2 at 1
  AdamWOptions opt;
  opt.lr = 1e-3;
  opt.weight_decay = 0.0;
  AdamWStep(s, g, opt);
  // Bias-corrected m/sqrt(v) = g/|g| on the first step.
  EXPECT_NEAR(s.value(0)(0, 0), 1.0 - 1e-3, 1e-9);
}

TEST(AdamW, DecoupledDecayOnly) {
  ParameterStore s;
  s.Add("w", 1, 2);
  s.value(0) << 2.0, -4.0;
  Gradients g(s);
  AdamWOptions opt;
  opt.lr = 0.01;
  opt.weight_decay = 0.1;
  AdamWStep(s, g, opt);
  EXPECT_NEAR(s.value(0)(0, 0), 2.0 * (1 - 0.01 * 0.1), 1e-15);
  EXPECT_NEAR(s.value(0)(0, 1), -4.0 * (1 - 0.01 * 0.1), 1e-15);
}

TEST(AdamW, NonFiniteGradientAborts) {
  ParameterStore s;
  s.Add("w", 1, 2);
  s.value(0) << 1.0, 2.0;
  Gradients g(s);
  g[0](0, 1) = std::numeric_limits<double>::quiet_NaN();
  const Matrix before = s.value(0);
  EXPECT_THROW(AdamWStep(s, g, AdamWOptions{}), TrainingFault);
  EXPECT_EQ(s.value(0), before);
  EXPECT_EQ(s.step(), 0);
}

TEST(ClipGrad, BelowThresholdUnchanged) {
  ParameterStore s;
  s.Add("w", 1, 2);
  Gradients g(s);
  g[0] << 6.0, 8.0;
  EXPECT_DOUBLE_EQ(ClipGradNorm(g, 20.0), 10.0);
  EXPECT_EQ(g[0](0, 0), 6.0);
  EXPECT_EQ(g[0](0, 1), 8.0);
}

TEST(ClipGrad, SingleLargeGradient) {
  ParameterStore s;
  s.Add("w", 1, 1);
  Gradients g(s);
  g[0](0, 0) = 40.0;
  ClipGradNorm(g, 20.0);
  EXPECT_DOUBLE_EQ(g[0](0, 0), 20.0);
}

TEST(ClipGrad, RandomNormsClampToMax) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    ParameterStore s;
    s.Add("a", 3, 4);
    s.Add("b", 1, 5);
    Gradients g(s);
    const double scale = std::exp(rng.Uniform(-3.0, 5.0));
    g[0] = RandomMatrix(rng, 3, 4, scale);
    g[1] = RandomMatrix(rng, 1, 5, scale);
    const double pre = g.Norm();
    EXPECT_DOUBLE_EQ(ClipGradNorm(g, 20.0), pre);
    EXPECT_NEAR(g.Norm(), std::min(pre, 20.0), 1e-9);
  }
}

}  // namespace
}  // namespace mrsq::nn
