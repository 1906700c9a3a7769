#include "mrsq/nn/layers.h"

#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::nn {

const char* ToString(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kElu: return "elu";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

const char* ToString(Norm n) {
  switch (n) {
    case Norm::kNone: return "none";
    case Norm::kLayerNorm: return "layernorm";
    case Norm::kLayerNormAffine: return "layernorm-affine";
  }
  return "?";
}

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out,
               Rng& rng)
    : in_(in), out_(out) {
  weight_ = store.Add(name + ".weight", out, in);
  bias_ = store.Add(name + ".bias", 1, out);
  XavierUniform(store.value(weight_), rng);
}

Matrix Linear::Forward(const ParameterStore& store, const Matrix& x) const {
  if (x.cols() != in_) {
    throw ConfigError("Linear: input width " + std::to_string(x.cols()) +
                      " != " + std::to_string(in_));
  }
  Matrix y(x.rows(), out_);
  y.noalias() = x * store.value(weight_).transpose();
  y.rowwise() += store.value(bias_).row(0);
  return y;
}

Matrix Linear::Backward(const ParameterStore& store, const Matrix& x,
                        const Matrix& dy, Gradients* grads) const {
  if (grads != nullptr) {
    (*grads)[weight_].noalias() += dy.transpose() * x;
    (*grads)[bias_] += dy.colwise().sum();
  }
  Matrix dx(dy.rows(), in_);
  dx.noalias() = dy * store.value(weight_);
  return dx;
}

Matrix DenseForward(const Matrix& x, const Matrix& weight, const RowVector& bias) {
  if (x.cols() != weight.cols() || bias.size() != weight.rows()) {
    throw ConfigError("DenseForward: shape mismatch");
  }
  Matrix y(x.rows(), weight.rows());
  y.noalias() = x * weight.transpose();
  y.rowwise() += bias;
  return y;
}

Matrix LayerNorm(const Matrix& x, LayerNormCache* cache) {
  const Eigen::Index n = x.cols();
  if (n < 2) throw ConfigError("LayerNorm: last dim must be >= 2");
  Matrix y(x.rows(), n);
  Vector inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + kLayerNormEps);
    y.row(r) = (x.row(r).array() - mean) * is;
    inv_std(r) = is;
  }
  if (cache != nullptr) {
    cache->xhat = y;
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNormBackward(const LayerNormCache& cache, const Matrix& dy) {
  const Matrix& xhat = cache.xhat;
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_dy = dy.row(r).mean();
    const double mean_dy_xhat = dy.row(r).dot(xhat.row(r)) / dy.cols();
    dx.row(r) = cache.inv_std(r) *
                (dy.row(r).array() - mean_dy - xhat.row(r).array() * mean_dy_xhat);
  }
  return dx;
}

Matrix Activate(Activation a, const Matrix& x) {
  switch (a) {
    case Activation::kNone:
      return x;
    case Activation::kElu:
      // Branch-free so Eigen vectorizes the exponential.
      return (x.array().max(0.0) + kEluAlpha * (x.array().min(0.0).exp() - 1.0)).matrix();
    case Activation::kRelu:
      return x.cwiseMax(0.0);
    case Activation::kTanh:
      return x.array().tanh().matrix();
  }
  return x;
}

Matrix ActivateBackward(Activation a, const Matrix& x, const Matrix& y,
                        const Matrix& dy) {
  switch (a) {
    case Activation::kNone:
      return dy;
    case Activation::kElu: {
      // For x <= 0, d/dx alpha*(e^x - 1) = y + alpha, which is <= 1 there and
      // > 1 wherever x > 0.
      static_assert(kEluAlpha == 1.0);
      return (dy.array() * (y.array() + kEluAlpha).min(1.0)).matrix();
    }
    case Activation::kRelu:
      return dy.cwiseProduct(x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    case Activation::kTanh:
      return dy.cwiseProduct((1.0 - y.array().square()).matrix());
  }
  return dy;
}

Matrix Sem(const Matrix& x, int group) {
  if (group <= 0 || x.cols() % group != 0) {
    throw ConfigError("SEM: width " + std::to_string(x.cols()) +
                      " not divisible by group size " + std::to_string(group));
  }
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index g = 0; g < x.cols(); g += group) {
      auto in = x.row(r).segment(g, group);
      const double mx = in.maxCoeff();
      auto out = y.row(r).segment(g, group);
      out = (in.array() - mx).exp();
      out /= out.sum();
    }
  }
  return y;
}

Matrix SemBackward(const Matrix& y, const Matrix& dy, int group) {
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    for (Eigen::Index g = 0; g < dy.cols(); g += group) {
      auto ys = y.row(r).segment(g, group);
      auto gs = dy.row(r).segment(g, group);
      const double dot = ys.dot(gs);
      dx.row(r).segment(g, group) = ys.array() * (gs.array() - dot);
    }
  }
  return dx;
}

Matrix SoftmaxRows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

Matrix LogSoftmaxRows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    y.row(r) = x.row(r).array() - lse;
  }
  return y;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace mrsq::nn
