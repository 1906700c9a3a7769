#include "mrsq/nn/mlp.h"

#include "mrsq/common/errors.h"

namespace mrsq::nn {

void MlpSpec::Validate() const {
  if (input_dim <= 0) throw ConfigError("MlpSpec: input_dim must be positive");
  if (layers.empty()) throw ConfigError("MlpSpec: no layers");
  for (const auto& l : layers) {
    if (l.width <= 0) throw ConfigError("MlpSpec: widths must be positive");
    if (l.norm != Norm::kNone && l.width < 2) {
      throw ConfigError("MlpSpec: layernorm needs width >= 2");
    }
  }
  if (sem_output && (sem_group <= 0 || output_dim() % sem_group != 0)) {
    throw ConfigError("MlpSpec: SEM output width " + std::to_string(output_dim()) +
                      " not divisible by " + std::to_string(sem_group));
  }
}

Mlp::Mlp(ParameterStore& store, const std::string& prefix, MlpSpec spec, Rng& rng)
    : spec_(std::move(spec)) {
  spec_.Validate();
  int in = spec_.input_dim;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    const std::string name = prefix + ".l" + std::to_string(i + 1);
    linears_.emplace_back(store, name, in, l.width, rng);
    if (l.norm == Norm::kLayerNormAffine) {
      gamma_.push_back(store.Add(name + ".ln.weight", 1, l.width));
      beta_.push_back(store.Add(name + ".ln.bias", 1, l.width));
      store.value(gamma_.back()).setOnes();
    } else {
      gamma_.push_back(-1);
      beta_.push_back(-1);
    }
    in = l.width;
  }
}

Matrix Mlp::Forward(const ParameterStore& store, const Matrix& x, Cache* cache) const {
  if (cache != nullptr) cache->layers.resize(linears_.size());
  Matrix h = x;
  for (size_t i = 0; i < linears_.size(); ++i) {
    const auto& l = spec_.layers[i];
    Matrix lin = linears_[i].Forward(store, h);
    LayerNormCache ln;
    Matrix normed;
    if (l.norm == Norm::kNone) {
      normed = lin;
    } else {
      normed = LayerNorm(lin, cache != nullptr ? &ln : nullptr);
      if (l.norm == Norm::kLayerNormAffine) {
        normed.array().rowwise() *= store.value(gamma_[i]).row(0).array();
        normed.rowwise() += store.value(beta_[i]).row(0);
      }
    }
    Matrix out = Activate(l.activation, normed);
    if (cache != nullptr) {
      auto& c = cache->layers[i];
      c.input = std::move(h);
      c.linear = std::move(lin);
      c.ln = std::move(ln);
      c.normed = std::move(normed);
      c.output = out;
    }
    h = std::move(out);
  }
  if (spec_.sem_output) h = Sem(h, spec_.sem_group);
  if (cache != nullptr) cache->output = h;
  return h;
}

Matrix Mlp::Backward(const ParameterStore& store, const Cache& cache, const Matrix& dy,
                     Gradients* grads, const Matrix* extra_last_linear) const {
  Matrix d = spec_.sem_output ? SemBackward(cache.output, dy, spec_.sem_group) : dy;
  for (int i = static_cast<int>(linears_.size()) - 1; i >= 0; --i) {
    const auto& l = spec_.layers[i];
    const auto& c = cache.layers[i];
    d = ActivateBackward(l.activation, c.normed, c.output, d);
    if (l.norm == Norm::kLayerNormAffine) {
      if (grads != nullptr) {
        (*grads)[gamma_[i]] += d.cwiseProduct(c.ln.xhat).colwise().sum();
        (*grads)[beta_[i]] += d.colwise().sum();
      }
      d.array().rowwise() *= store.value(gamma_[i]).row(0).array();
    }
    if (l.norm != Norm::kNone) d = LayerNormBackward(c.ln, d);
    if (extra_last_linear != nullptr && i == static_cast<int>(linears_.size()) - 1) {
      d += *extra_last_linear;
    }
    d = linears_[i].Backward(store, c.input, d, grads);
  }
  return d;
}

}  // namespace mrsq::nn
