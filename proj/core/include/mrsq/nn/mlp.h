#ifndef MRSQ_NN_MLP_H_
#define MRSQ_NN_MLP_H_

#include <string>
#include <vector>

#include "mrsq/nn/layers.h"
#include "mrsq/nn/params.h"

namespace mrsq::nn {

// Each layer is Linear -> Norm -> Activation.
struct LayerSpec {
  int width = 0;
  Norm norm = Norm::kNone;
  Activation activation = Activation::kNone;
};

struct MlpSpec {
  int input_dim = 0;
  std::vector<LayerSpec> layers;
  // SEM applied to the output of the last layer.
  bool sem_output = false;
  int sem_group = kSemGroupSize;

  void Validate() const;
  int output_dim() const { return layers.empty() ? input_dim : layers.back().width; }
};

class Mlp {
 public:
  struct LayerCache {
    Matrix input;
    Matrix linear;  // pre-norm
    LayerNormCache ln;
    Matrix normed;  // activation input
    Matrix output;
  };
  struct Cache {
    std::vector<LayerCache> layers;
    Matrix output;
  };

  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& prefix, MlpSpec spec, Rng& rng);

  Matrix Forward(const ParameterStore& store, const Matrix& x,
                 Cache* cache = nullptr) const;

  // `extra_last_linear` adds a gradient directly at the last layer's linear
  // output (used by penalties on pre-activations).
  Matrix Backward(const ParameterStore& store, const Cache& cache, const Matrix& dy,
                  Gradients* grads, const Matrix* extra_last_linear = nullptr) const;

  const MlpSpec& spec() const { return spec_; }

 private:
  MlpSpec spec_;
  std::vector<Linear> linears_;
  std::vector<int> gamma_;
  std::vector<int> beta_;
};

}  // namespace mrsq::nn

#endif  // MRSQ_NN_MLP_H_
