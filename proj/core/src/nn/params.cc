#include "mrsq/nn/params.h"

#include <cmath>
#include <cstring>

#include "mrsq/common/errors.h"

namespace mrsq::nn {

int ParameterStore::Add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("parameter " + name + " must have positive shape");
  }
  if (Find(name) >= 0) throw ConfigError("duplicate parameter " + name);
  Parameter p;
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.m = Matrix::Zero(rows, cols);
  p.v = Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return size() - 1;
}

int ParameterStore::Find(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return -1;
}

int64_t ParameterStore::num_scalars() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::CopyValuesFrom(const ParameterStore& other) {
  if (other.size() != size()) throw ConfigError("CopyValuesFrom: store mismatch");
  for (int i = 0; i < size(); ++i) {
    if (params_[i].value.rows() != other[i].value.rows() ||
        params_[i].value.cols() != other[i].value.cols()) {
      throw ConfigError("CopyValuesFrom: shape mismatch at " + params_[i].name);
    }
    params_[i].value = other[i].value;
  }
}

bool ParameterStore::ValuesEqual(const ParameterStore& other) const {
  if (other.size() != size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (params_[i].value.rows() != other[i].value.rows() ||
        params_[i].value.cols() != other[i].value.cols()) {
      return false;
    }
    // Bitwise, not approximate.
    for (Eigen::Index k = 0; k < params_[i].value.size(); ++k) {
      if (std::memcmp(&params_[i].value.data()[k], &other[i].value.data()[k],
                      sizeof(double)) != 0) {
        return false;
      }
    }
  }
  return true;
}

std::vector<double> ParameterStore::FlatValues() const {
  std::vector<double> flat;
  flat.reserve(num_scalars());
  for (const auto& p : params_) {
    flat.insert(flat.end(), p.value.data(), p.value.data() + p.value.size());
  }
  return flat;
}

void ParameterStore::SetFlatValues(const std::vector<double>& flat) {
  if (static_cast<int64_t>(flat.size()) != num_scalars()) {
    throw ConfigError("SetFlatValues: size mismatch");
  }
  size_t offset = 0;
  for (auto& p : params_) {
    std::copy(flat.begin() + offset, flat.begin() + offset + p.value.size(),
              p.value.data());
    offset += p.value.size();
  }
}

Gradients::Gradients(const ParameterStore& store) {
  grads_.reserve(store.size());
  for (int i = 0; i < store.size(); ++i) {
    grads_.push_back(Matrix::Zero(store[i].value.rows(), store[i].value.cols()));
  }
}

void Gradients::SetZero() {
  for (auto& g : grads_) g.setZero();
}

double Gradients::SquaredNorm() const {
  double s = 0.0;
  for (const auto& g : grads_) s += g.squaredNorm();
  return s;
}

double Gradients::Norm() const { return std::sqrt(SquaredNorm()); }

void Gradients::Scale(double s) {
  for (auto& g : grads_) g *= s;
}

bool Gradients::AllFinite() const {
  for (const auto& g : grads_) {
    if (!g.allFinite()) return false;
  }
  return true;
}

std::vector<double> Gradients::Flat() const {
  std::vector<double> flat;
  for (const auto& g : grads_) flat.insert(flat.end(), g.data(), g.data() + g.size());
  return flat;
}

void XavierUniform(Matrix& w, Rng& rng) {
  // Linear weights are stored (fan_out, fan_in).
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = rng.Uniform(-limit, limit);
  }
}

}  // namespace mrsq::nn
