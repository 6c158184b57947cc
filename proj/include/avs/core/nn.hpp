#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "avs/core/ops.hpp"
#include "avs/core/tensor.hpp"

namespace avs::nn {

using Rng = std::mt19937_64;

template <typename T>
using ParamList = std::vector<Param<T>*>;

/// 2-D convolution over a single CHW sample with "same"-style padding
/// (pad = kernel / 2). Caches its input for the backward pass.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride, Rng& rng,
         bool with_bias = true);

  Tensor<T> forward(const Tensor<T>& x);
  /// Accumulates parameter gradients and returns dL/dx (empty when
  /// `need_input` is false).
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input = true);

  void collect(ParamList<T>& out);
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int out_channels() const { return weight_.value.dim(0); }

 private:
  Param<T> weight_;
  Param<T> bias_;
  int stride_ = 1;
  int pad_ = 0;
  bool with_bias_ = true;
  Tensor<T> input_;
};

/// Token-wise affine map x[n x in] -> [n x out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in_features, int out_features, Rng& rng, bool with_bias = true);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out);
  void collect(ParamList<T>& out);
  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Param<T> weight_;
  Param<T> bias_;
  bool with_bias_ = true;
  Tensor<T> input_;
};

enum class Activation { Relu, Elu };

/// Elementwise nonlinearity that remembers its input.
template <typename T>
class Act {
 public:
  explicit Act(Activation kind = Activation::Relu) : kind_(kind) {}
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out) const;

 private:
  Activation kind_;
  Tensor<T> input_;
};

/// Kaiming-normal initialisation for a weight with the given fan-in.
template <typename T>
Tensor<T> kaiming_normal(const Shape& shape, int fan_in, Rng& rng, double gain = 1.4142135623730951);

void zero_grads(const ParamList<float>& params);
void zero_grads(const ParamList<double>& params);

std::size_t count_parameters(const ParamList<float>& params);
std::size_t count_parameters(const ParamList<double>& params);

}  // namespace avs::nn
