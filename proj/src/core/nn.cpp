#include "avs/core/nn.hpp"

#include <cmath>

namespace avs::nn {

template <typename T>
Tensor<T> kaiming_normal(const Shape& shape, int fan_in, Rng& rng, double gain) {
  std::normal_distribution<double> dist(0.0, gain / std::sqrt(static_cast<double>(fan_in)));
  Tensor<T> w(shape);
  for (auto& v : w.values()) v = static_cast<T>(dist(rng));
  return w;
}

template <typename T>
Conv2d<T>::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride, Rng& rng,
                  bool with_bias)
    : weight_(name + ".weight", kaiming_normal<T>({out_channels, in_channels, kernel, kernel},
                                                  in_channels * kernel * kernel, rng)),
      bias_(name + ".bias", Tensor<T>({out_channels})),
      stride_(stride),
      pad_(kernel / 2),
      with_bias_(with_bias) {}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
  if (x.rank() != 3) throw std::invalid_argument(weight_.name + ": expected CHW input, got " + shape_str(x.shape()));
  input_ = x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  Tensor<T> y = conv2d(input_, weight_.value, with_bias_ ? bias_.value : Tensor<T>{}, stride_, pad_);
  y.reshape({y.dim(1), y.dim(2), y.dim(3)});
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out, bool need_input) {
  const Tensor<T> g4 = grad_out.reshaped({1, grad_out.dim(0), grad_out.dim(1), grad_out.dim(2)});
  auto grads = conv2d_backward(input_, weight_.value, g4, stride_, pad_, need_input);
  weight_.grad += grads.weight;
  if (with_bias_) bias_.grad += grads.bias;
  if (!need_input) return {};
  grads.input.reshape({input_.dim(1), input_.dim(2), input_.dim(3)});
  return std::move(grads.input);
}

template <typename T>
void Conv2d<T>::collect(ParamList<T>& out) {
  out.push_back(&weight_);
  if (with_bias_) out.push_back(&bias_);
}

template <typename T>
Linear<T>::Linear(const std::string& name, int in_features, int out_features, Rng& rng, bool with_bias)
    : weight_(name + ".weight", kaiming_normal<T>({in_features, out_features}, in_features, rng, 1.0)),
      bias_(name + ".bias", Tensor<T>({out_features})),
      with_bias_(with_bias) {}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
  input_ = x;
  return linear(x, weight_.value, with_bias_ ? bias_.value : Tensor<T>{});
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& grad_out) {
  auto g = linear_backward(input_, weight_.value, grad_out);
  weight_.grad += g.w;
  if (with_bias_) bias_.grad += g.b;
  return std::move(g.x);
}

template <typename T>
void Linear<T>::collect(ParamList<T>& out) {
  out.push_back(&weight_);
  if (with_bias_) out.push_back(&bias_);
}

template <typename T>
Tensor<T> Act<T>::forward(const Tensor<T>& x) {
  input_ = x;
  return kind_ == Activation::Relu ? relu(x) : elu(x);
}

template <typename T>
Tensor<T> Act<T>::backward(const Tensor<T>& grad_out) const {
  return kind_ == Activation::Relu ? relu_backward(input_, grad_out) : elu_backward(input_, grad_out);
}

template <typename T>
static void zero_all(const ParamList<T>& params) {
  for (auto* p : params) p->zero_grad();
}

void zero_grads(const ParamList<float>& params) { zero_all(params); }
void zero_grads(const ParamList<double>& params) { zero_all(params); }

template <typename T>
static std::size_t count_all(const ParamList<T>& params) {
  std::size_t n = 0;
  for (auto* p : params) n += p->value.size();
  return n;
}

std::size_t count_parameters(const ParamList<float>& params) { return count_all(params); }
std::size_t count_parameters(const ParamList<double>& params) { return count_all(params); }

template class Conv2d<float>;
template class Conv2d<double>;
template class Linear<float>;
template class Linear<double>;
template class Act<float>;
template class Act<double>;
template Tensor<float> kaiming_normal<float>(const Shape&, int, Rng&, double);
template Tensor<double> kaiming_normal<double>(const Shape&, int, Rng&, double);

}  // namespace avs::nn
