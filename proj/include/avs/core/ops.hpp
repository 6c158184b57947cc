#pragma once

#include "avs/core/tensor.hpp"

namespace avs {

// Dense matrix products on row-major buffers, backed by Eigen without
// threading so repeated runs give bitwise-identical results.

/// C[m x n] += A[m x k] * B[k x n]
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c);
/// C[m x n] += A^T * B with A stored k x m
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c);
/// C[m x n] += A * B^T with B stored n x k
template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c);

/// Cross-correlation of an NCHW input with an OIHW weight, zero padded.
/// `bias` may be empty; otherwise it has one entry per output channel.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                 int pad);

template <typename T>
struct Conv2dGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

/// Gradients of conv2d given dL/d(output). `input` grad is left empty when
/// `need_input` is false.
template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                               const Tensor<T>& grad_out, int stride, int pad, bool need_input = true);

/// Numerically stable softmax along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits, int axis);

/// dL/dlogits from the softmax output and dL/doutput.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& probs, const Tensor<T>& grad_probs, int axis);

/// Bilinear resampling with half-pixel centers (align_corners = false) over
/// the two trailing axes. Accepts CHW or NCHW.
template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, int out_h, int out_w);

/// Adjoint of bilinear_resize: maps dL/d(output) back to the input grid.
template <typename T>
Tensor<T> bilinear_resize_backward(const Tensor<T>& grad_out, int in_h, int in_w);

/// Row-wise affine map: x[n x in] * w[in x out] + b[out].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
struct LinearGrads {
  Tensor<T> x;
  Tensor<T> w;
  Tensor<T> b;
};

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out);

// Elementwise activations. Backward helpers take whatever the derivative is
// cheapest to express in.

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> elu(const Tensor<T>& x);
template <typename T>
Tensor<T> elu_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);
/// Uses the sigmoid output y: dy/dx = y (1 - y).
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> softplus(const Tensor<T>& x);
template <typename T>
Tensor<T> softplus_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

/// Concatenates CHW tensors along the channel axis.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

/// Splits the channel axis of a CHW tensor at `first_channels`.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int first_channels);

/// Sum of all entries, accumulated in index order.
template <typename T>
T sum(const Tensor<T>& x);

template <typename T>
T mean(const Tensor<T>& x);

}  // namespace avs
