#include "avs/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include <Eigen/Core>

namespace avs {

namespace {

enum class Trans { No, Yes };

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

// c[m x n] = op(a) op(b) + beta c, all row-major; op(a) is m x k.
template <typename T>
void blas_gemm(Trans ta, Trans tb, int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c,
               T beta = T(1)) {
  if (m == 0 || n == 0) return;
  Eigen::Map<RowMat<T>> C(c, m, n);
  if (beta == T(0)) {
    C.setZero();
  } else if (beta != T(1)) {
    C *= beta;
  }
  if (k == 0) return;
  const ConstMap<T> A(a, ta == Trans::No ? m : k, ta == Trans::No ? k : m, Eigen::OuterStride<>(lda));
  const ConstMap<T> B(b, tb == Trans::No ? k : n, tb == Trans::No ? n : k, Eigen::OuterStride<>(ldb));
  if (ta == Trans::No && tb == Trans::No) {
    C.noalias() += A * B;
  } else if (ta == Trans::No) {
    C.noalias() += A * B.transpose();
  } else if (tb == Trans::No) {
    C.noalias() += A.transpose() * B;
  } else {
    C.noalias() += A.transpose() * B.transpose();
  }
}

// Per-thread im2col buffers, grown on demand and never shrunk.
template <typename T>
T* scratch(int slot, std::size_t n) {
  thread_local std::vector<T> buffers[2];
  auto& buf = buffers[slot];
  if (buf.size() < n) buf.resize(n);
  return buf.data();
}

}  // namespace

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c) {
  blas_gemm(Trans::No, Trans::No, m, n, k, a, k, b, n, c);
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c) {
  blas_gemm(Trans::Yes, Trans::No, m, n, k, a, m, b, n, c);
}

template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c) {
  blas_gemm(Trans::No, Trans::Yes, m, n, k, a, k, b, k, c);
}

namespace {

struct ConvGeometry {
  int n, c, h, w;
  int o, kh, kw;
  int oh, ow;
  int stride, pad;
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
  std::size_t col_rows() const { return static_cast<std::size_t>(c) * kh * kw; }
  std::size_t col_cols() const { return static_cast<std::size_t>(oh) * ow; }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& weight, int stride, int pad) {
  if (input.rank() != 4) throw std::invalid_argument("conv2d: input must be NCHW, got " + shape_str(input.shape()));
  if (weight.rank() != 4) throw std::invalid_argument("conv2d: weight must be OIHW, got " + shape_str(weight.shape()));
  if (stride < 1 || pad < 0) throw std::invalid_argument("conv2d: stride must be >= 1 and pad >= 0");
  ConvGeometry g{};
  g.n = input.dim(0);
  g.c = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.o = weight.dim(0);
  g.kh = weight.dim(2);
  g.kw = weight.dim(3);
  g.stride = stride;
  g.pad = pad;
  if (weight.dim(1) != g.c) {
    throw std::invalid_argument("conv2d: input has " + std::to_string(g.c) + " channels but weight " +
                                shape_str(weight.shape()) + " expects " + std::to_string(weight.dim(1)));
  }
  if (g.h + 2 * pad < g.kh || g.w + 2 * pad < g.kw) {
    throw std::invalid_argument("conv2d: padded input " + shape_str(input.shape()) + " smaller than kernel " +
                                shape_str(weight.shape()));
  }
  g.oh = (g.h + 2 * pad - g.kh) / stride + 1;
  g.ow = (g.w + 2 * pad - g.kw) / stride + 1;
  return g;
}

// Output columns [lo, hi) whose input column ox * stride - pad + j lies inside [0, w).
inline std::pair<int, int> valid_columns(const ConvGeometry& g, int j) {
  const int off = j - g.pad;
  int lo = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  int hi = g.w - 1 - off < 0 ? 0 : (g.w - 1 - off) / g.stride + 1;
  hi = std::min(hi, g.ow);
  lo = std::min(lo, hi);
  return {lo, hi};
}

template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  std::size_t row = 0;
  for (int ch = 0; ch < g.c; ++ch) {
    const T* plane = x + static_cast<std::size_t>(ch) * g.h * g.w;
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j, ++row) {
        T* dst = col + row * g.col_cols();
        const auto [lo, hi] = valid_columns(g, j);
        const int off = j - g.pad;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + i;
          T* drow = dst + static_cast<std::size_t>(oy) * g.ow;
          if (iy < 0 || iy >= g.h) {
            std::fill(drow, drow + g.ow, T(0));
            continue;
          }
          const T* srow = plane + static_cast<std::size_t>(iy) * g.w;
          std::fill(drow, drow + lo, T(0));
          if (g.stride == 1) {
            std::copy(srow + lo + off, srow + hi + off, drow + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) drow[ox] = srow[ox * g.stride + off];
          }
          std::fill(drow + hi, drow + g.ow, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* x) {
  std::size_t row = 0;
  for (int ch = 0; ch < g.c; ++ch) {
    T* plane = x + static_cast<std::size_t>(ch) * g.h * g.w;
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j, ++row) {
        const T* src = col + row * g.col_cols();
        const auto [lo, hi] = valid_columns(g, j);
        const int off = j - g.pad;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + i;
          if (iy < 0 || iy >= g.h) continue;
          T* drow = plane + static_cast<std::size_t>(iy) * g.w;
          const T* srow = src + static_cast<std::size_t>(oy) * g.ow;
          if (g.stride == 1) {
            for (int ox = lo; ox < hi; ++ox) drow[ox + off] += srow[ox];
          } else {
            for (int ox = lo; ox < hi; ++ox) drow[ox * g.stride + off] += srow[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int pad) {
  const ConvGeometry g = conv_geometry(input, weight, stride, pad);
  if (!bias.empty() && static_cast<int>(bias.size()) != g.o) {
    throw std::invalid_argument("conv2d: bias has " + std::to_string(bias.size()) + " entries for " +
                                std::to_string(g.o) + " output channels");
  }
  Tensor<T> out({g.n, g.o, g.oh, g.ow});
  const std::size_t in_plane = static_cast<std::size_t>(g.c) * g.h * g.w;
  const std::size_t out_plane = static_cast<std::size_t>(g.o) * g.oh * g.ow;
  T* col = g.pointwise() ? nullptr : scratch<T>(0, g.col_rows() * g.col_cols());
  for (int b = 0; b < g.n; ++b) {
    const T* x = input.data() + b * in_plane;
    T* y = out.data() + b * out_plane;
    if (!bias.empty()) {
      for (int oc = 0; oc < g.o; ++oc) std::fill(y + oc * g.col_cols(), y + (oc + 1) * g.col_cols(), bias[oc]);
    }
    const T* cols = x;
    if (!g.pointwise()) {
      im2col(g, x, col);
      cols = col;
    }
    gemm_nn(g.o, static_cast<int>(g.col_cols()), static_cast<int>(g.col_rows()), weight.data(), cols, y);
  }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& grad_out,
                               int stride, int pad, bool need_input) {
  const ConvGeometry g = conv_geometry(input, weight, stride, pad);
  if (grad_out.shape() != Shape{g.n, g.o, g.oh, g.ow}) {
    throw std::invalid_argument("conv2d_backward: grad_out " + shape_str(grad_out.shape()) + " does not match output");
  }
  Conv2dGrads<T> grads;
  grads.weight = Tensor<T>(weight.shape());
  grads.bias = Tensor<T>({g.o});
  if (need_input) grads.input = Tensor<T>(input.shape());

  const std::size_t in_plane = static_cast<std::size_t>(g.c) * g.h * g.w;
  const std::size_t out_plane = static_cast<std::size_t>(g.o) * g.oh * g.ow;
  const int rows = static_cast<int>(g.col_rows());
  const int cols_n = static_cast<int>(g.col_cols());
  T* col = nullptr;
  T* dcol = nullptr;
  if (!g.pointwise()) {
    col = scratch<T>(0, g.col_rows() * g.col_cols());
    if (need_input) dcol = scratch<T>(1, g.col_rows() * g.col_cols());
  }
  for (int b = 0; b < g.n; ++b) {
    const T* x = input.data() + b * in_plane;
    const T* dy = grad_out.data() + b * out_plane;
    for (int oc = 0; oc < g.o; ++oc) {
      T acc = T(0);
      const T* row = dy + static_cast<std::size_t>(oc) * cols_n;
      for (int q = 0; q < cols_n; ++q) acc += row[q];
      grads.bias[oc] += acc;
    }
    const T* cols = x;
    if (!g.pointwise()) {
      im2col(g, x, col);
      cols = col;
    }
    gemm_nt(g.o, rows, cols_n, dy, cols, grads.weight.data());
    if (need_input) {
      T* dx = grads.input.data() + b * in_plane;
      if (g.pointwise()) {
        gemm_tn(rows, cols_n, g.o, weight.data(), dy, dx);
      } else {
        blas_gemm(Trans::Yes, Trans::No, rows, cols_n, g.o, weight.data(), rows, dy, cols_n, dcol, T(0));
        col2im(g, dcol, dx);
      }
    }
  }
  return grads;
}

namespace {

struct AxisLayout {
  std::size_t outer, len, inner;
};

template <typename T>
AxisLayout axis_layout(const Tensor<T>& x, int axis) {
  const int r = x.rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw std::invalid_argument("softmax: axis out of range for " + shape_str(x.shape()));
  AxisLayout l{1, static_cast<std::size_t>(x.dim(axis)), 1};
  for (int i = 0; i < axis; ++i) l.outer *= static_cast<std::size_t>(x.dim(i));
  for (int i = axis + 1; i < r; ++i) l.inner *= static_cast<std::size_t>(x.dim(i));
  return l;
}

}  // namespace

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits, int axis) {
  const AxisLayout l = axis_layout(logits, axis);
  Tensor<T> out(logits.shape());
  std::vector<T> mx(l.inner), total(l.inner);
  for (std::size_t o = 0; o < l.outer; ++o) {
    const T* x = logits.data() + o * l.len * l.inner;
    T* y = out.data() + o * l.len * l.inner;
    std::fill(mx.begin(), mx.end(), -std::numeric_limits<T>::infinity());
    std::fill(total.begin(), total.end(), T(0));
    for (std::size_t k = 0; k < l.len; ++k)
      for (std::size_t in = 0; in < l.inner; ++in) mx[in] = std::max(mx[in], x[k * l.inner + in]);
    for (std::size_t k = 0; k < l.len; ++k)
      for (std::size_t in = 0; in < l.inner; ++in) {
        const T e = std::exp(x[k * l.inner + in] - mx[in]);
        y[k * l.inner + in] = e;
        total[in] += e;
      }
    for (std::size_t k = 0; k < l.len; ++k)
      for (std::size_t in = 0; in < l.inner; ++in) y[k * l.inner + in] /= total[in];
  }
  return out;
}

template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& probs, const Tensor<T>& grad_probs, int axis) {
  probs.require_same_shape(grad_probs, "softmax_backward");
  const AxisLayout l = axis_layout(probs, axis);
  Tensor<T> out(probs.shape());
  std::vector<T> dot(l.inner);
  for (std::size_t o = 0; o < l.outer; ++o) {
    const std::size_t base = o * l.len * l.inner;
    const T* p = probs.data() + base;
    const T* g = grad_probs.data() + base;
    T* y = out.data() + base;
    std::fill(dot.begin(), dot.end(), T(0));
    for (std::size_t k = 0; k < l.len; ++k)
      for (std::size_t in = 0; in < l.inner; ++in) dot[in] += p[k * l.inner + in] * g[k * l.inner + in];
    for (std::size_t k = 0; k < l.len; ++k)
      for (std::size_t in = 0; in < l.inner; ++in) {
        const std::size_t i = k * l.inner + in;
        y[i] = p[i] * (g[i] - dot[in]);
      }
  }
  return out;
}

namespace {

template <typename T>
struct Taps {
  std::vector<int> lo, hi;
  std::vector<T> frac;
};

template <typename T>
Taps<T> resize_taps(int in, int out) {
  Taps<T> t;
  t.lo.resize(static_cast<std::size_t>(out));
  t.hi.resize(static_cast<std::size_t>(out));
  t.frac.resize(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    if (src < 0) src = 0;
    int lo = static_cast<int>(std::floor(src));
    if (lo > in - 1) lo = in - 1;
    t.lo[i] = lo;
    t.hi[i] = std::min(lo + 1, in - 1);
    t.frac[i] = static_cast<T>(src - lo);
  }
  return t;
}

template <typename T>
std::size_t leading_planes(const Tensor<T>& x, const char* what) {
  if (x.rank() < 2) throw std::invalid_argument(std::string(what) + ": need at least 2 axes");
  std::size_t planes = 1;
  for (int i = 0; i + 2 < x.rank(); ++i) planes *= static_cast<std::size_t>(x.dim(i));
  return planes;
}

}  // namespace

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: output size must be positive");
  const std::size_t planes = leading_planes(input, "bilinear_resize");
  const int in_h = input.dim(-2);
  const int in_w = input.dim(-1);
  Shape shape = input.shape();
  shape[shape.size() - 2] = out_h;
  shape[shape.size() - 1] = out_w;
  Tensor<T> out(shape);
  const auto ty = resize_taps<T>(in_h, out_h);
  const auto tx = resize_taps<T>(in_w, out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = input.data() + p * in_h * in_w;
    T* dst = out.data() + p * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const T* r0 = src + static_cast<std::size_t>(ty.lo[y]) * in_w;
      const T* r1 = src + static_cast<std::size_t>(ty.hi[y]) * in_w;
      const T ly = ty.frac[y];
      for (int x = 0; x < out_w; ++x) {
        const T lx = tx.frac[x];
        const T top = r0[tx.lo[x]] + (r0[tx.hi[x]] - r0[tx.lo[x]]) * lx;
        const T bot = r1[tx.lo[x]] + (r1[tx.hi[x]] - r1[tx.lo[x]]) * lx;
        dst[static_cast<std::size_t>(y) * out_w + x] = top + (bot - top) * ly;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> bilinear_resize_backward(const Tensor<T>& grad_out, int in_h, int in_w) {
  const std::size_t planes = leading_planes(grad_out, "bilinear_resize_backward");
  const int out_h = grad_out.dim(-2);
  const int out_w = grad_out.dim(-1);
  Shape shape = grad_out.shape();
  shape[shape.size() - 2] = in_h;
  shape[shape.size() - 1] = in_w;
  Tensor<T> grad(shape);
  const auto ty = resize_taps<T>(in_h, out_h);
  const auto tx = resize_taps<T>(in_w, out_w);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* g = grad_out.data() + p * out_h * out_w;
    T* dst = grad.data() + p * in_h * in_w;
    for (int y = 0; y < out_h; ++y) {
      T* r0 = dst + static_cast<std::size_t>(ty.lo[y]) * in_w;
      T* r1 = dst + static_cast<std::size_t>(ty.hi[y]) * in_w;
      const T ly = ty.frac[y];
      for (int x = 0; x < out_w; ++x) {
        const T lx = tx.frac[x];
        const T v = g[static_cast<std::size_t>(y) * out_w + x];
        const T top = v * (T(1) - ly);
        const T bot = v * ly;
        r0[tx.lo[x]] += top * (T(1) - lx);
        r0[tx.hi[x]] += top * lx;
        r1[tx.lo[x]] += bot * (T(1) - lx);
        r1[tx.hi[x]] += bot * lx;
      }
    }
  }
  return grad;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0)) {
    throw std::invalid_argument("linear: cannot multiply " + shape_str(x.shape()) + " by " + shape_str(w.shape()));
  }
  const int n = x.dim(0);
  const int out_dim = w.dim(1);
  if (!b.empty() && static_cast<int>(b.size()) != out_dim) throw std::invalid_argument("linear: bias size mismatch");
  Tensor<T> y({n, out_dim});
  if (!b.empty()) {
    for (int i = 0; i < n; ++i) std::copy(b.data(), b.data() + out_dim, y.data() + static_cast<std::size_t>(i) * out_dim);
  }
  gemm_nn(n, out_dim, x.dim(1), x.data(), w.data(), y.data());
  return y;
}

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out) {
  const int n = x.dim(0);
  const int in_dim = x.dim(1);
  const int out_dim = w.dim(1);
  if (grad_out.shape() != Shape{n, out_dim}) throw std::invalid_argument("linear_backward: grad shape mismatch");
  LinearGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({out_dim})};
  gemm_nt(n, in_dim, out_dim, grad_out.data(), w.data(), g.x.data());
  gemm_tn(in_dim, out_dim, n, x.data(), grad_out.data(), g.w.data());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < out_dim; ++j) g.b[j] += grad_out[static_cast<std::size_t>(i) * out_dim + j];
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  Tensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T(0) ? grad_out[i] : T(0);
  return g;
}

template <typename T>
Tensor<T> elu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : std::expm1(x[i]);
  return y;
}

template <typename T>
Tensor<T> elu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  Tensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T(0) ? grad_out[i] : grad_out[i] * std::exp(x[i]);
  return g;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    if (v >= T(0)) {
      y[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      y[i] = e / (T(1) + e);
    }
  }
  return y;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& grad_out) {
  Tensor<T> g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i] * (T(1) - y[i]);
  return g;
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    y[i] = std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v)));
  }
  return y;
}

template <typename T>
Tensor<T> softplus_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  Tensor<T> s = sigmoid(x);
  for (std::size_t i = 0; i < x.size(); ++i) s[i] *= grad_out[i];
  return s;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw std::invalid_argument("concat_channels: incompatible " + shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  }
  Tensor<T> out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.data(), a.data() + a.size(), out.data());
  std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int first_channels) {
  if (x.rank() != 3 || first_channels <= 0 || first_channels >= x.dim(0)) {
    throw std::invalid_argument("split_channels: bad split of " + shape_str(x.shape()));
  }
  const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
  Tensor<T> a({first_channels, x.dim(1), x.dim(2)});
  Tensor<T> b({x.dim(0) - first_channels, x.dim(1), x.dim(2)});
  std::copy(x.data(), x.data() + a.size(), a.data());
  std::copy(x.data() + first_channels * plane, x.data() + x.size(), b.data());
  return {std::move(a), std::move(b)};
}

template <typename T>
T sum(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.values()) acc += v;
  return acc;
}

template <typename T>
T mean(const Tensor<T>& x) {
  return sum(x) / static_cast<T>(x.size());
}

#define AVS_INSTANTIATE_OPS(T)                                                                                  \
  template void gemm_nn<T>(int, int, int, const T*, const T*, T*);                                              \
  template void gemm_tn<T>(int, int, int, const T*, const T*, T*);                                              \
  template void gemm_nt<T>(int, int, int, const T*, const T*, T*);                                              \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);                 \
  template Conv2dGrads<T> conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int,     \
                                             bool);                                                             \
  template Tensor<T> softmax<T>(const Tensor<T>&, int);                                                         \
  template Tensor<T> softmax_backward<T>(const Tensor<T>&, const Tensor<T>&, int);                              \
  template Tensor<T> bilinear_resize<T>(const Tensor<T>&, int, int);                                            \
  template Tensor<T> bilinear_resize_backward<T>(const Tensor<T>&, int, int);                                   \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                           \
  template LinearGrads<T> linear_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                                 \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> elu<T>(const Tensor<T>&);                                                                  \
  template Tensor<T> elu_backward<T>(const Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                                              \
  template Tensor<T> sigmoid_backward<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> softplus<T>(const Tensor<T>&);                                                             \
  template Tensor<T> softplus_backward<T>(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&);                                    \
  template std::pair<Tensor<T>, Tensor<T>> split_channels<T>(const Tensor<T>&, int);                            \
  template T sum<T>(const Tensor<T>&);                                                                          \
  template T mean<T>(const Tensor<T>&);

AVS_INSTANTIATE_OPS(float)
AVS_INSTANTIATE_OPS(double)

}  // namespace avs
