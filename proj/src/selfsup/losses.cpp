#include "avs/selfsup/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace avs::selfsup {

namespace {

int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

// 3x3 box mean with reflection padding on one H x W plane.
void box(const double* in, double* out, int H, int W) {
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const double* row = in + static_cast<std::size_t>(reflect(y + dy, H)) * W;
        for (int dx = -1; dx <= 1; ++dx) acc += row[reflect(x + dx, W)];
      }
      out[static_cast<std::size_t>(y) * W + x] = acc / 9.0;
    }
}

// Adjoint of box: scatters each output gradient to its nine reflected inputs.
void box_adjoint(const double* g, double* out, int H, int W) {
  std::fill(out, out + static_cast<std::size_t>(H) * W, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double v = g[static_cast<std::size_t>(y) * W + x] / 9.0;
      for (int dy = -1; dy <= 1; ++dy) {
        double* row = out + static_cast<std::size_t>(reflect(y + dy, H)) * W;
        for (int dx = -1; dx <= 1; ++dx) row[reflect(x + dx, W)] += v;
      }
    }
}

struct Stats {
  std::vector<double> mx, my, sx, sy, sxy;
};

template <typename T>
Stats plane_stats(const T* x, const T* y, int H, int W) {
  const std::size_t n = static_cast<std::size_t>(H) * W;
  std::vector<double> xs(n), ys(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[i];
    ys[i] = y[i];
    xx[i] = xs[i] * xs[i];
    yy[i] = ys[i] * ys[i];
    xy[i] = xs[i] * ys[i];
  }
  Stats s;
  s.mx.resize(n);
  s.my.resize(n);
  s.sx.resize(n);
  s.sy.resize(n);
  s.sxy.resize(n);
  box(xs.data(), s.mx.data(), H, W);
  box(ys.data(), s.my.data(), H, W);
  box(xx.data(), s.sx.data(), H, W);
  box(yy.data(), s.sy.data(), H, W);
  box(xy.data(), s.sxy.data(), H, W);
  for (std::size_t i = 0; i < n; ++i) {
    s.sx[i] -= s.mx[i] * s.mx[i];
    s.sy[i] -= s.my[i] * s.my[i];
    s.sxy[i] -= s.mx[i] * s.my[i];
  }
  return s;
}

template <typename T>
void check_images(const Tensor<T>& x, const Tensor<T>& y, const char* what) {
  x.require_same_shape(y, what);
  if (x.rank() != 3 || x.dim(1) < 2 || x.dim(2) < 2)
    throw std::invalid_argument(std::string(what) + ": expected C x H x W with H, W >= 2, got " + shape_str(x.shape()));
}

}  // namespace

template <typename T>
Tensor<T> ssim(const Tensor<T>& x, const Tensor<T>& y) {
  check_images(x, y, "ssim");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  Tensor<T> out(x.shape());
  for (int c = 0; c < C; ++c) {
    const Stats s = plane_stats(x.data() + c * n, y.data() + c * n, H, W);
    for (std::size_t i = 0; i < n; ++i) {
      const double num = (2 * s.mx[i] * s.my[i] + kSsimC1) * (2 * s.sxy[i] + kSsimC2);
      const double den = (s.mx[i] * s.mx[i] + s.my[i] * s.my[i] + kSsimC1) * (s.sx[i] + s.sy[i] + kSsimC2);
      out[c * n + i] = static_cast<T>(num / den);
    }
  }
  return out;
}

template <typename T>
Tensor<T> ssim_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& grad) {
  check_images(x, y, "ssim_backward");
  x.require_same_shape(grad, "ssim_backward");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  Tensor<T> out(x.shape());
  std::vector<double> ga(n), gb(n), gc(n), ta(n), tb(n), tc(n);
  for (int c = 0; c < C; ++c) {
    const T* xp = x.data() + c * n;
    const T* yp = y.data() + c * n;
    const Stats s = plane_stats(xp, yp, H, W);
    for (std::size_t i = 0; i < n; ++i) {
      const double mx = s.mx[i], my = s.my[i];
      const double A1 = 2 * mx * my + kSsimC1, A2 = 2 * s.sxy[i] + kSsimC2;
      const double B1 = mx * mx + my * my + kSsimC1, B2 = s.sx[i] + s.sy[i] + kSsimC2;
      const double S = A1 * A2 / (B1 * B2);
      const double g = grad[c * n + i];
      // Partials w.r.t. the local statistics mu_x, sigma_x^2, sigma_xy.
      const double d_mx = S * (2 * my / A1 - 2 * mx / B1);
      const double d_sx = -S / B2;
      const double d_sxy = 2 * S / A2;
      // Through mean(x), mean(x^2), mean(xy).
      ga[i] = g * (d_mx - 2 * mx * d_sx - my * d_sxy);
      gb[i] = g * d_sx;
      gc[i] = g * d_sxy;
    }
    box_adjoint(ga.data(), ta.data(), H, W);
    box_adjoint(gb.data(), tb.data(), H, W);
    box_adjoint(gc.data(), tc.data(), H, W);
    for (std::size_t i = 0; i < n; ++i)
      out[c * n + i] = static_cast<T>(ta[i] + 2.0 * static_cast<double>(xp[i]) * tb[i] + static_cast<double>(yp[i]) * tc[i]);
  }
  return out;
}

template <typename T>
Tensor<T> photometric_error(const Tensor<T>& target, const Tensor<T>& synthesized, const PhotometricParams& p) {
  const Tensor<T> s = ssim(synthesized, target);
  const int C = target.dim(0), H = target.dim(1), W = target.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  Tensor<T> out({H, W});
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (int c = 0; c < C; ++c) {
      const std::size_t k = c * n + i;
      acc += p.beta * std::abs(static_cast<double>(target[k]) - static_cast<double>(synthesized[k])) +
             p.gamma * 0.5 * (1.0 - static_cast<double>(s[k]));
    }
    out[i] = static_cast<T>(acc / C);
  }
  return out;
}

template <typename T>
Tensor<T> photometric_error_backward(const Tensor<T>& target, const Tensor<T>& synthesized, const Tensor<T>& grad,
                                     const PhotometricParams& p) {
  const int C = target.dim(0), H = target.dim(1), W = target.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  if (grad.size() != n) throw std::invalid_argument("photometric_error_backward: gradient must be H x W");
  Tensor<T> gs(target.shape());
  for (int c = 0; c < C; ++c)
    for (std::size_t i = 0; i < n; ++i) gs[c * n + i] = static_cast<T>(-p.gamma * 0.5 / C * static_cast<double>(grad[i]));
  Tensor<T> out = ssim_backward(synthesized, target, gs);
  for (int c = 0; c < C; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = c * n + i;
      const double d = static_cast<double>(synthesized[k]) - static_cast<double>(target[k]);
      const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      out[k] += static_cast<T>(p.beta / C * sign * static_cast<double>(grad[i]));
    }
  return out;
}

template <typename T>
MinLoss<T> photometric_loss(const Tensor<T>& target, const std::vector<Tensor<T>>& synthesized,
                            const PhotometricParams& p) {
  if (synthesized.empty()) throw std::invalid_argument("photometric_loss: need at least one source");
  MinLoss<T> out;
  for (std::size_t s = 0; s < synthesized.size(); ++s) {
    const Tensor<T> e = photometric_error(target, synthesized[s], p);
    if (s == 0) {
      out.loss = e;
      out.source.assign(e.size(), 0);
      continue;
    }
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] < out.loss[i]) {
        out.loss[i] = e[i];
        out.source[i] = static_cast<int>(s);
      }
  }
  return out;
}

namespace {

template <typename T>
void check_smooth(const Tensor<T>& disp, const Tensor<T>& rgb) {
  const int h = disp.dim(-2), w = disp.dim(-1);
  if (rgb.rank() != 3 || rgb.dim(1) != h || rgb.dim(2) != w || disp.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("smoothness_loss: disparity " + shape_str(disp.shape()) + " vs image " +
                                shape_str(rgb.shape()));
}

template <typename T>
double image_grad(const Tensor<T>& rgb, std::size_t a, std::size_t b) {
  const int C = rgb.dim(0);
  const std::size_t n = static_cast<std::size_t>(rgb.dim(1)) * rgb.dim(2);
  double acc = 0;
  for (int c = 0; c < C; ++c) acc += std::abs(static_cast<double>(rgb[c * n + a]) - static_cast<double>(rgb[c * n + b]));
  return acc / C;
}

}  // namespace

template <typename T>
double smoothness_loss(const Tensor<T>& disp, const Tensor<T>& rgb) {
  check_smooth(disp, rgb);
  const int h = disp.dim(-2), w = disp.dim(-1);
  double m = 0;
  for (T v : disp.values()) m += v;
  m /= static_cast<double>(disp.size());
  double lx = 0, ly = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const std::size_t a = static_cast<std::size_t>(y) * w + x, b = a + 1;
      lx += std::abs(static_cast<double>(disp[b]) - static_cast<double>(disp[a])) / m * std::exp(-image_grad(rgb, a, b));
    }
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t a = static_cast<std::size_t>(y) * w + x, b = a + w;
      ly += std::abs(static_cast<double>(disp[b]) - static_cast<double>(disp[a])) / m * std::exp(-image_grad(rgb, a, b));
    }
  double out = 0;
  if (w > 1) out += lx / (static_cast<double>(h) * (w - 1));
  if (h > 1) out += ly / (static_cast<double>(h - 1) * w);
  return out;
}

template <typename T>
Tensor<T> smoothness_loss_backward(const Tensor<T>& disp, const Tensor<T>& rgb, double grad) {
  check_smooth(disp, rgb);
  const int h = disp.dim(-2), w = disp.dim(-1);
  const std::size_t N = disp.size();
  double m = 0;
  for (T v : disp.values()) m += v;
  m /= static_cast<double>(N);
  std::vector<double> g(N, 0.0);  // dL/d(d*)
  auto edge = [&](std::size_t a, std::size_t b, double scale) {
    const double d = (static_cast<double>(disp[b]) - static_cast<double>(disp[a])) / m;
    const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    const double v = scale * sign * std::exp(-image_grad(rgb, a, b));
    g[b] += v;
    g[a] -= v;
  };
  if (w > 1) {
    const double sx = grad / (static_cast<double>(h) * (w - 1));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + 1 < w; ++x) edge(static_cast<std::size_t>(y) * w + x, static_cast<std::size_t>(y) * w + x + 1, sx);
  }
  if (h > 1) {
    const double sy = grad / (static_cast<double>(h - 1) * w);
    for (int y = 0; y + 1 < h; ++y)
      for (int x = 0; x < w; ++x) edge(static_cast<std::size_t>(y) * w + x, static_cast<std::size_t>(y + 1) * w + x, sy);
  }
  double gd = 0;
  for (std::size_t i = 0; i < N; ++i) gd += g[i] * static_cast<double>(disp[i]);
  Tensor<T> out(disp.shape());
  for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<T>(g[i] / m - gd / (m * m * static_cast<double>(N)));
  return out;
}

template <typename T>
Tensor<T> auto_mask(const Tensor<T>& target, const std::vector<Tensor<T>>& raw_sources,
                    const std::vector<Tensor<T>>& synthesized, const PhotometricParams& p) {
  const auto reproj = photometric_loss(target, synthesized, p);
  const auto ident = photometric_loss(target, raw_sources, p);
  Tensor<T> mu(reproj.loss.shape());
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = reproj.loss[i] < ident.loss[i] ? T(1) : T(0);
  return mu;
}

double joint_loss(const std::vector<double>& pe, const std::vector<double>& smooth, const PhotometricParams& p) {
  if (pe.empty() || pe.size() != smooth.size()) throw std::invalid_argument("joint_loss: need matching per-scale terms");
  double acc = 0;
  for (std::size_t i = 0; i < pe.size(); ++i) acc += pe[i] + p.lambda_smooth * smooth[i];
  return acc / static_cast<double>(pe.size());
}

#define AVS_INSTANTIATE(T)                                                                                      \
  template Tensor<T> ssim(const Tensor<T>&, const Tensor<T>&);                                                 \
  template Tensor<T> ssim_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> photometric_error(const Tensor<T>&, const Tensor<T>&, const PhotometricParams&);          \
  template Tensor<T> photometric_error_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                                const PhotometricParams&);                                     \
  template MinLoss<T> photometric_loss(const Tensor<T>&, const std::vector<Tensor<T>>&, const PhotometricParams&); \
  template double smoothness_loss(const Tensor<T>&, const Tensor<T>&);                                         \
  template Tensor<T> smoothness_loss_backward(const Tensor<T>&, const Tensor<T>&, double);                     \
  template Tensor<T> auto_mask(const Tensor<T>&, const std::vector<Tensor<T>>&, const std::vector<Tensor<T>>&, \
                               const PhotometricParams&);
AVS_INSTANTIATE(float)
AVS_INSTANTIATE(double)
#undef AVS_INSTANTIATE

}  // namespace avs::selfsup
