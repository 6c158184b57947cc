#include "avs/avsnet/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "avs/core/ops.hpp"

namespace avs::avsnet {

namespace {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> c({a.dim(0), b.dim(1)});
  gemm_nn(a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(), c.data());
  return c;
}

template <typename T>
void check_attention(const Tensor<T>& fv, const Tensor<T>& fa, const Tensor<T>& wq, const Tensor<T>& wk,
                     const Tensor<T>& wv, int heads) {
  if (fv.rank() != 2 || fa.rank() != 2)
    throw std::invalid_argument("cross_modal_attention: tokens must be N x E, got " + shape_str(fv.shape()) + " and " +
                                shape_str(fa.shape()));
  const int E = fv.dim(1);
  if (fa.dim(1) != E)
    throw std::invalid_argument("cross_modal_attention: embedding sizes differ (" + std::to_string(E) + " vs " +
                                std::to_string(fa.dim(1)) + ")");
  if (fa.dim(0) != fv.dim(0))
    throw std::invalid_argument("cross_modal_attention: token counts differ (" + std::to_string(fv.dim(0)) + " vs " +
                                std::to_string(fa.dim(0)) + ")");
  for (const Tensor<T>* w : {&wq, &wk, &wv})
    if (w->shape() != Shape{E, E})
      throw std::invalid_argument("cross_modal_attention: projection " + shape_str(w->shape()) + " is not E x E");
  if (heads < 1 || E % heads != 0)
    throw std::invalid_argument("cross_modal_attention: " + std::to_string(E) + " not divisible by " +
                                std::to_string(heads) + " heads");
}

}  // namespace

template <typename T>
Tensor<T> cross_modal_attention(const Tensor<T>& fv, const Tensor<T>& fa, const Tensor<T>& wq, const Tensor<T>& wk,
                                const Tensor<T>& wv, int heads, AttentionCache<T>* cache) {
  check_attention(fv, fa, wq, wk, wv, heads);
  const int N = fv.dim(0), M = fa.dim(0), E = fv.dim(1), dk = E / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));
  AttentionCache<T> local;
  AttentionCache<T>& c = cache ? *cache : local;
  c.q = matmul(fv, wq);
  c.k = matmul(fa, wk);
  c.v = matmul(fa, wv);
  c.probs.assign(heads, Tensor<T>{});
  Tensor<T> out = fv;
  for (int h = 0; h < heads; ++h) {
    Tensor<T> s({N, M});
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < M; ++j) {
        double acc = 0.0;
        for (int d = h * dk; d < (h + 1) * dk; ++d) acc += static_cast<double>(c.q.at(i, d)) * c.k.at(j, d);
        s.at(i, j) = static_cast<T>(acc * inv_scale);
      }
    c.probs[h] = softmax(s, 1);
    const Tensor<T>& a = c.probs[h];
    for (int i = 0; i < N; ++i)
      for (int d = h * dk; d < (h + 1) * dk; ++d) {
        double acc = 0.0;
        for (int j = 0; j < M; ++j) acc += static_cast<double>(a.at(i, j)) * c.v.at(j, d);
        out.at(i, d) += static_cast<T>(acc);
      }
  }
  return out;
}

template <typename T>
AttentionGrads<T> cross_modal_attention_backward(const Tensor<T>& fv, const Tensor<T>& fa, const Tensor<T>& wq,
                                                 const Tensor<T>& wk, const Tensor<T>& wv, int heads,
                                                 const AttentionCache<T>& cache, const Tensor<T>& grad_out) {
  check_attention(fv, fa, wq, wk, wv, heads);
  fv.require_same_shape(grad_out, "cross_modal_attention_backward");
  const int N = fv.dim(0), M = fa.dim(0), E = fv.dim(1), dk = E / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Tensor<T> gq({N, E}), gk({M, E}), gv({M, E});
  for (int h = 0; h < heads; ++h) {
    const Tensor<T>& a = cache.probs[h];
    Tensor<T> ga({N, M});
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < M; ++j) {
        double acc = 0.0;
        for (int d = h * dk; d < (h + 1) * dk; ++d) acc += static_cast<double>(grad_out.at(i, d)) * cache.v.at(j, d);
        ga.at(i, j) = static_cast<T>(acc);
      }
    for (int j = 0; j < M; ++j)
      for (int d = h * dk; d < (h + 1) * dk; ++d) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += static_cast<double>(a.at(i, j)) * grad_out.at(i, d);
        gv.at(j, d) = static_cast<T>(acc);
      }
    Tensor<T> gs = softmax_backward(a, ga, 1);
    for (auto& x : gs.values()) x = static_cast<T>(x * inv_scale);
    for (int i = 0; i < N; ++i)
      for (int d = h * dk; d < (h + 1) * dk; ++d) {
        double acc = 0.0;
        for (int j = 0; j < M; ++j) acc += static_cast<double>(gs.at(i, j)) * cache.k.at(j, d);
        gq.at(i, d) = static_cast<T>(acc);
      }
    for (int j = 0; j < M; ++j)
      for (int d = h * dk; d < (h + 1) * dk; ++d) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += static_cast<double>(gs.at(i, j)) * cache.q.at(i, d);
        gk.at(j, d) = static_cast<T>(acc);
      }
  }
  AttentionGrads<T> g;
  g.wq = Tensor<T>({E, E});
  g.wk = Tensor<T>({E, E});
  g.wv = Tensor<T>({E, E});
  gemm_tn(E, E, N, fv.data(), gq.data(), g.wq.data());
  gemm_tn(E, E, M, fa.data(), gk.data(), g.wk.data());
  gemm_tn(E, E, M, fa.data(), gv.data(), g.wv.data());
  g.fv = grad_out;
  gemm_nt(N, E, E, gq.data(), wq.data(), g.fv.data());
  g.fa = Tensor<T>({M, E});
  gemm_nt(M, E, E, gk.data(), wk.data(), g.fa.data());
  gemm_nt(M, E, E, gv.data(), wv.data(), g.fa.data());
  return g;
}

template <typename T>
BinPartition<T> bins_from_logits(const Tensor<T>& logits, double d_min, double d_max) {
  if (logits.rank() != 1 || logits.size() < 2) throw std::invalid_argument("bins_from_logits: need K >= 2 logits");
  if (!(d_min < d_max)) throw std::invalid_argument("bins_from_logits: need d_min < d_max");
  const double span = d_max - d_min;
  BinPartition<T> b;
  b.probs = softmax(logits, 0);
  const int K = logits.dim(0);
  b.widths = Tensor<T>({K});
  b.centers = Tensor<T>({K});
  double edge = d_min;
  for (int k = 0; k < K; ++k) {
    const double w = span * static_cast<double>(b.probs[k]);
    b.widths[k] = static_cast<T>(w);
    b.centers[k] = static_cast<T>(edge + 0.5 * w);
    edge += w;
  }
  return b;
}

template <typename T>
Tensor<T> bins_from_logits_backward(const BinPartition<T>& bins, const Tensor<T>& grad_centers,
                                    const Tensor<T>& grad_widths, double d_min, double d_max) {
  const int K = bins.centers.dim(0);
  const double span = d_max - d_min;
  Tensor<T> gp({K});
  double tail = 0.0;  // sum of grad_centers over k > j
  for (int j = K - 1; j >= 0; --j) {
    double gw = tail + 0.5 * static_cast<double>(grad_centers[j]);
    if (!grad_widths.empty()) gw += static_cast<double>(grad_widths[j]);
    gp[j] = static_cast<T>(gw * span);
    tail += static_cast<double>(grad_centers[j]);
  }
  return softmax_backward(bins.probs, gp, 0);
}

template <typename T>
SeedBins<T> seed_bins(const Tensor<T>& fused, const Tensor<T>& w, const Tensor<T>& b, double d_min, double d_max) {
  if (fused.rank() != 2 || w.rank() != 2 || w.dim(0) != fused.dim(1))
    throw std::invalid_argument("seed_bins: tokens " + shape_str(fused.shape()) + " incompatible with weight " +
                                shape_str(w.shape()));
  const int N = fused.dim(0), E = fused.dim(1);
  SeedBins<T> s;
  s.pooled = Tensor<T>({1, E});
  for (int e = 0; e < E; ++e) {
    double acc = 0.0;
    for (int n = 0; n < N; ++n) acc += static_cast<double>(fused.at(n, e));
    s.pooled[e] = static_cast<T>(acc / N);
  }
  s.logits = linear(s.pooled, w, b);
  s.logits.reshape({w.dim(1)});
  s.bins = bins_from_logits(s.logits, d_min, d_max);
  return s;
}

template <typename T>
SeedBinsGrads<T> seed_bins_backward(const Tensor<T>& fused, const Tensor<T>& w, const SeedBins<T>& seed,
                                    const Tensor<T>& grad_centers, double d_min, double d_max) {
  Tensor<T> gl = bins_from_logits_backward(seed.bins, grad_centers, Tensor<T>{}, d_min, d_max);
  gl.reshape({1, w.dim(1)});
  auto lg = linear_backward(seed.pooled, w, gl);
  const int N = fused.dim(0), E = fused.dim(1);
  SeedBinsGrads<T> g{Tensor<T>({N, E}), std::move(lg.w), std::move(lg.b)};
  for (int n = 0; n < N; ++n)
    for (int e = 0; e < E; ++e) g.fused.at(n, e) = static_cast<T>(static_cast<double>(lg.x[e]) / N);
  return g;
}

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

double attractor_pull(double a, double c, double alpha, int gamma) {
  const double dx = a - c;
  return dx / (1.0 + alpha * ipow(std::abs(dx), gamma));
}

double attractor_pull_derivative(double a, double c, double alpha, int gamma) {
  const double p = ipow(std::abs(a - c), gamma);
  const double den = 1.0 + alpha * p;
  return (1.0 + alpha * (1.0 - gamma) * p) / (den * den);
}

template <typename T>
AttractorResult<T> attractor_adjust(const Tensor<T>& centers, const Tensor<T>& attractors, double alpha, int gamma,
                                    double d_min, double d_max) {
  if (centers.rank() != 3 || attractors.rank() != 3 || centers.dim(1) != attractors.dim(1) ||
      centers.dim(2) != attractors.dim(2))
    throw std::invalid_argument("attractor_adjust: centers " + shape_str(centers.shape()) + " vs attractors " +
                                shape_str(attractors.shape()));
  if (gamma < 0) throw std::invalid_argument("attractor_adjust: gamma must be non-negative");
  const int K = centers.dim(0), A = attractors.dim(0);
  const std::size_t P = static_cast<std::size_t>(centers.dim(1)) * centers.dim(2);
  AttractorResult<T> r{Tensor<T>(centers.shape()), Tensor<T>(centers.shape()), std::vector<std::int32_t>(P * K)};
  std::vector<double> delta(P);
  for (int k = 0; k < K; ++k) {
    const T* c = centers.data() + k * P;
    std::fill(delta.begin(), delta.end(), 0.0);
    for (int j = 0; j < A; ++j) {
      const T* a = attractors.data() + j * P;
      for (std::size_t p = 0; p < P; ++p) delta[p] += attractor_pull(a[p], c[p], alpha, gamma);
    }
    for (std::size_t p = 0; p < P; ++p) r.moved[k * P + p] = static_cast<T>(static_cast<double>(c[p]) + delta[p]);
  }
  // pixel-major copy so each per-pixel sort reads contiguous memory
  std::vector<T> keys(P * K);
  for (int k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p) keys[p * K + k] = r.moved[k * P + p];
  for (std::size_t p = 0; p < P; ++p) {
    T* key = keys.data() + p * K;
    std::int32_t* idx = r.order.data() + p * K;
    // stable insertion sort; inputs are usually already ordered
    for (int k = 0; k < K; ++k) idx[k] = k;
    for (int k = 1; k < K; ++k) {
      const T v = key[k];
      const std::int32_t id = idx[k];
      int m = k;
      while (m > 0 && v < key[m - 1]) {
        key[m] = key[m - 1];
        idx[m] = idx[m - 1];
        --m;
      }
      key[m] = v;
      idx[m] = id;
    }
  }
  for (int k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p)
      r.centers[k * P + p] = static_cast<T>(std::clamp(static_cast<double>(keys[p * K + k]), d_min, d_max));
  return r;
}

template <typename T>
AttractorGrads<T> attractor_adjust_backward(const Tensor<T>& centers, const Tensor<T>& attractors, double alpha,
                                            int gamma, double d_min, double d_max, const AttractorResult<T>& result,
                                            const Tensor<T>& grad_out) {
  const int K = centers.dim(0), A = attractors.dim(0);
  const std::size_t P = static_cast<std::size_t>(centers.dim(1)) * centers.dim(2);
  AttractorGrads<T> g{Tensor<T>(centers.shape()), Tensor<T>(attractors.shape())};
  // route sorted-output gradients back to the pre-sort slots (pixel-major);
  // clamped outputs pass no gradient
  std::vector<double> gm(P * K);
  for (int k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p) {
      const double c = static_cast<double>(result.centers[k * P + p]);
      if (c > d_min && c < d_max) gm[p * K + result.order[p * K + k]] = static_cast<double>(grad_out[k * P + p]);
    }
  std::vector<double> gk(P), dc(P);
  for (int k = 0; k < K; ++k) {
    const T* c = centers.data() + k * P;
    for (std::size_t p = 0; p < P; ++p) gk[p] = gm[p * K + k];
    std::fill(dc.begin(), dc.end(), 1.0);
    for (int j = 0; j < A; ++j) {
      const T* a = attractors.data() + j * P;
      T* ga = g.attractors.data() + j * P;
      for (std::size_t p = 0; p < P; ++p) {
        const double d = attractor_pull_derivative(a[p], c[p], alpha, gamma);
        dc[p] -= d;
        ga[p] += static_cast<T>(gk[p] * d);
      }
    }
    T* gc = g.centers.data() + k * P;
    for (std::size_t p = 0; p < P; ++p) gc[p] = static_cast<T>(gk[p] * dc[p]);
  }
  return g;
}

template <typename T>
Tensor<T> log_binomial_probs(const Tensor<T>& q, const Tensor<T>& t, int K) {
  q.require_same_shape(t, "log_binomial_probs");
  if (K < 2) throw std::invalid_argument("log_binomial_probs: need K >= 2");
  Shape shape{K};
  for (int d : q.shape()) shape.push_back(d);
  const std::size_t P = q.size();
  std::vector<double> log_binom(K);
  for (int k = 0; k < K; ++k) log_binom[k] = std::lgamma(K) - std::lgamma(k + 1.0) - std::lgamma(K - k);
  Tensor<T> logits(shape);
  for (std::size_t p = 0; p < P; ++p) {
    const double qv = static_cast<double>(q[p]), tv = static_cast<double>(t[p]);
    if (!(qv > 0.0 && qv < 1.0)) throw std::invalid_argument("log_binomial_probs: q must lie in (0, 1)");
    if (!(tv > 0.0)) throw std::invalid_argument("log_binomial_probs: t must be positive");
    const double lq = std::log(qv), l1q = std::log1p(-qv);
    for (int k = 0; k < K; ++k) logits[k * P + p] = static_cast<T>((k * lq + (K - 1 - k) * l1q + log_binom[k]) / tv);
  }
  return softmax(logits, 0);
}

template <typename T>
LogBinomialGrads<T> log_binomial_backward(const Tensor<T>& q, const Tensor<T>& t, const Tensor<T>& probs,
                                          const Tensor<T>& grad_probs) {
  const int K = probs.dim(0);
  const std::size_t P = q.size();
  const Tensor<T> gl = softmax_backward(probs, grad_probs, 0);
  std::vector<double> log_binom(K);
  for (int k = 0; k < K; ++k) log_binom[k] = std::lgamma(K) - std::lgamma(k + 1.0) - std::lgamma(K - k);
  LogBinomialGrads<T> g{Tensor<T>(q.shape()), Tensor<T>(t.shape())};
  for (std::size_t p = 0; p < P; ++p) {
    const double qv = static_cast<double>(q[p]), tv = static_cast<double>(t[p]);
    const double lq = std::log(qv), l1q = std::log1p(-qv);
    double gq = 0.0, gt = 0.0;
    for (int k = 0; k < K; ++k) {
      const double glk = static_cast<double>(gl[k * P + p]);
      gq += glk * (k / qv - (K - 1 - k) / (1.0 - qv)) / tv;
      gt -= glk * (k * lq + (K - 1 - k) * l1q + log_binom[k]) / (tv * tv);
    }
    g.q[p] = static_cast<T>(gq);
    g.t[p] = static_cast<T>(gt);
  }
  return g;
}

template <typename T>
Tensor<T> pseudo_depth(const Tensor<T>& probs, const Tensor<T>& centers) {
  probs.require_same_shape(centers, "pseudo_depth");
  const int K = probs.dim(0);
  Shape shape(probs.shape().begin() + 1, probs.shape().end());
  Tensor<T> d(shape);
  const std::size_t P = d.size();
  for (std::size_t p = 0; p < P; ++p) {
    double acc = 0.0;
    for (int k = 0; k < K; ++k) acc += static_cast<double>(probs[k * P + p]) * centers[k * P + p];
    d[p] = static_cast<T>(acc);
  }
  return d;
}

template <typename T>
PseudoDepthGrads<T> pseudo_depth_backward(const Tensor<T>& probs, const Tensor<T>& centers,
                                          const Tensor<T>& grad_depth) {
  const int K = probs.dim(0);
  const std::size_t P = grad_depth.size();
  PseudoDepthGrads<T> g{Tensor<T>(probs.shape()), Tensor<T>(centers.shape())};
  for (int k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p) {
      g.probs[k * P + p] = grad_depth[p] * centers[k * P + p];
      g.centers[k * P + p] = grad_depth[p] * probs[k * P + p];
    }
  return g;
}

namespace {

template <typename T>
void log_ratios(const Tensor<T>& pred, const Tensor<T>& gt, std::vector<double>& g, std::vector<std::size_t>& idx) {
  pred.require_same_shape(gt, "si_loss");
  g.clear();
  idx.clear();
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!(gt[i] > T(0))) continue;
    if (!(pred[i] > T(0))) throw std::invalid_argument("si_loss: prediction must be positive on valid pixels");
    g.push_back(std::log(static_cast<double>(pred[i])) - std::log(static_cast<double>(gt[i])));
    idx.push_back(i);
  }
  if (g.empty()) throw std::invalid_argument("si_loss: no valid ground-truth pixels");
}

}  // namespace

template <typename T>
double si_loss(const Tensor<T>& pred, const Tensor<T>& gt, const SiLossParams& params) {
  std::vector<double> g;
  std::vector<std::size_t> idx;
  log_ratios(pred, gt, g, idx);
  const double n = static_cast<double>(g.size());
  double s = 0.0, s2 = 0.0;
  for (double v : g) {
    s += v;
    s2 += v * v;
  }
  double radicand = s2 / n - params.lambda_si * (s / n) * (s / n);
  if (radicand < 0.0) radicand = 0.0;  // NaN passes through
  return params.alpha * std::sqrt(radicand);
}

template <typename T>
Tensor<T> si_loss_backward(const Tensor<T>& pred, const Tensor<T>& gt, const SiLossParams& params) {
  std::vector<double> g;
  std::vector<std::size_t> idx;
  log_ratios(pred, gt, g, idx);
  const double n = static_cast<double>(g.size());
  double s = 0.0, s2 = 0.0;
  for (double v : g) {
    s += v;
    s2 += v * v;
  }
  const double radicand = s2 / n - params.lambda_si * (s / n) * (s / n);
  Tensor<T> out(pred.shape());
  if (!(radicand > 1e-20)) return out;
  const double scale = params.alpha / (2.0 * std::sqrt(radicand));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double dg = scale * (2.0 * g[j] / n - 2.0 * params.lambda_si * s / (n * n));
    out[idx[j]] = static_cast<T>(dg / static_cast<double>(pred[idx[j]]));
  }
  return out;
}

#define AVS_HEADS_INSTANTIATE(T)                                                                                \
  template Tensor<T> cross_modal_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,              \
                                              const Tensor<T>&, const Tensor<T>&, int, AttentionCache<T>*);      \
  template AttentionGrads<T> cross_modal_attention_backward<T>(const Tensor<T>&, const Tensor<T>&,               \
                                                               const Tensor<T>&, const Tensor<T>&,               \
                                                               const Tensor<T>&, int, const AttentionCache<T>&,  \
                                                               const Tensor<T>&);                                \
  template BinPartition<T> bins_from_logits<T>(const Tensor<T>&, double, double);                               \
  template Tensor<T> bins_from_logits_backward<T>(const BinPartition<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                                  double, double);                                              \
  template SeedBins<T> seed_bins<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double, double);       \
  template SeedBinsGrads<T> seed_bins_backward<T>(const Tensor<T>&, const Tensor<T>&, const SeedBins<T>&,        \
                                                  const Tensor<T>&, double, double);                            \
  template AttractorResult<T> attractor_adjust<T>(const Tensor<T>&, const Tensor<T>&, double, int, double,       \
                                                  double);                                                      \
  template AttractorGrads<T> attractor_adjust_backward<T>(const Tensor<T>&, const Tensor<T>&, double, int,       \
                                                          double, double, const AttractorResult<T>&,            \
                                                          const Tensor<T>&);                                    \
  template Tensor<T> log_binomial_probs<T>(const Tensor<T>&, const Tensor<T>&, int);                            \
  template LogBinomialGrads<T> log_binomial_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                                        const Tensor<T>&);                                      \
  template Tensor<T> pseudo_depth<T>(const Tensor<T>&, const Tensor<T>&);                                       \
  template PseudoDepthGrads<T> pseudo_depth_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);   \
  template double si_loss<T>(const Tensor<T>&, const Tensor<T>&, const SiLossParams&);                          \
  template Tensor<T> si_loss_backward<T>(const Tensor<T>&, const Tensor<T>&, const SiLossParams&);

AVS_HEADS_INSTANTIATE(float)
AVS_HEADS_INSTANTIATE(double)

}  // namespace avs::avsnet
