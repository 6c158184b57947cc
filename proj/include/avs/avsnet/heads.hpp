#pragma once

#include <cstdint>
#include <vector>

#include "avs/core/tensor.hpp"

namespace avs::avsnet {

// ---- cross-modal attention ------------------------------------------------

template <typename T>
struct AttentionCache {
  Tensor<T> q, k, v;           // N x E, M x E, M x E
  std::vector<Tensor<T>> probs;  // per head, N x M
};

/// Multi-head attention of visual queries over audio keys/values, plus the
/// visual skip: out = concat_h softmax(Q_h K_h^T / sqrt(d_k)) V_h + f_v.
/// Projections are E x E without bias; head h owns columns [h d_k, (h+1) d_k).
template <typename T>
Tensor<T> cross_modal_attention(const Tensor<T>& fv, const Tensor<T>& fa, const Tensor<T>& wq, const Tensor<T>& wk,
                                const Tensor<T>& wv, int heads, AttentionCache<T>* cache = nullptr);

template <typename T>
struct AttentionGrads {
  Tensor<T> fv, fa, wq, wk, wv;
};

template <typename T>
AttentionGrads<T> cross_modal_attention_backward(const Tensor<T>& fv, const Tensor<T>& fa, const Tensor<T>& wq,
                                                 const Tensor<T>& wk, const Tensor<T>& wv, int heads,
                                                 const AttentionCache<T>& cache, const Tensor<T>& grad_out);

// ---- seed bins --------------------------------------------------------------

template <typename T>
struct BinPartition {
  Tensor<T> widths;   // K, positive, sum d_max - d_min
  Tensor<T> centers;  // K, increasing
  Tensor<T> probs;    // softmax of the width logits
};

/// Widths = softmax(logits) * (d_max - d_min); centers from the cumulative sum.
template <typename T>
BinPartition<T> bins_from_logits(const Tensor<T>& logits, double d_min, double d_max);

/// dL/dlogits given dL/dcenters (and optionally dL/dwidths).
template <typename T>
Tensor<T> bins_from_logits_backward(const BinPartition<T>& bins, const Tensor<T>& grad_centers,
                                    const Tensor<T>& grad_widths, double d_min, double d_max);

template <typename T>
struct SeedBins {
  Tensor<T> pooled;  // E
  Tensor<T> logits;  // K
  BinPartition<T> bins;
};

/// Mean-pools fused tokens (N x E), maps them through w (E x K) + b, and
/// turns the logits into a bin partition.
template <typename T>
SeedBins<T> seed_bins(const Tensor<T>& fused, const Tensor<T>& w, const Tensor<T>& b, double d_min, double d_max);

template <typename T>
struct SeedBinsGrads {
  Tensor<T> fused, w, b;
};

template <typename T>
SeedBinsGrads<T> seed_bins_backward(const Tensor<T>& fused, const Tensor<T>& w, const SeedBins<T>& seed,
                                    const Tensor<T>& grad_centers, double d_min, double d_max);

// ---- attractors -------------------------------------------------------------

/// Pull of one attractor on one center: (a - c) / (1 + alpha |a - c|^gamma).
double attractor_pull(double a, double c, double alpha, int gamma);
/// d pull / d a.
double attractor_pull_derivative(double a, double c, double alpha, int gamma);

template <typename T>
struct AttractorResult {
  Tensor<T> centers;            // K x H x W, sorted per pixel and clamped
  Tensor<T> moved;              // K x H x W, before sorting and clamping
  std::vector<std::int32_t> order;  // per pixel, source index of each sorted slot
};

/// Moves every center by the summed pull of the per-pixel attractors
/// (n x H x W), then re-sorts and clamps to [d_min, d_max].
template <typename T>
AttractorResult<T> attractor_adjust(const Tensor<T>& centers, const Tensor<T>& attractors, double alpha, int gamma,
                                    double d_min, double d_max);

template <typename T>
struct AttractorGrads {
  Tensor<T> centers, attractors;
};

template <typename T>
AttractorGrads<T> attractor_adjust_backward(const Tensor<T>& centers, const Tensor<T>& attractors, double alpha,
                                            int gamma, double d_min, double d_max, const AttractorResult<T>& result,
                                            const Tensor<T>& grad_out);

// ---- log-binomial and depth -----------------------------------------------

/// Per-pixel distribution over K bins:
/// softmax_k([k ln q + (K-1-k) ln(1-q) + ln C(K-1, k)] / t).
template <typename T>
Tensor<T> log_binomial_probs(const Tensor<T>& q, const Tensor<T>& t, int K);

template <typename T>
struct LogBinomialGrads {
  Tensor<T> q, t;
};

template <typename T>
LogBinomialGrads<T> log_binomial_backward(const Tensor<T>& q, const Tensor<T>& t, const Tensor<T>& probs,
                                          const Tensor<T>& grad_probs);

/// sum_k p_k c_k per pixel; centers are K x H x W.
template <typename T>
Tensor<T> pseudo_depth(const Tensor<T>& probs, const Tensor<T>& centers);

template <typename T>
struct PseudoDepthGrads {
  Tensor<T> probs, centers;
};

template <typename T>
PseudoDepthGrads<T> pseudo_depth_backward(const Tensor<T>& probs, const Tensor<T>& centers,
                                          const Tensor<T>& grad_depth);

// ---- loss -------------------------------------------------------------------

struct SiLossParams {
  double alpha = 10.0;
  double lambda_si = 0.85;
};

/// alpha * sqrt(mean g^2 - lambda (mean g)^2), g = ln pred - ln gt over
/// pixels with gt > 0. The radicand is clamped at zero.
template <typename T>
double si_loss(const Tensor<T>& pred, const Tensor<T>& gt, const SiLossParams& params = {});

template <typename T>
Tensor<T> si_loss_backward(const Tensor<T>& pred, const Tensor<T>& gt, const SiLossParams& params = {});

}  // namespace avs::avsnet
