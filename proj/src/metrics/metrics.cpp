#include "avs/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avs/core/ops.hpp"

namespace avs::metrics {

std::vector<double> as_row(const MetricsReport& r) {
  return {r.abs_rel, r.sq_rel, r.rmse, r.rmse_log, r.delta1, r.delta2, r.delta3};
}

template <typename T>
MetricsReport compute_metrics(const Tensor<T>& pred_in, const Tensor<T>& gt, double max_depth) {
  if (gt.rank() != 2) throw std::invalid_argument("compute_metrics: gt must be H x W, got " + shape_str(gt.shape()));
  Tensor<T> pred = pred_in;
  if (pred.rank() == 2 && pred.shape() != gt.shape()) {
    pred.reshape({1, pred.dim(0), pred.dim(1)});
    pred = bilinear_resize(pred, gt.dim(0), gt.dim(1));
    pred.reshape(gt.shape());
  }
  if (pred.shape() != gt.shape())
    throw std::invalid_argument("compute_metrics: prediction " + shape_str(pred_in.shape()) + " vs gt " +
                                shape_str(gt.shape()));
  MetricsReport r;
  double abs_rel = 0, sq_rel = 0, se = 0, sel = 0;
  long d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double g = static_cast<double>(gt[i]);
    if (!(g > 0.0 && g < max_depth)) continue;
    const double p = static_cast<double>(pred[i]);
    if (!(p > 0.0)) throw std::invalid_argument("compute_metrics: non-positive prediction at pixel " + std::to_string(i));
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    se += diff * diff;
    const double ld = std::log(p) - std::log(g);
    sel += ld * ld;
    const double ratio = std::max(p / g, g / p);
    if (ratio < 1.25) ++d1;
    if (ratio < 1.25 * 1.25) ++d2;
    if (ratio < 1.25 * 1.25 * 1.25) ++d3;
    ++r.valid_count;
  }
  if (r.valid_count == 0) throw std::invalid_argument("compute_metrics: no valid ground-truth pixels");
  const double n = static_cast<double>(r.valid_count);
  r.abs_rel = abs_rel / n;
  r.sq_rel = sq_rel / n;
  r.rmse = std::sqrt(se / n);
  r.rmse_log = std::sqrt(sel / n);
  r.delta1 = d1 / n;
  r.delta2 = d2 / n;
  r.delta3 = d3 / n;
  return r;
}

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.abs_rel += r.abs_rel;
    m.sq_rel += r.sq_rel;
    m.rmse += r.rmse;
    m.rmse_log += r.rmse_log;
    m.delta1 += r.delta1;
    m.delta2 += r.delta2;
    m.delta3 += r.delta3;
    m.valid_count += r.valid_count;
  }
  const double n = static_cast<double>(reports.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse /= n;
  m.rmse_log /= n;
  m.delta1 /= n;
  m.delta2 /= n;
  m.delta3 /= n;
  return m;
}

template MetricsReport compute_metrics(const Tensor<float>&, const Tensor<float>&, double);
template MetricsReport compute_metrics(const Tensor<double>&, const Tensor<double>&, double);

}  // namespace avs::metrics
