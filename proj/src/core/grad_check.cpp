#include "avs/core/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace avs {

namespace {

template <typename T>
double reduce(const Tensor<T>& out, const Tensor<T>& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += static_cast<double>(out[i]) * static_cast<double>(weights[i]);
  return acc;
}

}  // namespace

template <typename T>
GradCheckReport grad_check(const ForwardFn<T>& forward, const BackwardFn<T>& backward,
                           const std::vector<Tensor<T>>& inputs, const GradCheckOptions& options) {
  GradCheckReport report;
  const double eps = options.epsilon > 0 ? options.epsilon : (std::is_same_v<T, double> ? 1e-5 : 1e-2);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> weight_dist(-1.0, 1.0);

  const Tensor<T> out = forward(inputs);
  if (!out.all_finite()) {
    report.non_finite = true;
    report.worst = "forward produced non-finite output";
    return report;
  }
  Tensor<T> weights(out.shape());
  for (auto& w : weights.values()) w = static_cast<T>(weight_dist(rng));

  const std::vector<Tensor<T>> analytic = backward(inputs, weights);
  if (analytic.size() != inputs.size()) throw std::invalid_argument("grad_check: backward returned wrong arity");

  std::vector<Tensor<T>> probe = inputs;
  auto eval = [&](std::size_t which, std::size_t idx, double value) {
    const T saved = probe[which][idx];
    probe[which][idx] = static_cast<T>(value);
    const Tensor<T> y = forward(probe);
    probe[which][idx] = saved;
    if (!y.all_finite()) return std::numeric_limits<double>::quiet_NaN();
    return reduce(y, weights);
  };
  auto central = [&](std::size_t which, std::size_t idx, double h) {
    const double x = static_cast<double>(inputs[which][idx]);
    return (eval(which, idx, x + h) - eval(which, idx, x - h)) / (2.0 * h);
  };

  for (std::size_t which = 0; which < inputs.size(); ++which) {
    const Tensor<T>& grad = analytic[which];
    if (grad.empty()) continue;
    inputs[which].require_same_shape(grad, "grad_check");
    if (!grad.all_finite()) {
      report.non_finite = true;
      report.worst = "analytic gradient of input " + std::to_string(which) + " is non-finite";
      return report;
    }
    std::vector<std::size_t> coords(inputs[which].size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords > 0 && coords.size() > options.max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const double numeric = central(which, idx, eps);
      if (!std::isfinite(numeric)) {
        report.non_finite = true;
        report.worst = "finite difference non-finite at input " + std::to_string(which) + "[" + std::to_string(idx) + "]";
        return report;
      }
      const double a = static_cast<double>(grad[idx]);
      if (options.detect_kinks) {
        const double half = central(which, idx, eps * 0.5);
        const double scale = std::max({std::abs(numeric), std::abs(half), options.floor});
        if (std::abs(numeric - half) > options.kink_threshold * scale) {
          ++report.kinks;
          continue;
        }
      }
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), options.floor});
      ++report.checked;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error) {
        report.max_rel_error = rel_err;
        std::ostringstream os;
        os << "input " << which << "[" << idx << "]: analytic " << a << " numeric " << numeric;
        report.worst = os.str();
      }
    }
  }
  return report;
}

template GradCheckReport grad_check<float>(const ForwardFn<float>&, const BackwardFn<float>&,
                                           const std::vector<Tensor<float>>&, const GradCheckOptions&);
template GradCheckReport grad_check<double>(const ForwardFn<double>&, const BackwardFn<double>&,
                                            const std::vector<Tensor<double>>&, const GradCheckOptions&);

}  // namespace avs
