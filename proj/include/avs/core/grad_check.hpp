#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "avs/core/tensor.hpp"

namespace avs {

/// Outcome of comparing analytic gradients with central finite differences.
struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates where the step-halving test found a kink inside the FD
  /// stencil (ReLU hinge, |x|, min, sort); they are excluded from the maxima.
  std::size_t kinks = 0;
  bool non_finite = false;
  std::string worst;

  bool passed(double tolerance) const { return !non_finite && checked > 0 && max_rel_error <= tolerance; }
};

struct GradCheckOptions {
  double epsilon = 0.0;  // 0 selects 1e-5 for double and 1e-2 for float
  /// Relative errors are measured against max(|analytic|, |numeric|, floor).
  double floor = 1e-3;
  /// Coordinates sampled per input tensor; 0 checks every coordinate.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  bool detect_kinks = true;
  /// Relative disagreement between the eps and eps/2 estimates that marks a kink.
  double kink_threshold = 1e-3;
};

template <typename T>
using ForwardFn = std::function<Tensor<T>(const std::vector<Tensor<T>>&)>;

/// Returns dL/d(input_i) for every input, given the inputs and dL/d(output).
template <typename T>
using BackwardFn = std::function<std::vector<Tensor<T>>(const std::vector<Tensor<T>>&, const Tensor<T>&)>;

/// Checks `backward` against central differences of L = sum_i w_i * out_i,
/// with seeded weights w_i in [-1, 1].
template <typename T>
GradCheckReport grad_check(const ForwardFn<T>& forward, const BackwardFn<T>& backward,
                           const std::vector<Tensor<T>>& inputs, const GradCheckOptions& options = {});

}  // namespace avs
