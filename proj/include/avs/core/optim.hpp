#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "avs/core/nn.hpp"

namespace avs::nn {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::SgdMomentum;
  double momentum = 0.9;  // beta1 for Adam
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
};

OptimizerKind parse_optimizer_kind(const std::string& name);

template <typename T>
class Optimizer {
 public:
  Optimizer(ParamList<T> params, OptimizerConfig config);

  /// Applies one update with learning rate `lr` from the accumulated grads.
  void step(double lr);
  void zero_grad() { zero_grads(params_); }
  const ParamList<T>& params() const { return params_; }
  /// L2 norm of all gradients before clipping, from the last step.
  double last_grad_norm() const { return last_norm_; }

 private:
  ParamList<T> params_;
  OptimizerConfig config_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  long steps_ = 0;
  double last_norm_ = 0.0;
};

/// Thrown by trainers when the loss stops being finite; carries the trace so far.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::vector<double> loss_trace)
      : std::runtime_error(what), trace(std::move(loss_trace)) {}
  std::vector<double> trace;
};

/// Linear warmup over the first `warmup_fraction` of steps, then cosine decay to 0.
double warmup_cosine_lr(long step, long total_steps, double base_lr, double warmup_fraction = 0.05);

}  // namespace avs::nn
