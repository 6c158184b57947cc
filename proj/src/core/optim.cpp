#include "avs/core/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace avs::nn {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::SgdMomentum;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

template <typename T>
Optimizer<T>::Optimizer(ParamList<T> params, OptimizerConfig config) : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    first_.emplace_back(p->value.size(), 0.0);
    if (config_.kind == OptimizerKind::Adam) second_.emplace_back(p->value.size(), 0.0);
  }
}

template <typename T>
void Optimizer<T>::step(double lr) {
  ++steps_;
  double sq = 0.0;
  for (auto* p : params_)
    for (T g : p->grad.values()) sq += static_cast<double>(g) * static_cast<double>(g);
  last_norm_ = std::sqrt(sq);
  if (!std::isfinite(last_norm_)) throw std::runtime_error("optimizer: non-finite gradient norm");
  const double clip = (config_.grad_clip > 0 && last_norm_ > config_.grad_clip) ? config_.grad_clip / last_norm_ : 1.0;

  const double b1 = config_.momentum;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = first_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double w = static_cast<double>(value[i]);
      const double g = static_cast<double>(grad[i]) * clip + config_.weight_decay * w;
      double update;
      if (config_.kind == OptimizerKind::SgdMomentum) {
        m[i] = b1 * m[i] + g;
        update = m[i];
      } else {
        auto& v = second_[k];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.adam_eps);
      }
      value[i] = static_cast<T>(w - lr * update);
    }
  }
}

double warmup_cosine_lr(long step, long total_steps, double base_lr, double warmup_fraction) {
  if (total_steps <= 0) return base_lr;
  const long warmup = std::max(1L, static_cast<long>(std::lround(warmup_fraction * static_cast<double>(total_steps))));
  if (step < warmup) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(std::max(1L, total_steps - warmup));
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, progress)));
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace avs::nn
