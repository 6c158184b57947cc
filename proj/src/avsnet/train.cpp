#include "avs/avsnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "avs/metrics/metrics.hpp"

namespace avs::avsnet {

template <typename T>
double evaluate_abs_rel(AvsNet<T>& net, const std::vector<AvsSample<T>>& samples, double max_depth) {
  if (samples.empty()) throw std::invalid_argument("evaluate_abs_rel: empty sample set");
  double acc = 0.0;
  for (const auto& s : samples) acc += metrics::compute_metrics(net.forward(s.rgb, s.spec).depth, s.depth, max_depth).abs_rel;
  return acc / static_cast<double>(samples.size());
}

template <typename T>
AvsTrainResult train_avsnet(AvsNet<T>& net, const std::vector<AvsSample<T>>& train,
                            const std::vector<AvsSample<T>>& val, const AvsTrainConfig& config) {
  if (train.empty()) throw std::invalid_argument("train_avsnet: empty training set");
  if (config.steps <= 0 || config.batch_size <= 0) throw std::invalid_argument("train_avsnet: steps and batch must be positive");
  auto params = net.parameters();
  nn::Optimizer<T> opt(params, config.optimizer);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  const long eval_every = config.eval_every > 0 ? config.eval_every : std::max(1L, config.steps / 10);
  AvsTrainResult result;
  std::vector<Tensor<T>> best;
  auto validate = [&](long step) {
    if (val.empty()) return;
    const double score = evaluate_abs_rel(net, val, config.max_depth);
    if (score < result.best_val_abs_rel) {
      result.best_val_abs_rel = score;
      result.best_step = step;
      best.clear();
      for (auto* p : params) best.push_back(p->value);
    }
  };

  for (long step = 0; step < config.steps; ++step) {
    opt.zero_grad();
    double loss = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const auto& s = train[order[cursor++]];
      const auto& out = net.forward(s.rgb, s.spec);
      const double l = si_loss(out.depth, s.depth, config.loss);
      loss += l / config.batch_size;
      if (!std::isfinite(l)) break;
      Tensor<T> g = si_loss_backward(out.depth, s.depth, config.loss);
      for (auto& v : g.values()) v /= static_cast<T>(config.batch_size);
      net.backward(g);
    }
    result.loss_trace.push_back(loss);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "train_avsnet: non-finite loss at step " << step;
      throw nn::DivergenceError(os.str(), result.loss_trace);
    }
    const double lr = nn::warmup_cosine_lr(step, config.steps, config.lr, config.warmup_fraction);
    opt.step(lr);
    if (config.on_step) config.on_step(step, loss, lr);
    if ((step + 1) % eval_every == 0 || step + 1 == config.steps) validate(step + 1);
  }
  if (!best.empty())
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  if (!config.checkpoint_dir.empty()) {
    KeyValues extra;
    extra["train.best_step"] = std::to_string(result.best_step);
    std::ostringstream os;
    os.precision(17);
    os << result.best_val_abs_rel;
    extra["train.best_val_abs_rel"] = os.str();
    net.save(config.checkpoint_dir, extra);
  }
  return result;
}

template <typename T>
Saliency<T> saliency(AvsNet<T>& net, const Tensor<T>& rgb, const Tensor<T>& spec) {
  Saliency<T> s;
  s.map = Tensor<T>(spec.shape());
  s.profile.assign(spec.rank() == 3 ? spec.dim(2) : 0, 0.0);
  if (!net.config().use_audio) return s;
  const auto& out = net.forward(rgb, spec);
  Tensor<T> g(out.depth.shape(), static_cast<T>(1.0 / static_cast<double>(out.depth.size())));
  const Tensor<T> gs = net.backward(g, true);
  nn::zero_grads(net.parameters());
  const int C = spec.dim(0), F = spec.dim(1), Tn = spec.dim(2);
  for (int c = 0; c < C; ++c)
    for (int f = 0; f < F; ++f)
      for (int t = 0; t < Tn; ++t) {
        const std::size_t i = (static_cast<std::size_t>(c) * F + f) * Tn + t;
        s.map[i] = std::abs(gs[i]);
        s.profile[t] += static_cast<double>(s.map[i]);
      }
  return s;
}

template AvsTrainResult train_avsnet(AvsNet<float>&, const std::vector<AvsSample<float>>&,
                                     const std::vector<AvsSample<float>>&, const AvsTrainConfig&);
template AvsTrainResult train_avsnet(AvsNet<double>&, const std::vector<AvsSample<double>>&,
                                     const std::vector<AvsSample<double>>&, const AvsTrainConfig&);
template double evaluate_abs_rel(AvsNet<float>&, const std::vector<AvsSample<float>>&, double);
template double evaluate_abs_rel(AvsNet<double>&, const std::vector<AvsSample<double>>&, double);
template Saliency<float> saliency(AvsNet<float>&, const Tensor<float>&, const Tensor<float>&);
template Saliency<double> saliency(AvsNet<double>&, const Tensor<double>&, const Tensor<double>&);

}  // namespace avs::avsnet
