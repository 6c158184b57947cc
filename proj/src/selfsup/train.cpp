#include "avs/selfsup/train.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "avs/core/ops.hpp"

namespace avs::selfsup {

template <typename T>
JointObjective<T>::JointObjective(geometry::CameraIntrinsics K, PhotometricParams params, double d_min, double d_max)
    : K_(K), params_(params), d_min_(d_min), d_max_(d_max) {}

template <typename T>
ObjectiveTerms JointObjective<T>::forward(const Tensor<T>& target, const std::vector<Tensor<T>>& sources,
                                          const std::vector<Tensor<T>>& disps, const std::vector<Tensor<T>>& poses) {
  if (sources.empty() || sources.size() != poses.size())
    throw std::invalid_argument("JointObjective: need one pose per source and at least one source");
  if (disps.empty()) throw std::invalid_argument("JointObjective: need at least one disparity scale");
  const int H = target.dim(1), W = target.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  target_ = target;
  sources_ = sources;
  disps_ = disps;
  poses_ = poses;
  const std::size_t N = disps.size(), S = sources.size();
  up_.assign(N, {});
  depth_.assign(N, {});
  masks_.assign(N, {});
  small_rgb_.assign(N, {});
  synth_.assign(N, std::vector<Tensor<T>>(S));
  choice_.assign(N, {});

  const MinLoss<T> ident = photometric_loss(target, sources, params_);
  ObjectiveTerms terms;
  for (std::size_t i = 0; i < N; ++i) {
    const Tensor<T>& d = disps[i];
    const int h = d.dim(-2), w = d.dim(-1);
    const Tensor<T> d3 = d.reshaped({1, h, w});
    up_[i] = (h == H && w == W) ? d3.reshaped({H, W}) : bilinear_resize(d3, H, W).reshaped({H, W});
    depth_[i] = geometry::disp_to_depth(up_[i], d_min_, d_max_);
    for (std::size_t s = 0; s < S; ++s) synth_[i][s] = geometry::inverse_warp(sources[s], depth_[i], poses[s], K_).image;
    MinLoss<T> reproj = photometric_loss(target, synth_[i], params_);
    Tensor<T> mu({H, W});
    double pe = 0, kept = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const bool keep = reproj.loss[p] < ident.loss[p];
      mu[p] = keep ? T(1) : T(0);
      pe += keep ? static_cast<double>(reproj.loss[p]) : static_cast<double>(ident.loss[p]);
      kept += keep;
    }
    masks_[i] = std::move(mu);
    choice_[i] = std::move(reproj.source);
    small_rgb_[i] = (h == H && w == W) ? target : bilinear_resize(target, h, w);
    terms.pe.push_back(pe / static_cast<double>(n));
    terms.smooth.push_back(smoothness_loss(d3, small_rgb_[i]));
    terms.masked_fraction.push_back(kept / static_cast<double>(n));
  }
  terms.total = joint_loss(terms.pe, terms.smooth, params_);
  return terms;
}

template <typename T>
typename JointObjective<T>::Grads JointObjective<T>::backward(double scale) const {
  const int H = target_.dim(1), W = target_.dim(2);
  const std::size_t n = static_cast<std::size_t>(H) * W;
  const std::size_t N = disps_.size(), S = sources_.size();
  Grads g;
  g.disps.resize(N);
  g.poses.assign(S, Tensor<T>({6}));
  const double per_scale = scale / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    Tensor<T> g_depth({H, W});
    for (std::size_t s = 0; s < S; ++s) {
      Tensor<T> gmap({H, W});
      bool any = false;
      for (std::size_t p = 0; p < n; ++p)
        if (masks_[i][p] > T(0) && choice_[i][p] == static_cast<int>(s)) {
          gmap[p] = static_cast<T>(per_scale / static_cast<double>(n));
          any = true;
        }
      if (!any) continue;
      const Tensor<T> g_synth = photometric_error_backward(target_, synth_[i][s], gmap, params_);
      const auto wg = geometry::inverse_warp_backward(sources_[s], depth_[i], poses_[s], K_, g_synth);
      g_depth += wg.depth;
      g.poses[s] += wg.pose;
    }
    const Tensor<T>& d = disps_[i];
    const int h = d.dim(-2), w = d.dim(-1);
    Tensor<T> g_up = geometry::disp_to_depth_backward(up_[i], g_depth, d_min_, d_max_);
    Tensor<T> gd = (h == H && w == W) ? g_up.reshaped({1, h, w})
                                      : bilinear_resize_backward(g_up.reshaped({1, H, W}), h, w);
    const Tensor<T> gs =
        smoothness_loss_backward(d.reshaped({1, h, w}), small_rgb_[i], per_scale * params_.lambda_smooth);
    gd += gs;
    gd.reshape(d.shape());
    g.disps[i] = std::move(gd);
  }
  return g;
}

namespace {

// Forward (and optionally backward) through both networks for one triple.
template <typename T>
ObjectiveTerms run_triple(DepthNet<T>& depth, PoseNet<T>& pose, JointObjective<T>& obj, const FrameTriple<T>& tr,
                          bool freeze_pose, bool with_grad, double grad_scale) {
  const std::vector<Tensor<T>> sources{tr.prev, tr.next};
  const auto& disps = depth.forward(tr.target);
  std::vector<Tensor<T>> poses(2);
  if (freeze_pose) {
    poses[0] = poses[1] = Tensor<T>({6});
  } else {
    poses[0] = pose.forward(tr.target, tr.prev);
    poses[1] = pose.forward(tr.target, tr.next);
  }
  ObjectiveTerms terms = obj.forward(tr.target, sources, disps, poses);
  if (!with_grad || !std::isfinite(terms.total)) return terms;
  const auto g = obj.backward(grad_scale);
  depth.backward(g.disps);
  if (!freeze_pose) {
    // PoseNet caches a single forward pass.
    for (std::size_t s = 0; s < 2; ++s) {
      pose.forward(tr.target, sources[s]);
      pose.backward(g.poses[s]);
    }
  }
  return terms;
}

}  // namespace

template <typename T>
ObjectiveTerms evaluate_triple(DepthNet<T>& depth, PoseNet<T>& pose, const FrameTriple<T>& triple,
                               const geometry::CameraIntrinsics& K, const SelfSupTrainConfig& config) {
  JointObjective<T> obj(K, config.params, config.d_min, config.d_max);
  return run_triple(depth, pose, obj, triple, config.freeze_pose, false, 0.0);
}

template <typename T>
SelfSupResult train_selfsup(DepthNet<T>& depth, PoseNet<T>& pose, const std::vector<FrameTriple<T>>& triples,
                            const geometry::CameraIntrinsics& K, const SelfSupTrainConfig& config) {
  if (triples.empty()) throw std::invalid_argument("train_selfsup: no frame triples");
  if (config.steps <= 0 || config.batch_size <= 0) throw std::invalid_argument("train_selfsup: steps and batch must be positive");
  if (config.params.n_scales != depth.config().n_scales)
    throw std::invalid_argument("train_selfsup: photometric scale count differs from the DepthNet heads");
  nn::ParamList<T> params = depth.parameters();
  if (!config.freeze_pose)
    for (auto* p : pose.parameters()) params.push_back(p);
  nn::Optimizer<T> opt(params, config.optimizer);
  JointObjective<T> obj(K, config.params, config.d_min, config.d_max);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  SelfSupResult result;
  for (long step = 0; step < config.steps; ++step) {
    opt.zero_grad();
    double loss = 0;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const auto terms =
          run_triple(depth, pose, obj, triples[order[cursor++]], config.freeze_pose, true, 1.0 / config.batch_size);
      loss += terms.total / config.batch_size;
      if (!std::isfinite(terms.total)) break;
    }
    result.loss_trace.push_back(loss);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "train_selfsup: non-finite loss at step " << step;
      throw nn::DivergenceError(os.str(), result.loss_trace);
    }
    const double lr = nn::warmup_cosine_lr(step, config.steps, config.lr, config.warmup_fraction);
    opt.step(lr);
    if (config.on_step) config.on_step(step, loss, lr);
  }
  if (!config.checkpoint_dir.empty()) {
    depth.save(config.checkpoint_dir / "depth");
    pose.save(config.checkpoint_dir / "pose");
  }
  return result;
}

template <typename T>
Tensor<T> predict_relative_depth(DepthNet<T>& depth, const Tensor<T>& rgb, double d_min, double d_max) {
  const auto& disps = depth.forward(rgb);
  const Tensor<T>& d = disps.front();
  return geometry::disp_to_depth(d.reshaped({d.dim(1), d.dim(2)}), d_min, d_max);
}

#define AVS_INSTANTIATE(T)                                                                                       \
  template class JointObjective<T>;                                                                             \
  template SelfSupResult train_selfsup(DepthNet<T>&, PoseNet<T>&, const std::vector<FrameTriple<T>>&,          \
                                       const geometry::CameraIntrinsics&, const SelfSupTrainConfig&);          \
  template ObjectiveTerms evaluate_triple(DepthNet<T>&, PoseNet<T>&, const FrameTriple<T>&,                     \
                                          const geometry::CameraIntrinsics&, const SelfSupTrainConfig&);        \
  template Tensor<T> predict_relative_depth(DepthNet<T>&, const Tensor<T>&, double, double);
AVS_INSTANTIATE(float)
AVS_INSTANTIATE(double)
#undef AVS_INSTANTIATE

}  // namespace avs::selfsup
