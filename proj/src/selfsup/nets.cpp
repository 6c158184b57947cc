#include "avs/selfsup/nets.hpp"

#include <sstream>
#include <stdexcept>

#include "avs/core/ops.hpp"

namespace avs::selfsup {

namespace {

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stoi(item));
  return out;
}

const std::string& need(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("checkpoint manifest lacks " + key);
  return it->second;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KeyValues DepthNetConfig::to_hyper() const {
  return {{"hyper.net", "depthnet"},
          {"hyper.height", std::to_string(height)},
          {"hyper.width", std::to_string(width)},
          {"hyper.n_scales", std::to_string(n_scales)},
          {"hyper.encoder_channels", join(encoder_channels)},
          {"hyper.decoder_channels", join(decoder_channels)},
          {"hyper.seed", std::to_string(seed)}};
}

DepthNetConfig DepthNetConfig::from_hyper(const KeyValues& kv) {
  if (need(kv, "hyper.net") != "depthnet") throw std::runtime_error("checkpoint is not a DepthNet");
  DepthNetConfig c;
  c.height = std::stoi(need(kv, "hyper.height"));
  c.width = std::stoi(need(kv, "hyper.width"));
  c.n_scales = std::stoi(need(kv, "hyper.n_scales"));
  c.encoder_channels = split_ints(need(kv, "hyper.encoder_channels"));
  c.decoder_channels = split_ints(need(kv, "hyper.decoder_channels"));
  c.seed = std::stoull(need(kv, "hyper.seed"));
  return c;
}

void DepthNetConfig::validate() const {
  if (height <= 0 || width <= 0 || height % 32 != 0 || width % 32 != 0)
    throw std::invalid_argument("DepthNet: resolution " + std::to_string(height) + "x" + std::to_string(width) +
                                " must be positive and divisible by 32");
  if (encoder_channels.size() != 5 || decoder_channels.size() != 5)
    throw std::invalid_argument("DepthNet: expected five encoder and five decoder stages");
  if (n_scales < 1 || n_scales > 4) throw std::invalid_argument("DepthNet: n_scales must be in [1, 4]");
}

template <typename T>
Tensor<T> normalize_rgb(const Tensor<T>& rgb) {
  Tensor<T> out = rgb;
  for (auto& v : out.values()) v = static_cast<T>((static_cast<double>(v) - 0.45) / 0.225);
  return out;
}

template <typename T>
DepthNet<T>::DepthNet(const DepthNetConfig& config) : config_(config) {
  config_.validate();
  nn::Rng rng(config_.seed);
  const auto& e = config_.encoder_channels;
  const auto& d = config_.decoder_channels;
  encoder_ = nn::ConvEncoder<T>("depth.encoder", 3, e, rng);
  // Skips from encoder stages 3, 2, 1, 0; the last decoder stage has none.
  decoder_ = nn::SkipDecoder<T>("depth.decoder", e[4], {e[3], e[2], e[1], e[0], 0}, d, rng);
  for (int i = 0; i < config_.n_scales; ++i)
    heads_.emplace_back("depth.head" + std::to_string(i), d[4 - i], 1, 3, 1, rng);
}

template <typename T>
const std::vector<Tensor<T>>& DepthNet<T>::forward(const Tensor<T>& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3 || rgb.dim(1) != config_.height || rgb.dim(2) != config_.width)
    throw std::invalid_argument("DepthNet: expected 3x" + std::to_string(config_.height) + "x" +
                                std::to_string(config_.width) + " input, got " + shape_str(rgb.shape()));
  const auto& f = encoder_.forward(normalize_rgb(rgb));
  const auto& dec = decoder_.forward(f[4], {&f[3], &f[2], &f[1], &f[0], nullptr});
  disp_.resize(heads_.size());
  for (std::size_t i = 0; i < heads_.size(); ++i) disp_[i] = sigmoid(heads_[i].forward(dec[4 - i]));
  return disp_;
}

template <typename T>
void DepthNet<T>::backward(const std::vector<Tensor<T>>& grads) {
  std::vector<Tensor<T>> gdec(5);
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    if (i >= grads.size() || grads[i].empty()) continue;
    gdec[4 - i] = heads_[i].backward(sigmoid_backward(disp_[i], grads[i]), true);
  }
  auto g = decoder_.backward(gdec);
  std::vector<Tensor<T>> genc(5);
  genc[4] = std::move(g.bottleneck);
  for (int k = 0; k < 4; ++k) genc[3 - k] = std::move(g.skips[k]);
  encoder_.backward(genc, false);
}

template <typename T>
nn::ParamList<T> DepthNet<T>::parameters() {
  nn::ParamList<T> out;
  encoder_.collect(out);
  decoder_.collect(out);
  for (auto& h : heads_) h.collect(out);
  return out;
}

template <typename T>
void DepthNet<T>::save(const std::filesystem::path& dir, const KeyValues& extra) {
  KeyValues hyper = config_.to_hyper();
  for (const auto& [k, v] : extra) hyper[k] = v;
  save_checkpoint(dir, parameters(), hyper);
}

template <typename T>
DepthNet<T> DepthNet<T>::load(const std::filesystem::path& dir) {
  DepthNet<T> net(DepthNetConfig::from_hyper(read_checkpoint_manifest(dir)));
  load_checkpoint(dir, net.parameters());
  return net;
}

KeyValues PoseNetConfig::to_hyper() const {
  return {{"hyper.net", "posenet"},
          {"hyper.encoder_channels", join(encoder_channels)},
          {"hyper.output_scale", fmt(output_scale)},
          {"hyper.seed", std::to_string(seed)}};
}

PoseNetConfig PoseNetConfig::from_hyper(const KeyValues& kv) {
  if (need(kv, "hyper.net") != "posenet") throw std::runtime_error("checkpoint is not a PoseNet");
  PoseNetConfig c;
  c.encoder_channels = split_ints(need(kv, "hyper.encoder_channels"));
  c.output_scale = std::stod(need(kv, "hyper.output_scale"));
  c.seed = std::stoull(need(kv, "hyper.seed"));
  return c;
}

template <typename T>
PoseNet<T>::PoseNet(const PoseNetConfig& config) : config_(config) {
  if (config_.encoder_channels.empty()) throw std::invalid_argument("PoseNet: need at least one encoder stage");
  nn::Rng rng(config_.seed);
  encoder_ = nn::ConvEncoder<T>("pose.encoder", 6, config_.encoder_channels, rng);
  head_ = nn::Conv2d<T>("pose.head", config_.encoder_channels.back(), 6, 1, 1, rng);
}

template <typename T>
Tensor<T> PoseNet<T>::forward(const Tensor<T>& target, const Tensor<T>& source) {
  target.require_same_shape(source, "PoseNet");
  const auto& f = encoder_.forward(concat_channels(normalize_rgb(target), normalize_rgb(source)));
  const Tensor<T> h = head_.forward(f.back());
  head_shape_ = h.shape();
  const std::size_t n = static_cast<std::size_t>(h.dim(1)) * h.dim(2);
  Tensor<T> pose({6});
  for (int c = 0; c < 6; ++c) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += h[c * n + i];
    pose[c] = static_cast<T>(config_.output_scale * acc / static_cast<double>(n));
  }
  return pose;
}

template <typename T>
void PoseNet<T>::backward(const Tensor<T>& grad_pose) {
  Tensor<T> g(head_shape_);
  const std::size_t n = static_cast<std::size_t>(g.dim(1)) * g.dim(2);
  for (int c = 0; c < 6; ++c) {
    const T v = static_cast<T>(config_.output_scale * static_cast<double>(grad_pose[c]) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) g[c * n + i] = v;
  }
  std::vector<Tensor<T>> genc(config_.encoder_channels.size());
  genc.back() = head_.backward(g, true);
  encoder_.backward(genc, false);
}

template <typename T>
nn::ParamList<T> PoseNet<T>::parameters() {
  nn::ParamList<T> out;
  encoder_.collect(out);
  head_.collect(out);
  return out;
}

template <typename T>
void PoseNet<T>::save(const std::filesystem::path& dir, const KeyValues& extra) {
  KeyValues hyper = config_.to_hyper();
  for (const auto& [k, v] : extra) hyper[k] = v;
  save_checkpoint(dir, parameters(), hyper);
}

template <typename T>
PoseNet<T> PoseNet<T>::load(const std::filesystem::path& dir) {
  PoseNet<T> net(PoseNetConfig::from_hyper(read_checkpoint_manifest(dir)));
  load_checkpoint(dir, net.parameters());
  return net;
}

template class DepthNet<float>;
template class DepthNet<double>;
template class PoseNet<float>;
template class PoseNet<double>;
template Tensor<float> normalize_rgb(const Tensor<float>&);
template Tensor<double> normalize_rgb(const Tensor<double>&);

}  // namespace avs::selfsup
