#include "avs/avsnet/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace avs::avsnet {

namespace {

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

const std::string& need(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("checkpoint manifest lacks " + key);
  return it->second;
}

template <typename T>
Param<T> normal_param(const std::string& name, const Shape& shape, int fan_in, nn::Rng& rng) {
  return Param<T>(name, nn::kaiming_normal<T>(shape, fan_in, rng, 1.0));
}

}  // namespace

KeyValues AvsNetConfig::to_hyper() const {
  KeyValues kv;
  kv["hyper.height"] = std::to_string(height);
  kv["hyper.width"] = std::to_string(width);
  kv["hyper.encoder_channels"] = join(encoder_channels);
  kv["hyper.decoder_channels"] = join(decoder_channels);
  kv["hyper.audio_channels"] = join(audio_channels);
  kv["hyper.heads"] = std::to_string(heads);
  kv["hyper.bins"] = std::to_string(bins);
  kv["hyper.bin_embedding"] = std::to_string(bin_embedding);
  kv["hyper.attractors"] = join(attractors);
  std::ostringstream os;
  os.precision(17);
  os << attractor_alpha;
  kv["hyper.attractor_alpha"] = os.str();
  kv["hyper.attractor_gamma"] = std::to_string(attractor_gamma);
  os.str("");
  os << d_min;
  kv["hyper.d_min"] = os.str();
  os.str("");
  os << d_max;
  kv["hyper.d_max"] = os.str();
  kv["hyper.use_audio"] = use_audio ? "1" : "0";
  kv["hyper.audio_log"] = audio_log ? "1" : "0";
  kv["hyper.seed"] = std::to_string(seed);
  return kv;
}

AvsNetConfig AvsNetConfig::from_hyper(const KeyValues& kv) {
  AvsNetConfig c;
  c.height = std::stoi(need(kv, "hyper.height"));
  c.width = std::stoi(need(kv, "hyper.width"));
  c.encoder_channels = split_ints(need(kv, "hyper.encoder_channels"));
  c.decoder_channels = split_ints(need(kv, "hyper.decoder_channels"));
  c.audio_channels = split_ints(need(kv, "hyper.audio_channels"));
  c.heads = std::stoi(need(kv, "hyper.heads"));
  c.bins = std::stoi(need(kv, "hyper.bins"));
  c.bin_embedding = std::stoi(need(kv, "hyper.bin_embedding"));
  c.attractors = split_ints(need(kv, "hyper.attractors"));
  c.attractor_alpha = std::stod(need(kv, "hyper.attractor_alpha"));
  c.attractor_gamma = std::stoi(need(kv, "hyper.attractor_gamma"));
  c.d_min = std::stod(need(kv, "hyper.d_min"));
  c.d_max = std::stod(need(kv, "hyper.d_max"));
  c.use_audio = need(kv, "hyper.use_audio") == "1";
  c.audio_log = need(kv, "hyper.audio_log") == "1";
  c.seed = std::stoull(need(kv, "hyper.seed"));
  return c;
}

void AvsNetConfig::validate() const {
  const int levels = static_cast<int>(encoder_channels.size());
  if (levels < 2) throw std::invalid_argument("avsnet: need at least two encoder stages");
  const int stride = 1 << levels;
  if (height % stride != 0 || width % stride != 0)
    throw std::invalid_argument("avsnet: resolution " + std::to_string(height) + "x" + std::to_string(width) +
                                " not divisible by " + std::to_string(stride));
  if (decoder_channels.size() + 1 != encoder_channels.size())
    throw std::invalid_argument("avsnet: decoder needs one stage per encoder skip");
  if (attractors.size() != decoder_channels.size())
    throw std::invalid_argument("avsnet: need one attractor count per decoder stage");
  if (audio_channels.size() != encoder_channels.size() || audio_channels.back() != encoder_channels.back())
    throw std::invalid_argument("avsnet: audio stages must match the visual token grid and width");
  if (encoder_channels.back() % heads != 0) throw std::invalid_argument("avsnet: embedding not divisible by heads");
  if (bins < 2) throw std::invalid_argument("avsnet: need at least two bins");
  if (!(d_min > 0 && d_min < d_max)) throw std::invalid_argument("avsnet: need 0 < d_min < d_max");
}

template <typename T>
Tensor<T> map_to_tokens(const Tensor<T>& map) {
  const int C = map.dim(0), N = map.dim(1) * map.dim(2);
  Tensor<T> tok({N, C});
  for (int c = 0; c < C; ++c)
    for (int n = 0; n < N; ++n) tok[static_cast<std::size_t>(n) * C + c] = map[static_cast<std::size_t>(c) * N + n];
  return tok;
}

template <typename T>
Tensor<T> tokens_to_map(const Tensor<T>& tokens, int h, int w) {
  const int N = tokens.dim(0), C = tokens.dim(1);
  if (N != h * w) throw std::invalid_argument("tokens_to_map: token count does not match grid");
  Tensor<T> map({C, h, w});
  for (int c = 0; c < C; ++c)
    for (int n = 0; n < N; ++n) map[static_cast<std::size_t>(c) * N + n] = tokens[static_cast<std::size_t>(n) * C + c];
  return map;
}

template <typename T>
AvsNet<T>::AvsNet(const AvsNetConfig& config) : config_(config) {
  config_.validate();
  nn::Rng rng(config_.seed);
  const auto& enc = config_.encoder_channels;
  const int levels = static_cast<int>(enc.size());
  const int E = enc.back();
  visual_ = nn::ConvEncoder<T>("visual", 3, enc, rng);
  std::vector<int> skips;
  for (int i = levels - 2; i >= 0; --i) skips.push_back(enc[i]);
  decoder_ = nn::SkipDecoder<T>("decoder", E, skips, config_.decoder_channels, rng);
  if (config_.use_audio) {
    audio_ = nn::ResidualEncoder<T>("audio", 2, config_.audio_channels, rng);
    wq_ = normal_param<T>("attention.wq", {E, E}, E, rng);
    wk_ = normal_param<T>("attention.wk", {E, E}, E, rng);
    wv_ = normal_param<T>("attention.wv", {E, E}, E, rng);
  }
  seed_w_ = Param<T>("seed.weight", Tensor<T>({E, config_.bins}));
  seed_b_ = Param<T>("seed.bias", Tensor<T>({config_.bins}));
  seed_proj_ = nn::Linear<T>("seed_projector", E, config_.bin_embedding, rng);
  const int Ep = config_.bin_embedding;
  stages_.resize(config_.attractors.size());
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const std::string name = "attractor" + std::to_string(s);
    stages_[s].proj = nn::Conv2d<T>(name + ".proj", config_.decoder_channels[s], Ep, 1, 1, rng);
    stages_[s].hidden = nn::Conv2d<T>(name + ".hidden", Ep, Ep, 1, 1, rng);
    stages_[s].points = nn::Conv2d<T>(name + ".points", Ep, config_.attractors[s], 1, 1, rng);
  }
  qt_head_ = nn::Conv2d<T>("qt_head", config_.decoder_channels.back(), 2, 3, 1, rng);
}

template <typename T>
const Tensor<T>& AvsNet<T>::encode_visual(const Tensor<T>& rgb) {
  if (rgb.shape() != Shape{3, config_.height, config_.width})
    throw std::invalid_argument("avsnet: expected rgb 3x" + std::to_string(config_.height) + "x" +
                                std::to_string(config_.width) + ", got " + shape_str(rgb.shape()));
  const auto& e = visual_.forward(rgb);
  const int levels = static_cast<int>(e.size());
  std::vector<const Tensor<T>*> skips;
  for (int i = levels - 2; i >= 0; --i) skips.push_back(&e[i]);
  decoder_.forward(e.back(), skips);
  tok_h_ = e.back().dim(1);
  tok_w_ = e.back().dim(2);
  fv_ = map_to_tokens(e.back());
  return fv_;
}

template <typename T>
const Tensor<T>& AvsNet<T>::encode_audio(const Tensor<T>& spec) {
  if (spec.rank() != 3 || spec.dim(0) != 2)
    throw std::invalid_argument("avsnet: expected a 2 x F x T spectrogram, got " + shape_str(spec.shape()));
  spec_ = spec;
  Tensor<T> x = spec;
  if (config_.audio_log)
    for (auto& v : x.values()) v = static_cast<T>(std::log1p(static_cast<double>(v)));
  audio_in_ = bilinear_resize(x, config_.height, config_.width);
  fa_ = map_to_tokens(audio_.forward(audio_in_));
  return fa_;
}

template <typename T>
const AvsOutput<T>& AvsNet<T>::forward(const Tensor<T>& rgb, const Tensor<T>& spec) {
  const double span = config_.d_max - config_.d_min;
  encode_visual(rgb);
  if (config_.use_audio) {
    encode_audio(spec);
    fused_ = cross_modal_attention(fv_, fa_, wq_.value, wk_.value, wv_.value, config_.heads, &att_cache_);
  } else {
    fused_ = fv_;
  }
  seed_ = seed_bins(fused_, seed_w_.value, seed_b_.value, config_.d_min, config_.d_max);
  emb0_ = relu(seed_proj_.forward(fused_));
  Tensor<T> emb = tokens_to_map(emb0_, tok_h_, tok_w_);

  const auto& dec = decoder_.outputs();
  const int K = config_.bins;
  out_.stage_centers.resize(stages_.size());
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Stage& st = stages_[s];
    st.h = dec[s].dim(1);
    st.w = dec[s].dim(2);
    st.emb = bilinear_resize(emb, st.h, st.w);
    st.emb += st.proj.forward(dec[s]);
    st.z = relu(st.hidden.forward(st.emb));
    st.attr_sig = sigmoid(st.points.forward(st.z));
    st.attractors = Tensor<T>(st.attr_sig.shape());
    for (std::size_t i = 0; i < st.attr_sig.size(); ++i)
      st.attractors[i] = static_cast<T>(config_.d_min + span * static_cast<double>(st.attr_sig[i]));
    if (s == 0) {
      st.centers_in = Tensor<T>({K, st.h, st.w});
      const std::size_t P = static_cast<std::size_t>(st.h) * st.w;
      for (int k = 0; k < K; ++k) std::fill(st.centers_in.data() + k * P, st.centers_in.data() + (k + 1) * P, seed_.bins.centers[k]);
    } else {
      st.centers_in = bilinear_resize(out_.stage_centers[s - 1], st.h, st.w);
    }
    st.result = attractor_adjust(st.centers_in, st.attractors, config_.attractor_alpha, config_.attractor_gamma,
                                 config_.d_min, config_.d_max);
    out_.stage_centers[s] = st.result.centers;
    emb = st.emb;
  }

  qt_raw_ = qt_head_.forward(dec.back());
  auto [qraw, traw] = split_channels(qt_raw_, 1);
  const int h2 = qraw.dim(1), w2 = qraw.dim(2);
  q_ = sigmoid(qraw);
  for (auto& v : q_.values()) v = std::clamp(v, T(1e-4), T(1 - 1e-4));
  t_ = softplus(traw);
  for (auto& v : t_.values()) v += T(1e-2);
  q_.reshape({h2, w2});
  t_.reshape({h2, w2});
  probs_ = log_binomial_probs(q_, t_, K);
  depth2_ = pseudo_depth(probs_, out_.stage_centers.back());
  out_.depth = bilinear_resize(depth2_.reshaped({1, h2, w2}), config_.height, config_.width);
  out_.depth.reshape({config_.height, config_.width});
  out_.seed_centers = seed_.bins.centers;
  return out_;
}

template <typename T>
Tensor<T> AvsNet<T>::backward(const Tensor<T>& grad_depth, bool need_spec_grad) {
  const double span = config_.d_max - config_.d_min;
  const int h2 = depth2_.dim(0), w2 = depth2_.dim(1);
  Tensor<T> gd2 = bilinear_resize_backward(grad_depth.reshaped({1, config_.height, config_.width}), h2, w2);
  gd2.reshape({h2, w2});
  auto pg = pseudo_depth_backward(probs_, out_.stage_centers.back(), gd2);
  auto lg = log_binomial_backward(q_, t_, probs_, pg.probs);

  // q/t head back to the finest decoder feature
  Tensor<T> gqt(qt_raw_.shape());
  const std::size_t P2 = static_cast<std::size_t>(h2) * w2;
  for (std::size_t p = 0; p < P2; ++p) {
    const double q = static_cast<double>(q_[p]);
    const bool clamped = q <= 1e-4 || q >= 1 - 1e-4;
    gqt[p] = clamped ? T(0) : static_cast<T>(static_cast<double>(lg.q[p]) * q * (1.0 - q));
    const double x = static_cast<double>(qt_raw_[P2 + p]);
    const double sp = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    gqt[P2 + p] = static_cast<T>(static_cast<double>(lg.t[p]) * sp);
  }
  std::vector<Tensor<T>> gdec(stages_.size());
  gdec.back() = qt_head_.backward(gqt, true);

  Tensor<T> gcenters = std::move(pg.centers);
  Tensor<T> gemb;
  Tensor<T> gseed;
  for (std::size_t s = stages_.size(); s-- > 0;) {
    Stage& st = stages_[s];
    auto ag = attractor_adjust_backward(st.centers_in, st.attractors, config_.attractor_alpha,
                                        config_.attractor_gamma, config_.d_min, config_.d_max, st.result, gcenters);
    Tensor<T> graw(st.attr_sig.shape());
    for (std::size_t i = 0; i < graw.size(); ++i) {
      const double y = static_cast<double>(st.attr_sig[i]);
      graw[i] = static_cast<T>(static_cast<double>(ag.attractors[i]) * span * y * (1.0 - y));
    }
    Tensor<T> gz = st.points.backward(graw, true);
    nn::relu_mask_inplace(st.z, gz);
    Tensor<T> ge = st.hidden.backward(gz, true);
    if (!gemb.empty()) ge += gemb;
    Tensor<T> gf = st.proj.backward(ge, true);
    if (gdec[s].empty()) {
      gdec[s] = std::move(gf);
    } else {
      gdec[s] += gf;
    }
    const int ph = s == 0 ? tok_h_ : stages_[s - 1].h;
    const int pw = s == 0 ? tok_w_ : stages_[s - 1].w;
    gemb = bilinear_resize_backward(ge, ph, pw);
    if (s > 0) {
      gcenters = bilinear_resize_backward(ag.centers, ph, pw);
    } else {
      const int K = config_.bins;
      const std::size_t P = static_cast<std::size_t>(st.h) * st.w;
      gseed = Tensor<T>({K});
      for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        for (std::size_t p = 0; p < P; ++p) acc += static_cast<double>(ag.centers[k * P + p]);
        gseed[k] = static_cast<T>(acc);
      }
    }
  }

  Tensor<T> gemb_tok = map_to_tokens(gemb);
  nn::relu_mask_inplace(emb0_, gemb_tok);
  Tensor<T> gfused = seed_proj_.backward(gemb_tok);
  auto sg = seed_bins_backward(fused_, seed_w_.value, seed_, gseed, config_.d_min, config_.d_max);
  seed_w_.grad += sg.w;
  seed_b_.grad += sg.b;
  gfused += sg.fused;

  Tensor<T> gfv;
  Tensor<T> gspec;
  if (config_.use_audio) {
    auto ag = cross_modal_attention_backward(fv_, fa_, wq_.value, wk_.value, wv_.value, config_.heads, att_cache_,
                                             gfused);
    wq_.grad += ag.wq;
    wk_.grad += ag.wk;
    wv_.grad += ag.wv;
    gfv = std::move(ag.fv);
    Tensor<T> gin = audio_.backward(tokens_to_map(ag.fa, tok_h_, tok_w_), need_spec_grad);
    if (need_spec_grad) {
      gspec = bilinear_resize_backward(gin, spec_.dim(1), spec_.dim(2));
      if (config_.audio_log)
        for (std::size_t i = 0; i < gspec.size(); ++i)
          gspec[i] = static_cast<T>(static_cast<double>(gspec[i]) / (1.0 + static_cast<double>(spec_[i])));
    }
  } else {
    gfv = std::move(gfused);
  }

  auto dg = decoder_.backward(gdec);
  std::vector<Tensor<T>> genc(config_.encoder_channels.size());
  const int levels = static_cast<int>(genc.size());
  genc.back() = tokens_to_map(gfv, tok_h_, tok_w_);
  genc.back() += dg.bottleneck;
  for (int i = 0; i + 1 < levels; ++i) genc[levels - 2 - i] = std::move(dg.skips[i]);
  visual_.backward(genc, false);
  return gspec;
}

template <typename T>
nn::ParamList<T> AvsNet<T>::parameters() {
  nn::ParamList<T> p;
  visual_.collect(p);
  decoder_.collect(p);
  if (config_.use_audio) {
    audio_.collect(p);
    p.push_back(&wq_);
    p.push_back(&wk_);
    p.push_back(&wv_);
  }
  p.push_back(&seed_w_);
  p.push_back(&seed_b_);
  seed_proj_.collect(p);
  for (auto& st : stages_) {
    st.proj.collect(p);
    st.hidden.collect(p);
    st.points.collect(p);
  }
  qt_head_.collect(p);
  return p;
}

template <typename T>
void AvsNet<T>::save(const std::filesystem::path& dir, const KeyValues& extra) {
  KeyValues hyper = config_.to_hyper();
  for (const auto& [k, v] : extra) hyper[k] = v;
  save_checkpoint(dir, parameters(), hyper);
}

template <typename T>
AvsNet<T> AvsNet<T>::load(const std::filesystem::path& dir) {
  AvsNet<T> net(AvsNetConfig::from_hyper(read_checkpoint_manifest(dir)));
  load_checkpoint(dir, net.parameters());
  return net;
}

template class AvsNet<float>;
template class AvsNet<double>;
template Tensor<float> map_to_tokens(const Tensor<float>&);
template Tensor<double> map_to_tokens(const Tensor<double>&);
template Tensor<float> tokens_to_map(const Tensor<float>&, int, int);
template Tensor<double> tokens_to_map(const Tensor<double>&, int, int);

}  // namespace avs::avsnet
