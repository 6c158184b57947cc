#include "avs/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "avs/cli/pipeline.hpp"
#include "avs/core/tensor_io.hpp"
#include "avs/dataio/dataset.hpp"
#include "avs/dataio/image_io.hpp"
#include "avs/metrics/metrics.hpp"
#include "avs/scaling/scaling.hpp"
#include "avs/signal/wav.hpp"

namespace avs::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  long seed = -1;
  std::string out;
  std::string data;
  std::string model;
  std::string split = "test";
  bool no_audio = false;
  std::string method = "median";
  double max_depth = 12.0;
  int scales = 0;  // 0 keeps selfsup.scales
  int scenes = 2;
  int frames = 50;
  std::string wav, relative, pseudo, pred, gt;
  std::vector<std::string> inputs;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text, CommandResult& result) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
  result.artifacts.push_back(path);
}

void write_trace(const fs::path& path, const std::vector<double>& trace, CommandResult& result) {
  std::ostringstream os;
  os << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << full(trace[i]) << '\n';
  write_text(path, os.str(), result);
}

dataio::Config load_config(const Options& o) {
  dataio::Config c = o.config_path.empty() ? dataio::Config{} : dataio::Config::load(o.config_path);
  c.apply_overrides(o.sets);
  return c;
}

std::vector<fs::path> files_with_suffix(const fs::path& root, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0 &&
        name.find(".scale.txt") == std::string::npos)
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<dataio::Split> parse_split(const std::string& s) {
  if (s == "train") return dataio::Split::Train;
  if (s == "val") return dataio::Split::Val;
  if (s == "test") return dataio::Split::Test;
  if (s == "all") return std::nullopt;
  throw UsageError("unknown split '" + s + "' (expected train, val, test or all)");
}

struct Loaded {
  std::vector<std::string> ids;
  std::vector<dataio::SceneSample> samples;
};

Loaded load_split(const dataio::Dataset& d, std::optional<dataio::Split> split, std::ostream& err) {
  Loaded l;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (split && d.entries()[i].split != *split) continue;
    std::string why;
    auto s = d.try_load(i, &why);
    if (!s) {
      err << "warning: skipping " << d.entries()[i].id << ": " << why << '\n';
      continue;
    }
    l.ids.push_back(d.entries()[i].id);
    l.samples.push_back(std::move(*s));
  }
  return l;
}

dataio::Dataset open_data(const Options& o, std::ostream& err) {
  if (o.data.empty()) throw UsageError("--data is required");
  auto d = dataio::Dataset::open(o.data);
  for (const auto& w : d.warnings()) err << "warning: " << w << '\n';
  return d;
}

fs::path need_out(const Options& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  return o.out;
}

// Ground truth for a prediction: a dataset depth PNG or a matching tensor.
Tensor<double> read_depth_any(const fs::path& p) {
  const std::string name = p.filename().string();
  if (name.size() > 4 && name.compare(name.size() - 4, 4, ".png") == 0) return dataio::read_depth_png(p).cast<double>();
  return read_avst<double>(p);
}

fs::path sample_relpath(const fs::path& root, const fs::path& file, const std::string& suffix) {
  std::string rel = fs::relative(file, root).generic_string();
  return rel.substr(0, rel.size() - suffix.size());
}

template <typename T>
class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  void synth_data(CommandResult& r) {
    const fs::path root = need_out(o_);
    const auto c = load_config(o_);
    if (o_.scenes < 0 || o_.frames < 1) throw UsageError("--scenes must be >= 0 and --frames >= 1");
    const std::uint64_t seed = o_.seed >= 0 ? static_cast<std::uint64_t>(o_.seed) : 0;
    const auto samples = corridor_sequences(o_.scenes, o_.frames, seed, random_options_from(c), scene_spec_from(c));
    dataio::SplitManifest m;
    const long val_every = c.get_int("split.val_every", 5), test_every = c.get_int("split.test_every", 5);
    for (const auto& s : samples) {
      const std::string id = dataio::sample_id(s.scene_id, s.frame_index);
      // Whole scenes go to one split so that triples stay within it.
      if (val_every > 0 && s.scene_id % val_every == val_every - 2)
        m.val.push_back(id);
      else if (test_every > 0 && s.scene_id % test_every == test_every - 1)
        m.test.push_back(id);
      else
        m.train.push_back(id);
    }
    if (fs::exists(root)) fs::remove_all(root);
    dataio::export_dataset(root, samples, m);
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) r.artifacts.push_back(e.path());
    std::sort(r.artifacts.begin(), r.artifacts.end());
    out_ << "wrote " << samples.size() << " samples in " << o_.scenes << " scenes to " << root.string() << '\n';
  }

  void stft(CommandResult& r) {
    if (o_.wav.empty()) throw UsageError("--wav is required");
    const fs::path dst = need_out(o_);
    const auto clip = signal::read_wav(o_.wav);
    const auto spec = signal::compute_stft(clip, stft_from(load_config(o_)));
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    write_avst(dst, spec.mag.cast<T>());
    r.artifacts.push_back(dst);
    out_ << "spectrogram " << shape_str(spec.mag.shape()) << " -> " << dst.string() << '\n';
  }

  void train_avsnet(CommandResult& r) {
    const fs::path dst = need_out(o_);
    auto c = load_config(o_);
    if (o_.seed >= 0) {
      c.set("avsnet.seed", std::to_string(o_.seed));
      c.set("avsnet.train_seed", std::to_string(o_.seed));
    }
    auto cfg = avsnet_config_from(c);
    if (o_.no_audio) cfg.use_audio = false;
    auto tc = avsnet_train_from(c);
    tc.max_depth = o_.max_depth;
    const auto d = open_data(o_, err_);
    const auto stft = stft_from(c);
    const auto train = to_avs_samples<T>(load_split(d, dataio::Split::Train, err_).samples, stft);
    const auto val = to_avs_samples<T>(load_split(d, dataio::Split::Val, err_).samples, stft);
    if (train.empty()) throw std::runtime_error("no training samples in " + o_.data);
    avsnet::AvsNet<T> net(cfg);
    const auto res = avsnet::train_avsnet(net, train, val, tc);
    KeyValues extra{{"train.best_step", std::to_string(res.best_step)}};
    net.save(dst, extra);
    for (const auto& e : fs::directory_iterator(dst)) r.artifacts.push_back(e.path());
    write_trace(dst / "loss_trace.csv", res.loss_trace, r);
    out_ << "trained " << (cfg.use_audio ? "RGB-Echoes" : "RGB-only") << " model for " << tc.steps
         << " steps; final loss " << num(res.loss_trace.back()) << '\n';
  }

  void train_relative(CommandResult& r) {
    const fs::path dst = need_out(o_);
    auto c = load_config(o_);
    if (o_.scales != 0) c.set("selfsup.scales", std::to_string(o_.scales));
    const long scales = c.get_int("selfsup.scales", 4);
    if (scales != 3 && scales != 4) throw UsageError("--scales must be 3 or 4");
    if (o_.seed >= 0) {
      c.set("selfsup.seed", std::to_string(o_.seed));
      c.set("selfsup.train_seed", std::to_string(o_.seed));
    }
    const auto d = open_data(o_, err_);
    const auto train = load_split(d, dataio::Split::Train, err_);
    const int interval = static_cast<int>(c.get_int("selfsup.interval", 20));
    const auto triples = build_triples<T>(train.samples, interval);
    if (triples.empty())
      throw std::runtime_error("no frame triples at interval " + std::to_string(interval) + " in the training split");
    selfsup::DepthNet<T> depth(depthnet_config_from(c));
    selfsup::PoseNet<T> pose;
    auto tc = selfsup_train_from(c);
    tc.checkpoint_dir = dst;
    const auto res = selfsup::train_selfsup(depth, pose, triples, d.intrinsics(), tc);
    for (const auto& e : fs::recursive_directory_iterator(dst))
      if (e.is_regular_file()) r.artifacts.push_back(e.path());
    write_trace(dst / "loss_trace.csv", res.loss_trace, r);
    out_ << "trained relative depth on " << triples.size() << " triples for " << tc.steps << " steps; final loss "
         << num(res.loss_trace.back()) << '\n';
  }

  void infer(CommandResult& r) {
    if (o_.model.empty()) throw UsageError("--model is required");
    const fs::path dst = need_out(o_);
    const auto c = load_config(o_);
    const auto d = open_data(o_, err_);
    const auto data = load_split(d, parse_split(o_.split), err_);
    const fs::path model = o_.model;
    if (fs::exists(model / "depth" / "manifest.txt")) {
      auto net = selfsup::DepthNet<T>::load(model / "depth");
      const auto tc = selfsup_train_from(c);
      for (std::size_t i = 0; i < data.ids.size(); ++i)
        emit(dst / (data.ids[i] + ".avst"),
             selfsup::predict_relative_depth(net, data.samples[i].rgb.cast<T>(), tc.d_min, tc.d_max), r);
    } else {
      auto net = avsnet::AvsNet<T>::load(model);
      const auto samples = to_avs_samples<T>(data.samples, stft_from(c));
      for (std::size_t i = 0; i < data.ids.size(); ++i)
        emit(dst / (data.ids[i] + ".avst"), net.forward(samples[i].rgb, samples[i].spec).depth, r);
    }
    out_ << "wrote " << data.ids.size() << " depth maps to " << dst.string() << '\n';
  }

  void scale(CommandResult& r) {
    if (o_.relative.empty() || o_.pseudo.empty()) throw UsageError("--relative and --pseudo are required");
    const fs::path dst = need_out(o_);
    scaling::Method method;
    try {
      method = scaling::parse_method(o_.method);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    auto one = [&](const fs::path& rel, const fs::path& pse, const fs::path& out_file) {
      const auto R = read_avst<T>(rel);
      const auto M = read_avst<T>(pse);
      const auto s = scaling::scale(method, R, M);
      emit(out_file, s.depth, r);
      fs::path rec = out_file;
      rec.replace_extension(".scale.txt");
      write_text(rec, s.factor.to_string(), r);
    };
    if (fs::is_directory(o_.relative)) {
      const auto files = files_with_suffix(o_.relative, ".avst");
      for (const auto& f : files) {
        const fs::path rel = fs::relative(f, o_.relative);
        const fs::path p = fs::path(o_.pseudo) / rel;
        if (!fs::exists(p)) {
          err_ << "warning: no pseudo depth for " << rel.string() << '\n';
          continue;
        }
        one(f, p, dst / rel);
      }
      out_ << "scaled " << files.size() << " maps with " << o_.method << '\n';
    } else {
      one(o_.relative, o_.pseudo, dst);
      out_ << "scaled " << o_.relative << " with " << o_.method << '\n';
    }
  }

  void eval(CommandResult& r) {
    if (o_.pred.empty() || o_.gt.empty()) throw UsageError("--pred and --gt are required");
    std::vector<metrics::MetricsReport> reports;
    if (fs::is_directory(o_.pred)) {
      for (const auto& f : files_with_suffix(o_.pred, ".avst")) {
        const std::string rel = sample_relpath(o_.pred, f, ".avst").generic_string();
        fs::path g = fs::path(o_.gt) / (rel + ".depth.png");
        if (!fs::exists(g)) g = fs::path(o_.gt) / (rel + ".avst");
        if (!fs::exists(g)) {
          err_ << "warning: no ground truth for " << rel << '\n';
          continue;
        }
        reports.push_back(metrics::compute_metrics(read_avst<double>(f), read_depth_any(g), o_.max_depth));
      }
      if (reports.empty()) throw std::runtime_error("no prediction matched a ground-truth map");
    } else {
      reports.push_back(metrics::compute_metrics(read_avst<double>(o_.pred), read_depth_any(o_.gt), o_.max_depth));
    }
    const auto mean = metrics::mean_report(reports);
    std::ostringstream os;
    const auto& names = metrics::metric_names();
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? " " : "") << names[i];
    os << '\n';
    const auto row = metrics::as_row(mean);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << num(row[i]);
    os << '\n';
    out_ << os.str();
    if (!o_.out.empty()) write_text(o_.out, os.str(), r);
  }

  void saliency(CommandResult& r) {
    if (o_.model.empty()) throw UsageError("--model is required");
    const fs::path dst = need_out(o_);
    const auto c = load_config(o_);
    const auto d = open_data(o_, err_);
    const auto data = load_split(d, parse_split(o_.split), err_);
    auto net = avsnet::AvsNet<T>::load(o_.model);
    const auto samples = to_avs_samples<T>(data.samples, stft_from(c));
    std::ostringstream summary;
    summary << "id,argmax_frame\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto s = avsnet::saliency(net, samples[i].rgb, samples[i].spec);
      emit(dst / (data.ids[i] + ".saliency.avst"), s.map, r);
      std::ostringstream prof;
      prof << "frame,saliency\n";
      for (std::size_t t = 0; t < s.profile.size(); ++t) prof << t << ',' << full(s.profile[t]) << '\n';
      write_text(dst / (data.ids[i] + ".profile.csv"), prof.str(), r);
      const auto peak = std::max_element(s.profile.begin(), s.profile.end()) - s.profile.begin();
      summary << data.ids[i] << ',' << peak << '\n';
    }
    write_text(dst / "saliency_peaks.csv", summary.str(), r);
    out_ << "saliency for " << samples.size() << " samples\n";
  }

 private:
  void emit(const fs::path& path, const Tensor<T>& t, CommandResult& r) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_avst(path, t);
    r.artifacts.push_back(path);
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
};

std::vector<double> read_eval_row(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot open " + p.string());
  std::string header, values;
  std::getline(is, header);
  std::getline(is, values);
  std::istringstream hs(header), vs(values);
  std::map<std::string, double> kv;
  std::string name;
  while (hs >> name) {
    double v;
    if (!(vs >> v)) throw std::runtime_error(p.string() + ": malformed evaluation file");
    kv[name] = v;
  }
  std::vector<double> row;
  for (const auto& m : metrics::metric_names()) {
    const auto it = kv.find(m);
    if (it == kv.end()) throw std::runtime_error(p.string() + ": missing column " + m);
    row.push_back(it->second);
  }
  return row;
}

void report(const Options& o, std::ostream& out, CommandResult& r) {
  if (o.inputs.empty()) throw UsageError("--inputs needs at least one evaluation file");
  const fs::path dst = need_out(o);
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  for (const auto& in : o.inputs) {
    labels.push_back(fs::path(in).stem().string());
    rows.push_back(read_eval_row(in));
  }
  const auto& names = metrics::metric_names();
  std::size_t width = 6;
  for (const auto& l : labels) width = std::max(width, l.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "method";
  for (std::size_t k = 0; k < names.size(); ++k) os << "  " << std::setw(k + 1 < names.size() ? 9 : 0) << names[k];
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << std::left << std::setw(static_cast<int>(width)) << labels[i];
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      os << "  " << std::setw(k + 1 < rows[i].size() ? 9 : 0) << num(rows[i][k]).substr(0, 8);
    os << '\n';
  }
  out << os.str();
  write_text(dst / "table.txt", os.str(), r);
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> col;
    for (const auto& row : rows) col.push_back(row[m]);
    write_text(dst / (names[m] + ".svg"), bar_chart_svg(names[m], labels, col), r);
  }
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
  const int bar = 60, gap = 30, left = 60, top = 40, plot_h = 200;
  const int width = left + static_cast<int>(values.size()) * (bar + gap) + gap;
  const int height = top + plot_h + 60;
  double vmax = 0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax <= 0) vmax = 1;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << xml_escape(title) << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - gap / 2 << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int x = left + gap / 2 + static_cast<int>(i) * (bar + gap);
    const int h = static_cast<int>(std::lround(plot_h * std::abs(values[i]) / vmax));
    os << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h << "\" width=\"" << bar << "\" height=\"" << h
       << "\" fill=\"#4a78b0\"/>\n";
    os << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + plot_h - h - 4
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(values[i]).substr(0, 6)
       << "</text>\n";
    os << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + plot_h + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(labels[i])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

CommandResult run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CommandResult result;
  Options o;
  CLI::App app{"Audio-visual metric depth and scale correction toolkit", "avs_cli"};
  app.require_subcommand(1, 1);
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config_path, "INI configuration file");
    s->add_option("--set", o.sets, "Configuration override section.key=value (repeatable)");
    s->add_option("--seed", o.seed, "Random seed");
    s->add_option("--out", o.out, "Output path");
  };
  auto* synth = app.add_subcommand("synth-data", "Render a synthetic corridor dataset");
  common(synth);
  synth->add_option("--scenes", o.scenes, "Number of scenes");
  synth->add_option("--frames", o.frames, "Frames per scene");
  auto* stft = app.add_subcommand("stft", "Spectrogram of a stereo WAV file");
  common(stft);
  stft->add_option("--wav", o.wav, "Input WAV")->required();
  auto* tav = app.add_subcommand("train-avsnet", "Train the metric depth network");
  common(tav);
  tav->add_option("--data", o.data, "Dataset root")->required();
  tav->add_flag("--no-audio", o.no_audio, "Train the RGB-only baseline");
  tav->add_option("--max-depth", o.max_depth, "Validation depth cap in metres");
  auto* trel = app.add_subcommand("train-relative", "Self-supervised relative depth training");
  common(trel);
  trel->add_option("--data", o.data, "Dataset root")->required();
  trel->add_option("--scales", o.scales, "Disparity scales (3 or 4)");
  auto* inf = app.add_subcommand("infer", "Predict depth maps for a dataset split");
  common(inf);
  inf->add_option("--model", o.model, "Checkpoint directory")->required();
  inf->add_option("--data", o.data, "Dataset root")->required();
  inf->add_option("--split", o.split, "train, val, test or all");
  auto* sc = app.add_subcommand("scale", "Scale relative depth with pseudo metric depth");
  common(sc);
  sc->add_option("--relative", o.relative, "Relative depth tensor or directory")->required();
  sc->add_option("--pseudo", o.pseudo, "Pseudo metric depth tensor or directory")->required();
  sc->add_option("--method", o.method, "median or meanstd");
  auto* ev = app.add_subcommand("eval", "Depth metrics against ground truth");
  common(ev);
  ev->add_option("--pred", o.pred, "Prediction tensor or directory")->required();
  ev->add_option("--gt", o.gt, "Ground-truth tensor, depth PNG, or directory")->required();
  ev->add_option("--max-depth", o.max_depth, "Depth cap in metres");
  auto* sal = app.add_subcommand("saliency", "Input-gradient saliency over spectrogram frames");
  common(sal);
  sal->add_option("--model", o.model, "AVS-Net checkpoint")->required();
  sal->add_option("--data", o.data, "Dataset root")->required();
  sal->add_option("--split", o.split, "train, val, test or all");
  auto* rep = app.add_subcommand("report", "Table and SVG plots from evaluation files");
  common(rep);
  rep->add_option("--inputs", o.inputs, "Evaluation files written by eval --out")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return result;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    result.exit_code = 1;
    return result;
  }

  const char* prec = std::getenv("AVS_PRECISION");
  const std::string precision = prec ? prec : "f32";
  if (precision != "f32" && precision != "f64") {
    err << "error: AVS_PRECISION must be f32 or f64, got '" << precision << "'\n";
    result.exit_code = 1;
    return result;
  }

  auto dispatch = [&](auto runner) {
    if (*synth) runner.synth_data(result);
    else if (*stft) runner.stft(result);
    else if (*tav) runner.train_avsnet(result);
    else if (*trel) runner.train_relative(result);
    else if (*inf) runner.infer(result);
    else if (*sc) runner.scale(result);
    else if (*ev) runner.eval(result);
    else if (*sal) runner.saliency(result);
    else if (*rep) report(o, out, result);
  };
  try {
    if (precision == "f64")
      dispatch(Runner<double>(o, out, err));
    else
      dispatch(Runner<float>(o, out, err));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = 1;
    result.artifacts.clear();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    result.exit_code = 2;
    result.artifacts.clear();
  }
  return result;
}

}  // namespace avs::cli
