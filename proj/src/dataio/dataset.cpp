#include "avs/dataio/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "avs/dataio/config.hpp"
#include "avs/dataio/image_io.hpp"
#include "avs/signal/wav.hpp"

namespace avs::dataio {

namespace fs = std::filesystem;

std::string sample_id(int scene_id, int frame_index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "scene_%04d/frame_%05d", scene_id, frame_index);
  return buf;
}

std::optional<FrameRef> parse_sample_id(const std::string& id) {
  int s = 0, f = 0, used = 0;
  if (std::sscanf(id.c_str(), "scene_%d/frame_%d%n", &s, &f, &used) != 2 || used != static_cast<int>(id.size()) ||
      s < 0 || f < 0)
    return std::nullopt;
  return FrameRef{s, f};
}

void SplitManifest::validate() const {
  std::set<std::string> seen;
  for (const auto* list : {&train, &val, &test})
    for (const auto& id : *list)
      if (!seen.insert(id).second) throw std::invalid_argument("split manifest: '" + id + "' listed more than once");
}

std::string SplitManifest::to_string() const {
  std::ostringstream os;
  for (const auto& id : train) os << "train " << id << '\n';
  for (const auto& id : val) os << "val " << id << '\n';
  for (const auto& id : test) os << "test " << id << '\n';
  return os.str();
}

SplitManifest SplitManifest::parse(const std::string& text) {
  SplitManifest m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string split, id, extra;
    if (!(ls >> split)) continue;
    if (!(ls >> id) || (ls >> extra))
      throw std::invalid_argument("split manifest line " + std::to_string(lineno) + ": expected '<split> <id>'");
    if (split == "train")
      m.train.push_back(id);
    else if (split == "val")
      m.val.push_back(id);
    else if (split == "test")
      m.test.push_back(id);
    else
      throw std::invalid_argument("split manifest line " + std::to_string(lineno) + ": unknown split '" + split + "'");
  }
  m.validate();
  return m;
}

SplitManifest SplitManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

void SplitManifest::save(const fs::path& path) const {
  validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_string();
}

namespace {

fs::path stem_path(const fs::path& root, const std::string& id) { return root / id; }
fs::path rgb_path(const fs::path& root, const std::string& id) { return root / (id + ".png"); }
fs::path depth_path(const fs::path& root, const std::string& id) { return root / (id + ".depth.png"); }
fs::path wav_path(const fs::path& root, const std::string& id) { return root / (id + ".wav"); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void export_dataset(const fs::path& root, const std::vector<SceneSample>& samples, const SplitManifest& manifest) {
  manifest.validate();
  fs::create_directories(root);
  if (!samples.empty()) {
    const auto& K = samples.front().intrinsics;
    for (const auto& s : samples)
      if (s.intrinsics.fx != K.fx || s.intrinsics.fy != K.fy || s.intrinsics.cx != K.cx || s.intrinsics.cy != K.cy)
        throw std::invalid_argument("export_dataset: samples have different intrinsics");
    Config c;
    c.set("camera.fx", fmt(K.fx));
    c.set("camera.fy", fmt(K.fy));
    c.set("camera.cx", fmt(K.cx));
    c.set("camera.cy", fmt(K.cy));
    c.set("camera.height", std::to_string(samples.front().depth.dim(0)));
    c.set("camera.width", std::to_string(samples.front().depth.dim(1)));
    std::ofstream out(root / "intrinsics.ini", std::ios::binary);
    out << c.to_string();
  }
  for (const auto& s : samples) {
    const std::string id = sample_id(s.scene_id, s.frame_index);
    fs::create_directories(stem_path(root, id).parent_path());
    write_rgb_png(rgb_path(root, id), s.rgb);
    write_depth_png(depth_path(root, id), s.depth);
    signal::write_wav(wav_path(root, id), s.echo);
  }
  manifest.save(root / "split.manifest");
}

Dataset Dataset::open(const fs::path& root, const std::optional<SplitManifest>& manifest) {
  Dataset d;
  d.root_ = root;
  if (!fs::exists(root)) throw std::runtime_error("dataset root " + root.string() + " does not exist");
  if (fs::exists(root / "intrinsics.ini")) {
    const Config c = Config::load(root / "intrinsics.ini");
    d.intrinsics_ = {c.get_double("camera.fx", 1.0), c.get_double("camera.fy", 1.0), c.get_double("camera.cx", 0.0),
                     c.get_double("camera.cy", 0.0)};
    d.height_ = static_cast<int>(c.get_int("camera.height", 0));
    d.width_ = static_cast<int>(c.get_int("camera.width", 0));
  }

  std::optional<SplitManifest> m = manifest;
  if (!m && fs::exists(root / "split.manifest")) m = SplitManifest::load(root / "split.manifest");

  auto complete = [&](const std::string& id) {
    return fs::exists(rgb_path(root, id)) && fs::exists(depth_path(root, id)) && fs::exists(wav_path(root, id));
  };
  auto add = [&](const std::string& id, Split split) {
    const auto ref = parse_sample_id(id);
    if (!ref) {
      d.warnings_.push_back("malformed sample identifier '" + id + "' skipped");
      return;
    }
    if (!complete(id)) {
      d.warnings_.push_back("sample " + id + " is missing files and was excluded");
      return;
    }
    d.entries_.push_back({id, *ref, split});
  };

  if (m) {
    for (const auto& id : m->train) add(id, Split::Train);
    for (const auto& id : m->val) add(id, Split::Val);
    for (const auto& id : m->test) add(id, Split::Test);
    if (d.entries_.size() != m->size())
      d.warnings_.push_back("manifest lists " + std::to_string(m->size()) + " samples but " +
                            std::to_string(d.entries_.size()) + " were found");
  } else {
    std::set<std::string> ids;
    for (const auto& scene : fs::directory_iterator(root)) {
      if (!scene.is_directory()) continue;
      for (const auto& f : fs::directory_iterator(scene.path())) {
        const std::string name = f.path().filename().string();
        const std::string suffix = ".depth.png";
        if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
          ids.insert(scene.path().filename().string() + "/" + name.substr(0, name.size() - suffix.size()));
      }
    }
    for (const auto& id : ids) add(id, Split::Train);
  }
  if (!d.entries_.empty() && !fs::exists(root / "intrinsics.ini"))
    d.warnings_.push_back("intrinsics.ini missing; using unit intrinsics");
  return d;
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].split == split) out.push_back(i);
  return out;
}

SceneSample Dataset::load(std::size_t index) const {
  const Entry& e = entries_.at(index);
  SceneSample s;
  s.rgb = read_rgb_png(rgb_path(root_, e.id));
  s.depth = read_depth_png(depth_path(root_, e.id));
  s.echo = signal::read_wav(wav_path(root_, e.id));
  if (s.rgb.dim(1) != s.depth.dim(0) || s.rgb.dim(2) != s.depth.dim(1))
    throw std::runtime_error(e.id + ": RGB " + shape_str(s.rgb.shape()) + " and depth " + shape_str(s.depth.shape()) +
                             " disagree");
  if (height_ > 0 && (s.depth.dim(0) != height_ || s.depth.dim(1) != width_))
    throw std::runtime_error(e.id + ": size differs from intrinsics.ini");
  s.intrinsics = intrinsics_;
  s.scene_id = e.ref.scene_id;
  s.frame_index = e.ref.frame_index;
  return s;
}

std::optional<SceneSample> Dataset::try_load(std::size_t index, std::string* diagnostic) const {
  try {
    return load(index);
  } catch (const std::exception& ex) {
    if (diagnostic) *diagnostic = ex.what();
    return std::nullopt;
  }
}

}  // namespace avs::dataio
