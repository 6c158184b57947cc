#include "avs/core/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "avs/core/tensor_io.hpp"

namespace avs {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

KeyValues read_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.txt");
  if (!is) throw std::runtime_error("checkpoint: missing manifest in " + dir.string());
  KeyValues kv;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed manifest line '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const nn::ParamList<T>& params, const KeyValues& hyper) {
  std::filesystem::create_directories(dir);
  KeyValues entries;
  for (const auto& [k, v] : hyper) entries["hyper." + k] = v;
  entries["dtype"] = std::is_same_v<T, float> ? "f32" : "f64";
  for (const auto* p : params) {
    if (entries.count("param." + p->name)) throw std::runtime_error("checkpoint: duplicate parameter " + p->name);
    entries["param." + p->name] = shape_str(p->value.shape());
    write_avst(dir / (p->name + ".avst"), p->value);
  }
  std::ofstream os(dir / "manifest.txt");
  os << "# avs checkpoint\n";
  for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
  if (!os) throw std::runtime_error("checkpoint: cannot write manifest in " + dir.string());
}

template <typename T>
KeyValues load_checkpoint(const std::filesystem::path& dir, const nn::ParamList<T>& params) {
  const KeyValues entries = read_manifest(dir);
  for (auto* p : params) {
    const auto it = entries.find("param." + p->name);
    if (it == entries.end()) throw std::runtime_error("checkpoint: parameter " + p->name + " not in manifest");
    Tensor<T> value = read_avst<T>(dir / (p->name + ".avst"));
    if (value.shape() != p->value.shape()) {
      throw std::runtime_error("checkpoint: " + p->name + " has shape " + shape_str(value.shape()) + ", model expects " +
                               shape_str(p->value.shape()));
    }
    p->value = std::move(value);
    p->grad = Tensor<T>(p->value.shape());
  }
  KeyValues hyper;
  for (const auto& [k, v] : entries) {
    if (k.rfind("hyper.", 0) == 0) hyper[k.substr(6)] = v;
  }
  return hyper;
}

KeyValues read_checkpoint_manifest(const std::filesystem::path& dir) {
  KeyValues hyper;
  for (const auto& [k, v] : read_manifest(dir)) {
    if (k.rfind("hyper.", 0) == 0) hyper[k.substr(6)] = v;
  }
  return hyper;
}

template void save_checkpoint<float>(const std::filesystem::path&, const nn::ParamList<float>&, const KeyValues&);
template void save_checkpoint<double>(const std::filesystem::path&, const nn::ParamList<double>&, const KeyValues&);
template KeyValues load_checkpoint<float>(const std::filesystem::path&, const nn::ParamList<float>&);
template KeyValues load_checkpoint<double>(const std::filesystem::path&, const nn::ParamList<double>&);

}  // namespace avs
