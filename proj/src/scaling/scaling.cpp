#include "avs/scaling/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace avs::scaling {

std::string method_name(Method m) { return m == Method::Median ? "median" : "meanstd"; }

Method parse_method(const std::string& name) {
  if (name == "median") return Method::Median;
  if (name == "meanstd") return Method::MeanStd;
  throw std::invalid_argument("unknown scaling method '" + name + "' (expected median or meanstd)");
}

std::string ScaleFactor::to_string() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "method = %s\ns = %.17g\nmu_r = %.17g\nsigma_r = %.17g\nmu_m = %.17g\nsigma_m = %.17g\npixels = %zu\n",
                method_name(method).c_str(), s, mu_r, sigma_r, mu_m, sigma_m, pixels);
  return buf;
}

ScaleFactor ScaleFactor::parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto num = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument(std::string("scale factor record lacks '") + key + "'");
    return std::stod(it->second);
  };
  ScaleFactor f;
  if (!kv.count("method")) throw std::invalid_argument("scale factor record lacks 'method'");
  f.method = parse_method(kv["method"]);
  f.s = num("s");
  f.mu_r = num("mu_r");
  f.sigma_r = num("sigma_r");
  f.mu_m = num("mu_m");
  f.sigma_m = num("sigma_m");
  f.pixels = kv.count("pixels") ? std::stoul(kv["pixels"]) : 0;
  return f;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t n = v.size(), mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

template <typename T>
Tensor<T> joint_valid_mask(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask) {
  relative.require_same_shape(pseudo, "scaling");
  if (!mask.empty()) relative.require_same_shape(mask, "scaling mask");
  Tensor<T> out(relative.shape());
  for (std::size_t i = 0; i < relative.size(); ++i) {
    const bool ok = (mask.empty() || mask[i] > T(0)) && std::isfinite(relative[i]) && relative[i] > T(0) &&
                    std::isfinite(pseudo[i]) && pseudo[i] > T(0);
    out[i] = ok ? T(1) : T(0);
  }
  return out;
}

namespace {

template <typename T>
void gather(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask, std::vector<double>& r,
            std::vector<double>& m) {
  const Tensor<T> valid = joint_valid_mask(relative, pseudo, mask);
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (valid[i] > T(0)) {
      r.push_back(static_cast<double>(relative[i]));
      m.push_back(static_cast<double>(pseudo[i]));
    }
  if (r.empty()) throw std::invalid_argument("scaling: no pixel is valid in both maps");
}

std::pair<double, double> moments(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

template <typename T>
Tensor<T> apply_scale(const Tensor<T>& relative, const ScaleFactor& f) {
  Tensor<T> out(relative.shape());
  if (f.method == Method::Median) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(static_cast<double>(relative[i]) * f.s);
  } else {
    const double a = f.sigma_m / f.sigma_r;
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<T>(std::max((static_cast<double>(relative[i]) - f.mu_r) * a + f.mu_m, kMeanStdFloor));
  }
  return out;
}

template <typename T>
Scaled<T> median_scale(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask) {
  std::vector<double> r, m;
  gather(relative, pseudo, mask, r, m);
  const double mr = median(std::move(r));
  if (!(mr > 0)) throw std::invalid_argument("median_scale: median of the relative map is not positive");
  ScaleFactor f;
  f.method = Method::Median;
  f.pixels = m.size();
  f.s = median(std::move(m)) / mr;
  return {apply_scale(relative, f), f};
}

template <typename T>
Scaled<T> meanstd_scale(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask) {
  std::vector<double> r, m;
  gather(relative, pseudo, mask, r, m);
  ScaleFactor f;
  f.method = Method::MeanStd;
  f.pixels = r.size();
  std::tie(f.mu_r, f.sigma_r) = moments(r);
  std::tie(f.mu_m, f.sigma_m) = moments(m);
  if (!(f.sigma_r > 1e-12 * std::max(1.0, std::abs(f.mu_r))))
    throw std::invalid_argument("meanstd_scale: relative map is constant over the valid pixels");
  return {apply_scale(relative, f), f};
}

template <typename T>
Scaled<T> scale(Method method, const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask) {
  return method == Method::Median ? median_scale(relative, pseudo, mask) : meanstd_scale(relative, pseudo, mask);
}

#define AVS_INSTANTIATE(T)                                                                      \
  template Tensor<T> joint_valid_mask(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> apply_scale(const Tensor<T>&, const ScaleFactor&);                        \
  template Scaled<T> median_scale(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);       \
  template Scaled<T> meanstd_scale(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);      \
  template Scaled<T> scale(Method, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);
AVS_INSTANTIATE(float)
AVS_INSTANTIATE(double)
#undef AVS_INSTANTIATE

}  // namespace avs::scaling
