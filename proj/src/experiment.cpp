/*=========================================================================
 *
 *  Copyright The ictmsav Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include "ictmsav/experiment.hpp"

#include "ictmsav/error.hpp"
#include "ictmsav/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ictmsav {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

double to_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d))
      throw std::invalid_argument(v);
    return d;
  } catch (const std::exception &) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + v + "'");
  }
}

long long to_integer(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return d;
  } catch (const std::exception &) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

int to_int(const std::string &key, const std::string &v) {
  const long long d = to_integer(key, v);
  if (d < std::numeric_limits<int>::min() || d > std::numeric_limits<int>::max())
    throw ConfigError("key '" + key + "': integer out of range");
  return static_cast<int>(d);
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string &key, const std::string &v) {
  std::vector<double> out;
  for (const auto &part : split(v, ','))
    out.push_back(to_double(key, part));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string join(const std::vector<double> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + fmt(v[i]);
  return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Synth

void SynthSpec::validate(int n_phases) const {
  if (width < 1 || height < 1)
    throw ParameterError("synth size must be positive");
  if (!(background >= 0.0 && background <= 255.0))
    throw ParameterError("synth background intensity must lie in [0, 255]");
  if (background_phase < 0 || background_phase >= n_phases)
    throw ParameterError("synth background phase outside [0, n_phases)");
  for (const auto &r : regions) {
    if (!(r.value >= 0.0 && r.value <= 255.0))
      throw ParameterError("synth region intensity must lie in [0, 255]");
    if (r.phase < 0 || r.phase >= n_phases)
      throw ParameterError("synth region phase outside [0, n_phases)");
    const std::size_t need = r.shape == RegionShape::disk ? 3 : 4;
    if (r.geometry.size() != need)
      throw ParameterError("synth region has the wrong number of geometry values");
    if (r.shape == RegionShape::disk && !(r.geometry[2] > 0.0))
      throw ParameterError("synth disk radius must be positive");
    if (r.shape == RegionShape::rect && !(r.geometry[2] > 0.0 && r.geometry[3] > 0.0))
      throw ParameterError("synth rectangle needs positive width and height");
    if (r.shape == RegionShape::ring && !(r.geometry[2] >= 0.0 && r.geometry[3] > r.geometry[2]))
      throw ParameterError("synth ring needs 0 <= r_inner < r_outer");
  }
  if (bias != BiasKind::none && !(bias_min > 0.0 && bias_max > 0.0))
    throw ParameterError("synth bias field must be strictly positive");
  if (!(bias_width >= 0.0))
    throw ParameterError("synth bias width must be >= 0");
}

std::vector<Region> parse_regions(const std::string &text) {
  std::vector<Region> out;
  for (const auto &item : split(text, ';')) {
    if (item.empty())
      continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("region '" + item + "': expected shape:values");
    const std::string shape = trim(item.substr(0, colon));
    auto nums = to_doubles("synth.regions", item.substr(colon + 1));
    Region r;
    std::size_t geo;
    if (shape == "disk") {
      r.shape = RegionShape::disk;
      geo = 3;
    } else if (shape == "rect") {
      r.shape = RegionShape::rect;
      geo = 4;
    } else if (shape == "ring") {
      r.shape = RegionShape::ring;
      geo = 4;
    } else {
      throw ConfigError("region '" + item + "': unknown shape '" + shape + "' (disk, rect, ring)");
    }
    if (nums.size() != geo + 1 && nums.size() != geo + 2)
      throw ConfigError("region '" + item + "': expected " + std::to_string(geo) + " geometry values, an intensity" +
                        " and an optional phase");
    r.geometry.assign(nums.begin(), nums.begin() + static_cast<std::ptrdiff_t>(geo));
    r.value = nums[geo];
    if (nums.size() == geo + 2) {
      if (nums[geo + 1] != std::floor(nums[geo + 1]))
        throw ConfigError("region '" + item + "': phase must be an integer");
      r.phase = static_cast<int>(nums[geo + 1]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_regions(const std::vector<Region> &regions) {
  std::string s;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto &r = regions[i];
    s += i ? ";" : "";
    s += r.shape == RegionShape::disk ? "disk:" : r.shape == RegionShape::rect ? "rect:" : "ring:";
    s += join(r.geometry) + "," + fmt(r.value) + "," + std::to_string(r.phase);
  }
  return s;
}

BiasKind parse_bias_kind(const std::string &name) {
  if (name == "none")
    return BiasKind::none;
  if (name == "ramp")
    return BiasKind::ramp;
  if (name == "bump")
    return BiasKind::bump;
  throw ConfigError("unknown bias kind '" + name + "' (none, ramp, bump)");
}

std::string to_string(BiasKind kind) {
  switch (kind) {
  case BiasKind::none: return "none";
  case BiasKind::ramp: return "ramp";
  case BiasKind::bump: return "bump";
  }
  return "none";
}

namespace {

bool inside(const Region &r, double x, double y) {
  const auto &g = r.geometry;
  switch (r.shape) {
  case RegionShape::disk: {
    const double dx = x - g[0], dy = y - g[1];
    return dx * dx + dy * dy <= g[2] * g[2];
  }
  case RegionShape::rect: return x >= g[0] && x < g[0] + g[2] && y >= g[1] && y < g[1] + g[3];
  case RegionShape::ring: {
    const double dx = x - g[0], dy = y - g[1];
    const double d2 = dx * dx + dy * dy;
    return d2 >= g[2] * g[2] && d2 <= g[3] * g[3];
  }
  }
  return false;
}

} // namespace

SynthImage synth(const SynthSpec &spec, int n_phases) {
  spec.validate(n_phases);
  const int w = spec.width, h = spec.height;
  ScalarField piecewise(w, h, spec.background);
  std::vector<int> labels(piecewise.size(), spec.background_phase);
  for (const auto &r : spec.regions)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (inside(r, x, y)) {
          piecewise(x, y) = r.value;
          labels[static_cast<std::size_t>(y) * w + x] = r.phase;
        }

  ScalarField bias(w, h, 1.0);
  if (spec.bias == BiasKind::ramp) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        bias(x, y) = spec.bias_min + (spec.bias_max - spec.bias_min) * (w > 1 ? double(x) / (w - 1) : 0.0);
  } else if (spec.bias == BiasKind::bump) {
    const double s = spec.bias_width > 0.0 ? spec.bias_width : 0.35 * std::max(w, h);
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        bias(x, y) = spec.bias_min + (spec.bias_max - spec.bias_min) * std::exp(-r2 / (2.0 * s * s));
      }
  }
  return {hadamard(bias, piecewise), IndicatorSet::from_labels(labels, w, h, n_phases), std::move(bias)};
}

// ---------------------------------------------------------------------------
// Init

InitSpec InitSpec::parse(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("init '" + text + "': expected kind:values");
  const std::string kind = trim(text.substr(0, colon));
  const std::string rest = trim(text.substr(colon + 1));
  InitSpec s;
  auto expect = [&](std::size_t n) {
    s.numbers = to_doubles("init", rest);
    if (s.numbers.size() != n)
      throw ConfigError("init '" + text + "': expected " + std::to_string(n) + " numbers");
  };
  if (kind == "rect") {
    s.kind = InitKind::rect;
    expect(4);
  } else if (kind == "circle") {
    s.kind = InitKind::circle;
    expect(3);
  } else if (kind == "checkerboard") {
    s.kind = InitKind::checkerboard;
    expect(1);
    if (!(s.numbers[0] >= 1.0))
      throw ConfigError("init checkerboard cell must be >= 1 pixel");
  } else if (kind == "mask" || kind == "labels") {
    s.kind = kind == "mask" ? InitKind::mask : InitKind::labels;
    if (rest.empty())
      throw ConfigError("init '" + text + "': missing file path");
    s.path = rest;
  } else {
    throw ConfigError("init '" + text + "': unknown kind '" + kind + "' (rect, circle, checkerboard, mask, labels)");
  }
  return s;
}

std::string InitSpec::to_string() const {
  switch (kind) {
  case InitKind::rect: return "rect:" + join(numbers);
  case InitKind::circle: return "circle:" + join(numbers);
  case InitKind::checkerboard: return "checkerboard:" + join(numbers);
  case InitKind::mask: return "mask:" + path;
  case InitKind::labels: return "labels:" + path;
  }
  return {};
}

ScalarField contour_interior(const InitSpec &spec, int width, int height) {
  ScalarField in(width, height);
  switch (spec.kind) {
  case InitKind::rect: {
    const auto &n = spec.numbers;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        in(x, y) = (x >= n[0] && x < n[0] + n[2] && y >= n[1] && y < n[1] + n[3]) ? 1.0 : 0.0;
    break;
  }
  case InitKind::circle: {
    const auto &n = spec.numbers;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dx = x - n[0], dy = y - n[1];
        in(x, y) = dx * dx + dy * dy <= n[2] * n[2] ? 1.0 : 0.0;
      }
    break;
  }
  case InitKind::checkerboard: {
    const int cell = static_cast<int>(spec.numbers[0]);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        in(x, y) = ((x / cell + y / cell) % 2 == 0) ? 1.0 : 0.0;
    break;
  }
  case InitKind::mask: {
    const ScalarField m = read_image(spec.path);
    if (m.width() != width || m.height() != height)
      throw ContractViolation("init mask '" + spec.path + "' does not match the image size");
    for (std::size_t i = 0; i < m.size(); ++i)
      in[i] = m[i] > 0.0 ? 1.0 : 0.0;
    break;
  }
  case InitKind::labels: throw ContractViolation("a label-map init has no single contour interior");
  }
  return in;
}

IndicatorSet make_initial_partition(const InitSpec &spec, const ScalarField &f, int n_phases) {
  if (n_phases < 2)
    throw ParameterError("n_phases must be >= 2");
  if (spec.kind == InitKind::labels) {
    const ScalarField labels = read_image(spec.path);
    require_same_shape(labels, f, "init label map");
    return IndicatorSet::from_label_field(labels, n_phases);
  }
  const ScalarField interior = contour_interior(spec, f.width(), f.height());
  std::vector<int> labels(f.size(), 1);
  std::vector<double> outside;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (interior[i] == 1.0)
      labels[i] = 0;
    else
      outside.push_back(f[i]);
  }
  if (n_phases > 2 && !outside.empty()) {
    std::sort(outside.begin(), outside.end());
    std::vector<double> cuts;
    const int groups = n_phases - 1;
    for (int k = 1; k < groups; ++k) {
      const auto idx = static_cast<std::size_t>(std::floor(double(k) * outside.size() / groups));
      cuts.push_back(outside[std::min(idx, outside.size() - 1)]);
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (labels[i] == 0)
        continue;
      int phase = 1;
      for (double c : cuts)
        if (f[i] >= c)
          ++phase;
      labels[i] = std::min(phase, n_phases - 1);
    }
  }
  return IndicatorSet::from_labels(labels, f.width(), f.height(), n_phases);
}

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string> &ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "input",         "truth",          "out",           "seed",        "noise.kind",   "noise.looks",
      "init",          "synth.width",    "synth.height",  "synth.background", "synth.background_phase",
      "synth.regions", "synth.bias",     "synth.bias_min", "synth.bias_max", "synth.bias_width",
      "n_phases",      "lambda",         "mu",            "gamma",       "nu",           "rho",
      "tau",           "sigma",          "p",             "dt",          "c0",           "eta",
      "eps_tv",        "g_floor",        "tol1",          "tol2",        "max_outer",    "max_inner",
      "heat_scale",    "kernel_truncation", "intensity_scale", "update_bias", "update_image", "metrics.foreground"};
  return k;
}

void ExperimentConfig::set(const std::string &raw_key, const std::string &raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  auto &P = params;
  if (key.rfind("synth.", 0) == 0 && !synth)
    synth.emplace();

  if (key == "input") input = v;
  else if (key == "truth") truth = v;
  else if (key == "out") out_dir = v;
  else if (key == "seed") {
    const long long s = to_integer(key, v);
    if (s < 0)
      throw ConfigError("key 'seed': must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "noise.kind") noise.kind = parse_noise_kind(v);
  else if (key == "noise.looks") noise.looks = to_double(key, v);
  else if (key == "init") init = InitSpec::parse(v);
  else if (key == "synth.width") synth->width = to_int(key, v);
  else if (key == "synth.height") synth->height = to_int(key, v);
  else if (key == "synth.background") synth->background = to_double(key, v);
  else if (key == "synth.background_phase") synth->background_phase = to_int(key, v);
  else if (key == "synth.regions") synth->regions = parse_regions(v);
  else if (key == "synth.bias") synth->bias = parse_bias_kind(v);
  else if (key == "synth.bias_min") synth->bias_min = to_double(key, v);
  else if (key == "synth.bias_max") synth->bias_max = to_double(key, v);
  else if (key == "synth.bias_width") synth->bias_width = to_double(key, v);
  else if (key == "n_phases") {
    P.n_phases = to_int(key, v);
    if (P.n_phases < 2)
      throw ConfigError("key 'n_phases': must be >= 2");
    const bool uniform = std::all_of(P.lambdas.begin(), P.lambdas.end(),
                                     [&](double l) { return l == P.lambdas.front(); });
    if (uniform && !P.lambdas.empty())
      P.lambdas.assign(static_cast<std::size_t>(P.n_phases), P.lambdas.front());
  }
  else if (key == "lambda") {
    P.lambdas = to_doubles(key, v);
    if (P.lambdas.size() == 1)
      P.lambdas.assign(static_cast<std::size_t>(P.n_phases), P.lambdas.front());
  }
  else if (key == "mu") P.mu = to_double(key, v);
  else if (key == "gamma") P.gamma = to_double(key, v);
  else if (key == "nu") P.nu = to_double(key, v);
  else if (key == "rho") P.rho = to_double(key, v);
  else if (key == "tau") P.tau = to_double(key, v);
  else if (key == "sigma") P.sigma = to_double(key, v);
  else if (key == "p") P.p = to_double(key, v);
  else if (key == "dt") P.dt = to_double(key, v);
  else if (key == "c0") P.c0 = to_double(key, v);
  else if (key == "eta") P.eta_relax = to_double(key, v);
  else if (key == "eps_tv") P.eps_tv = to_double(key, v);
  else if (key == "g_floor") P.g_floor = to_double(key, v);
  else if (key == "tol1") P.tol1 = to_double(key, v);
  else if (key == "tol2") P.tol2 = to_double(key, v);
  else if (key == "max_outer") P.max_outer = to_int(key, v);
  else if (key == "max_inner") P.max_inner = to_int(key, v);
  else if (key == "heat_scale") P.heat_scale = to_double(key, v);
  else if (key == "kernel_truncation") P.kernel_truncation = to_double(key, v);
  else if (key == "intensity_scale") P.intensity_scale = to_double(key, v);
  else if (key == "update_bias") P.update_bias = to_bool(key, v);
  else if (key == "update_image") P.update_image = to_bool(key, v);
  else if (key == "metrics.foreground") metrics_foreground = to_int(key, v);
  else throw ConfigError("unknown key '" + key + "'");
}

std::string ExperimentConfig::get(const std::string &key) const {
  const auto &P = params;
  if (key == "input") return input;
  if (key == "truth") return truth;
  if (key == "out") return out_dir;
  if (key == "seed") return std::to_string(seed);
  if (key == "noise.kind") return to_string(noise.kind);
  if (key == "noise.looks") return fmt(noise.looks);
  if (key == "init") return init ? init->to_string() : "";
  if (key.rfind("synth.", 0) == 0) {
    if (!synth)
      return "";
    const auto &S = *synth;
    if (key == "synth.width") return std::to_string(S.width);
    if (key == "synth.height") return std::to_string(S.height);
    if (key == "synth.background") return fmt(S.background);
    if (key == "synth.background_phase") return std::to_string(S.background_phase);
    if (key == "synth.regions") return format_regions(S.regions);
    if (key == "synth.bias") return to_string(S.bias);
    if (key == "synth.bias_min") return fmt(S.bias_min);
    if (key == "synth.bias_max") return fmt(S.bias_max);
    if (key == "synth.bias_width") return fmt(S.bias_width);
  }
  if (key == "n_phases") return std::to_string(P.n_phases);
  if (key == "lambda") return join(P.lambdas);
  if (key == "mu") return fmt(P.mu);
  if (key == "gamma") return fmt(P.gamma);
  if (key == "nu") return fmt(P.nu);
  if (key == "rho") return fmt(P.rho);
  if (key == "tau") return fmt(P.tau);
  if (key == "sigma") return fmt(P.sigma);
  if (key == "p") return fmt(P.p);
  if (key == "dt") return fmt(P.dt);
  if (key == "c0") return fmt(P.c0);
  if (key == "eta") return fmt(P.eta_relax);
  if (key == "eps_tv") return fmt(P.eps_tv);
  if (key == "g_floor") return fmt(P.g_floor);
  if (key == "tol1") return fmt(P.tol1);
  if (key == "tol2") return fmt(P.tol2);
  if (key == "max_outer") return std::to_string(P.max_outer);
  if (key == "max_inner") return std::to_string(P.max_inner);
  if (key == "heat_scale") return fmt(P.heat_scale);
  if (key == "kernel_truncation") return fmt(P.kernel_truncation);
  if (key == "intensity_scale") return fmt(P.intensity_scale);
  if (key == "update_bias") return P.update_bias ? "true" : "false";
  if (key == "update_image") return P.update_image ? "true" : "false";
  if (key == "metrics.foreground") return std::to_string(metrics_foreground);
  throw ConfigError("unknown key '" + key + "'");
}

std::string ExperimentConfig::manifest() const {
  std::ostringstream os;
  for (const auto &k : keys()) {
    if (k.rfind("synth.", 0) == 0 && !synth)
      continue;
    if ((k == "input" && input.empty()) || (k == "truth" && truth.empty()) || (k == "init" && !init))
      continue;
    os << k << '=' << get(k) << '\n';
  }
  return os.str();
}

void ExperimentConfig::validate() const {
  if (input.empty() == !synth.has_value())
    throw ConfigError(input.empty() ? "no image source: set 'input' or synth.* keys"
                                    : "both 'input' and synth.* keys given; choose one image source");
  if (noise.kind == NoiseKind::gamma && !(noise.looks > 0.0))
    throw ConfigError("noise.looks must be > 0 for gamma noise");
  try {
    params.validate();
    if (synth)
      synth->validate(params.n_phases);
  } catch (const ParameterError &e) {
    throw ConfigError(e.what());
  }
  if (metrics_foreground < 0 || metrics_foreground >= params.n_phases)
    throw ConfigError("metrics.foreground outside [0, n_phases)");
}

ExperimentConfig ExperimentConfig::parse(const std::string &text, const std::string &origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#')
      continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      cfg.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const Error &e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string &path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError &e) {
    throw ConfigError(e.what());
  }
  return parse(text, path);
}

ScalarField load_experiment_image(const ExperimentConfig &config) {
  ScalarField img = config.input.empty() ? synth(*config.synth, config.params.n_phases).clean
                                         : read_image(config.input);
  NoiseSpec spec = config.noise;
  spec.seed = config.seed;
  for (double &v : img.values())
    v = std::clamp(v, 0.0, 255.0);
  img = apply_noise(img, spec);
  for (double &v : img.values())
    v = std::clamp(v, 0.0, 255.0);
  return img;
}

} // namespace ictmsav
