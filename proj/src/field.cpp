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
#include "ictmsav/field.hpp"

#include "ictmsav/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

namespace ictmsav {

ScalarField::ScalarField(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw ParameterError("field dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ScalarField::ScalarField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1)
    throw ParameterError("field dimensions must be at least 1x1");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ContractViolation("field value count does not match width*height");
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField &ScalarField::operator+=(const ScalarField &rhs) {
  require_same_shape(*this, rhs, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] += rhs.values_[i];
  return *this;
}

ScalarField &ScalarField::operator-=(const ScalarField &rhs) {
  require_same_shape(*this, rhs, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] -= rhs.values_[i];
  return *this;
}

ScalarField &ScalarField::operator*=(double s) {
  for (double &v : values_)
    v *= s;
  return *this;
}

ScalarField operator+(ScalarField lhs, const ScalarField &rhs) { return lhs += rhs; }
ScalarField operator-(ScalarField lhs, const ScalarField &rhs) { return lhs -= rhs; }
ScalarField operator*(ScalarField lhs, double s) { return lhs *= s; }
ScalarField operator*(double s, ScalarField rhs) { return rhs *= s; }

ScalarField hadamard(const ScalarField &a, const ScalarField &b) {
  require_same_shape(a, b, "pointwise product");
  ScalarField out = a;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= b[i];
  return out;
}

void require_same_shape(const ScalarField &a, const ScalarField &b, const char *what) {
  if (!a.same_shape(b))
    throw ContractViolation(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                            std::to_string(b.height()) + ")");
}

// ---------------------------------------------------------------------------
// Kernels

Kernel::Kernel(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty() || taps_.size() % 2 == 0)
    throw ParameterError("kernel taps must have odd length");
  radius_ = static_cast<int>(taps_.size() / 2);
  for (std::size_t i = 0; i < taps_.size(); ++i) {
    if (!(taps_[i] >= 0.0) || !std::isfinite(taps_[i]))
      throw ParameterError("kernel taps must be finite and nonnegative");
    if (taps_[i] != taps_[taps_.size() - 1 - i])
      throw ParameterError("kernel taps must be symmetric");
  }
  const double total = std::accumulate(taps_.begin(), taps_.end(), 0.0);
  if (!(total > 0.0))
    throw ParameterError("kernel taps sum to zero");
  for (double &t : taps_)
    t /= total;
}

std::vector<double> Kernel::weights() const {
  std::vector<double> w;
  w.reserve(taps_.size() * taps_.size());
  for (double ty : taps_)
    for (double tx : taps_)
      w.push_back(ty * tx);
  return w;
}

double Kernel::normalization() const {
  const auto w = weights();
  return std::accumulate(w.begin(), w.end(), 0.0);
}

namespace {

Kernel sampled_gaussian(double std_px, double truncation) {
  const int radius = static_cast<int>(std::ceil(truncation * std_px));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  const double denom = 2.0 * std_px * std_px;
  for (int r = -radius; r <= radius; ++r)
    taps[static_cast<std::size_t>(r + radius)] = std::exp(-static_cast<double>(r) * r / denom);
  return Kernel(std::move(taps));
}

} // namespace

Kernel make_gaussian_kernel(double std_dev, double truncation) {
  if (!(std_dev > 0.0) || !std::isfinite(std_dev))
    throw ParameterError("gaussian std_dev must be positive, got " + std::to_string(std_dev));
  if (!(truncation >= 2.0))
    throw ParameterError("kernel truncation must be at least 2 standard deviations");
  return sampled_gaussian(std_dev, truncation);
}

double heat_kernel_std_pixels(double time, double domain_scale) {
  return std::sqrt(2.0 * time) * domain_scale;
}

Kernel make_heat_kernel(double time, double domain_scale, double truncation) {
  if (!(time > 0.0) || !std::isfinite(time))
    throw ParameterError("heat kernel time must be positive");
  if (!(domain_scale > 0.0) || !std::isfinite(domain_scale))
    throw ParameterError("heat kernel domain_scale must be positive");
  if (!(truncation >= 2.0))
    throw ParameterError("kernel truncation must be at least 2 standard deviations");
  // exp(-|x|^2/(4t)) in normalized units is a Gaussian with std sqrt(2t).
  const double std_px = heat_kernel_std_pixels(time, domain_scale);
  if (std_px < 0.5)
    throw ParameterError("heat kernel time " + std::to_string(time) + " gives a standard deviation of " +
                         std::to_string(std_px) +
                         " px, below half a pixel; increase tau or the heat domain scale");
  return sampled_gaussian(std_px, truncation);
}

int reflect_index(int i, int n) noexcept {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0)
    m += period;
  return m < n ? m : period - 1 - m;
}

namespace {

// The FFTW planner is not reentrant; execution with the new-array interface is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Eigenvalue of the reflective 1-D second difference for cosine mode k.
double neumann_eigenvalue(int k, int n) {
  const double s = std::sin(std::numbers::pi * k / (2.0 * n));
  return -4.0 * s * s;
}

// Applies a diagonal multiplier in the 2-D DCT-II basis. That basis
// diagonalizes every symmetric stencil under half-sample reflection.
template <class Multiplier>
ScalarField cosine_filter(const ScalarField &field, Multiplier mult) {
  const int w = field.width();
  const int h = field.height();
  const std::size_t n = field.size();
  double *buf = fftw_alloc_real(n);
  fftw_plan forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    // Row-major storage: slow dimension is y (h), fast is x (w).
    forward = fftw_plan_r2r_2d(h, w, buf, buf, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    backward = fftw_plan_r2r_2d(h, w, buf, buf, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
  }
  std::copy(field.values().begin(), field.values().end(), buf);
  fftw_execute(forward);
  const double scale = 1.0 / (4.0 * static_cast<double>(w) * static_cast<double>(h));
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx)
      buf[static_cast<std::size_t>(ky) * w + kx] *= scale * mult(kx, ky);
  fftw_execute(backward);
  ScalarField out(w, h, std::vector<double>(buf, buf + n));
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(buf);
  return out;
}

// Cosine-basis response of a symmetric 1-D kernel on a grid of length n.
std::vector<double> kernel_response(std::span<const double> taps, int radius, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double acc = taps[static_cast<std::size_t>(radius)];
    for (int d = 1; d <= radius; ++d)
      acc += 2.0 * taps[static_cast<std::size_t>(radius + d)] * std::cos(std::numbers::pi * k * d / n);
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

// Above this radius the spectral path is cheaper than direct summation.
constexpr int kDirectRadiusLimit = 24;

} // namespace

ScalarField convolve(const ScalarField &field, const Kernel &kernel) {
  const int w = field.width();
  const int h = field.height();
  const int r = kernel.radius();
  const auto taps = kernel.taps();
  const std::size_t ntaps = taps.size();
  if (r > kDirectRadiusLimit) {
    const auto sx = kernel_response(taps, r, w);
    const auto sy = kernel_response(taps, r, h);
    return cosine_filter(field, [&](int kx, int ky) {
      return sx[static_cast<std::size_t>(kx)] * sy[static_cast<std::size_t>(ky)];
    });
  }

  std::vector<int> xmap(static_cast<std::size_t>(w + 2 * r));
  for (int i = 0; i < w + 2 * r; ++i)
    xmap[static_cast<std::size_t>(i)] = reflect_index(i - r, w);
  std::vector<int> ymap(static_cast<std::size_t>(h + 2 * r));
  for (int i = 0; i < h + 2 * r; ++i)
    ymap[static_cast<std::size_t>(i)] = reflect_index(i - r, h);

  ScalarField tmp(w, h);
  const auto in = field.values();
  auto mid = tmp.values();
  for (int y = 0; y < h; ++y) {
    const double *row = in.data() + static_cast<std::size_t>(y) * w;
    double *dst = mid.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int *idx = xmap.data() + x;
      double acc = 0.0;
      for (std::size_t k = 0; k < ntaps; ++k)
        acc += taps[k] * row[idx[k]];
      dst[x] = acc;
    }
  }

  ScalarField out(w, h);
  auto dst = out.values();
  for (int y = 0; y < h; ++y) {
    double *orow = dst.data() + static_cast<std::size_t>(y) * w;
    for (std::size_t k = 0; k < ntaps; ++k) {
      const double t = taps[k];
      const double *srow = mid.data() + static_cast<std::size_t>(ymap[static_cast<std::size_t>(y) + k]) * w;
      for (int x = 0; x < w; ++x)
        orow[x] += t * srow[x];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators

std::pair<ScalarField, ScalarField> gradient(const ScalarField &field) {
  const int w = field.width();
  const int h = field.height();
  ScalarField gx(w, h), gy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w)
        gx(x, y) = field(x + 1, y) - field(x, y);
      if (y + 1 < h)
        gy(x, y) = field(x, y + 1) - field(x, y);
    }
  return {std::move(gx), std::move(gy)};
}

ScalarField divergence(const ScalarField &px, const ScalarField &py) {
  require_same_shape(px, py, "divergence");
  const int w = px.width();
  const int h = px.height();
  ScalarField div(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double d = 0.0;
      if (x + 1 < w)
        d += px(x, y);
      if (x > 0)
        d -= px(x - 1, y);
      if (y + 1 < h)
        d += py(x, y);
      if (y > 0)
        d -= py(x, y - 1);
      div(x, y) = d;
    }
  return div;
}

ScalarField laplacian(const ScalarField &field) {
  const int w = field.width();
  const int h = field.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    const int ym = y > 0 ? y - 1 : 0;
    const int yp = y + 1 < h ? y + 1 : h - 1;
    for (int x = 0; x < w; ++x) {
      const int xm = x > 0 ? x - 1 : 0;
      const int xp = x + 1 < w ? x + 1 : w - 1;
      out(x, y) = field(xm, y) + field(xp, y) + field(x, ym) + field(x, yp) - 4.0 * field(x, y);
    }
  }
  return out;
}

ScalarField biharmonic_apply(const ScalarField &field) { return laplacian(laplacian(field)); }

ScalarField implicit_operator_apply(const ScalarField &field, double dt) {
  ScalarField out = biharmonic_apply(field);
  out *= dt;
  out += field;
  return out;
}


ScalarField solve_implicit(const ScalarField &rhs, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ParameterError("solve_implicit requires dt > 0");
  const int w = rhs.width();
  const int h = rhs.height();
  std::vector<double> ex(static_cast<std::size_t>(w)), ey(static_cast<std::size_t>(h));
  for (int k = 0; k < w; ++k)
    ex[static_cast<std::size_t>(k)] = neumann_eigenvalue(k, w);
  for (int k = 0; k < h; ++k)
    ey[static_cast<std::size_t>(k)] = neumann_eigenvalue(k, h);
  return cosine_filter(rhs, [&](int kx, int ky) {
    const double lam = ex[static_cast<std::size_t>(kx)] + ey[static_cast<std::size_t>(ky)];
    return 1.0 / (1.0 + dt * lam * lam);
  });
}

double inner_product(const ScalarField &a, const ScalarField &b, double spacing) {
  require_same_shape(a, b, "inner_product");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i] * b[i];
  return acc * spacing * spacing;
}

} // namespace ictmsav
