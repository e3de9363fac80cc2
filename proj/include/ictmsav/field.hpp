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
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ictmsav {

/// Dense 2-D grid of doubles stored row-major. Every image-shaped quantity of
/// the model (input, denoised image, bias, indicator masks, fitting fields)
/// is one of these.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0);
  ScalarField(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double &operator()(int x, int y) { return values_[index(x, y)]; }
  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ScalarField &other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  double min() const;
  double max() const;
  double sum() const;
  bool all_finite() const;

  ScalarField &operator+=(const ScalarField &rhs);
  ScalarField &operator-=(const ScalarField &rhs);
  ScalarField &operator*=(double s);

  friend bool operator==(const ScalarField &, const ScalarField &) = default;

private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField lhs, const ScalarField &rhs);
ScalarField operator-(ScalarField lhs, const ScalarField &rhs);
ScalarField operator*(ScalarField lhs, double s);
ScalarField operator*(double s, ScalarField rhs);

/// Pointwise product; shapes must match.
ScalarField hadamard(const ScalarField &a, const ScalarField &b);

/// Throws ContractViolation naming `what` when the shapes differ.
void require_same_shape(const ScalarField &a, const ScalarField &b, const char *what);

/// Separable, symmetric convolution kernel. The 2-D weights are the outer
/// product of `taps()` with itself, so a kernel of radius r has (2r+1)^2
/// weights while convolution costs O(r) per pixel.
class Kernel {
public:
  Kernel() = default;
  /// `taps` must have odd length, be nonnegative and symmetric; they are
  /// renormalized to unit sum.
  explicit Kernel(std::vector<double> taps);

  int radius() const noexcept { return radius_; }
  std::span<const double> taps() const noexcept { return taps_; }
  double tap(int offset) const { return taps_[static_cast<std::size_t>(offset + radius_)]; }
  double weight(int dx, int dy) const { return tap(dx) * tap(dy); }

  /// Materialized (2r+1)^2 weights, row-major with dy outer.
  std::vector<double> weights() const;
  double normalization() const;

private:
  int radius_ = 0;
  std::vector<double> taps_;
};

/// Pixel-unit Gaussian, radius ceil(truncation * std_dev).
Kernel make_gaussian_kernel(double std_dev, double truncation = 4.0);

/// Pixel standard deviation of the heat kernel exp(-|x|^2/(4t)) when
/// coordinates are divided by `domain_scale`.
double heat_kernel_std_pixels(double time, double domain_scale);

/// Heat kernel at time `time` on coordinates normalized by `domain_scale`
/// (pixels per unit length).
Kernel make_heat_kernel(double time, double domain_scale, double truncation = 4.0);

/// Half-sample symmetric reflection of an index into [0, n). Works for
/// offsets of any size (repeated reflection).
int reflect_index(int i, int n) noexcept;

/// Convolution with symmetric (reflective) padding.
ScalarField convolve(const ScalarField &field, const Kernel &kernel);

/// Forward differences, zero in the last column (x) / last row (y).
std::pair<ScalarField, ScalarField> gradient(const ScalarField &field);

/// Backward differences; exactly minus the adjoint of gradient().
ScalarField divergence(const ScalarField &px, const ScalarField &py);

/// 5-point Laplacian with reflective closure.
ScalarField laplacian(const ScalarField &field);

/// laplacian(laplacian(field)).
ScalarField biharmonic_apply(const ScalarField &field);

/// field + dt * biharmonic_apply(field).
ScalarField implicit_operator_apply(const ScalarField &field, double dt);

/// Solves (I + dt * Laplacian^2) x = rhs with the reflective Laplacian,
/// diagonalized by the type-II discrete cosine transform.
ScalarField solve_implicit(const ScalarField &rhs, double dt);

/// Sum of a*b*h^2.
double inner_product(const ScalarField &a, const ScalarField &b, double spacing = 1.0);

} // namespace ictmsav
