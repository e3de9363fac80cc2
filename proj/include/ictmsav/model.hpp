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

#include "ictmsav/field.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ictmsav {

/// Every tunable of the joint denoise / bias-correct / segment energy and of
/// its alternating solver. Defaults follow the published parameter regime
/// where one exists.
struct ModelParams {
  int n_phases = 2;
  std::vector<double> lambdas{1.0, 1.0}; ///< fitting weight per phase
  double mu = 1e-9 * 255.0 * 255.0;      ///< length weight
  double gamma = 0.1;                    ///< I-divergence weight
  double nu = 1.0;                       ///< adaptive TV weight
  double rho = 3.0;                      ///< bias-fitting Gaussian std, pixels
  double tau = 0.02;                     ///< heat time, normalized units
  double sigma = 1.0;                    ///< gray-indicator smoothing std, pixels
  double p = 1.3;                        ///< gray-indicator exponent
  double dt = 3e-4; ///< RMSAV step, in units of the normalized intensity
  double c0 = 1.0;
  double eta_relax = 0.99;
  double eps_tv = 1e-2;
  double g_floor = 1e-3;
  double tol1 = 1e-8;
  double tol2 = 1e-3;
  int max_outer = 500;
  int max_inner = 200;
  /// Pixels per unit length for the heat kernel; 0 selects the image long side.
  double heat_scale = 0.0;
  double kernel_truncation = 4.0;
  /// segment() and denoise() work on f / intensity_scale; 255 maps 8-bit
  /// images to [0, 1], where the published weights are commensurate.
  double intensity_scale = 255.0;
  bool update_bias = true;  ///< false keeps b at its initial value (1)
  bool update_image = true; ///< false skips the g-subproblem (g stays f)

  /// Throws ParameterError naming the first violated bound.
  void validate() const;
};

/// Binary partition of the grid into n phases.
class IndicatorSet {
public:
  IndicatorSet() = default;
  /// Throws ContractViolation unless masks are binary and sum to 1 everywhere.
  explicit IndicatorSet(std::vector<ScalarField> masks);

  /// Phase index per pixel, values in [0, n).
  static IndicatorSet from_labels(const std::vector<int> &labels, int width, int height, int n);
  static IndicatorSet from_label_field(const ScalarField &labels, int n);

  int n() const noexcept { return static_cast<int>(masks_.size()); }
  int width() const { return masks_.front().width(); }
  int height() const { return masks_.front().height(); }
  const ScalarField &operator[](int i) const { return masks_[static_cast<std::size_t>(i)]; }
  const std::vector<ScalarField> &masks() const noexcept { return masks_; }

  std::vector<int> labels() const;
  ScalarField label_field() const;

  friend bool operator==(const IndicatorSet &, const IndicatorSet &) = default;

private:
  std::vector<ScalarField> masks_;
};

/// Region constants, bias, denoised image and partition.
struct SegState {
  std::vector<double> c;
  ScalarField b;
  ScalarField g;
  IndicatorSet u;
};

struct EnergyBreakdown {
  double fit = 0.0;
  double length = 0.0;
  double idiv = 0.0;
  double tv = 0.0;
  double total = 0.0;
};

/// Kernels resolved for one image size.
struct KernelBank {
  Kernel rho;   ///< G_rho, bias fitting window
  Kernel sigma; ///< G_sigma, gray indicator
  Kernel heat;  ///< G_tau
  double heat_scale = 1.0;
  /// sqrt(pi / tau) with tau converted to pixel^2 units, so that the length
  /// term measures perimeters in pixels.
  double length_prefactor = 0.0;

  static KernelBank build(const ModelParams &params, int width, int height);
};

/// ((G_sigma * f) / max(G_sigma * f))^p.
ScalarField compute_alpha(const ScalarField &f, double sigma, double p, double truncation = 4.0);
ScalarField compute_alpha(const ScalarField &f, const Kernel &g_sigma, double p);

/// The three convolutions behind every fitting field for a fixed bias.
struct BiasConvolutions {
  ScalarField one_g;   ///< 1_G = G_rho * 1
  ScalarField g_b;     ///< G_rho * b
  ScalarField g_b_sq;  ///< G_rho * b^2

  static BiasConvolutions compute(const ScalarField &b, const Kernel &g_rho);
};

/// e_i(x) = integral of G_rho(y-x) (g(x) - b(y) c_i)^2 dy, clamped at 0.
ScalarField fitting_field(const ScalarField &g, const BiasConvolutions &conv, double c_i);
ScalarField fitting_field(const ScalarField &g, const ScalarField &b, double c_i, const Kernel &g_rho);

double fitting_energy(const SegState &state, const ModelParams &params, const KernelBank &kernels);

/// mu * sqrt(pi/tau) * sum_{i != j} <u_i, G_tau * u_j>.
double length_energy(const IndicatorSet &u, double mu, const KernelBank &kernels);

/// gamma * sum (g - f log g). Throws ContractViolation when g < g_floor.
double idiv_energy(const ScalarField &g, const ScalarField &f, double gamma, double g_floor);

/// nu * sum alpha * sqrt(|grad g|^2 + eps^2).
double tv_energy(const ScalarField &g, const ScalarField &alpha, double nu, double eps_tv);

EnergyBreakdown total_energy(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                             const ModelParams &params, const KernelBank &kernels);

} // namespace ictmsav
