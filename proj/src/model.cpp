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
#include "ictmsav/model.hpp"

#include "ictmsav/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ictmsav {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok)
    throw ParameterError("invalid parameter: " + what);
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

void ModelParams::validate() const {
  require(n_phases >= 2, "n_phases must be >= 2");
  require(static_cast<int>(lambdas.size()) == n_phases,
          "lambda needs exactly n_phases entries (" + std::to_string(n_phases) + "), got " +
              std::to_string(lambdas.size()));
  for (double l : lambdas)
    require(l > 0.0 && finite(l), "every lambda must be > 0");
  require(mu >= 0.0 && finite(mu), "mu must be >= 0");
  require(gamma >= 0.0 && finite(gamma), "gamma must be >= 0");
  require(nu >= 0.0 && finite(nu), "nu must be >= 0");
  require(rho > 0.0 && finite(rho), "rho must be > 0");
  require(tau > 0.0 && finite(tau), "tau must be > 0");
  require(sigma > 0.0 && finite(sigma), "sigma must be > 0");
  require(finite(p) && p > 0.0, "p must be > 0");
  require(dt > 0.0 && finite(dt), "dt must be > 0");
  require(c0 > 0.0 && finite(c0), "c0 must be > 0");
  require(eta_relax >= 0.0 && eta_relax <= 1.0, "eta must lie in [0, 1]");
  require(eps_tv > 0.0 && finite(eps_tv), "eps_tv must be > 0");
  require(g_floor > 0.0 && finite(g_floor), "g_floor must be > 0");
  require(!std::isnan(tol1) && !std::isnan(tol2), "tolerances must not be NaN");
  require(max_outer >= 1, "max_outer must be >= 1");
  require(max_inner >= 1, "max_inner must be >= 1");
  require(heat_scale >= 0.0 && finite(heat_scale), "heat_scale must be >= 0 (0 = image long side)");
  require(kernel_truncation >= 2.0 && finite(kernel_truncation), "kernel_truncation must be >= 2");
  require(intensity_scale > 0.0 && finite(intensity_scale), "intensity_scale must be > 0");
}

// ---------------------------------------------------------------------------

IndicatorSet::IndicatorSet(std::vector<ScalarField> masks) : masks_(std::move(masks)) {
  if (masks_.empty())
    throw ContractViolation("indicator set needs at least one mask");
  for (const auto &m : masks_)
    require_same_shape(masks_.front(), m, "indicator set");
  const std::size_t n = masks_.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto &m : masks_) {
      if (m[i] != 0.0 && m[i] != 1.0)
        throw ContractViolation("indicator masks must be binary (pixel " + std::to_string(i) + ")");
      s += m[i];
    }
    if (s != 1.0)
      throw ContractViolation("indicator masks must partition the grid (pixel " + std::to_string(i) + ")");
  }
}

IndicatorSet IndicatorSet::from_labels(const std::vector<int> &labels, int width, int height, int n) {
  if (n < 1)
    throw ContractViolation("phase count must be positive");
  if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ContractViolation("label count does not match width*height");
  std::vector<ScalarField> masks(static_cast<std::size_t>(n), ScalarField(width, height));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= n)
      throw ContractViolation("label " + std::to_string(l) + " at pixel " + std::to_string(i) +
                              " outside [0, " + std::to_string(n) + ")");
    masks[static_cast<std::size_t>(l)][i] = 1.0;
  }
  IndicatorSet set;
  set.masks_ = std::move(masks);
  return set;
}

IndicatorSet IndicatorSet::from_label_field(const ScalarField &labels, int n) {
  std::vector<int> ints(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = labels[i];
    if (v != std::floor(v))
      throw ContractViolation("label map must hold integer phase indices");
    ints[i] = static_cast<int>(v);
  }
  return from_labels(ints, labels.width(), labels.height(), n);
}

std::vector<int> IndicatorSet::labels() const {
  const std::size_t n = masks_.front().size();
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < masks_.size(); ++k)
      if (masks_[k][i] == 1.0) {
        out[i] = static_cast<int>(k);
        break;
      }
  return out;
}

ScalarField IndicatorSet::label_field() const {
  const auto l = labels();
  ScalarField out(width(), height());
  for (std::size_t i = 0; i < l.size(); ++i)
    out[i] = l[i];
  return out;
}

// ---------------------------------------------------------------------------

KernelBank KernelBank::build(const ModelParams &params, int width, int height) {
  KernelBank bank;
  bank.rho = make_gaussian_kernel(params.rho, params.kernel_truncation);
  bank.sigma = make_gaussian_kernel(params.sigma, params.kernel_truncation);
  bank.heat_scale = params.heat_scale > 0.0 ? params.heat_scale : static_cast<double>(std::max(width, height));
  bank.heat = make_heat_kernel(params.tau, bank.heat_scale, params.kernel_truncation);
  const double tau_px = params.tau * bank.heat_scale * bank.heat_scale;
  bank.length_prefactor = std::sqrt(std::numbers::pi / tau_px);
  return bank;
}

ScalarField compute_alpha(const ScalarField &f, const Kernel &g_sigma, double p) {
  if (!(f.min() >= 0.0))
    throw ContractViolation("gray indicator needs a nonnegative image");
  ScalarField smooth = convolve(f, g_sigma);
  const double m = smooth.max();
  if (!(m > 0.0))
    throw DegenerateInput("gray indicator undefined for an all-zero image");
  for (double &v : smooth.values())
    v = std::pow(std::max(v, 0.0) / m, p);
  return smooth;
}

ScalarField compute_alpha(const ScalarField &f, double sigma, double p, double truncation) {
  return compute_alpha(f, make_gaussian_kernel(sigma, truncation), p);
}

BiasConvolutions BiasConvolutions::compute(const ScalarField &b, const Kernel &g_rho) {
  return {convolve(ScalarField(b.width(), b.height(), 1.0), g_rho), convolve(b, g_rho),
          convolve(hadamard(b, b), g_rho)};
}

ScalarField fitting_field(const ScalarField &g, const BiasConvolutions &conv, double c_i) {
  require_same_shape(g, conv.g_b, "fitting_field");
  ScalarField e(g.width(), g.height());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double gi = g[i];
    const double v = gi * gi * conv.one_g[i] - 2.0 * gi * c_i * conv.g_b[i] + c_i * c_i * conv.g_b_sq[i];
    e[i] = std::max(v, 0.0);
  }
  return e;
}

ScalarField fitting_field(const ScalarField &g, const ScalarField &b, double c_i, const Kernel &g_rho) {
  require_same_shape(g, b, "fitting_field");
  return fitting_field(g, BiasConvolutions::compute(b, g_rho), c_i);
}

double fitting_energy(const SegState &state, const ModelParams &params, const KernelBank &kernels) {
  const auto conv = BiasConvolutions::compute(state.b, kernels.rho);
  double total = 0.0;
  for (int i = 0; i < state.u.n(); ++i)
    total += params.lambdas[static_cast<std::size_t>(i)] *
             inner_product(state.u[i], fitting_field(state.g, conv, state.c[static_cast<std::size_t>(i)]));
  return total;
}

double length_energy(const IndicatorSet &u, double mu, const KernelBank &kernels) {
  if (mu == 0.0)
    return 0.0;
  std::vector<ScalarField> smoothed;
  smoothed.reserve(static_cast<std::size_t>(u.n()));
  for (const auto &m : u.masks())
    smoothed.push_back(convolve(m, kernels.heat));
  double total = 0.0;
  for (int i = 0; i < u.n(); ++i)
    for (int j = 0; j < u.n(); ++j)
      if (i != j)
        total += inner_product(u[i], smoothed[static_cast<std::size_t>(j)]);
  return mu * kernels.length_prefactor * total;
}

double idiv_energy(const ScalarField &g, const ScalarField &f, double gamma, double g_floor) {
  require_same_shape(g, f, "idiv_energy");
  if (gamma == 0.0)
    return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] >= g_floor))
      throw ContractViolation("idiv_energy: g below its floor at pixel " + std::to_string(i));
    total += g[i] - f[i] * std::log(g[i]);
  }
  return gamma * total;
}

double tv_energy(const ScalarField &g, const ScalarField &alpha, double nu, double eps_tv) {
  require_same_shape(g, alpha, "tv_energy");
  if (nu == 0.0)
    return 0.0;
  const auto [gx, gy] = gradient(g);
  const double eps2 = eps_tv * eps_tv;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    total += alpha[i] * std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + eps2);
  return nu * total;
}

EnergyBreakdown total_energy(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                             const ModelParams &params, const KernelBank &kernels) {
  EnergyBreakdown e;
  e.fit = fitting_energy(state, params, kernels);
  e.length = length_energy(state.u, params.mu, kernels);
  e.idiv = idiv_energy(state.g, f, params.gamma, params.g_floor);
  e.tv = tv_energy(state.g, alpha, params.nu, params.eps_tv);
  e.total = e.fit + e.length + e.idiv + e.tv;
  return e;
}

} // namespace ictmsav
