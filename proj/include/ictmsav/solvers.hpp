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

#include "ictmsav/model.hpp"

#include <string>
#include <vector>

namespace ictmsav {

struct CUpdate {
  std::vector<double> c;
  /// Phases whose denominator vanished; their previous constant was kept.
  std::vector<int> empty_phases;
};

/// Closed-form region constants for fixed (b, g, u).
CUpdate update_c(const SegState &state, const ModelParams &params, const KernelBank &kernels);

/// Closed-form bias for fixed (c, g, u). Pixels with a vanishing denominator
/// keep their previous bias value.
ScalarField update_b(const SegState &state, const ModelParams &params, const KernelBank &kernels);

/// E_g(g) for fixed (c, b, u) and its L2 gradient. The fitting, I-divergence
/// and smoothed-TV parts share eps_tv with the energy evaluators, so force()
/// is the exact gradient of energy().
class ImageSubproblem {
public:
  ImageSubproblem(const ScalarField &f, const ScalarField &alpha, const IndicatorSet &u, std::vector<double> c,
                  const ScalarField &b, std::vector<double> lambdas, const ModelParams &params,
                  const KernelBank &kernels);

  double energy(const ScalarField &g) const;
  ScalarField force(const ScalarField &g) const;

  const ModelParams &params() const noexcept { return params_; }

private:
  void check_floor(const ScalarField &g, const char *who) const;

  ScalarField f_;
  ScalarField alpha_;
  ModelParams params_;
  BiasConvolutions conv_;
  std::vector<double> weight_; ///< lambda of the phase owning each pixel
  std::vector<double> c_of_;   ///< c of the phase owning each pixel
};

/// Builds the subproblem of the current alternating iteration.
ImageSubproblem make_image_subproblem(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                                      const ModelParams &params, const KernelBank &kernels);

/// F'(g) for the subproblem defined by `state`.
ScalarField force(const ScalarField &g, const SegState &state, const ScalarField &f, const ScalarField &alpha,
                  const ModelParams &params, const KernelBank &kernels);

/// Smallest admissible relaxation weight for the SAV correction.
double compute_xi(double z_tilde, double z_prev, double e_next, double g_value, const ModelParams &params);

struct RmsavStep {
  ScalarField g_next;     ///< floored iterate
  double energy_prev = 0; ///< E_g(g_j)
  double energy_next = 0; ///< E_g(g_next)
  double z_prev = 0;
  double z_tilde = 0;
  double z_next = 0;
  double xi = 0;
  double g_value = 0; ///< (1/dt) <d, A d>, d the unfloored increment
  bool floor_active = false;
};

/// One relaxed SAV step from (g_j, z_j). `energy_j` must equal
/// problem.energy(g_j).
RmsavStep rmsav_step(const ImageSubproblem &problem, const ScalarField &g_j, double z_j, double energy_j,
                     int iteration = -1);

struct InnerRecord {
  double energy = 0; ///< E_g after the step
  double z_sq = 0;
  double z_prev_sq = 0;
  double z_tilde = 0;
  double xi = 0;
  double err2 = 0;
  double g_value = 0;
  bool floor_active = false;
};

struct InnerLog {
  std::vector<InnerRecord> steps;
  double initial_energy = 0;
  bool hit_max_inner = false;
};

/// Inner RMSAV loop on g until the relative energy change drops to tol2.
std::pair<ScalarField, InnerLog> update_g(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                                          const ModelParams &params, const KernelBank &kernels);
std::pair<ScalarField, InnerLog> run_inner_loop(const ImageSubproblem &problem, ScalarField g);

/// Fitting fields e_i for the current (c, b, g).
std::vector<ScalarField> fitting_fields(const SegState &state, const KernelBank &kernels);

/// phi_i = lambda_i e_i + 2 mu sqrt(pi/tau) sum_{j != i} G_tau * u_j.
std::vector<ScalarField> compute_phi(const SegState &state, const ModelParams &params, const KernelBank &kernels);

/// Per-pixel argmin of phi, ties to the lowest phase index.
IndicatorSet update_u(const std::vector<ScalarField> &phi);

/// Thresholding energy E_u for given fitting fields.
double u_energy(const IndicatorSet &u, const std::vector<ScalarField> &e, const ModelParams &params,
                const KernelBank &kernels);

struct OuterRecord {
  EnergyBreakdown energy; ///< joint energy after the u-step
  double u_energy_before = 0; ///< E_u(u^k) with the (c,b,g) of this iteration
  double u_energy_after = 0;  ///< E_u(u^{k+1}) with the same (c,b,g)
  double err1 = 0;
  std::vector<int> empty_phases;
  InnerLog inner;
};

struct IterationLog {
  ModelParams params;
  std::vector<OuterRecord> outer;
  std::vector<std::string> warnings;
};

struct SegmentResult {
  SegState state;
  IterationLog log;
  ScalarField alpha;
  bool converged = false;
};

/// Alternating minimization: c, b, inner g loop, phi, u until the partition
/// stops changing (err1 <= tol1) or max_outer is reached. The iteration runs
/// on f / intensity_scale; the returned g and c are back in image units,
/// while logged energies stay on the normalized scale.
SegmentResult segment(const ScalarField &f, const IndicatorSet &init, const ModelParams &params);

struct DenoiseResult {
  ScalarField g;
  InnerLog log;
};

/// Only the g-subproblem, against b = 1 and zero fitting weight.
DenoiseResult denoise(const ScalarField &f, const ModelParams &params);

} // namespace ictmsav
