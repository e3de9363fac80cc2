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
#include "ictmsav/solvers.hpp"

#include "ictmsav/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ictmsav {

namespace {

void require_finite(double v, const char *what, int iteration) {
  if (!std::isfinite(v))
    throw NumericalFailure(std::string("non-finite ") + what, iteration);
}

void check_state_shapes(const SegState &state) {
  require_same_shape(state.g, state.b, "segmentation state (g vs b)");
  require_same_shape(state.g, state.u[0], "segmentation state (g vs u)");
  if (static_cast<int>(state.c.size()) != state.u.n())
    throw ContractViolation("segmentation state: c has " + std::to_string(state.c.size()) + " entries for " +
                            std::to_string(state.u.n()) + " phases");
}

} // namespace

CUpdate update_c(const SegState &state, const ModelParams &params, const KernelBank &kernels) {
  (void)params;
  check_state_shapes(state);
  const ScalarField gb = convolve(state.b, kernels.rho);
  const ScalarField gb2 = convolve(hadamard(state.b, state.b), kernels.rho);
  CUpdate out;
  out.c.resize(static_cast<std::size_t>(state.u.n()));
  for (int i = 0; i < state.u.n(); ++i) {
    const ScalarField &ui = state.u[i];
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < ui.size(); ++x) {
      num += ui[x] * state.g[x] * gb[x];
      den += ui[x] * gb2[x];
    }
    if (den > 0.0 && std::isfinite(num / den)) {
      out.c[static_cast<std::size_t>(i)] = num / den;
    } else {
      out.c[static_cast<std::size_t>(i)] = state.c[static_cast<std::size_t>(i)];
      out.empty_phases.push_back(i);
    }
  }
  return out;
}

ScalarField update_b(const SegState &state, const ModelParams &params, const KernelBank &kernels) {
  check_state_shapes(state);
  if (std::all_of(state.c.begin(), state.c.end(), [](double c) { return c == 0.0; }))
    throw DegenerateInput("bias update undefined: every region constant is zero");
  const int w = state.g.width(), h = state.g.height();
  ScalarField num(w, h), den(w, h);
  for (int i = 0; i < state.u.n(); ++i) {
    const double lam = params.lambdas[static_cast<std::size_t>(i)];
    const double ci = state.c[static_cast<std::size_t>(i)];
    if (ci == 0.0)
      continue;
    const ScalarField gug = convolve(hadamard(state.u[i], state.g), kernels.rho);
    const ScalarField gu = convolve(state.u[i], kernels.rho);
    for (std::size_t x = 0; x < num.size(); ++x) {
      num[x] += lam * ci * gug[x];
      den[x] += lam * ci * ci * gu[x];
    }
  }
  ScalarField b(w, h);
  for (std::size_t x = 0; x < b.size(); ++x)
    b[x] = den[x] > 0.0 ? num[x] / den[x] : state.b[x];
  return b;
}

// ---------------------------------------------------------------------------

ImageSubproblem::ImageSubproblem(const ScalarField &f, const ScalarField &alpha, const IndicatorSet &u,
                                 std::vector<double> c, const ScalarField &b, std::vector<double> lambdas,
                                 const ModelParams &params, const KernelBank &kernels)
    : f_(f), alpha_(alpha), params_(params), conv_(BiasConvolutions::compute(b, kernels.rho)) {
  require_same_shape(f, alpha, "image subproblem (f vs alpha)");
  require_same_shape(f, b, "image subproblem (f vs b)");
  require_same_shape(f, u[0], "image subproblem (f vs u)");
  if (static_cast<int>(c.size()) != u.n() || static_cast<int>(lambdas.size()) != u.n())
    throw ContractViolation("image subproblem: c and lambda need one entry per phase");
  const auto labels = u.labels();
  weight_.resize(labels.size());
  c_of_.resize(labels.size());
  for (std::size_t x = 0; x < labels.size(); ++x) {
    weight_[x] = lambdas[static_cast<std::size_t>(labels[x])];
    c_of_[x] = c[static_cast<std::size_t>(labels[x])];
  }
}

void ImageSubproblem::check_floor(const ScalarField &g, const char *who) const {
  require_same_shape(g, f_, who);
  if (!(g.min() >= params_.g_floor))
    throw ContractViolation(std::string(who) + ": g below g_floor");
}

double ImageSubproblem::energy(const ScalarField &g) const {
  check_floor(g, "E_g");
  double fit = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (weight_[x] == 0.0)
      continue;
    const double gx = g[x], c = c_of_[x];
    const double e = gx * gx * conv_.one_g[x] - 2.0 * gx * c * conv_.g_b[x] + c * c * conv_.g_b_sq[x];
    fit += weight_[x] * std::max(e, 0.0);
  }
  return fit + idiv_energy(g, f_, params_.gamma, params_.g_floor) +
         tv_energy(g, alpha_, params_.nu, params_.eps_tv);
}

ScalarField ImageSubproblem::force(const ScalarField &g) const {
  check_floor(g, "F'(g)");
  const int w = g.width(), h = g.height();
  ScalarField out(w, h);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double v = 2.0 * weight_[x] * (conv_.one_g[x] * g[x] - c_of_[x] * conv_.g_b[x]);
    if (params_.gamma > 0.0)
      v -= params_.gamma * (f_[x] - g[x]) / g[x];
    out[x] = v;
  }
  if (params_.nu > 0.0) {
    auto [gx, gy] = gradient(g);
    const double eps2 = params_.eps_tv * params_.eps_tv;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double scale = alpha_[x] / std::sqrt(gx[x] * gx[x] + gy[x] * gy[x] + eps2);
      gx[x] *= scale;
      gy[x] *= scale;
    }
    const ScalarField div = divergence(gx, gy);
    for (std::size_t x = 0; x < g.size(); ++x)
      out[x] -= params_.nu * div[x];
  }
  return out;
}

ImageSubproblem make_image_subproblem(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                                      const ModelParams &params, const KernelBank &kernels) {
  return ImageSubproblem(f, alpha, state.u, state.c, state.b, params.lambdas, params, kernels);
}

ScalarField force(const ScalarField &g, const SegState &state, const ScalarField &f, const ScalarField &alpha,
                  const ModelParams &params, const KernelBank &kernels) {
  return make_image_subproblem(state, f, alpha, params, kernels).force(g);
}

// ---------------------------------------------------------------------------

double compute_xi(double z_tilde, double z_prev, double e_next, double g_value, const ModelParams &params) {
  const double shifted = e_next + params.c0;
  if (!(shifted > 0.0))
    throw NumericalFailure("E_g + C0 must stay positive; increase c0");
  const double s = std::sqrt(shifted);
  const double diff = z_tilde - s;
  const double q = diff * diff;
  const double d = 2.0 * diff * s;
  const double step = z_tilde - z_prev;
  if (q <= 1e-14 * shifted) {
    const double h = shifted - z_tilde * z_tilde - step * step - params.eta_relax * g_value;
    return h <= 0.0 ? 0.0 : 1.0;
  }
  // d^2 - 4qh == 4q (z~^2 + (z~ - z)^2 + eta G); this form avoids cancellation.
  double w = z_tilde * z_tilde + step * step + params.eta_relax * g_value;
  if (w < -1e-12 * shifted)
    throw NumericalFailure("negative discriminant in the relaxation step");
  w = std::max(w, 0.0);
  const double root = (-d - 2.0 * std::sqrt(q) * std::sqrt(w)) / (2.0 * q);
  return std::clamp(root, 0.0, 1.0);
}

RmsavStep rmsav_step(const ImageSubproblem &problem, const ScalarField &g_j, double z_j, double energy_j,
                     int iteration) {
  const ModelParams &prm = problem.params();
  if (!(z_j > 0.0))
    throw NumericalFailure("SAV variable must be positive", iteration);
  const double shifted = energy_j + prm.c0;
  if (!(shifted > 0.0))
    throw NumericalFailure("E_g + C0 must stay positive; increase c0", iteration);

  RmsavStep step;
  step.energy_prev = energy_j;
  step.z_prev = z_j;

  ScalarField m = problem.force(g_j);
  m *= 1.0 / std::sqrt(shifted);
  const ScalarField m_hat = solve_implicit(m, prm.dt);
  const double mm = inner_product(m, m_hat);
  step.z_tilde = z_j / (1.0 + 0.5 * prm.dt * mm);
  require_finite(step.z_tilde, "auxiliary variable", iteration);

  ScalarField delta = m_hat;
  delta *= -prm.dt * step.z_tilde;
  step.g_value = inner_product(delta, implicit_operator_apply(delta, prm.dt)) / prm.dt;
  require_finite(step.g_value, "dissipation functional", iteration);

  step.g_next = g_j + delta;
  for (double &v : step.g_next.values()) {
    if (!std::isfinite(v))
      throw NumericalFailure("non-finite image iterate", iteration);
    if (v < prm.g_floor) {
      v = prm.g_floor;
      step.floor_active = true;
    }
  }
  step.energy_next = problem.energy(step.g_next);
  require_finite(step.energy_next, "E_g", iteration);
  step.xi = compute_xi(step.z_tilde, z_j, step.energy_next, step.g_value, prm);
  step.z_next = step.xi * step.z_tilde + (1.0 - step.xi) * std::sqrt(step.energy_next + prm.c0);
  require_finite(step.z_next, "auxiliary variable", iteration);
  return step;
}

std::pair<ScalarField, InnerLog> run_inner_loop(const ImageSubproblem &problem, ScalarField g) {
  const ModelParams &prm = problem.params();
  InnerLog log;
  double energy = problem.energy(g);
  log.initial_energy = energy;
  double z = std::sqrt(energy + prm.c0);
  for (int j = 0; j < prm.max_inner; ++j) {
    RmsavStep step = rmsav_step(problem, g, z, energy, j);
    InnerRecord rec;
    rec.energy = step.energy_next;
    rec.z_sq = step.z_next * step.z_next;
    rec.z_prev_sq = z * z;
    rec.z_tilde = step.z_tilde;
    rec.xi = step.xi;
    rec.g_value = step.g_value;
    rec.floor_active = step.floor_active;
    const double change = std::fabs(step.energy_next - energy);
    rec.err2 = step.energy_next != 0.0 ? change / std::fabs(step.energy_next) : change;
    log.steps.push_back(rec);

    g = std::move(step.g_next);
    z = step.z_next;
    energy = step.energy_next;
    if (rec.err2 <= prm.tol2)
      return {std::move(g), std::move(log)};
  }
  log.hit_max_inner = true;
  return {std::move(g), std::move(log)};
}

std::pair<ScalarField, InnerLog> update_g(const SegState &state, const ScalarField &f, const ScalarField &alpha,
                                          const ModelParams &params, const KernelBank &kernels) {
  return run_inner_loop(make_image_subproblem(state, f, alpha, params, kernels), state.g);
}

// ---------------------------------------------------------------------------

std::vector<ScalarField> fitting_fields(const SegState &state, const KernelBank &kernels) {
  const auto conv = BiasConvolutions::compute(state.b, kernels.rho);
  std::vector<ScalarField> e;
  e.reserve(state.c.size());
  for (double ci : state.c)
    e.push_back(fitting_field(state.g, conv, ci));
  return e;
}

namespace {

std::vector<ScalarField> heat_smoothed(const IndicatorSet &u, const KernelBank &kernels) {
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(u.n()));
  for (const auto &m : u.masks())
    out.push_back(convolve(m, kernels.heat));
  return out;
}

std::vector<ScalarField> phi_from(const std::vector<ScalarField> &e, const std::vector<ScalarField> &smoothed,
                                  const ModelParams &params, const KernelBank &kernels) {
  const double coupling = 2.0 * params.mu * kernels.length_prefactor;
  const std::size_t n = e.size();
  std::vector<ScalarField> phi;
  phi.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ScalarField p = e[i];
    p *= params.lambdas[i];
    if (coupling != 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i)
          continue;
        const ScalarField &s = smoothed[j];
        for (std::size_t x = 0; x < p.size(); ++x)
          p[x] += coupling * s[x];
      }
    }
    phi.push_back(std::move(p));
  }
  return phi;
}

double length_from(const IndicatorSet &u, const std::vector<ScalarField> &smoothed, double mu,
                   const KernelBank &kernels) {
  if (mu == 0.0)
    return 0.0;
  double total = 0.0;
  for (int i = 0; i < u.n(); ++i)
    for (int j = 0; j < u.n(); ++j)
      if (i != j)
        total += inner_product(u[i], smoothed[static_cast<std::size_t>(j)]);
  return mu * kernels.length_prefactor * total;
}

double fit_from(const IndicatorSet &u, const std::vector<ScalarField> &e, const ModelParams &params) {
  double total = 0.0;
  for (int i = 0; i < u.n(); ++i)
    total += params.lambdas[static_cast<std::size_t>(i)] * inner_product(u[i], e[static_cast<std::size_t>(i)]);
  return total;
}

} // namespace

std::vector<ScalarField> compute_phi(const SegState &state, const ModelParams &params, const KernelBank &kernels) {
  check_state_shapes(state);
  return phi_from(fitting_fields(state, kernels), heat_smoothed(state.u, kernels), params, kernels);
}

IndicatorSet update_u(const std::vector<ScalarField> &phi) {
  if (phi.size() < 2)
    throw ContractViolation("update_u needs at least two phases");
  for (const auto &p : phi)
    require_same_shape(phi.front(), p, "update_u");
  const std::size_t npx = phi.front().size();
  std::vector<int> labels(npx, 0);
  for (std::size_t x = 0; x < npx; ++x) {
    int best = 0;
    double best_v = phi[0][x];
    for (std::size_t l = 1; l < phi.size(); ++l)
      if (phi[l][x] < best_v) {
        best_v = phi[l][x];
        best = static_cast<int>(l);
      }
    labels[x] = best;
  }
  return IndicatorSet::from_labels(labels, phi.front().width(), phi.front().height(),
                                   static_cast<int>(phi.size()));
}

double u_energy(const IndicatorSet &u, const std::vector<ScalarField> &e, const ModelParams &params,
                const KernelBank &kernels) {
  return fit_from(u, e, params) + length_from(u, heat_smoothed(u, kernels), params.mu, kernels);
}

// ---------------------------------------------------------------------------

SegmentResult segment(const ScalarField &image, const IndicatorSet &init, const ModelParams &params) {
  params.validate();
  if (init.n() != params.n_phases)
    throw ContractViolation("initial partition has " + std::to_string(init.n()) + " phases, n_phases is " +
                            std::to_string(params.n_phases));
  require_same_shape(image, init[0], "segment (image vs initial partition)");
  if (!(image.min() >= 0.0) || !image.all_finite())
    throw ContractViolation("segment needs a finite, nonnegative image");
  const double scale = params.intensity_scale;
  const ScalarField f = image * (1.0 / scale);

  const KernelBank kernels = KernelBank::build(params, f.width(), f.height());
  SegmentResult result;
  result.alpha = compute_alpha(f, kernels.sigma, params.p);
  result.log.params = params;

  SegState &st = result.state;
  st.c.assign(static_cast<std::size_t>(params.n_phases), 0.0);
  st.b = ScalarField(f.width(), f.height(), 1.0);
  st.g = f;
  for (double &v : st.g.values())
    v = std::max(v, params.g_floor);
  st.u = init;

  std::vector<ScalarField> smoothed = heat_smoothed(st.u, kernels);
  for (int k = 0; k < params.max_outer; ++k) {
    OuterRecord rec;
    CUpdate cu = update_c(st, params, kernels);
    st.c = std::move(cu.c);
    rec.empty_phases = std::move(cu.empty_phases);
    for (int i : rec.empty_phases)
      result.log.warnings.push_back("outer " + std::to_string(k) + ": phase " + std::to_string(i) +
                                    " is empty; kept previous c");

    if (params.update_bias)
      st.b = update_b(st, params, kernels);

    if (params.update_image) {
      auto [g, inner] = update_g(st, f, result.alpha, params, kernels);
      st.g = std::move(g);
      if (inner.hit_max_inner)
        result.log.warnings.push_back("outer " + std::to_string(k) + ": inner loop reached max_inner");
      rec.inner = std::move(inner);
    }

    const std::vector<ScalarField> e = fitting_fields(st, kernels);
    const std::vector<ScalarField> phi = phi_from(e, smoothed, params, kernels);
    IndicatorSet next = update_u(phi);
    std::vector<ScalarField> next_smoothed = heat_smoothed(next, kernels);

    rec.u_energy_before = fit_from(st.u, e, params) + length_from(st.u, smoothed, params.mu, kernels);
    rec.u_energy_after = fit_from(next, e, params) + length_from(next, next_smoothed, params.mu, kernels);

    double changed = 0.0;
    for (int i = 0; i < next.n(); ++i)
      for (std::size_t x = 0; x < f.size(); ++x) {
        const double d = next[i][x] - st.u[i][x];
        changed += d * d;
      }
    rec.err1 = std::sqrt(changed);

    st.u = std::move(next);
    smoothed = std::move(next_smoothed);
    rec.energy.fit = fit_from(st.u, e, params);
    rec.energy.length = length_from(st.u, smoothed, params.mu, kernels);
    rec.energy.idiv = idiv_energy(st.g, f, params.gamma, params.g_floor);
    rec.energy.tv = tv_energy(st.g, result.alpha, params.nu, params.eps_tv);
    rec.energy.total = rec.energy.fit + rec.energy.length + rec.energy.idiv + rec.energy.tv;

    const bool done = rec.err1 <= params.tol1;
    result.log.outer.push_back(std::move(rec));
    if (done) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged)
    result.log.warnings.push_back("outer loop reached max_outer without meeting tol1");
  st.g *= scale;
  for (double &c : st.c)
    c *= scale;
  return result;
}

DenoiseResult denoise(const ScalarField &image, const ModelParams &params) {
  ModelParams prm = params;
  prm.n_phases = 2;
  prm.lambdas.assign(2, 1.0);
  prm.validate();
  if (!(image.min() >= 0.0) || !image.all_finite())
    throw ContractViolation("denoise needs a finite, nonnegative image");
  const ScalarField f = image * (1.0 / prm.intensity_scale);
  const KernelBank kernels = KernelBank::build(prm, f.width(), f.height());
  const ScalarField alpha = compute_alpha(f, kernels.sigma, prm.p);
  const IndicatorSet whole({ScalarField(f.width(), f.height(), 1.0)});
  const ScalarField ones(f.width(), f.height(), 1.0);
  const ImageSubproblem problem(f, alpha, whole, {1.0}, ones, {0.0}, prm, kernels);
  ScalarField g = f;
  for (double &v : g.values())
    v = std::max(v, prm.g_floor);
  auto [out, log] = run_inner_loop(problem, std::move(g));
  out *= prm.intensity_scale;
  return {std::move(out), std::move(log)};
}

} // namespace ictmsav
