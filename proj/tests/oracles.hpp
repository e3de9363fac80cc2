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

// Brute-force reference implementations used by the unit and acceptance
// tests. Everything here is written from the definitions with plain loops
// and shares no code with the library beyond the field container.

#pragma once

#include "ictmsav/field.hpp"
#include "ictmsav/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using ictmsav::Kernel;
using ictmsav::ScalarField;

inline int mirror(int i, int n) {
  const int period = 2 * n;
  int m = ((i % period) + period) % period;
  return m < n ? m : period - 1 - m;
}

inline std::vector<double> gaussian_taps(double sd, double truncation = 4.0) {
  const int r = static_cast<int>(std::ceil(truncation * sd));
  std::vector<double> t(static_cast<std::size_t>(2 * r + 1));
  double s = 0.0;
  for (int d = -r; d <= r; ++d)
    s += t[static_cast<std::size_t>(d + r)] = std::exp(-0.5 * d * d / (sd * sd));
  for (double &v : t)
    v /= s;
  return t;
}

/// Direct 2-D sum over the full (2r+1)^2 window with mirrored indices.
inline ScalarField convolve(const ScalarField &f, const Kernel &k) {
  const int w = f.width(), h = f.height(), r = k.radius();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          s += k.weight(dx, dy) * f(mirror(x + dx, w), mirror(y + dy, h));
      out(x, y) = s;
    }
  return out;
}

/// e(x) = sum_d G(d) (g(x) - b(x+d) c)^2.
inline ScalarField fitting_field(const ScalarField &g, const ScalarField &b, double c, const Kernel &k) {
  const int w = g.width(), h = g.height(), r = k.radius();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double diff = g(x, y) - b(mirror(x + dx, w), mirror(y + dy, h)) * c;
          s += k.weight(dx, dy) * diff * diff;
        }
      out(x, y) = s;
    }
  return out;
}

inline double fit_energy(const ScalarField &g, const ScalarField &b, const std::vector<double> &c,
                         const std::vector<ScalarField> &u, const std::vector<double> &lambdas, const Kernel &k) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const ScalarField e = oracle::fitting_field(g, b, c[i], k);
    for (std::size_t x = 0; x < e.size(); ++x)
      total += lambdas[i] * u[i][x] * e[x];
  }
  return total;
}

/// Minimizer of the fitting energy in c_i, from the double sum
/// sum_x u(x) sum_d G(d) g(x) b(x+d) / sum_x u(x) sum_d G(d) b(x+d)^2.
inline double region_constant(const ScalarField &g, const ScalarField &b, const ScalarField &u, const Kernel &k) {
  const int w = g.width(), h = g.height(), r = k.radius();
  double num = 0.0, den = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double bb = b(mirror(x + dx, w), mirror(y + dy, h));
          num += u(x, y) * k.weight(dx, dy) * g(x, y) * bb;
          den += u(x, y) * k.weight(dx, dy) * bb * bb;
        }
  return num / den;
}

/// Bias minimizer: every (x, d) pair scatters its weight onto the pixel
/// b(x+d) it reads.
inline ScalarField bias(const ScalarField &g, const std::vector<double> &c, const std::vector<ScalarField> &u,
                        const std::vector<double> &lambdas, const Kernel &k) {
  const int w = g.width(), h = g.height(), r = k.radius();
  ScalarField num(w, h), den(w, h);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int tx = mirror(x + dx, w), ty = mirror(y + dy, h);
            const double wt = lambdas[i] * u[i](x, y) * k.weight(dx, dy);
            num(tx, ty) += wt * c[i] * g(x, y);
            den(tx, ty) += wt * c[i] * c[i];
          }
  ScalarField out(w, h);
  for (std::size_t x = 0; x < out.size(); ++x)
    out[x] = num[x] / den[x];
  return out;
}

/// sum_{i != j} <u_i, G * u_j> times mu sqrt(pi / tau_px).
inline double length_energy(const std::vector<ScalarField> &u, double mu, double tau, double scale,
                            const Kernel &heat) {
  const double pre = std::sqrt(std::numbers::pi / (tau * scale * scale));
  double total = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const ScalarField s = oracle::convolve(u[j], heat);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (i != j)
        for (std::size_t x = 0; x < s.size(); ++x)
          total += u[i][x] * s[x];
  }
  return mu * pre * total;
}

inline std::vector<ScalarField> phi(const ScalarField &g, const ScalarField &b, const std::vector<double> &c,
                                    const std::vector<ScalarField> &u, const std::vector<double> &lambdas, double mu,
                                    double tau, double scale, const Kernel &rho, const Kernel &heat) {
  const double pre = std::sqrt(std::numbers::pi / (tau * scale * scale));
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ScalarField p = oracle::fitting_field(g, b, c[i], rho);
    p *= lambdas[i];
    for (std::size_t j = 0; j < u.size(); ++j)
      if (j != i) {
        const ScalarField s = oracle::convolve(u[j], heat);
        for (std::size_t x = 0; x < p.size(); ++x)
          p[x] += 2.0 * mu * pre * s[x];
      }
    out.push_back(std::move(p));
  }
  return out;
}

/// Dense matrix of the 5-point Laplacian; a neighbor outside the grid
/// mirrors onto the pixel itself and contributes nothing.
inline std::vector<double> laplacian_matrix(int w, int h) {
  const int n = w * h;
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      for (const auto &o : off) {
        const int q = mirror(y + o[1], h) * w + mirror(x + o[0], w);
        m[static_cast<std::size_t>(p) * n + q] += 1.0;
        m[static_cast<std::size_t>(p) * n + p] -= 1.0;
      }
    }
  return m;
}

inline std::vector<double> matmul(const std::vector<double> &a, const std::vector<double> &b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        c[static_cast<std::size_t>(i) * n + j] += a[static_cast<std::size_t>(i) * n + k] * b[static_cast<std::size_t>(k) * n + j];
  return c;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs) {
  const int n = static_cast<int>(rhs.size());
  auto at = [&](int i, int j) -> double & { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::fabs(at(i, col)) > std::fabs(at(piv, col)))
        piv = i;
    for (int j = 0; j < n; ++j)
      std::swap(at(col, j), at(piv, j));
    std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(piv)]);
    for (int i = col + 1; i < n; ++i) {
      const double f = at(i, col) / at(col, col);
      for (int j = col; j < n; ++j)
        at(i, j) -= f * at(col, j);
      rhs[static_cast<std::size_t>(i)] -= f * rhs[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j)
      s -= at(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / at(i, i);
  }
  return x;
}

inline ScalarField random_field(std::mt19937_64 &rng, int w, int h, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(w, h);
  for (double &v : f.values())
    v = d(rng);
  return f;
}

/// Random partition into n phases, each phase guaranteed one pixel.
inline std::vector<ScalarField> random_partition(std::mt19937_64 &rng, int w, int h, int n) {
  std::uniform_int_distribution<int> d(0, n - 1);
  std::vector<int> lab(static_cast<std::size_t>(w) * h);
  for (int &l : lab)
    l = d(rng);
  for (int i = 0; i < n; ++i)
    lab[static_cast<std::size_t>(i)] = i;
  std::vector<ScalarField> u(static_cast<std::size_t>(n), ScalarField(w, h));
  for (std::size_t x = 0; x < lab.size(); ++x)
    u[static_cast<std::size_t>(lab[x])][x] = 1.0;
  return u;
}

inline double max_abs_diff(const ScalarField &a, const ScalarField &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_abs(const ScalarField &a) {
  double m = 0.0;
  for (double v : a.values())
    m = std::max(m, std::fabs(v));
  return m;
}

} // namespace oracle
