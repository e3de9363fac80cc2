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
#include "ictmsav/noise.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ictmsav {

// ---------------------------------------------------------------------------
// Synthetic images: piecewise-constant regions times a smooth bias field.

enum class RegionShape { disk, rect, ring };
enum class BiasKind { none, ramp, bump };

struct Region {
  RegionShape shape = RegionShape::disk;
  /// disk: cx cy r; rect: x y w h; ring: cx cy r_inner r_outer
  std::vector<double> geometry;
  double value = 255.0;
  int phase = 0;
};

struct SynthSpec {
  int width = 128;
  int height = 128;
  double background = 50.0;
  int background_phase = 1;
  std::vector<Region> regions;
  BiasKind bias = BiasKind::none;
  double bias_min = 1.0;
  double bias_max = 1.0;
  double bias_width = 0.0; ///< bump std in pixels; 0 selects 0.35 * long side

  void validate(int n_phases) const;
};

/// "disk:cx,cy,r,value[,phase]; rect:x,y,w,h,value[,phase]; ring:cx,cy,ri,ro,value[,phase]"
std::vector<Region> parse_regions(const std::string &text);
std::string format_regions(const std::vector<Region> &regions);
BiasKind parse_bias_kind(const std::string &name);
std::string to_string(BiasKind kind);

struct SynthImage {
  ScalarField clean; ///< bias * piecewise-constant image
  IndicatorSet truth;
  ScalarField bias;
};

SynthImage synth(const SynthSpec &spec, int n_phases = 2);

// ---------------------------------------------------------------------------
// Initial partitions.

enum class InitKind { rect, circle, checkerboard, mask, labels };

struct InitSpec {
  InitKind kind = InitKind::circle;
  std::vector<double> numbers; ///< rect: x y w h; circle: cx cy r; checkerboard: cell
  std::string path;            ///< mask / labels file

  /// "rect:x,y,w,h" | "circle:cx,cy,r" | "checkerboard:cell" | "mask:PATH" | "labels:PATH"
  static InitSpec parse(const std::string &text);
  std::string to_string() const;
};

/// Interior of the contour is phase 0. Outside, n = 2 gives phase 1; for
/// n > 2 the outside pixels are split into n-1 phases at equally spaced
/// intensity quantiles of f (darkest first).
IndicatorSet make_initial_partition(const InitSpec &spec, const ScalarField &f, int n_phases);
/// Interior mask of a geometric contour spec (rect/circle/checkerboard/mask).
ScalarField contour_interior(const InitSpec &spec, int width, int height);

// ---------------------------------------------------------------------------
// Experiment configuration: flat key=value text.

struct ExperimentConfig {
  std::string input; ///< image file; mutually exclusive with synth
  std::optional<SynthSpec> synth;
  std::string truth; ///< optional label map / mask for metrics
  NoiseSpec noise;
  std::optional<InitSpec> init;
  ModelParams params;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int metrics_foreground = 0;

  static ExperimentConfig parse(const std::string &text, const std::string &origin = "<config>");
  static ExperimentConfig load(const std::string &path);

  /// Sets one key; unknown keys and malformed values throw ConfigError.
  void set(const std::string &key, const std::string &value);
  std::string get(const std::string &key) const;

  /// Resolved key=value listing (a valid config file).
  std::string manifest() const;

  /// Exactly one image source, params valid, init consistent.
  void validate() const;

  /// Every recognized key, in manifest order.
  static const std::vector<std::string> &keys();
};

/// Input image (file or synth) with the configured noise applied, clamped
/// to [0, 255].
ScalarField load_experiment_image(const ExperimentConfig &config);

} // namespace ictmsav
