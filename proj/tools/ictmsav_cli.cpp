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
// Command-line front end. Talks to the engine only through ictmsav.h.
#include "ictmsav/ictmsav.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  ictmsav_status status;
  Failure(ictmsav_status s, const std::string &what) : std::runtime_error(what), status(s) {}
};

void check(ictmsav_status st, const std::string &context) {
  if (st != ICTMSAV_OK)
    throw Failure(st, context + ": " + ictmsav_status_name(st) + ": " + ictmsav_last_error());
}

struct FieldDeleter {
  void operator()(ictmsav_field *f) const { ictmsav_field_destroy(f); }
};
struct ConfigDeleter {
  void operator()(ictmsav_config *c) const { ictmsav_config_destroy(c); }
};
struct RunDeleter {
  void operator()(ictmsav_run *r) const { ictmsav_run_destroy(r); }
};
using Field = std::unique_ptr<ictmsav_field, FieldDeleter>;
using Config = std::unique_ptr<ictmsav_config, ConfigDeleter>;
using Run = std::unique_ptr<ictmsav_run, RunDeleter>;

int exit_code(ictmsav_status st) {
  switch (st) {
  case ICTMSAV_ERR_ARGUMENT:
  case ICTMSAV_ERR_PARAMETER:
  case ICTMSAV_ERR_CONTRACT:
  case ICTMSAV_ERR_IO:
  case ICTMSAV_ERR_CONFIG:
    return 2;
  case ICTMSAV_ERR_NUMERICAL:
    return 3;
  default:
    return 1;
  }
}

bool quiet = false;

void note(const std::string &msg) {
  if (!quiet)
    std::fprintf(stderr, "%s\n", msg.c_str());
}

template <class Getter>
std::string fetch_string(Getter get, const std::string &context) {
  size_t needed = 0;
  check(get(nullptr, 0, &needed), context);
  std::string s(needed + 1, '\0');
  check(get(s.data(), s.size(), &needed), context);
  s.resize(needed);
  return s;
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw Failure(ICTMSAV_ERR_IO, "cannot write " + path.string());
}

Field make_field(int w, int h, const std::vector<double> &values) {
  ictmsav_field *f = nullptr;
  check(ictmsav_field_create(w, h, values.data(), &f), "field");
  return Field(f);
}

std::vector<double> values_of(const ictmsav_field *f) {
  const double *d = ictmsav_field_data(f);
  return {d, d + static_cast<size_t>(ictmsav_field_width(f)) * ictmsav_field_height(f)};
}

Field read_field(const std::string &path) {
  ictmsav_field *f = nullptr;
  check(ictmsav_field_read(path.c_str(), &f), path);
  return Field(f);
}

void write_pgm(const ictmsav_field *f, const fs::path &path) {
  check(ictmsav_field_write_pgm(f, path.string().c_str()), path.string());
}

void write_raster(const ictmsav_field *f, const fs::path &path) {
  check(ictmsav_field_write_raster(f, path.string().c_str()), path.string());
}

/// Binary mask of one label, 0/255 for viewing.
Field phase_mask(const ictmsav_field *labels, int phase, double on = 255.0) {
  auto v = values_of(labels);
  for (double &x : v)
    x = static_cast<int>(x) == phase ? on : 0.0;
  return make_field(ictmsav_field_width(labels), ictmsav_field_height(labels), v);
}

/// Nonzero pixels become 1.
Field binarize(const ictmsav_field *f) {
  auto v = values_of(f);
  for (double &x : v)
    x = x != 0.0 ? 1.0 : 0.0;
  return make_field(ictmsav_field_width(f), ictmsav_field_height(f), v);
}

std::string metric_line(const std::string &name, const ictmsav_metrics &m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s dsc=%.4f iou=%.4f acc=%.4f kappa=%.4f%s", name.c_str(), m.dsc, m.iou,
                m.accuracy, m.kappa, m.kappa_degenerate ? " (kappa degenerate)" : "");
  return buf;
}

std::string phase_report(const ictmsav_field *pred, const ictmsav_field *truth, int n) {
  std::vector<ictmsav_metrics> rows(n);
  check(ictmsav_metrics_phases(pred, truth, n, rows.data()), "metrics");
  std::string out;
  for (int i = 0; i < n; ++i)
    out += metric_line("phase" + std::to_string(i), rows[i]) + "\n";
  return out;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  long long seed = -1;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a configuration key (key=value), repeatable");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "noise seed")->check(CLI::NonNegativeNumber);
}

Config resolve_config(const Common &c) {
  ictmsav_config *raw = nullptr;
  if (c.config.empty())
    check(ictmsav_config_create(&raw), "config");
  else
    check(ictmsav_config_load(c.config.c_str(), &raw), "config");
  Config cfg(raw);
  for (const auto &kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw Failure(ICTMSAV_ERR_CONFIG, "--set expects key=value, got '" + kv + "'");
    check(ictmsav_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
  }
  if (!c.out.empty())
    check(ictmsav_config_set(cfg.get(), "out", c.out.c_str()), "--out");
  if (c.seed >= 0)
    check(ictmsav_config_set(cfg.get(), "seed", std::to_string(c.seed).c_str()), "--seed");
  return cfg;
}

std::string config_value(const ictmsav_config *cfg, const char *key) {
  return fetch_string([&](char *b, size_t n, size_t *need) { return ictmsav_config_get(cfg, key, b, n, need); },
                      key);
}

fs::path output_dir(const ictmsav_config *cfg) {
  fs::path dir = config_value(cfg, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Failure(ICTMSAV_ERR_IO, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const ictmsav_config *cfg, const fs::path &dir) {
  const auto text = fetch_string(
      [&](char *b, size_t n, size_t *need) { return ictmsav_config_manifest(cfg, b, n, need); }, "manifest");
  write_file(dir / "manifest.txt", "# ictmsav " + std::string(ictmsav_version()) + "\n" + text);
}

/// Ground truth label map: the synthetic partition, or the configured file.
Field truth_labels(const ictmsav_config *cfg) {
  if (!config_value(cfg, "synth.width").empty()) {
    ictmsav_field *clean = nullptr, *truth = nullptr, *bias = nullptr;
    check(ictmsav_synth(cfg, &clean, &truth, &bias), "synth");
    ictmsav_field_destroy(clean);
    ictmsav_field_destroy(bias);
    return Field(truth);
  }
  const auto path = config_value(cfg, "truth");
  if (path.empty())
    return nullptr;
  return read_field(path);
}

int cmd_synth(const Common &c) {
  auto cfg = resolve_config(c);
  ictmsav_field *clean = nullptr, *truth = nullptr, *bias = nullptr;
  check(ictmsav_synth(cfg.get(), &clean, &truth, &bias), "synth");
  Field fc(clean), ft(truth), fb(bias);
  const auto dir = output_dir(cfg.get());
  write_pgm(fc.get(), dir / "clean.pgm");
  write_raster(fc.get(), dir / "clean.raster");
  write_pgm(ft.get(), dir / "truth_labels.pgm");
  write_raster(fb.get(), dir / "bias.raster");
  const int n = std::stoi(config_value(cfg.get(), "n_phases"));
  for (int i = 0; i < n; ++i)
    write_pgm(phase_mask(ft.get(), i).get(), dir / ("truth_phase" + std::to_string(i) + ".pgm"));
  if (config_value(cfg.get(), "noise.kind") != "none") {
    ictmsav_field *noisy = nullptr;
    check(ictmsav_load_image(cfg.get(), &noisy), "noise");
    Field fn(noisy);
    write_pgm(fn.get(), dir / "noisy.pgm");
  }
  write_manifest(cfg.get(), dir);
  note("synth: wrote " + dir.string());
  return 0;
}

int cmd_noise(const std::string &in, const std::string &out, const std::string &kind, double looks,
              long long seed) {
  auto clean = read_field(in);
  ictmsav_field *noisy = nullptr;
  check(ictmsav_add_noise(clean.get(), kind.c_str(), looks, static_cast<uint64_t>(seed), &noisy), "noise");
  Field fn(noisy);
  if (fs::path(out).extension() == ".raster")
    write_raster(fn.get(), out);
  else
    write_pgm(fn.get(), out);
  note("noise: wrote " + out);
  return 0;
}

int cmd_segment(const Common &c) {
  auto cfg = resolve_config(c);
  check(ictmsav_config_validate(cfg.get()), "config");
  ictmsav_field *raw = nullptr;
  check(ictmsav_load_image(cfg.get(), &raw), "input");
  Field image(raw);
  ictmsav_run *run_raw = nullptr;
  check(ictmsav_segment(cfg.get(), image.get(), nullptr, &run_raw), "segment");
  Run run(run_raw);

  const auto dir = output_dir(cfg.get());
  write_manifest(cfg.get(), dir);
  write_pgm(image.get(), dir / "input.pgm");

  ictmsav_field *out = nullptr;
  check(ictmsav_run_labels(run.get(), &out), "labels");
  Field labels(out);
  write_pgm(labels.get(), dir / "labels.pgm");
  const int n = ictmsav_run_phase_count(run.get());
  for (int i = 0; i < n; ++i)
    write_pgm(phase_mask(labels.get(), i).get(), dir / ("phase" + std::to_string(i) + ".pgm"));

  check(ictmsav_run_denoised(run.get(), &out), "denoised");
  Field g(out);
  write_pgm(g.get(), dir / "denoised.pgm");
  write_raster(g.get(), dir / "g.raster");
  check(ictmsav_run_bias(run.get(), &out), "bias");
  Field b(out);
  write_raster(b.get(), dir / "bias.raster");
  check(ictmsav_run_corrected(run.get(), &out), "corrected");
  Field corrected(out);
  write_pgm(corrected.get(), dir / "corrected.pgm");

  const auto csv = fetch_string(
      [&](char *buf, size_t cap, size_t *need) { return ictmsav_run_energy_csv(run.get(), buf, cap, need); },
      "energy");
  write_file(dir / "energy.csv", csv);

  std::vector<double> consts(n);
  check(ictmsav_run_constants(run.get(), consts.data(), consts.size(), nullptr), "constants");
  std::string summary = "outer_iterations=" + std::to_string(ictmsav_run_outer_iterations(run.get())) +
                        "\nconverged=" + std::to_string(ictmsav_run_converged(run.get())) + "\n";
  for (int i = 0; i < n; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "c%d=%.17g\n", i, consts[i]);
    summary += buf;
  }
  for (size_t i = 0; i < ictmsav_run_warning_count(run.get()); ++i)
    summary += std::string("warning=") + ictmsav_run_warning(run.get(), i) + "\n";
  write_file(dir / "summary.txt", summary);

  if (auto truth = truth_labels(cfg.get())) {
    const auto report = phase_report(labels.get(), truth.get(), n);
    write_file(dir / "metrics.txt", report);
    if (!quiet)
      std::fputs(report.c_str(), stdout);
  }
  for (size_t i = 0; i < ictmsav_run_warning_count(run.get()); ++i)
    note(std::string("warning: ") + ictmsav_run_warning(run.get(), i));
  note("segment: " + std::to_string(ictmsav_run_outer_iterations(run.get())) + " outer iterations, wrote " +
       dir.string());
  return 0;
}

int cmd_denoise(const Common &c) {
  auto cfg = resolve_config(c);
  ictmsav_field *raw = nullptr;
  check(ictmsav_load_image(cfg.get(), &raw), "input");
  Field image(raw);
  ictmsav_run *run_raw = nullptr;
  check(ictmsav_denoise(cfg.get(), image.get(), &run_raw), "denoise");
  Run run(run_raw);
  const auto dir = output_dir(cfg.get());
  write_manifest(cfg.get(), dir);
  write_pgm(image.get(), dir / "input.pgm");
  ictmsav_field *out = nullptr;
  check(ictmsav_run_denoised(run.get(), &out), "denoised");
  Field g(out);
  write_pgm(g.get(), dir / "denoised.pgm");
  write_raster(g.get(), dir / "g.raster");
  const auto csv = fetch_string(
      [&](char *buf, size_t cap, size_t *need) { return ictmsav_run_energy_csv(run.get(), buf, cap, need); },
      "energy");
  write_file(dir / "energy.csv", csv);
  for (size_t i = 0; i < ictmsav_run_warning_count(run.get()); ++i)
    note(std::string("warning: ") + ictmsav_run_warning(run.get(), i));
  note("denoise: wrote " + dir.string());
  return 0;
}

int cmd_metrics(const std::string &pred_path, const std::string &truth_path, int phases, const std::string &out) {
  auto pred = read_field(pred_path);
  auto truth = read_field(truth_path);
  std::string report;
  if (phases > 0) {
    report = phase_report(pred.get(), truth.get(), phases);
  } else {
    auto p = binarize(pred.get());
    auto t = binarize(truth.get());
    ictmsav_metrics m{};
    check(ictmsav_metrics_binary(p.get(), t.get(), &m), "metrics");
    report = metric_line("mask", m) + "\n";
  }
  std::fputs(report.c_str(), stdout);
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(fs::path(out) / "metrics.txt", report);
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"ictmsav: joint denoising, bias correction and multiphase segmentation"};
  app.require_subcommand(1);
  app.add_flag("--quiet,-q", quiet, "suppress progress messages")->configurable(false);

  Common synth_opts, segment_opts, denoise_opts;
  auto *synth = app.add_subcommand("synth", "generate a synthetic image, truth and bias field");
  add_common(synth, synth_opts);
  auto *segment = app.add_subcommand("segment", "run the segmentation model");
  add_common(segment, segment_opts);
  auto *denoise = app.add_subcommand("denoise", "run only the image subproblem (b = 1, lambda = 0)");
  add_common(denoise, denoise_opts);

  std::string noise_in, noise_out, noise_kind = "gamma";
  double looks = 10.0;
  long long noise_seed = 0;
  auto *noise = app.add_subcommand("noise", "corrupt an image with Poisson or Gamma noise");
  noise->add_option("input", noise_in, "clean image (PGM or raster)")->required()->check(CLI::ExistingFile);
  noise->add_option("output", noise_out, "noisy image (.pgm, or .raster for unclamped values)")->required();
  noise->add_option("--kind", noise_kind, "poisson | gamma | none");
  noise->add_option("--looks", looks, "Gamma shape L");
  noise->add_option("--seed", noise_seed, "seed")->check(CLI::NonNegativeNumber);

  std::string pred_path, truth_path, metrics_out;
  int phases = 0;
  auto *metrics = app.add_subcommand("metrics", "score a prediction against ground truth");
  metrics->add_option("pred", pred_path, "predicted mask or label map")->required()->check(CLI::ExistingFile);
  metrics->add_option("truth", truth_path, "ground-truth mask or label map")->required()->check(CLI::ExistingFile);
  metrics->add_option("--phases", phases, "treat inputs as label maps with this many phases");
  metrics->add_option("--out", metrics_out, "directory for metrics.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth)
      return cmd_synth(synth_opts);
    if (*segment)
      return cmd_segment(segment_opts);
    if (*denoise)
      return cmd_denoise(denoise_opts);
    if (*noise)
      return cmd_noise(noise_in, noise_out, noise_kind, looks, noise_seed);
    if (*metrics)
      return cmd_metrics(pred_path, truth_path, phases, metrics_out);
  } catch (const Failure &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.status);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
