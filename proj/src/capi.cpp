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
#include "ictmsav/ictmsav.h"

#include "ictmsav/error.hpp"
#include "ictmsav/experiment.hpp"
#include "ictmsav/io.hpp"
#include "ictmsav/metrics.hpp"
#include "ictmsav/solvers.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

struct ictmsav_field {
  ictmsav::ScalarField value;
};

struct ictmsav_config {
  ictmsav::ExperimentConfig value;
};

struct ictmsav_run {
  bool segmentation = false;
  int phases = 1;
  ictmsav::ScalarField image;
  ictmsav::SegmentResult seg;
  ictmsav::DenoiseResult den;
  std::vector<std::string> warnings;
};

namespace {

thread_local std::string last_error;

ictmsav_status fail(ictmsav_status status, const char *message) {
  last_error = message;
  return status;
}

template <class Fn>
ictmsav_status guarded(Fn &&fn) noexcept {
  try {
    fn();
    return ICTMSAV_OK;
  } catch (const ictmsav::ParameterError &e) {
    return fail(ICTMSAV_ERR_PARAMETER, e.what());
  } catch (const ictmsav::ContractViolation &e) {
    return fail(ICTMSAV_ERR_CONTRACT, e.what());
  } catch (const ictmsav::DegenerateInput &e) {
    return fail(ICTMSAV_ERR_DEGENERATE, e.what());
  } catch (const ictmsav::NumericalFailure &e) {
    return fail(ICTMSAV_ERR_NUMERICAL, e.what());
  } catch (const ictmsav::IoError &e) {
    return fail(ICTMSAV_ERR_IO, e.what());
  } catch (const ictmsav::ConfigError &e) {
    return fail(ICTMSAV_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc &) {
    return fail(ICTMSAV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(ICTMSAV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ICTMSAV_ERR_INTERNAL, "unknown exception");
  }
}

template <class Fn>
ictmsav_status checked(Fn &&fn) noexcept {
  try {
    return guarded(std::forward<Fn>(fn));
  } catch (...) {
    return fail(ICTMSAV_ERR_INTERNAL, "unknown exception");
  }
}

#define ICTMSAV_REQUIRE(cond, msg)                                                                                 \
  do {                                                                                                             \
    if (!(cond))                                                                                                   \
      return fail(ICTMSAV_ERR_ARGUMENT, msg);                                                                      \
  } while (0)

ictmsav_field *wrap(ictmsav::ScalarField f) { return new ictmsav_field{std::move(f)}; }

ictmsav_status copy_string(const std::string &s, char *buf, size_t cap, size_t *needed) {
  if (needed)
    *needed = s.size();
  if (buf == nullptr || cap == 0)
    return needed ? ICTMSAV_OK : fail(ICTMSAV_ERR_ARGUMENT, "no output buffer");
  if (cap < s.size() + 1) {
    buf[0] = '\0';
    return fail(ICTMSAV_ERR_ARGUMENT, "output buffer too small");
  }
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  return ICTMSAV_OK;
}

void fill_metrics(const ictmsav::MetricRow &row, ictmsav_metrics *out) {
  out->tp = row.counts.tp;
  out->fp = row.counts.fp;
  out->fn = row.counts.fn;
  out->tn = row.counts.tn;
  out->dsc = row.dsc;
  out->iou = row.iou;
  out->accuracy = row.accuracy;
  out->kappa = row.kappa;
  out->kappa_degenerate = row.kappa_degenerate ? 1 : 0;
}

ictmsav::IndicatorSet initial_partition(const ictmsav::ExperimentConfig &cfg, const ictmsav::ScalarField &image) {
  if (!cfg.init)
    throw ictmsav::ConfigError("no 'init' contour configured");
  return ictmsav::make_initial_partition(*cfg.init, image, cfg.params.n_phases);
}

} // namespace

extern "C" {

const char *ictmsav_version(void) { return "1.0.0"; }

const char *ictmsav_last_error(void) { return last_error.c_str(); }

const char *ictmsav_status_name(ictmsav_status status) {
  switch (status) {
  case ICTMSAV_OK: return "ok";
  case ICTMSAV_ERR_ARGUMENT: return "invalid argument";
  case ICTMSAV_ERR_PARAMETER: return "parameter error";
  case ICTMSAV_ERR_CONTRACT: return "contract violation";
  case ICTMSAV_ERR_DEGENERATE: return "degenerate input";
  case ICTMSAV_ERR_NUMERICAL: return "numerical failure";
  case ICTMSAV_ERR_IO: return "i/o error";
  case ICTMSAV_ERR_CONFIG: return "configuration error";
  case ICTMSAV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- fields

ictmsav_status ictmsav_field_create(int width, int height, const double *values, ictmsav_field **out) {
  ICTMSAV_REQUIRE(out, "out is NULL");
  *out = nullptr;
  return checked([&] {
    ictmsav::ScalarField f(width, height);
    if (values)
      std::copy(values, values + f.size(), f.values().begin());
    *out = wrap(std::move(f));
  });
}

void ictmsav_field_destroy(ictmsav_field *field) { delete field; }

int ictmsav_field_width(const ictmsav_field *field) { return field ? field->value.width() : 0; }
int ictmsav_field_height(const ictmsav_field *field) { return field ? field->value.height() : 0; }
const double *ictmsav_field_data(const ictmsav_field *field) {
  return field ? field->value.values().data() : nullptr;
}

ictmsav_status ictmsav_field_read(const char *path, ictmsav_field **out) {
  ICTMSAV_REQUIRE(path && out, "path or out is NULL");
  *out = nullptr;
  return checked([&] { *out = wrap(ictmsav::read_image(path)); });
}

ictmsav_status ictmsav_field_write_pgm(const ictmsav_field *field, const char *path) {
  ICTMSAV_REQUIRE(field && path, "field or path is NULL");
  return checked([&] { ictmsav::write_pgm(path, field->value); });
}

ictmsav_status ictmsav_field_write_raster(const ictmsav_field *field, const char *path) {
  ICTMSAV_REQUIRE(field && path, "field or path is NULL");
  return checked([&] { ictmsav::write_raster(path, field->value); });
}

// ---- configuration

ictmsav_status ictmsav_config_create(ictmsav_config **out) {
  ICTMSAV_REQUIRE(out, "out is NULL");
  *out = nullptr;
  return checked([&] { *out = new ictmsav_config{}; });
}

ictmsav_status ictmsav_config_load(const char *path, ictmsav_config **out) {
  ICTMSAV_REQUIRE(path && out, "path or out is NULL");
  *out = nullptr;
  return checked([&] { *out = new ictmsav_config{ictmsav::ExperimentConfig::load(path)}; });
}

ictmsav_status ictmsav_config_parse(const char *text, ictmsav_config **out) {
  ICTMSAV_REQUIRE(text && out, "text or out is NULL");
  *out = nullptr;
  return checked([&] { *out = new ictmsav_config{ictmsav::ExperimentConfig::parse(text)}; });
}

void ictmsav_config_destroy(ictmsav_config *config) { delete config; }

ictmsav_status ictmsav_config_set(ictmsav_config *config, const char *key, const char *value) {
  ICTMSAV_REQUIRE(config && key && value, "config, key or value is NULL");
  return checked([&] {
    try {
      config->value.set(key, value);
    } catch (const ictmsav::ParameterError &e) {
      throw ictmsav::ConfigError(e.what());
    }
  });
}

ictmsav_status ictmsav_config_get(const ictmsav_config *config, const char *key, char *buf, size_t cap,
                                  size_t *needed) {
  ICTMSAV_REQUIRE(config && key, "config or key is NULL");
  std::string s;
  const auto st = checked([&] { s = config->value.get(key); });
  return st != ICTMSAV_OK ? st : copy_string(s, buf, cap, needed);
}

ictmsav_status ictmsav_config_manifest(const ictmsav_config *config, char *buf, size_t cap, size_t *needed) {
  ICTMSAV_REQUIRE(config, "config is NULL");
  std::string s;
  const auto st = checked([&] { s = config->value.manifest(); });
  return st != ICTMSAV_OK ? st : copy_string(s, buf, cap, needed);
}

ictmsav_status ictmsav_config_validate(const ictmsav_config *config) {
  ICTMSAV_REQUIRE(config, "config is NULL");
  return checked([&] { config->value.validate(); });
}

// ---- experiment inputs

ictmsav_status ictmsav_synth(const ictmsav_config *config, ictmsav_field **clean, ictmsav_field **truth_labels,
                             ictmsav_field **bias) {
  ICTMSAV_REQUIRE(config && clean && truth_labels && bias, "NULL argument");
  *clean = *truth_labels = *bias = nullptr;
  return checked([&] {
    if (!config->value.synth)
      throw ictmsav::ConfigError("no synth.* keys configured");
    auto s = ictmsav::synth(*config->value.synth, config->value.params.n_phases);
    auto c = wrap(std::move(s.clean));
    auto t = wrap(s.truth.label_field());
    *bias = wrap(std::move(s.bias));
    *clean = c;
    *truth_labels = t;
  });
}

ictmsav_status ictmsav_add_noise(const ictmsav_field *clean, const char *kind, double looks, uint64_t seed,
                                 ictmsav_field **out) {
  ICTMSAV_REQUIRE(clean && kind && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    ictmsav::NoiseSpec spec;
    try {
      spec.kind = ictmsav::parse_noise_kind(kind);
    } catch (const ictmsav::ConfigError &e) {
      throw ictmsav::ParameterError(e.what());
    }
    spec.looks = looks;
    spec.seed = seed;
    *out = wrap(ictmsav::apply_noise(clean->value, spec));
  });
}

ictmsav_status ictmsav_load_image(const ictmsav_config *config, ictmsav_field **out) {
  ICTMSAV_REQUIRE(config && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    config->value.validate();
    *out = wrap(ictmsav::load_experiment_image(config->value));
  });
}

ictmsav_status ictmsav_initial_labels(const ictmsav_config *config, const ictmsav_field *image,
                                      ictmsav_field **labels) {
  ICTMSAV_REQUIRE(config && image && labels, "NULL argument");
  *labels = nullptr;
  return checked([&] { *labels = wrap(initial_partition(config->value, image->value).label_field()); });
}

// ---- runs

ictmsav_status ictmsav_segment(const ictmsav_config *config, const ictmsav_field *image,
                               const ictmsav_field *init_labels, ictmsav_run **out) {
  ICTMSAV_REQUIRE(config && image && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    const auto &cfg = config->value;
    try {
      cfg.params.validate();
    } catch (const ictmsav::ParameterError &e) {
      throw ictmsav::ConfigError(e.what());
    }
    ictmsav::ScalarField f = image->value;
    for (double &v : f.values())
      v = std::clamp(v, 0.0, 255.0);
    const ictmsav::IndicatorSet init =
        init_labels ? ictmsav::IndicatorSet::from_label_field(init_labels->value, cfg.params.n_phases)
                    : initial_partition(cfg, f);
    auto run = std::make_unique<ictmsav_run>();
    run->segmentation = true;
    run->phases = cfg.params.n_phases;
    run->seg = ictmsav::segment(f, init, cfg.params);
    run->warnings = run->seg.log.warnings;
    run->image = std::move(f);
    *out = run.release();
  });
}

ictmsav_status ictmsav_denoise(const ictmsav_config *config, const ictmsav_field *image, ictmsav_run **out) {
  ICTMSAV_REQUIRE(config && image && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    ictmsav::ScalarField f = image->value;
    for (double &v : f.values())
      v = std::clamp(v, 0.0, 255.0);
    auto run = std::make_unique<ictmsav_run>();
    run->den = ictmsav::denoise(f, config->value.params);
    if (run->den.log.hit_max_inner)
      run->warnings.push_back("inner loop reached max_inner");
    run->image = std::move(f);
    *out = run.release();
  });
}

void ictmsav_run_destroy(ictmsav_run *run) { delete run; }

int ictmsav_run_converged(const ictmsav_run *run) {
  if (!run)
    return 0;
  return run->segmentation ? (run->seg.converged ? 1 : 0) : (run->den.log.hit_max_inner ? 0 : 1);
}

int ictmsav_run_outer_iterations(const ictmsav_run *run) {
  return run && run->segmentation ? static_cast<int>(run->seg.log.outer.size()) : 0;
}

int ictmsav_run_phase_count(const ictmsav_run *run) { return run ? run->phases : 0; }

ictmsav_status ictmsav_run_labels(const ictmsav_run *run, ictmsav_field **out) {
  ICTMSAV_REQUIRE(run && out, "NULL argument");
  *out = nullptr;
  ICTMSAV_REQUIRE(run->segmentation, "labels exist only for segmentation runs");
  return checked([&] { *out = wrap(run->seg.state.u.label_field()); });
}

ictmsav_status ictmsav_run_denoised(const ictmsav_run *run, ictmsav_field **out) {
  ICTMSAV_REQUIRE(run && out, "NULL argument");
  *out = nullptr;
  return checked([&] { *out = wrap(run->segmentation ? run->seg.state.g : run->den.g); });
}

ictmsav_status ictmsav_run_bias(const ictmsav_run *run, ictmsav_field **out) {
  ICTMSAV_REQUIRE(run && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    *out = wrap(run->segmentation ? run->seg.state.b
                                  : ictmsav::ScalarField(run->image.width(), run->image.height(), 1.0));
  });
}

ictmsav_status ictmsav_run_corrected(const ictmsav_run *run, ictmsav_field **out) {
  ICTMSAV_REQUIRE(run && out, "NULL argument");
  *out = nullptr;
  return checked([&] {
    ictmsav::ScalarField c = run->image;
    if (run->segmentation) {
      const auto &b = run->seg.state.b;
      for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = b[i] > 0.0 ? c[i] / b[i] : 0.0;
    }
    *out = wrap(std::move(c));
  });
}

ictmsav_status ictmsav_run_constants(const ictmsav_run *run, double *out, size_t cap, size_t *count) {
  ICTMSAV_REQUIRE(run, "run is NULL");
  const std::vector<double> c = run->segmentation ? run->seg.state.c : std::vector<double>{};
  if (count)
    *count = c.size();
  if (out == nullptr)
    return ICTMSAV_OK;
  ICTMSAV_REQUIRE(cap >= c.size(), "output array too small");
  std::copy(c.begin(), c.end(), out);
  return ICTMSAV_OK;
}

ictmsav_status ictmsav_run_energy_csv(const ictmsav_run *run, char *buf, size_t cap, size_t *needed) {
  ICTMSAV_REQUIRE(run, "run is NULL");
  std::string s;
  const auto st = checked([&] { s = run->segmentation ? ictmsav::energy_csv(run->seg.log) : ictmsav::energy_csv(run->den.log); });
  return st != ICTMSAV_OK ? st : copy_string(s, buf, cap, needed);
}

size_t ictmsav_run_warning_count(const ictmsav_run *run) { return run ? run->warnings.size() : 0; }

const char *ictmsav_run_warning(const ictmsav_run *run, size_t index) {
  if (!run || index >= run->warnings.size())
    return nullptr;
  return run->warnings[index].c_str();
}

// ---- metrics

ictmsav_status ictmsav_metrics_binary(const ictmsav_field *pred, const ictmsav_field *truth, ictmsav_metrics *out) {
  ICTMSAV_REQUIRE(pred && truth && out, "NULL argument");
  return checked([&] { fill_metrics(ictmsav::metric_row(ictmsav::confusion(pred->value, truth->value)), out); });
}

ictmsav_status ictmsav_metrics_phases(const ictmsav_field *pred_labels, const ictmsav_field *truth_labels,
                                      int n_phases, ictmsav_metrics *rows) {
  ICTMSAV_REQUIRE(pred_labels && truth_labels && rows, "NULL argument");
  ICTMSAV_REQUIRE(n_phases >= 1, "n_phases must be >= 1");
  return checked([&] {
    const auto p = ictmsav::IndicatorSet::from_label_field(pred_labels->value, n_phases);
    const auto t = ictmsav::IndicatorSet::from_label_field(truth_labels->value, n_phases);
    const auto report = ictmsav::multiphase_report(p, t);
    for (std::size_t i = 0; i < report.size(); ++i)
      fill_metrics(report[i], &rows[i]);
  });
}

} // extern "C"
