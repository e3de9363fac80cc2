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
#ifndef ICTMSAV_H
#define ICTMSAV_H

/*
 * C interface of the ictmsav segmentation engine.
 *
 * All objects are opaque handles created by the library and released with the
 * matching *_destroy function (destroy functions accept NULL). Every fallible
 * call returns an ictmsav_status; on failure ictmsav_last_error() describes
 * the problem. The message lives in thread-local storage and stays valid
 * until the next failing call on the same thread.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ICTMSAV_BUILDING)
#    define ICTMSAV_API __declspec(dllexport)
#  else
#    define ICTMSAV_API __declspec(dllimport)
#  endif
#else
#  define ICTMSAV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ictmsav_status {
  ICTMSAV_OK = 0,
  ICTMSAV_ERR_ARGUMENT = 1,   /* NULL handle or output pointer, bad buffer */
  ICTMSAV_ERR_PARAMETER = 2,  /* tunable out of range */
  ICTMSAV_ERR_CONTRACT = 3,   /* precondition violated (shapes, binary masks, ...) */
  ICTMSAV_ERR_DEGENERATE = 4, /* model undefined for the input */
  ICTMSAV_ERR_NUMERICAL = 5,  /* non-finite intermediate in a solver */
  ICTMSAV_ERR_IO = 6,
  ICTMSAV_ERR_CONFIG = 7,     /* unknown key, malformed value, missing source */
  ICTMSAV_ERR_INTERNAL = 8
} ictmsav_status;

typedef struct ictmsav_field ictmsav_field;
typedef struct ictmsav_config ictmsav_config;
typedef struct ictmsav_run ictmsav_run;

typedef struct ictmsav_metrics {
  int64_t tp, fp, fn, tn;
  double dsc, iou, accuracy, kappa;
  int kappa_degenerate; /* chance agreement was 1; kappa reported as 1 */
} ictmsav_metrics;

ICTMSAV_API const char *ictmsav_version(void);
ICTMSAV_API const char *ictmsav_last_error(void);
ICTMSAV_API const char *ictmsav_status_name(ictmsav_status status);

/* ---- fields ----------------------------------------------------------- */

/* values may be NULL (zero-filled); otherwise width*height doubles, row-major. */
ICTMSAV_API ictmsav_status ictmsav_field_create(int width, int height, const double *values, ictmsav_field **out);
ICTMSAV_API void ictmsav_field_destroy(ictmsav_field *field);
ICTMSAV_API int ictmsav_field_width(const ictmsav_field *field);
ICTMSAV_API int ictmsav_field_height(const ictmsav_field *field);
ICTMSAV_API const double *ictmsav_field_data(const ictmsav_field *field);

/* Reads a binary PGM (P5) or an ictmsav raster, chosen by magic bytes. */
ICTMSAV_API ictmsav_status ictmsav_field_read(const char *path, ictmsav_field **out);
/* 8-bit PGM; values rounded and clamped to [0, 255]. */
ICTMSAV_API ictmsav_status ictmsav_field_write_pgm(const ictmsav_field *field, const char *path);
/* Lossless float64 raster. */
ICTMSAV_API ictmsav_status ictmsav_field_write_raster(const ictmsav_field *field, const char *path);

/* ---- configuration ---------------------------------------------------- */

ICTMSAV_API ictmsav_status ictmsav_config_create(ictmsav_config **out);
ICTMSAV_API ictmsav_status ictmsav_config_load(const char *path, ictmsav_config **out);
ICTMSAV_API ictmsav_status ictmsav_config_parse(const char *text, ictmsav_config **out);
ICTMSAV_API void ictmsav_config_destroy(ictmsav_config *config);
ICTMSAV_API ictmsav_status ictmsav_config_set(ictmsav_config *config, const char *key, const char *value);
/*
 * String getters copy into buf (always NUL-terminated when cap > 0) and store
 * the full length excluding the terminator in *needed when non-NULL. A
 * buffer that is too small yields ICTMSAV_ERR_ARGUMENT; buf == NULL with a
 * non-NULL needed is a size query and succeeds.
 */
ICTMSAV_API ictmsav_status ictmsav_config_get(const ictmsav_config *config, const char *key, char *buf, size_t cap,
                                              size_t *needed);
ICTMSAV_API ictmsav_status ictmsav_config_manifest(const ictmsav_config *config, char *buf, size_t cap,
                                                   size_t *needed);
ICTMSAV_API ictmsav_status ictmsav_config_validate(const ictmsav_config *config);

/* ---- experiment inputs ------------------------------------------------ */

/* Synthetic clean image, generating label map and bias from the synth.* keys. */
ICTMSAV_API ictmsav_status ictmsav_synth(const ictmsav_config *config, ictmsav_field **clean,
                                         ictmsav_field **truth_labels, ictmsav_field **bias);
/* kind: "none", "poisson" or "gamma" (anything else is ICTMSAV_ERR_PARAMETER);
   looks is used for gamma only. No clamping. */
ICTMSAV_API ictmsav_status ictmsav_add_noise(const ictmsav_field *clean, const char *kind, double looks,
                                             uint64_t seed, ictmsav_field **out);
/* Image source of the config (file or synth) with its noise, clamped to [0, 255]. */
ICTMSAV_API ictmsav_status ictmsav_load_image(const ictmsav_config *config, ictmsav_field **out);
/* Initial phase labels from the config's init spec. */
ICTMSAV_API ictmsav_status ictmsav_initial_labels(const ictmsav_config *config, const ictmsav_field *image,
                                                  ictmsav_field **labels);

/* ---- runs ------------------------------------------------------------- */

/* init_labels may be NULL, in which case the config's init spec is used. */
ICTMSAV_API ictmsav_status ictmsav_segment(const ictmsav_config *config, const ictmsav_field *image,
                                           const ictmsav_field *init_labels, ictmsav_run **out);
/* g-subproblem only, against b = 1 and zero fitting weight. */
ICTMSAV_API ictmsav_status ictmsav_denoise(const ictmsav_config *config, const ictmsav_field *image,
                                           ictmsav_run **out);
ICTMSAV_API void ictmsav_run_destroy(ictmsav_run *run);

ICTMSAV_API int ictmsav_run_converged(const ictmsav_run *run);
ICTMSAV_API int ictmsav_run_outer_iterations(const ictmsav_run *run);
ICTMSAV_API int ictmsav_run_phase_count(const ictmsav_run *run);
/* Phase index per pixel (segment runs only). */
ICTMSAV_API ictmsav_status ictmsav_run_labels(const ictmsav_run *run, ictmsav_field **out);
ICTMSAV_API ictmsav_status ictmsav_run_denoised(const ictmsav_run *run, ictmsav_field **out);
ICTMSAV_API ictmsav_status ictmsav_run_bias(const ictmsav_run *run, ictmsav_field **out);
/* image / b, the bias-corrected input. */
ICTMSAV_API ictmsav_status ictmsav_run_corrected(const ictmsav_run *run, ictmsav_field **out);
ICTMSAV_API ictmsav_status ictmsav_run_constants(const ictmsav_run *run, double *out, size_t cap, size_t *count);
ICTMSAV_API ictmsav_status ictmsav_run_energy_csv(const ictmsav_run *run, char *buf, size_t cap, size_t *needed);
ICTMSAV_API size_t ictmsav_run_warning_count(const ictmsav_run *run);
ICTMSAV_API const char *ictmsav_run_warning(const ictmsav_run *run, size_t index);

/* ---- metrics ---------------------------------------------------------- */

/* Masks must contain only 0 and 1. */
ICTMSAV_API ictmsav_status ictmsav_metrics_binary(const ictmsav_field *pred, const ictmsav_field *truth,
                                                  ictmsav_metrics *out);
/* One-vs-rest per phase; rows must hold n_phases entries. */
ICTMSAV_API ictmsav_status ictmsav_metrics_phases(const ictmsav_field *pred_labels, const ictmsav_field *truth_labels,
                                                  int n_phases, ictmsav_metrics *rows);

#ifdef __cplusplus
}
#endif

#endif /* ICTMSAV_H */
