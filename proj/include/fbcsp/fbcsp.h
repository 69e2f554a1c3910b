/* fbcsp - filter-bank CSP EEG decoding toolkit
 * Copyright 2026 the fbcsp developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the fbcsp shared library.
 *
 * All functions return fbcsp_status; FBCSP_OK is 0. On failure a thread-local
 * message is available through fbcsp_last_error(). Objects are opaque handles
 * released with their matching _free function. The library never prints and
 * never calls exit().
 */

#ifndef FBCSP_H
#define FBCSP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FBCSP_API __declspec(dllexport)
#else
#define FBCSP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fbcsp_status {
  FBCSP_OK = 0,
  FBCSP_ERR_INVALID_ARGUMENT = 1, /* malformed parameter or usage */
  FBCSP_ERR_IO = 2,               /* file system failure */
  FBCSP_ERR_DATA = 3,             /* inconsistent data or dataset contents */
  FBCSP_ERR_NUMERIC = 4,          /* numerical routine failed */
} fbcsp_status;

FBCSP_API const char* fbcsp_version(void);
FBCSP_API const char* fbcsp_status_name(fbcsp_status status);

/* Message describing this thread's most recent failure ("" when none). The
 * pointer stays valid until the next failing call on the same thread. */
FBCSP_API const char* fbcsp_last_error(void);

/* ---------------------------------------------------------------- datasets */

/* Epoched trials; see the repository README for the on-disk format
 * (manifest.json + float32 little-endian payload). */
typedef struct fbcsp_trialset fbcsp_trialset;

/* path may be a manifest.json or a directory containing one. */
FBCSP_API fbcsp_status fbcsp_trialset_load(const char* path, fbcsp_trialset** out);
FBCSP_API fbcsp_status fbcsp_trialset_save(const fbcsp_trialset* ts, const char* dir,
                                           char* manifest_path_out, size_t manifest_path_cap);
FBCSP_API void fbcsp_trialset_free(fbcsp_trialset* ts);

FBCSP_API size_t fbcsp_trialset_n_trials(const fbcsp_trialset* ts);
FBCSP_API size_t fbcsp_trialset_n_channels(const fbcsp_trialset* ts);
FBCSP_API size_t fbcsp_trialset_n_samples(const fbcsp_trialset* ts);
FBCSP_API double fbcsp_trialset_fs_hz(const fbcsp_trialset* ts);
FBCSP_API int fbcsp_trialset_label(const fbcsp_trialset* ts, size_t trial);

/* Multiply every sample by factor (> 0). */
FBCSP_API fbcsp_status fbcsp_trialset_scale(fbcsp_trialset* ts, double factor);

/* --------------------------------------------------------- synthetic data */

typedef struct fbcsp_synth_opts {
  int n_channels;
  int n_sources; /* 0 = n_channels */
  int n_trials_class0;
  int n_trials_class1;
  double fs_hz;
  double duration_ms;
  double pre_roll_ms;
  double band_lo_hz, band_hi_hz; /* planted band */
  double variance_ratio;         /* class-1 / class-0 band power, >= 1 */
  double sensor_noise_sigma;
  double amplitude_uv;
  double artifact_amplitude_uv; /* 0 disables pulse artifacts */
  double artifact_fraction;
  uint64_t seed;
  int oracle_mc_trials; /* 0 skips the oracle estimate */
} fbcsp_synth_opts;

FBCSP_API void fbcsp_synth_opts_init(fbcsp_synth_opts* opts);

/* Writes manifest.json, data.f32 and ground_truth.json under out_dir. */
FBCSP_API fbcsp_status fbcsp_synth_generate(const fbcsp_synth_opts* opts, const char* out_dir,
                                            char* manifest_path_out, size_t manifest_path_cap);

/* --------------------------------------------------------------- decoding */

typedef enum fbcsp_interval_preset {
  FBCSP_INTERVAL_DATASET = 0, /* [0, trial end] of the dataset */
  FBCSP_INTERVAL_FULL = 1,
  FBCSP_INTERVAL_LATE = 2,
  FBCSP_INTERVAL_INTERMEDIATE = 3,
  FBCSP_INTERVAL_EXPLICIT = 4,
} fbcsp_interval_preset;

typedef enum fbcsp_band_subset {
  FBCSP_SUBSET_ALL = 0,
  FBCSP_SUBSET_BELOW20 = 1,
  FBCSP_SUBSET_ABOVE60 = 2,
} fbcsp_band_subset;

#define FBCSP_MAX_SUBSETS 3

typedef struct fbcsp_decode_opts {
  /* preprocessing */
  double target_fs_hz;        /* 500 */
  double highpass_fc_hz;      /* 0.5; 0 disables */
  int highpass_order;         /* 4 */
  int zero_phase;             /* 0 = causal forward pass */
  double reject_threshold_uv; /* 600 */
  double reject_pre_ms;       /* 500 */
  double channel_reject_z;    /* 5 */
  const char* exclude_channels; /* comma-separated names or NULL */
  int car;                      /* 1 = common-average reference */
  /* band grid */
  double band_low_edge_hz;  /* 0.5 */
  double band_split_hz;     /* 30 */
  double band_high_edge_hz; /* 144 */
  double band_low_width_hz; /* 2 */
  double band_high_width_hz;/* 6 */
  /* decoding */
  fbcsp_interval_preset interval_preset;
  int experiment; /* 1 or 2; selects the named interval values */
  double interval_start_ms, interval_end_ms; /* for FBCSP_INTERVAL_EXPLICIT */
  fbcsp_band_subset subsets[FBCSP_MAX_SUBSETS];
  int n_subsets;
  int bands_sweep; /* also run the per-band sweep */
  int k_folds;     /* 10 */
  int m_filters;   /* 3 */
  int blocked_folds;
  double fixed_gamma; /* < 0 selects analytic shrinkage */
  /* statistics */
  int64_t n_permutations; /* 100000; 0 skips the test */
  int raw_fraction_p;
  int permute_without_replacement;
  /* execution */
  uint64_t seed;
  int jobs; /* 0 = available parallelism */
  int population_sd;
} fbcsp_decode_opts;

FBCSP_API void fbcsp_decode_opts_init(fbcsp_decode_opts* opts);

typedef struct fbcsp_decode_summary {
  double mean_accuracy; /* first subset */
  double sd;
  double p_value; /* NaN when the test was skipped */
  long n_rejected_trials;
  long n_removed_channels;
  char table_row[64]; /* "0.620 (0.020)" */
} fbcsp_decode_summary;

/* Full pipeline on a stored dataset; writes report.json / report.csv (and
 * bands.tsv when sweeping) under out_dir. summary may be NULL. */
FBCSP_API fbcsp_status fbcsp_decode_run(const char* dataset_path,
                                        const fbcsp_decode_opts* opts, const char* out_dir,
                                        fbcsp_decode_summary* summary);

/* ---------------------------------------------------------------- reports */

/* Aggregate several report.json files into mean (sd) rows per
 * (subset, interval). out_csv may be NULL to skip writing; table_out receives
 * the printable table when non-NULL. */
FBCSP_API fbcsp_status fbcsp_report_aggregate(const char* const* report_paths, size_t n_paths,
                                              const char* out_csv, int population_sd,
                                              char* table_out, size_t table_cap);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FBCSP_H */
