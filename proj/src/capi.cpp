// fbcsp - filter-bank CSP EEG decoding toolkit
// Copyright 2026 the fbcsp developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fbcsp/fbcsp.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "core/dataset_io.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/synth.hpp"
#include "core/types.hpp"

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

fbcsp_status to_status(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const fbcsp::InvalidArgument*>(&e)) return FBCSP_ERR_INVALID_ARGUMENT;
  if (dynamic_cast<const fbcsp::IoError*>(&e)) return FBCSP_ERR_IO;
  if (dynamic_cast<const fbcsp::DataError*>(&e)) return FBCSP_ERR_DATA;
  if (dynamic_cast<const fbcsp::NumericError*>(&e)) return FBCSP_ERR_NUMERIC;
  return FBCSP_ERR_NUMERIC;
}

template <typename Fn>
fbcsp_status guarded(Fn&& fn) {
  try {
    fn();
    return FBCSP_OK;
  } catch (const std::exception& e) {
    return to_status(e);
  } catch (...) {
    set_error("unknown error");
    return FBCSP_ERR_NUMERIC;
  }
}

fbcsp_status copy_out(const std::string& s, char* dst, size_t cap) {
  if (!dst) return FBCSP_OK;
  if (cap == 0 || s.size() + 1 > cap) {
    set_error("output buffer too small");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  std::memcpy(dst, s.c_str(), s.size() + 1);
  return FBCSP_OK;
}

std::vector<std::string> split_csv_list(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fbcsp::pipeline::DecodeConfig to_config(const fbcsp_decode_opts& o) {
  using namespace fbcsp::pipeline;
  DecodeConfig cfg;
  cfg.target_fs_hz = o.target_fs_hz;
  cfg.highpass_fc_hz = o.highpass_fc_hz;
  cfg.highpass_order = o.highpass_order;
  cfg.zero_phase = o.zero_phase != 0;
  cfg.reject_threshold_uv = o.reject_threshold_uv;
  cfg.reject_pre_ms = o.reject_pre_ms;
  cfg.channel_reject_z = o.channel_reject_z;
  cfg.exclude_channels = split_csv_list(o.exclude_channels);
  cfg.car = o.car != 0;
  cfg.band_low_edge_hz = o.band_low_edge_hz;
  cfg.band_split_hz = o.band_split_hz;
  cfg.band_high_edge_hz = o.band_high_edge_hz;
  cfg.band_low_width_hz = o.band_low_width_hz;
  cfg.band_high_width_hz = o.band_high_width_hz;
  switch (o.interval_preset) {
    case FBCSP_INTERVAL_DATASET: cfg.interval_preset = IntervalPreset::kDataset; break;
    case FBCSP_INTERVAL_FULL: cfg.interval_preset = IntervalPreset::kFull; break;
    case FBCSP_INTERVAL_LATE: cfg.interval_preset = IntervalPreset::kLate; break;
    case FBCSP_INTERVAL_INTERMEDIATE: cfg.interval_preset = IntervalPreset::kIntermediate; break;
    case FBCSP_INTERVAL_EXPLICIT: cfg.interval_preset = IntervalPreset::kExplicit; break;
    default: throw fbcsp::InvalidArgument("unknown interval preset");
  }
  cfg.experiment = o.experiment;
  cfg.interval_explicit_ms = {o.interval_start_ms, o.interval_end_ms};
  if (o.n_subsets < 0 || o.n_subsets > FBCSP_MAX_SUBSETS)
    throw fbcsp::InvalidArgument("n_subsets out of range");
  cfg.subsets.clear();
  for (int i = 0; i < o.n_subsets; ++i) {
    switch (o.subsets[i]) {
      case FBCSP_SUBSET_ALL: cfg.subsets.push_back(BandSubset::kAll); break;
      case FBCSP_SUBSET_BELOW20: cfg.subsets.push_back(BandSubset::kBelow20); break;
      case FBCSP_SUBSET_ABOVE60: cfg.subsets.push_back(BandSubset::kAbove60); break;
      default: throw fbcsp::InvalidArgument("unknown band subset");
    }
  }
  cfg.bands_sweep = o.bands_sweep != 0;
  cfg.k_folds = o.k_folds;
  cfg.m_filters = o.m_filters;
  cfg.blocked_folds = o.blocked_folds != 0;
  if (o.fixed_gamma >= 0.0) cfg.fixed_gamma = o.fixed_gamma;
  cfg.n_permutations = o.n_permutations;
  cfg.raw_fraction_p = o.raw_fraction_p != 0;
  cfg.permute_without_replacement = o.permute_without_replacement != 0;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.population_sd = o.population_sd != 0;
  return cfg;
}

}  // namespace

struct fbcsp_trialset {
  fbcsp::TrialSet ts;
};

extern "C" {

const char* fbcsp_version(void) { return "0.1.0"; }

const char* fbcsp_status_name(fbcsp_status status) {
  switch (status) {
    case FBCSP_OK: return "ok";
    case FBCSP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FBCSP_ERR_IO: return "i/o error";
    case FBCSP_ERR_DATA: return "data error";
    case FBCSP_ERR_NUMERIC: return "numerical error";
  }
  return "unknown";
}

const char* fbcsp_last_error(void) { return t_last_error.c_str(); }

fbcsp_status fbcsp_trialset_load(const char* path, fbcsp_trialset** out) {
  if (!path || !out) {
    set_error("null argument");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<fbcsp_trialset>();
    handle->ts = fbcsp::data::load_dataset(path);
    *out = handle.release();
  });
}

fbcsp_status fbcsp_trialset_save(const fbcsp_trialset* ts, const char* dir,
                                 char* manifest_path_out, size_t manifest_path_cap) {
  if (!ts || !dir) {
    set_error("null argument");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  std::string mpath;
  const fbcsp_status st = guarded([&] { mpath = fbcsp::data::save_dataset(ts->ts, dir).string(); });
  if (st != FBCSP_OK) return st;
  return copy_out(mpath, manifest_path_out, manifest_path_cap);
}

void fbcsp_trialset_free(fbcsp_trialset* ts) { delete ts; }

size_t fbcsp_trialset_n_trials(const fbcsp_trialset* ts) { return ts ? ts->ts.n_trials() : 0; }
size_t fbcsp_trialset_n_channels(const fbcsp_trialset* ts) {
  return ts ? static_cast<size_t>(ts->ts.n_channels()) : 0;
}
size_t fbcsp_trialset_n_samples(const fbcsp_trialset* ts) {
  return ts ? static_cast<size_t>(ts->ts.n_samples()) : 0;
}
double fbcsp_trialset_fs_hz(const fbcsp_trialset* ts) { return ts ? ts->ts.fs_hz : 0.0; }

int fbcsp_trialset_label(const fbcsp_trialset* ts, size_t trial) {
  if (!ts || trial >= ts->ts.n_trials()) return -1;
  return ts->ts.labels[trial];
}

fbcsp_status fbcsp_trialset_scale(fbcsp_trialset* ts, double factor) {
  if (!ts) {
    set_error("null argument");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  if (!(factor > 0.0)) {
    set_error("scale factor must be positive");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  for (auto& trial : ts->ts.trials) trial *= factor;
  return FBCSP_OK;
}

void fbcsp_synth_opts_init(fbcsp_synth_opts* opts) {
  if (!opts) return;
  fbcsp::synth::SynthConfig d;
  opts->n_channels = d.n_channels;
  opts->n_sources = 0;
  opts->n_trials_class0 = d.n_trials_class0;
  opts->n_trials_class1 = d.n_trials_class1;
  opts->fs_hz = d.fs_hz;
  opts->duration_ms = d.trial_duration_ms;
  opts->pre_roll_ms = d.pre_roll_ms;
  opts->band_lo_hz = d.planted_band.lo_hz;
  opts->band_hi_hz = d.planted_band.hi_hz;
  opts->variance_ratio = d.variance_ratio;
  opts->sensor_noise_sigma = d.sensor_noise_sigma;
  opts->amplitude_uv = d.amplitude_uv;
  opts->artifact_amplitude_uv = d.artifact_amplitude_uv;
  opts->artifact_fraction = d.artifact_fraction;
  opts->seed = d.seed;
  opts->oracle_mc_trials = 20000;
}

fbcsp_status fbcsp_synth_generate(const fbcsp_synth_opts* opts, const char* out_dir,
                                  char* manifest_path_out, size_t manifest_path_cap) {
  if (!opts || !out_dir) {
    set_error("null argument");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  std::string mpath;
  const fbcsp_status st = guarded([&] {
    fbcsp::synth::SynthConfig cfg;
    cfg.n_channels = opts->n_channels;
    cfg.n_sources = opts->n_sources;
    cfg.n_trials_class0 = opts->n_trials_class0;
    cfg.n_trials_class1 = opts->n_trials_class1;
    cfg.fs_hz = opts->fs_hz;
    cfg.trial_duration_ms = opts->duration_ms;
    cfg.pre_roll_ms = opts->pre_roll_ms;
    cfg.planted_band = {opts->band_lo_hz, opts->band_hi_hz};
    cfg.variance_ratio = opts->variance_ratio;
    cfg.sensor_noise_sigma = opts->sensor_noise_sigma;
    cfg.amplitude_uv = opts->amplitude_uv;
    cfg.artifact_amplitude_uv = opts->artifact_amplitude_uv;
    cfg.artifact_fraction = opts->artifact_fraction;
    cfg.seed = opts->seed;

    auto [ts, truth] = fbcsp::synth::generate(cfg);
    if (opts->oracle_mc_trials > 0) {
      const auto est = fbcsp::synth::oracle_accuracy(cfg, opts->oracle_mc_trials);
      truth.oracle_accuracy = est.accuracy;
      truth.oracle_stderr = est.stderr_;
    }
    mpath = fbcsp::data::save_dataset(ts, out_dir).string();

    const std::filesystem::path gpath = std::filesystem::path(out_dir) / "ground_truth.json";
    std::ofstream out(gpath, std::ios::trunc);
    if (!out) throw fbcsp::IoError("cannot create " + gpath.string());
    out << fbcsp::report::ground_truth_json(cfg, truth).dump(2) << "\n";
    if (!out) throw fbcsp::IoError("write failed for " + gpath.string());
  });
  if (st != FBCSP_OK) return st;
  return copy_out(mpath, manifest_path_out, manifest_path_cap);
}

void fbcsp_decode_opts_init(fbcsp_decode_opts* opts) {
  if (!opts) return;
  fbcsp::pipeline::DecodeConfig d;
  opts->target_fs_hz = d.target_fs_hz;
  opts->highpass_fc_hz = d.highpass_fc_hz;
  opts->highpass_order = d.highpass_order;
  opts->zero_phase = 0;
  opts->reject_threshold_uv = d.reject_threshold_uv;
  opts->reject_pre_ms = d.reject_pre_ms;
  opts->channel_reject_z = d.channel_reject_z;
  opts->exclude_channels = nullptr;
  opts->car = 1;
  opts->band_low_edge_hz = d.band_low_edge_hz;
  opts->band_split_hz = d.band_split_hz;
  opts->band_high_edge_hz = d.band_high_edge_hz;
  opts->band_low_width_hz = d.band_low_width_hz;
  opts->band_high_width_hz = d.band_high_width_hz;
  opts->interval_preset = FBCSP_INTERVAL_DATASET;
  opts->experiment = 1;
  opts->interval_start_ms = 0.0;
  opts->interval_end_ms = 0.0;
  opts->subsets[0] = FBCSP_SUBSET_ALL;
  opts->subsets[1] = FBCSP_SUBSET_ALL;
  opts->subsets[2] = FBCSP_SUBSET_ALL;
  opts->n_subsets = 1;
  opts->bands_sweep = 0;
  opts->k_folds = d.k_folds;
  opts->m_filters = d.m_filters;
  opts->blocked_folds = 0;
  opts->fixed_gamma = -1.0;
  opts->n_permutations = d.n_permutations;
  opts->raw_fraction_p = 0;
  opts->permute_without_replacement = 0;
  opts->seed = 0;
  opts->jobs = 0;
  opts->population_sd = 0;
}

fbcsp_status fbcsp_decode_run(const char* dataset_path, const fbcsp_decode_opts* opts,
                              const char* out_dir, fbcsp_decode_summary* summary) {
  if (!dataset_path || !opts || !out_dir) {
    set_error("null argument");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const fbcsp::pipeline::DecodeConfig cfg = to_config(*opts);
    const fbcsp::TrialSet ts = fbcsp::data::load_dataset(dataset_path);
    const fbcsp::pipeline::DecodeReport report = fbcsp::pipeline::run_decode(ts, cfg);
    fbcsp::report::write_decode_report(report, out_dir);
    if (summary) {
      std::memset(summary, 0, sizeof *summary);
      summary->p_value = std::numeric_limits<double>::quiet_NaN();
      summary->n_rejected_trials = static_cast<long>(report.cleaning.rejected_trials.size());
      summary->n_removed_channels = static_cast<long>(report.cleaning.removed_channels.size());
      if (!report.fbcsp_results.empty()) {
        const auto& first = report.fbcsp_results.front();
        summary->mean_accuracy = first.mean_acc;
        summary->sd = first.sd;
        summary->p_value = first.p_value;
        const std::string row = fbcsp::report::format_mean_sd(first.mean_acc, first.sd);
        std::snprintf(summary->table_row, sizeof summary->table_row, "%s", row.c_str());
      }
    }
  });
}

fbcsp_status fbcsp_report_aggregate(const char* const* report_paths, size_t n_paths,
                                    const char* out_csv, int population_sd, char* table_out,
                                    size_t table_cap) {
  if (!report_paths || n_paths == 0) {
    set_error("no report files given");
    return FBCSP_ERR_INVALID_ARGUMENT;
  }
  std::string table;
  const fbcsp_status st = guarded([&] {
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n_paths; ++i) {
      if (!report_paths[i]) throw fbcsp::InvalidArgument("null report path");
      paths.emplace_back(report_paths[i]);
    }
    table = fbcsp::report::aggregate_reports(paths, out_csv ? out_csv : "", population_sd != 0);
  });
  if (st != FBCSP_OK) return st;
  return copy_out(table, table_out, table_cap);
}

}  // extern "C"
