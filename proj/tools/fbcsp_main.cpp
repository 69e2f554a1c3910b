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

// Command-line front end; all functionality lives behind the C API in
// fbcsp/fbcsp.h. Exit codes: 0 ok, 1 usage, 2 data/file error, 3 numerical.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbcsp/fbcsp.h"

namespace {

int exit_code_for(fbcsp_status st) {
  switch (st) {
    case FBCSP_OK: return 0;
    case FBCSP_ERR_INVALID_ARGUMENT: return 1;
    case FBCSP_ERR_IO:
    case FBCSP_ERR_DATA: return 2;
    case FBCSP_ERR_NUMERIC: return 3;
  }
  return 3;
}

int fail(fbcsp_status st) {
  std::fprintf(stderr, "fbcsp: %s: %s\n", fbcsp_status_name(st), fbcsp_last_error());
  return exit_code_for(st);
}

bool parse_pair(const std::string& text, double& a, double& b) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return false;
  try {
    a = std::stod(text.substr(0, comma));
    b = std::stod(text.substr(comma + 1));
  } catch (...) {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fbcsp - offline EEG decoding with a filter-bank CSP + rLDA pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fbcsp_version()));

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
  fbcsp_synth_opts sopts;
  fbcsp_synth_opts_init(&sopts);
  std::string synth_out = "synth-data";
  std::string trials_pair = "200,200";
  std::string band_pair = "10,12";
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth->add_option("--channels", sopts.n_channels, "Sensor channels")->capture_default_str();
  synth->add_option("--sources", sopts.n_sources, "Latent sources (0 = channels)")
      ->capture_default_str();
  synth->add_option("--trials", trials_pair, "Trials per class, e.g. 432,288")
      ->capture_default_str();
  synth->add_option("--band", band_pair, "Planted band in Hz, e.g. 10,12")->capture_default_str();
  synth->add_option("--ratio", sopts.variance_ratio, "Class-1/class-0 band-power ratio (>= 1)")
      ->capture_default_str();
  synth->add_option("--noise", sopts.sensor_noise_sigma, "Sensor noise sigma")
      ->capture_default_str();
  synth->add_option("--amplitude", sopts.amplitude_uv, "Sensor scale in microvolts")
      ->capture_default_str();
  synth->add_option("--fs", sopts.fs_hz, "Sampling rate in Hz (5000 exercises the downsampler)")
      ->capture_default_str();
  synth->add_option("--duration-ms", sopts.duration_ms, "Trial duration after onset")
      ->capture_default_str();
  synth->add_option("--pre-ms", sopts.pre_roll_ms, "Leading context before onset")
      ->capture_default_str();
  synth->add_option("--artifact-uv", sopts.artifact_amplitude_uv,
                    "Square-pulse artifact amplitude (0 disables)")
      ->capture_default_str();
  synth->add_option("--artifact-frac", sopts.artifact_fraction, "Fraction of trials with a pulse")
      ->capture_default_str();
  synth->add_option("--oracle-mc", sopts.oracle_mc_trials,
                    "Monte-Carlo trials for the oracle estimate (0 skips)")
      ->capture_default_str();
  synth->add_option("--seed", sopts.seed, "Random seed")->capture_default_str();

  // ---- decode ----
  auto* decode = app.add_subcommand("decode", "Run the decoding pipeline on a dataset");
  fbcsp_decode_opts dopts;
  fbcsp_decode_opts_init(&dopts);
  std::string dataset;
  std::string decode_out = "decode-out";
  std::string interval_name = "dataset";
  std::string interval_ms;
  std::vector<std::string> subset_names;
  std::string exclude_channels;
  std::string band_grid;
  double fixed_gamma = -1.0;
  std::string folds_mode = "stratified";
  decode->add_option("dataset", dataset, "Dataset directory or manifest.json")->required();
  decode->add_option("--out", decode_out, "Output directory")->capture_default_str();
  decode->add_option("--interval", interval_name,
                     "Named decoding window: dataset | full | late | intermediate "
                     "(full/late/intermediate use the per-experiment values)")
      ->capture_default_str();
  decode->add_option("--experiment", dopts.experiment, "Named-interval set: 1 or 2")
      ->capture_default_str();
  decode->add_option("--interval-ms", interval_ms, "Explicit window, e.g. 3300,7500 (overrides --interval)");
  decode->add_option("--subset", subset_names,
                     "FBCSP band subset(s): all | below20 | above60 (repeatable or comma list)")
      ->delimiter(',');
  decode->add_flag("--bands-sweep", dopts.bands_sweep,
                   "Also decode every band of the grid separately");
  decode->add_option("--k", dopts.k_folds, "Cross-validation folds (default 10)")
      ->capture_default_str();
  decode->add_option("--m", dopts.m_filters, "CSP filters kept per side (default 3)")
      ->capture_default_str();
  decode->add_option("--perms", dopts.n_permutations,
                     "Randomization-test resamples (default 100000; 0 skips)")
      ->capture_default_str();
  decode->add_option("--seed", dopts.seed, "Seed for folds and the randomization test")
      ->capture_default_str();
  decode->add_option("--jobs", dopts.jobs, "Worker threads (0 = all cores)")
      ->capture_default_str();
  decode->add_option("--target-fs", dopts.target_fs_hz, "Downsample target rate (default 500)")
      ->capture_default_str();
  decode->add_option("--highpass", dopts.highpass_fc_hz, "High-pass cutoff in Hz (default 0.5)")
      ->capture_default_str();
  decode->add_option("--hp-order", dopts.highpass_order, "High-pass order (default 4)")
      ->capture_default_str();
  decode->add_flag("--zero-phase", dopts.zero_phase, "Forward-backward filtering");
  decode->add_option("--reject-uv", dopts.reject_threshold_uv,
                     "Peak-to-peak rejection threshold in microvolts (default 600)")
      ->capture_default_str();
  decode->add_option("--reject-pre-ms", dopts.reject_pre_ms,
                     "Context before the window inspected for rejection (default 500)")
      ->capture_default_str();
  decode->add_option("--channel-z", dopts.channel_reject_z,
                     "Robust-z threshold for noisy channels (default 5)")
      ->capture_default_str();
  decode->add_option("--exclude-channels", exclude_channels,
                     "Comma-separated channel names to drop manually");
  decode->add_flag("!--no-car", dopts.car, "Skip common-average re-referencing");
  decode->add_option("--band-grid", band_grid,
                     "low_edge,split,high_edge,low_bw,high_bw (default 0.5,30,144,2,6)");
  decode->add_option("--gamma", fixed_gamma, "Fixed rLDA shrinkage in [0,1] (-1 = analytic)")
      ->capture_default_str();
  decode->add_option("--folds", folds_mode, "stratified | blocked")->capture_default_str();
  decode->add_flag("--raw-fraction", dopts.raw_fraction_p,
                   "Report the raw tail fraction instead of (r+1)/(n+1)");
  decode->add_flag("--perm-without-replacement", dopts.permute_without_replacement,
                   "Permute predictions instead of resampling with replacement");
  decode->add_flag("--population-sd", dopts.population_sd,
                   "Population (1/n) instead of sample (1/(n-1)) standard deviation");

  // ---- report ----
  auto* rep = app.add_subcommand("report", "Aggregate run reports into mean (sd) tables");
  std::vector<std::string> report_files;
  std::string report_out;
  bool report_population_sd = false;
  rep->add_option("reports", report_files, "report.json files")->required();
  rep->add_option("--out", report_out, "Write the aggregated table as CSV");
  rep->add_flag("--population-sd", report_population_sd, "Population standard deviation");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    double a = 0, b = 0;
    if (!parse_pair(trials_pair, a, b) || a < 1 || b < 1) {
      std::fprintf(stderr, "fbcsp: --trials expects two positive counts, e.g. 200,200\n");
      return 1;
    }
    sopts.n_trials_class0 = static_cast<int>(a);
    sopts.n_trials_class1 = static_cast<int>(b);
    if (!parse_pair(band_pair, sopts.band_lo_hz, sopts.band_hi_hz)) {
      std::fprintf(stderr, "fbcsp: --band expects lo,hi in Hz\n");
      return 1;
    }
    char manifest[4096];
    const fbcsp_status st = fbcsp_synth_generate(&sopts, synth_out.c_str(), manifest, sizeof manifest);
    if (st != FBCSP_OK) return fail(st);
    std::printf("wrote %s\n", manifest);
    return 0;
  }

  if (decode->parsed()) {
    if (!interval_ms.empty()) {
      if (!parse_pair(interval_ms, dopts.interval_start_ms, dopts.interval_end_ms)) {
        std::fprintf(stderr, "fbcsp: --interval-ms expects start,end in ms\n");
        return 1;
      }
      dopts.interval_preset = FBCSP_INTERVAL_EXPLICIT;
    } else if (interval_name == "dataset") {
      dopts.interval_preset = FBCSP_INTERVAL_DATASET;
    } else if (interval_name == "full") {
      dopts.interval_preset = FBCSP_INTERVAL_FULL;
    } else if (interval_name == "late") {
      dopts.interval_preset = FBCSP_INTERVAL_LATE;
    } else if (interval_name == "intermediate") {
      dopts.interval_preset = FBCSP_INTERVAL_INTERMEDIATE;
    } else {
      std::fprintf(stderr, "fbcsp: unknown interval \"%s\"\n", interval_name.c_str());
      return 1;
    }

    if (!subset_names.empty()) {
      dopts.n_subsets = 0;
      for (const auto& name : subset_names) {
        if (dopts.n_subsets >= FBCSP_MAX_SUBSETS) {
          std::fprintf(stderr, "fbcsp: at most %d subsets per run\n", FBCSP_MAX_SUBSETS);
          return 1;
        }
        if (name == "all")
          dopts.subsets[dopts.n_subsets++] = FBCSP_SUBSET_ALL;
        else if (name == "below20")
          dopts.subsets[dopts.n_subsets++] = FBCSP_SUBSET_BELOW20;
        else if (name == "above60")
          dopts.subsets[dopts.n_subsets++] = FBCSP_SUBSET_ABOVE60;
        else {
          std::fprintf(stderr, "fbcsp: unknown subset \"%s\"\n", name.c_str());
          return 1;
        }
      }
    }

    if (!band_grid.empty()) {
      double v[5];
      if (std::sscanf(band_grid.c_str(), "%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                      &v[4]) != 5) {
        std::fprintf(stderr, "fbcsp: --band-grid expects five comma-separated numbers\n");
        return 1;
      }
      dopts.band_low_edge_hz = v[0];
      dopts.band_split_hz = v[1];
      dopts.band_high_edge_hz = v[2];
      dopts.band_low_width_hz = v[3];
      dopts.band_high_width_hz = v[4];
    }

    if (folds_mode == "blocked")
      dopts.blocked_folds = 1;
    else if (folds_mode != "stratified") {
      std::fprintf(stderr, "fbcsp: --folds expects stratified or blocked\n");
      return 1;
    }
    dopts.fixed_gamma = fixed_gamma;
    if (!exclude_channels.empty()) dopts.exclude_channels = exclude_channels.c_str();

    fbcsp_decode_summary summary;
    const fbcsp_status st = fbcsp_decode_run(dataset.c_str(), &dopts, decode_out.c_str(), &summary);
    if (st != FBCSP_OK) return fail(st);
    std::printf("removed channels: %ld, rejected trials: %ld\n", summary.n_removed_channels,
                summary.n_rejected_trials);
    if (summary.table_row[0] != '\0') {
      if (std::isnan(summary.p_value))
        std::printf("accuracy: %s\n", summary.table_row);
      else
        std::printf("accuracy: %s  p=%g\n", summary.table_row, summary.p_value);
    }
    std::printf("reports written to %s\n", decode_out.c_str());
    return 0;
  }

  if (rep->parsed()) {
    std::vector<const char*> paths;
    paths.reserve(report_files.size());
    for (const auto& f : report_files) paths.push_back(f.c_str());
    std::vector<char> table(1 << 20);
    const fbcsp_status st =
        fbcsp_report_aggregate(paths.data(), paths.size(), report_out.empty() ? nullptr : report_out.c_str(),
                               report_population_sd ? 1 : 0, table.data(), table.size());
    if (st != FBCSP_OK) return fail(st);
    std::fputs(table.data(), stdout);
    return 0;
  }

  return 1;
}
