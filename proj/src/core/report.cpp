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

#include "core/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"
#include "core/stats.hpp"

namespace fbcsp::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_mean_sd(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f (%.3f)", mean, sd);
  return buf;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sd_of(const std::vector<double>& values, bool population) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / (static_cast<double>(values.size()) - (population ? 0.0 : 1.0)));
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json band_json(const dsp::BandSpec& b) { return json::array({b.lo_hz, b.hi_hz}); }

json fbcsp_result_json(const pipeline::FbcspResult& r) {
  json out;
  out["subset"] = r.subset;
  out["interval"] = r.interval_tag;
  out["n_features"] = r.n_features;
  out["fold_acc"] = r.fold_acc;
  out["mean_acc"] = r.mean_acc;
  out["sd"] = r.sd;
  out["table_row"] = format_mean_sd(r.mean_acc, r.sd);
  if (!std::isnan(r.p_value)) {
    out["p_value"] = r.p_value;
    out["significance"] = stats::significance_stars(r.p_value);
    out["observed_accuracy"] = r.observed_accuracy;
  }
  out["predictions"] = r.predictions;
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

json csp_model_json(const csp::CspModel& model) {
  json out;
  out["eigenvalues"] = vector_json(model.eigenvalues);
  out["selected"] = model.selected;
  out["filters"] = matrix_json(model.W);
  out["patterns"] = matrix_json(model.A);
  return out;
}

json rlda_model_json(const rlda::RldaModel& model) {
  json out;
  out["w"] = vector_json(model.w);
  out["b"] = model.b;
  out["gamma"] = model.gamma;
  out["mean0"] = vector_json(model.mean0);
  out["mean1"] = vector_json(model.mean1);
  return out;
}

json ground_truth_json(const synth::SynthConfig& cfg, const synth::GroundTruth& truth) {
  json out;
  out["n_channels"] = cfg.n_channels;
  out["n_sources"] = cfg.effective_sources();
  out["n_trials"] = {cfg.n_trials_class0, cfg.n_trials_class1};
  out["fs_hz"] = cfg.fs_hz;
  out["trial_duration_ms"] = cfg.trial_duration_ms;
  out["pre_roll_ms"] = cfg.pre_roll_ms;
  out["planted_band"] = band_json(cfg.planted_band);
  out["variance_ratio"] = cfg.variance_ratio;
  out["sensor_noise_sigma"] = cfg.sensor_noise_sigma;
  out["amplitude_uv"] = cfg.amplitude_uv;
  out["artifact_amplitude_uv"] = cfg.artifact_amplitude_uv;
  out["artifact_fraction"] = cfg.artifact_fraction;
  out["seed"] = cfg.seed;
  out["source_index"] = truth.source_index;
  if (!std::isnan(truth.oracle_accuracy)) {
    out["oracle_accuracy"] = truth.oracle_accuracy;
    out["oracle_stderr"] = truth.oracle_stderr;
  }
  out["mixing"] = matrix_json(truth.mixing);
  return out;
}

json decode_report_json(const pipeline::DecodeReport& r) {
  const auto& cfg = r.config;
  json out;
  out["tool"] = "fbcsp";
  out["format"] = 1;

  json jcfg;
  jcfg["target_fs_hz"] = cfg.target_fs_hz;
  jcfg["highpass_fc_hz"] = cfg.highpass_fc_hz;
  jcfg["highpass_order"] = cfg.highpass_order;
  jcfg["zero_phase"] = cfg.zero_phase;
  jcfg["reject_threshold_uv"] = cfg.reject_threshold_uv;
  jcfg["reject_pre_ms"] = cfg.reject_pre_ms;
  jcfg["channel_reject_z"] = cfg.channel_reject_z;
  jcfg["exclude_channels"] = cfg.exclude_channels;
  jcfg["car"] = cfg.car;
  jcfg["band_grid"] = {cfg.band_low_edge_hz, cfg.band_split_hz, cfg.band_high_edge_hz,
                       cfg.band_low_width_hz, cfg.band_high_width_hz};
  jcfg["experiment"] = cfg.experiment;
  jcfg["k_folds"] = cfg.k_folds;
  jcfg["m_filters"] = cfg.m_filters;
  jcfg["blocked_folds"] = cfg.blocked_folds;
  if (cfg.fixed_gamma) jcfg["fixed_gamma"] = *cfg.fixed_gamma;
  jcfg["n_permutations"] = cfg.n_permutations;
  jcfg["raw_fraction_p"] = cfg.raw_fraction_p;
  jcfg["permute_without_replacement"] = cfg.permute_without_replacement;
  jcfg["seed"] = cfg.seed;
  out["config"] = std::move(jcfg);

  json jds;
  jds["n_trials"] = r.n_trials;
  jds["n_channels"] = r.n_channels;
  jds["n_samples_window"] = r.n_samples_window;
  jds["fs_hz"] = r.fs_hz;
  jds["downsample_factor"] = r.downsample_factor;
  jds["class_counts"] = {r.class_counts[0], r.class_counts[1]};
  out["dataset"] = std::move(jds);

  json jclean;
  json removed = json::array();
  for (const auto& c : r.cleaning.removed_channels) {
    removed.push_back(
        {{"name", c.name}, {"log_variance", c.log_variance}, {"robust_z", c.robust_z}});
  }
  jclean["removed_channels"] = std::move(removed);
  json rejected = json::array();
  for (const auto& t : r.cleaning.rejected_trials)
    rejected.push_back({{"id", t.trial_id}, {"peak_to_peak_uv", t.peak_to_peak_uv}});
  jclean["rejected_trials"] = std::move(rejected);
  out["cleaning"] = std::move(jclean);

  out["interval"] = {{"tag", r.interval_tag},
                     {"ms", {r.interval_ms.first, r.interval_ms.second}}};

  json grid = json::array();
  for (const auto& b : r.grid.bands) grid.push_back(band_json(b));
  out["band_grid"] = std::move(grid);

  json jfolds;
  jfolds["k"] = r.folds.k;
  jfolds["seed"] = r.folds.seed;
  jfolds["test_ids"] = r.folds.test_ids;
  jfolds["train_ids"] = r.fold_train_ids;
  out["folds"] = std::move(jfolds);

  out["trial_ids"] = r.trial_ids;
  out["labels"] = r.labels;

  json bands = json::array();
  for (const auto& br : r.band_results) {
    json jb;
    jb["band"] = band_json(br.band);
    jb["fold_acc"] = br.fold_acc;
    jb["mean_acc"] = br.mean_acc;
    jb["predictions"] = br.predictions;
    bands.push_back(std::move(jb));
  }
  out["band_results"] = std::move(bands);

  json fbcsp = json::array();
  for (const auto& fr : r.fbcsp_results) fbcsp.push_back(fbcsp_result_json(fr));
  out["fbcsp_results"] = std::move(fbcsp);

  if (r.exemplary_csp) {
    json ex;
    ex["band"] = band_json(r.exemplary_csp->band);
    ex["model"] = csp_model_json(r.exemplary_csp->model);
    out["exemplary_csp"] = std::move(ex);
  }
  return out;
}

std::filesystem::path write_decode_report(const pipeline::DecodeReport& report,
                                          const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  const fs::path jpath = out_dir / "report.json";
  {
    std::ofstream out(jpath, std::ios::trunc);
    if (!out) throw IoError("cannot create " + jpath.string());
    out << decode_report_json(report).dump(2) << "\n";
    if (!out) throw IoError("write failed for " + jpath.string());
  }

  {
    const fs::path cpath = out_dir / "report.csv";
    std::ofstream out(cpath, std::ios::trunc);
    if (!out) throw IoError("cannot create " + cpath.string());
    out << "kind,name,interval,mean_accuracy,sd,p_value\n";
    char buf[256];
    for (const auto& fr : report.fbcsp_results) {
      if (std::isnan(fr.p_value))
        std::snprintf(buf, sizeof buf, "fbcsp,%s,%s,%.6f,%.6f,\n", fr.subset.c_str(),
                      fr.interval_tag.c_str(), fr.mean_acc, fr.sd);
      else
        std::snprintf(buf, sizeof buf, "fbcsp,%s,%s,%.6f,%.6f,%.6g\n", fr.subset.c_str(),
                      fr.interval_tag.c_str(), fr.mean_acc, fr.sd, fr.p_value);
      out << buf;
    }
    for (const auto& br : report.band_results) {
      std::snprintf(buf, sizeof buf, "band,%g-%g,%s,%.6f,%.6f,\n", br.band.lo_hz, br.band.hi_hz,
                    report.interval_tag.c_str(), br.mean_acc, sd_of(br.fold_acc));
      out << buf;
    }
    if (!out) throw IoError("write failed for " + cpath.string());
  }

  if (!report.band_results.empty()) {
    const fs::path tpath = out_dir / "bands.tsv";
    std::ofstream out(tpath, std::ios::trunc);
    if (!out) throw IoError("cannot create " + tpath.string());
    out << "# band_lo_hz\tband_hi_hz\tbalanced_accuracy\n";
    char buf[128];
    for (const auto& br : report.band_results) {
      std::snprintf(buf, sizeof buf, "%g\t%g\t%.6f\n", br.band.lo_hz, br.band.hi_hz, br.mean_acc);
      out << buf;
    }
    if (!out) throw IoError("write failed for " + tpath.string());
  }

  return jpath;
}

std::string aggregate_reports(const std::vector<fs::path>& report_paths,
                              const fs::path& out_csv, bool population_sd) {
  if (report_paths.empty()) throw InvalidArgument("aggregate: no report files given");

  // (subset, interval) -> per-run mean accuracies
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError("malformed report " + path.string() + ": " + e.what());
    }
    if (!j.contains("fbcsp_results"))
      throw DataError("report " + path.string() + " has no fbcsp_results");
    for (const auto& fr : j["fbcsp_results"]) {
      cells[{fr.at("subset").get<std::string>(), fr.at("interval").get<std::string>()}]
          .push_back(fr.at("mean_acc").get<double>());
    }
  }

  std::ostringstream table;
  table << "subset,interval,n_runs,mean_sd\n";
  for (const auto& [key, accs] : cells) {
    table << csv_escape(key.first) << "," << csv_escape(key.second) << "," << accs.size() << ","
          << csv_escape(format_mean_sd(mean_of(accs), sd_of(accs, population_sd))) << "\n";
  }
  const std::string text = table.str();

  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw IoError("cannot create " + out_csv.string());
    out << text;
    if (!out) throw IoError("write failed for " + out_csv.string());
  }
  return text;
}

std::string summary_line(const pipeline::FbcspResult& r) {
  std::ostringstream line;
  line << "fbcsp " << r.subset << " [" << r.interval_tag << "]  "
       << format_mean_sd(r.mean_acc, r.sd);
  if (!std::isnan(r.p_value)) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "  p=%.5g", r.p_value);
    line << buf << stats::significance_stars(r.p_value);
  }
  return line.str();
}

}  // namespace fbcsp::report
