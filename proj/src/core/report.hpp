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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/csp.hpp"
#include "core/pipeline.hpp"
#include "core/rlda.hpp"
#include "core/synth.hpp"

namespace fbcsp::report {

/// "0.620 (0.020)" style cell.
std::string format_mean_sd(double mean, double sd);

double mean_of(const std::vector<double>& values);
double sd_of(const std::vector<double>& values, bool population = false);

nlohmann::ordered_json csp_model_json(const csp::CspModel& model);
nlohmann::ordered_json rlda_model_json(const rlda::RldaModel& model);
nlohmann::ordered_json decode_report_json(const pipeline::DecodeReport& report);
nlohmann::ordered_json ground_truth_json(const synth::SynthConfig& cfg,
                                         const synth::GroundTruth& truth);

/// report.json, report.csv and (when a sweep ran) bands.tsv under out_dir.
/// Returns the JSON path. Output bytes depend only on the report contents.
std::filesystem::path write_decode_report(const pipeline::DecodeReport& report,
                                          const std::filesystem::path& out_dir);

/// Aggregate several report.json files: one "mean (sd)" row per
/// (subset, interval) across runs. Returns the printable table and optionally
/// writes it as CSV.
std::string aggregate_reports(const std::vector<std::filesystem::path>& report_paths,
                              const std::filesystem::path& out_csv, bool population_sd = false);

/// One-line summary for a decoding run (the table row plus significance).
std::string summary_line(const pipeline::FbcspResult& result);

}  // namespace fbcsp::report
