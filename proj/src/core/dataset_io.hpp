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
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace fbcsp::data {

/// One stimulus/event in a continuous recording.
struct Event {
  double onset_ms = 0.0;
  int label = 0;
};

/// On-disk dataset format
/// ----------------------
/// manifest.json  UTF-8 JSON with keys: fs_hz, channel_names, n_channels,
///                n_trials, n_samples, labels, interval_ms, units
///                ("microvolt"), data_file, dtype ("float32, little-endian"),
///                layout ("trial-major [trial][channel][sample]").
/// data file      raw float32 little-endian, [trial][channel][sample];
///                byte length must equal n_trials * n_channels * n_samples * 4.

/// Load a dataset; rejected flags come back all false and trial ids are the
/// trial index. Values round-trip bit-exactly with save_dataset.
TrialSet load_dataset(const std::filesystem::path& manifest_path);

/// Write manifest.json plus the binary payload into dir; returns the manifest
/// path. The directory is created if missing.
std::filesystem::path save_dataset(const TrialSet& ts, const std::filesystem::path& dir);

/// Cut a continuous recording into trials covering
/// [onset + interval.start, onset + interval.end) per event.
TrialSet epoch(const Recording& recording, const std::vector<Event>& events,
               std::pair<double, double> interval_ms);

/// Accepts either a manifest file or a directory containing manifest.json.
std::filesystem::path resolve_manifest_path(const std::filesystem::path& dataset);

}  // namespace fbcsp::data
