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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/types.hpp"

namespace fbcsp::cleaning {

struct ChannelScore {
  std::string name;
  double log_variance = 0.0;
  double robust_z = 0.0;
};

struct RejectedTrial {
  long trial_id = 0;
  double peak_to_peak_uv = 0.0;
};

/// What the cleaning stage removed and why; serialized next to decoding reports.
struct CleaningReport {
  std::vector<ChannelScore> removed_channels;
  std::vector<RejectedTrial> rejected_trials;
};

/// Channels whose log-variance robust z-score (median/MAD across channels)
/// exceeds k in magnitude. Returns an empty list when MAD is zero. Optionally
/// reports the score of every flagged channel.
std::vector<std::string> detect_noisy_channels(const TrialSet& ts, double k = 5.0,
                                               std::vector<ChannelScore>* flagged = nullptr);

/// Drop the named channels; trial count and rejection flags are untouched.
TrialSet remove_channels(const TrialSet& ts, const std::vector<std::string>& names);

/// Flag trials whose any-channel peak-to-peak exceeds threshold_uv (strictly).
///
/// The inspected span runs from pre_ms before the decoding window to the
/// window's end, clipped to the samples a trial actually carries. decode_ms
/// defaults to [0, interval end], i.e. everything from the event onset; the
/// leading part of the trial is then the available context.
TrialSet mark_rejected_trials(const TrialSet& ts, double threshold_uv = 600.0,
                              double pre_ms = 500.0,
                              std::optional<std::pair<double, double>> decode_ms = {},
                              std::vector<RejectedTrial>* hits = nullptr);

/// Subtract the instantaneous mean across channels at every sample.
TrialSet common_average_reference(const TrialSet& ts);

}  // namespace fbcsp::cleaning
