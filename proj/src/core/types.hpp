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

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fbcsp {

/// A continuous multichannel recording in microvolts.
/// samples is laid out (channel, time).
struct Recording {
  double fs_hz = 0.0;
  std::vector<std::string> channel_names;
  Eigen::MatrixXd samples;

  Eigen::Index n_channels() const { return samples.rows(); }
  Eigen::Index n_samples() const { return samples.cols(); }

  /// Throws DataError / InvalidArgument when an invariant is broken.
  void validate() const;
};

/// Epoched trials with binary labels; the unit every decoding stage consumes.
///
/// trials[t] is (channel, sample) in microvolts. interval_ms is the trial
/// window relative to the event onset (start may be negative when leading
/// context is included). rejected flags trials that exceeded the amplitude
/// criterion; they stay in the set so test folds can still score them.
struct TrialSet {
  double fs_hz = 0.0;
  std::vector<std::string> channel_names;
  std::vector<Eigen::MatrixXd> trials;
  std::vector<int> labels;
  std::vector<long> trial_ids;
  std::pair<double, double> interval_ms{0.0, 0.0};
  std::vector<std::uint8_t> rejected;

  std::size_t n_trials() const { return trials.size(); }
  Eigen::Index n_channels() const { return trials.empty() ? 0 : trials.front().rows(); }
  Eigen::Index n_samples() const { return trials.empty() ? 0 : trials.front().cols(); }

  std::size_t count_label(int label) const;

  void validate() const;
};

/// Expected per-trial sample count for a window [start, end) ms at fs.
long window_sample_count(std::pair<double, double> interval_ms, double fs_hz);

}  // namespace fbcsp
