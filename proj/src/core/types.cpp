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

#include "core/types.hpp"

#include <cmath>
#include <set>

#include "core/errors.hpp"

namespace fbcsp {

long window_sample_count(std::pair<double, double> interval_ms, double fs_hz) {
  return std::lround((interval_ms.second - interval_ms.first) / 1000.0 * fs_hz);
}

void Recording::validate() const {
  if (fs_hz <= 0.0) throw InvalidArgument("Recording: fs_hz must be positive");
  if (static_cast<Eigen::Index>(channel_names.size()) != samples.rows())
    throw DataError("Recording: channel_names length does not match sample rows");
  std::set<std::string> uniq(channel_names.begin(), channel_names.end());
  if (uniq.size() != channel_names.size())
    throw DataError("Recording: channel names must be unique");
}

std::size_t TrialSet::count_label(int label) const {
  std::size_t n = 0;
  for (int l : labels)
    if (l == label) ++n;
  return n;
}

void TrialSet::validate() const {
  if (fs_hz <= 0.0) throw InvalidArgument("TrialSet: fs_hz must be positive");
  if (trials.empty()) throw DataError("TrialSet: must contain at least one trial");
  if (labels.size() != trials.size() || rejected.size() != trials.size() ||
      trial_ids.size() != trials.size())
    throw DataError("TrialSet: labels/rejected/trial_ids length mismatch");
  const Eigen::Index nc = trials.front().rows();
  const Eigen::Index ns = trials.front().cols();
  if (static_cast<Eigen::Index>(channel_names.size()) != nc)
    throw DataError("TrialSet: channel_names length does not match channel count");
  std::set<std::string> uniq(channel_names.begin(), channel_names.end());
  if (uniq.size() != channel_names.size())
    throw DataError("TrialSet: channel names must be unique");
  for (const auto& t : trials)
    if (t.rows() != nc || t.cols() != ns)
      throw DataError("TrialSet: all trials must share channel and sample counts");
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("TrialSet: labels must be binary (0/1)");
  if (interval_ms.first >= interval_ms.second)
    throw InvalidArgument("TrialSet: interval start must precede its end");
  if (window_sample_count(interval_ms, fs_hz) != ns)
    throw DataError("TrialSet: sample count does not match interval_ms at fs_hz");
}

}  // namespace fbcsp
