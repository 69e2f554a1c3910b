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

#include "core/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "core/errors.hpp"

namespace fbcsp::cleaning {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

// Consistent with the normal-distribution sigma.
constexpr double kMadScale = 1.4826022185056018;
constexpr double kMadFloorLog = 0.25;

}  // namespace

std::vector<std::string> detect_noisy_channels(const TrialSet& ts, double k,
                                               std::vector<ChannelScore>* flagged) {
  ts.validate();
  const Eigen::Index nc = ts.n_channels();
  if (nc < 2) throw InvalidArgument("detect_noisy_channels: need at least 2 channels");
  if (k <= 0.0) throw InvalidArgument("detect_noisy_channels: k must be positive");

  // Per-channel variance pooled over all trials, trial means removed.
  std::vector<double> log_var(static_cast<std::size_t>(nc));
  const double n_total = static_cast<double>(ts.n_trials()) * static_cast<double>(ts.n_samples());
  for (Eigen::Index c = 0; c < nc; ++c) {
    double acc = 0.0;
    for (const auto& trial : ts.trials) {
      const auto row = trial.row(c);
      const double mean = row.mean();
      acc += (row.array() - mean).square().sum();
    }
    log_var[static_cast<std::size_t>(c)] =
        std::log(std::max(acc / n_total, std::numeric_limits<double>::min()));
  }

  const double med = median_of(log_var);
  std::vector<double> absdev(log_var.size());
  for (std::size_t i = 0; i < log_var.size(); ++i) absdev[i] = std::fabs(log_var[i] - med);
  const double mad = median_of(absdev) * kMadScale;

  std::vector<std::string> out;
  // Floor the MAD on the log scale: in a near-homogeneous montage the raw MAD
  // collapses toward zero and would flag ordinary spread (identical channels
  // would divide by zero outright). Artifact channels differ by orders of
  // magnitude in variance, so requiring at least a 0.25 log-unit step per z
  // keeps them detectable while healthy montages stay intact.
  const double denom = std::max(mad, kMadFloorLog);
  for (std::size_t i = 0; i < log_var.size(); ++i) {
    const double z = (log_var[i] - med) / denom;
    if (std::fabs(z) > k) {
      out.push_back(ts.channel_names[i]);
      if (flagged) flagged->push_back({ts.channel_names[i], log_var[i], z});
    }
  }
  return out;
}

TrialSet remove_channels(const TrialSet& ts, const std::vector<std::string>& names) {
  ts.validate();
  if (names.empty()) return ts;

  std::set<std::string> drop(names.begin(), names.end());
  for (const auto& n : drop)
    if (std::find(ts.channel_names.begin(), ts.channel_names.end(), n) ==
        ts.channel_names.end())
      throw DataError("remove_channels: unknown channel \"" + n + "\"");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < ts.n_channels(); ++c)
    if (!drop.count(ts.channel_names[static_cast<std::size_t>(c)])) keep.push_back(c);
  if (keep.empty()) throw DataError("remove_channels: cannot remove every channel");

  TrialSet out = ts;
  out.channel_names.clear();
  for (Eigen::Index c : keep) out.channel_names.push_back(ts.channel_names[static_cast<std::size_t>(c)]);
  for (std::size_t t = 0; t < ts.trials.size(); ++t) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(keep.size()), ts.n_samples());
    for (std::size_t i = 0; i < keep.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = ts.trials[t].row(keep[i]);
    out.trials[t] = std::move(m);
  }
  out.validate();
  return out;
}

TrialSet mark_rejected_trials(const TrialSet& ts, double threshold_uv, double pre_ms,
                              std::optional<std::pair<double, double>> decode_ms,
                              std::vector<RejectedTrial>* hits) {
  ts.validate();
  if (threshold_uv < 0.0)
    throw InvalidArgument("mark_rejected_trials: threshold must be non-negative");
  if (pre_ms < 0.0) throw InvalidArgument("mark_rejected_trials: pre_ms must be non-negative");

  const auto [trial_start, trial_end] = ts.interval_ms;
  const auto window = decode_ms.value_or(std::make_pair(std::max(0.0, trial_start), trial_end));
  if (window.first < trial_start - 1e-9 || window.second > trial_end + 1e-9 ||
      window.first >= window.second)
    throw InvalidArgument("mark_rejected_trials: decoding window outside the trial span");

  const double inspect_start = std::max(trial_start, window.first - pre_ms);
  const long first = std::lround((inspect_start - trial_start) / 1000.0 * ts.fs_hz);
  const long last = std::min<long>(
      ts.n_samples(), std::lround((window.second - trial_start) / 1000.0 * ts.fs_hz));
  const long count = last - first;
  if (count < 1) throw InvalidArgument("mark_rejected_trials: empty inspection window");

  TrialSet out = ts;
  for (std::size_t t = 0; t < ts.trials.size(); ++t) {
    const auto block = ts.trials[t].middleCols(first, count);
    const double p2p =
        (block.rowwise().maxCoeff() - block.rowwise().minCoeff()).maxCoeff();
    if (p2p > threshold_uv) {
      out.rejected[t] = 1;
      if (hits) hits->push_back({ts.trial_ids[t], p2p});
    }
  }
  return out;
}

TrialSet common_average_reference(const TrialSet& ts) {
  ts.validate();
  if (ts.n_channels() < 2)
    throw InvalidArgument("common_average_reference: need at least 2 channels");
  TrialSet out = ts;
  for (auto& trial : out.trials)
    trial.rowwise() -= trial.colwise().mean();
  return out;
}

}  // namespace fbcsp::cleaning
