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
#include <utility>

#include "core/dsp.hpp"
#include "core/types.hpp"

namespace fbcsp::synth {

/// Generative model: band-limited Gaussian sources mixed onto sensors.
///
/// Source 0 is the discriminative one: unit variance in class 0 and
/// variance_ratio in class 1 inside planted_band. All other sources and the
/// broadband sensor noise are class-independent, so the class difference is
/// pure band-power modulation and the log-variance/CSP pathway is the optimal
/// detector by construction.
struct SynthConfig {
  int n_channels = 16;
  int n_sources = 0;  // 0 means n_channels
  int n_trials_class0 = 200;
  int n_trials_class1 = 200;
  double fs_hz = 500.0;
  double trial_duration_ms = 3000.0;
  double pre_roll_ms = 500.0;  // leading context before the event onset
  dsp::BandSpec planted_band{10.0, 12.0};
  double variance_ratio = 4.0;  // class-1 / class-0 source power, >= 1
  double background_source_variance = 4.0;  // per non-discriminative source
  double sensor_noise_sigma = 1.0;
  double amplitude_uv = 1.0;  // global sensor scale
  Eigen::MatrixXd mixing;     // empty selects a random orthonormal matrix
  double artifact_amplitude_uv = 0.0;  // > 0 injects square pulses
  double artifact_fraction = 0.0;      // fraction of trials carrying a pulse
  std::uint64_t seed = 0;

  int effective_sources() const { return n_sources > 0 ? n_sources : n_channels; }
  void validate() const;
};

struct GroundTruth {
  Eigen::MatrixXd mixing;
  int source_index = 0;
  /// NaN until estimated; see oracle_accuracy.
  double oracle_accuracy = std::numeric_limits<double>::quiet_NaN();
  double oracle_stderr = std::numeric_limits<double>::quiet_NaN();
};

/// Deterministic given the seed; per-trial counter streams make the output
/// independent of generation order.
std::pair<TrialSet, GroundTruth> generate(const SynthConfig& config);

struct OracleEstimate {
  double accuracy = 0.5;
  double stderr_ = 0.0;
};

/// Bayes accuracy of the likelihood-ratio threshold test on the recovered
/// discriminative source's band power (scaled chi-square vs. its r-scaled
/// version), estimated by Monte Carlo with the true unmixing; the stderr is
/// the binomial standard error.
OracleEstimate oracle_accuracy(const SynthConfig& config, int n_mc = 20000);

/// Row of the pseudo-inverse of the mixing matrix that recovers the
/// discriminative source (the true unmixing direction).
Eigen::VectorXd true_unmixing(const GroundTruth& truth);

}  // namespace fbcsp::synth
