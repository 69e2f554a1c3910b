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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/cleaning.hpp"
#include "core/csp.hpp"
#include "core/dsp.hpp"
#include "core/types.hpp"

namespace fbcsp::pipeline {

/// Cross-validation plan; test folds partition the trial ids.
struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::vector<std::vector<long>> test_ids;
};

/// Stratified random partition: per-fold class counts deviate from
/// proportional by at most one. Deterministic given the seed.
FoldPlan make_folds(const TrialSet& ts, int k = 10, std::uint64_t seed = 0);

/// Contiguous session-order blocks, no shuffling. Folds may end up
/// class-imbalanced; scoring fails loudly if a fold loses a class.
FoldPlan make_folds_blocked(const TrialSet& ts, int k = 10);

/// Mean of the per-class accuracies.
double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

struct BandResult {
  dsp::BandSpec band;
  std::vector<double> fold_acc;
  double mean_acc = 0.0;
  /// One prediction per trial, index-aligned with the TrialSet.
  std::vector<int> predictions;
};

struct FbcspResult {
  std::string subset;
  std::string interval_tag;
  std::vector<double> fold_acc;
  double mean_acc = 0.0;
  double sd = 0.0;
  std::vector<int> predictions;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double observed_accuracy = std::numeric_limits<double>::quiet_NaN();
  int n_features = 0;
};

/// Single-band CSP + rLDA cross-validation on a prepared TrialSet (already
/// downsampled, high-passed, cleaned and re-referenced; trials may carry
/// margin around the decoding window, which defaults to [0, window end]).
/// Rejected trials never enter a training fold but are predicted with the
/// rest of their test fold.
BandResult run_band_csp(const TrialSet& prepared, dsp::BandSpec band, const FoldPlan& folds,
                        int m = 3, std::optional<std::pair<double, double>> decode_ms = {},
                        bool zero_phase = false);

/// FBCSP over a band subset: per fold, the 2m log-variance features of every
/// band (CSP fit on that fold's training trials) are concatenated into one
/// feature vector for a single rLDA.
FbcspResult run_fbcsp(const TrialSet& prepared, const std::vector<dsp::BandSpec>& bands,
                      const FoldPlan& folds, int m = 3,
                      std::optional<std::pair<double, double>> decode_ms = {},
                      bool zero_phase = false, std::optional<double> fixed_gamma = {});

enum class IntervalPreset {
  kDataset,       // [0, trial end] of the loaded dataset
  kFull,          // per-experiment full window
  kLate,          // per-experiment late window
  kIntermediate,  // per-experiment intermediate window
  kExplicit,      // caller-supplied millisecond pair
};

enum class BandSubset { kAll, kBelow20, kAbove60 };

const char* subset_name(BandSubset s);
const char* interval_tag_name(IntervalPreset p);

/// Resolve a preset against the experiment's named windows.
std::pair<double, double> resolve_interval(IntervalPreset preset, int experiment,
                                           std::pair<double, double> explicit_ms,
                                           const TrialSet& ts);

/// Everything a decoding run needs; defaults follow the reference protocol.
struct DecodeConfig {
  // preprocessing
  double target_fs_hz = 500.0;
  double highpass_fc_hz = 0.5;
  int highpass_order = 4;
  bool zero_phase = false;
  double reject_threshold_uv = 600.0;
  double reject_pre_ms = 500.0;
  double channel_reject_z = 5.0;
  std::vector<std::string> exclude_channels;
  bool car = true;
  // band grid
  double band_low_edge_hz = 0.5;
  double band_split_hz = 30.0;
  double band_high_edge_hz = 144.0;
  double band_low_width_hz = 2.0;
  double band_high_width_hz = 6.0;
  // decoding
  IntervalPreset interval_preset = IntervalPreset::kDataset;
  int experiment = 1;
  std::pair<double, double> interval_explicit_ms{0.0, 0.0};
  std::vector<BandSubset> subsets{BandSubset::kAll};
  bool bands_sweep = false;
  int k_folds = 10;
  int m_filters = 3;
  bool blocked_folds = false;
  std::optional<double> fixed_gamma;
  // statistics
  long long n_permutations = 100000;
  bool raw_fraction_p = false;
  bool permute_without_replacement = false;
  // execution
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = available parallelism
  bool population_sd = false;
};

/// Exemplary full-data CSP fit of the best sweep band (filters + patterns).
struct ExemplaryCsp {
  dsp::BandSpec band;
  csp::CspModel model;
};

struct DecodeReport {
  DecodeConfig config;
  // dataset after preprocessing
  long n_trials = 0;
  long n_channels = 0;
  long n_samples_window = 0;
  double fs_hz = 0.0;
  int downsample_factor = 1;
  long class_counts[2] = {0, 0};
  std::vector<long> trial_ids;
  std::vector<int> labels;

  cleaning::CleaningReport cleaning;
  std::pair<double, double> interval_ms{0.0, 0.0};
  std::string interval_tag;
  dsp::FilterBank grid;

  FoldPlan folds;
  /// Training ids actually used per fold (rejection already applied).
  std::vector<std::vector<long>> fold_train_ids;

  std::vector<BandResult> band_results;
  std::vector<FbcspResult> fbcsp_results;
  std::optional<ExemplaryCsp> exemplary_csp;
};

/// The full decoding pipeline on an epoched dataset.
DecodeReport run_decode(const TrialSet& raw, const DecodeConfig& cfg);

}  // namespace fbcsp::pipeline
