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

#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <unordered_map>

#include "core/errors.hpp"
#include "core/rlda.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"

namespace fbcsp::pipeline {

namespace {

constexpr std::uint64_t kFoldStream = 0x666F6C64'73000001ULL;
constexpr std::uint64_t kPermSeedTag = 0x70657276'616C0001ULL;

/// Fold memberships as indices into the trial vector; training indices have
/// rejected trials removed.
struct FoldIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

std::vector<FoldIndices> resolve_folds(const TrialSet& ts, const FoldPlan& plan) {
  std::unordered_map<long, std::size_t> by_id;
  for (std::size_t i = 0; i < ts.n_trials(); ++i) by_id[ts.trial_ids[i]] = i;

  std::vector<int> fold_of(ts.n_trials(), -1);
  for (std::size_t f = 0; f < plan.test_ids.size(); ++f) {
    for (long id : plan.test_ids[f]) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw DataError("fold plan references unknown trial id " + std::to_string(id));
      if (fold_of[it->second] != -1)
        throw DataError("fold plan assigns trial id " + std::to_string(id) + " twice");
      fold_of[it->second] = static_cast<int>(f);
    }
  }
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == -1)
      throw DataError("fold plan misses trial id " + std::to_string(ts.trial_ids[i]));

  std::vector<FoldIndices> folds(plan.test_ids.size());
  for (std::size_t i = 0; i < ts.n_trials(); ++i) {
    for (std::size_t f = 0; f < folds.size(); ++f) {
      if (fold_of[i] == static_cast<int>(f)) {
        folds[f].test.push_back(i);
      } else if (!ts.rejected[i]) {
        folds[f].train.push_back(i);
      }
    }
  }
  for (std::size_t f = 0; f < folds.size(); ++f) {
    long n0 = 0, n1 = 0;
    for (std::size_t i : folds[f].train) (ts.labels[i] == 0 ? n0 : n1)++;
    if (n0 == 0 || n1 == 0)
      throw DataError("training fold " + std::to_string(f) +
                      " lost an entire class (rejection removed too many trials)");
  }
  return folds;
}

/// Sample range of the decoding window inside the stored trial span.
std::pair<long, long> window_range(const TrialSet& ts, std::pair<double, double> decode_ms) {
  const auto [lo, hi] = ts.interval_ms;
  if (decode_ms.first < lo - 1e-9 || decode_ms.second > hi + 1e-9 ||
      decode_ms.first >= decode_ms.second)
    throw DataError("decoding window [" + std::to_string(decode_ms.first) + ", " +
                    std::to_string(decode_ms.second) + "] ms outside the trial span");
  const long first = std::lround((decode_ms.first - lo) / 1000.0 * ts.fs_hz);
  const long count = window_sample_count(decode_ms, ts.fs_hz);
  if (count < 2) throw DataError("decoding window too short");
  if (first < 0 || first + count > ts.n_samples())
    throw DataError("decoding window exceeds the stored samples");
  return {first, count};
}

/// Per-trial second moment of the band-filtered decoding window plus its PSD
/// square root. The projected variance of a filter w is |sqrt * w|^2, a sum
/// of squares: unlike the raw quadratic form w' M w it cannot cancel into
/// negative noise along near-null directions (the CAR null space).
struct TrialMoment {
  Eigen::MatrixXd m;
  Eigen::MatrixXd sqrt_m;  // m = sqrt_m' * sqrt_m
  double lambda_max = 0.0;
};

/// Band-filter full trials, cut the decoding window, and reduce every trial
/// to its moment pair. Everything downstream (CSP fits and log-variance
/// features) works from these.
std::vector<TrialMoment> band_moments(const TrialSet& ts, dsp::BandSpec band,
                                      std::pair<double, double> decode_ms, bool zero_phase) {
  const dsp::IirFilter filter = dsp::design_bandpass(band, 4, ts.fs_hz);
  const auto [first, count] = window_range(ts, decode_ms);
  std::vector<TrialMoment> moments;
  moments.reserve(ts.n_trials());
  for (const auto& trial : ts.trials) {
    Eigen::MatrixXd filtered = trial;
    dsp::filter_rows(filter, filtered, zero_phase);
    TrialMoment tm;
    tm.m = csp::trial_second_moment(filtered.middleCols(first, count));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tm.m);
    if (eig.info() != Eigen::Success)
      throw NumericError("trial moment eigendecomposition failed");
    // Eigenvalues at rounding level are exact zeros of the moment (the CAR
    // null space); clamping them relative to the largest keeps projected
    // variances free of rounding-noise contributions.
    tm.lambda_max = std::max(0.0, eig.eigenvalues().maxCoeff());
    const double floor = 1e-12 * tm.lambda_max;
    Eigen::VectorXd ev = eig.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) ev(k) = ev(k) > floor ? ev(k) : 0.0;
    tm.sqrt_m = ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    moments.push_back(std::move(tm));
  }
  return moments;
}

Eigen::MatrixXd average_class_moment(const std::vector<TrialMoment>& moments,
                                     const std::vector<int>& labels,
                                     const std::vector<std::size_t>& idx, int class_id) {
  const Eigen::Index n = moments.front().m.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  int used = 0;
  for (std::size_t i : idx) {
    if (labels[i] != class_id) continue;
    const double tr = moments[i].m.trace();
    if (!(tr > 0.0)) continue;
    acc += moments[i].m / tr;
    ++used;
  }
  if (used == 0)
    throw DataError("training fold has no usable class-" + std::to_string(class_id) + " trials");
  acc /= static_cast<double>(used);
  const double tr = acc.trace();
  if (!(tr > 0.0)) throw NumericError("degenerate class covariance in training fold");
  return acc / tr;
}

/// CSP features of every trial under the fold's training-set filters.
Eigen::MatrixXd fold_features(const std::vector<TrialMoment>& moments,
                              const std::vector<int>& labels, const FoldIndices& fold, int m) {
  const Eigen::MatrixXd c0 = average_class_moment(moments, labels, fold.train, 0);
  const Eigen::MatrixXd c1 = average_class_moment(moments, labels, fold.train, 1);
  // Convention: class 1 on the pencil's left side, so high eigenvalues mean
  // class-1-dominant variance.
  csp::CspModel model = csp::select_filters(csp::fit_csp(c1, c0), m);
  const Eigen::MatrixXd w = model.selected_filters();

  constexpr double eps = std::numeric_limits<double>::min();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(moments.size()), w.cols());
  for (std::size_t t = 0; t < moments.size(); ++t) {
    const Eigen::MatrixXd projected = moments[t].sqrt_m * w;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double var = projected.col(j).squaredNorm();
      // A filter in the trial's null space (CAR leaves one) yields pure
      // cancellation residue here, far below lambda_max * |w|^2 by any
      // physical margin; pin it to the exact-zero branch so the feature is
      // the same constant at every data scale.
      if (var <= 1e-20 * moments[t].lambda_max * w.col(j).squaredNorm()) var = 0.0;
      features(static_cast<Eigen::Index>(t), j) = std::log(var + eps);
    }
  }
  return features;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<int> take_labels(const std::vector<int>& labels,
                             const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

/// Train one rLDA per fold on the given per-fold feature matrices and predict
/// each fold's test rows; returns fold accuracies plus per-trial predictions.
void evaluate_folds(const std::vector<Eigen::MatrixXd>& features_per_fold,
                    const std::vector<FoldIndices>& folds, const std::vector<int>& labels,
                    std::optional<double> fixed_gamma, std::vector<double>& fold_acc,
                    std::vector<int>& predictions) {
  const std::size_t n_trials = labels.size();
  predictions.assign(n_trials, -1);
  fold_acc.clear();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Eigen::MatrixXd& feats = features_per_fold[f];
    const rlda::RldaModel model =
        rlda::fit(take_rows(feats, folds[f].train), take_labels(labels, folds[f].train),
                  fixed_gamma);
    const rlda::Prediction pred = rlda::predict(model, take_rows(feats, folds[f].test));
    for (std::size_t i = 0; i < folds[f].test.size(); ++i) {
      if (predictions[folds[f].test[i]] != -1)
        throw NumericError("internal: trial predicted twice");
      predictions[folds[f].test[i]] = pred.labels[i];
    }
    fold_acc.push_back(balanced_accuracy(pred.labels, take_labels(labels, folds[f].test)));
  }
  for (int p : predictions)
    if (p == -1) throw NumericError("internal: trial missing from every test fold");
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, bool population) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (static_cast<double>(v.size()) - (population ? 0.0 : 1.0)));
}

}  // namespace

FoldPlan make_folds(const TrialSet& ts, int k, std::uint64_t seed) {
  ts.validate();
  if (k < 2) throw InvalidArgument("make_folds: k must be >= 2");

  std::vector<long> class_ids[2];
  for (std::size_t i = 0; i < ts.n_trials(); ++i)
    class_ids[ts.labels[i] == 0 ? 0 : 1].push_back(ts.trial_ids[i]);
  for (int c = 0; c < 2; ++c)
    if (class_ids[c].size() < static_cast<std::size_t>(k))
      throw DataError("make_folds: class " + std::to_string(c) + " has fewer than k trials");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.test_ids.assign(static_cast<std::size_t>(k), {});
  for (int c = 0; c < 2; ++c) {
    Rng rng = Rng::stream(seed, kFoldStream, static_cast<std::uint64_t>(c));
    rng.shuffle(class_ids[c]);
    for (std::size_t i = 0; i < class_ids[c].size(); ++i)
      plan.test_ids[i % static_cast<std::size_t>(k)].push_back(class_ids[c][i]);
  }
  for (auto& fold : plan.test_ids) std::sort(fold.begin(), fold.end());
  return plan;
}

FoldPlan make_folds_blocked(const TrialSet& ts, int k) {
  ts.validate();
  if (k < 2) throw InvalidArgument("make_folds: k must be >= 2");
  const std::size_t n = ts.n_trials();
  if (n < static_cast<std::size_t>(k)) throw DataError("make_folds: fewer trials than folds");
  FoldPlan plan;
  plan.k = k;
  plan.seed = 0;
  plan.test_ids.assign(static_cast<std::size_t>(k), {});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = i * static_cast<std::size_t>(k) / n;
    plan.test_ids[f].push_back(ts.trial_ids[i]);
  }
  return plan;
}

double balanced_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgument("balanced_accuracy: predictions/labels length mismatch");
  long n[2] = {0, 0}, correct[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l != 0 && l != 1) throw DataError("balanced_accuracy: labels must be binary");
    ++n[l];
    if (predictions[i] == l) ++correct[l];
  }
  if (n[0] == 0 || n[1] == 0)
    throw DataError("balanced_accuracy: both classes must be present");
  return 0.5 * (static_cast<double>(correct[0]) / static_cast<double>(n[0]) +
                static_cast<double>(correct[1]) / static_cast<double>(n[1]));
}

BandResult run_band_csp(const TrialSet& prepared, dsp::BandSpec band, const FoldPlan& plan,
                        int m, std::optional<std::pair<double, double>> decode_ms,
                        bool zero_phase) {
  prepared.validate();
  const auto window = decode_ms.value_or(
      std::make_pair(std::max(0.0, prepared.interval_ms.first), prepared.interval_ms.second));
  const std::vector<FoldIndices> folds = resolve_folds(prepared, plan);
  const auto moments = band_moments(prepared, band, window, zero_phase);

  std::vector<Eigen::MatrixXd> features_per_fold;
  features_per_fold.reserve(folds.size());
  for (const auto& fold : folds)
    features_per_fold.push_back(fold_features(moments, prepared.labels, fold, m));

  BandResult res;
  res.band = band;
  evaluate_folds(features_per_fold, folds, prepared.labels, {}, res.fold_acc, res.predictions);
  res.mean_acc = mean_of(res.fold_acc);
  return res;
}

FbcspResult run_fbcsp(const TrialSet& prepared, const std::vector<dsp::BandSpec>& bands,
                      const FoldPlan& plan, int m,
                      std::optional<std::pair<double, double>> decode_ms, bool zero_phase,
                      std::optional<double> fixed_gamma) {
  prepared.validate();
  if (bands.empty()) throw InvalidArgument("run_fbcsp: empty band subset");
  const auto window = decode_ms.value_or(
      std::make_pair(std::max(0.0, prepared.interval_ms.first), prepared.interval_ms.second));
  const std::vector<FoldIndices> folds = resolve_folds(prepared, plan);

  std::vector<Eigen::MatrixXd> concat(folds.size());
  for (const auto& band : bands) {
    const auto moments = band_moments(prepared, band, window, zero_phase);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const Eigen::MatrixXd feats = fold_features(moments, prepared.labels, folds[f], m);
      if (concat[f].size() == 0) {
        concat[f] = feats;
      } else {
        Eigen::MatrixXd joined(feats.rows(), concat[f].cols() + feats.cols());
        joined << concat[f], feats;
        concat[f] = std::move(joined);
      }
    }
  }

  FbcspResult res;
  res.subset = "custom";
  res.interval_tag = "explicit";
  res.n_features = static_cast<int>(concat.front().cols());
  evaluate_folds(concat, folds, prepared.labels, fixed_gamma, res.fold_acc, res.predictions);
  res.mean_acc = mean_of(res.fold_acc);
  res.sd = sd_of(res.fold_acc, false);
  return res;
}

const char* subset_name(BandSubset s) {
  switch (s) {
    case BandSubset::kAll: return "all";
    case BandSubset::kBelow20: return "below20";
    case BandSubset::kAbove60: return "above60";
  }
  return "?";
}

const char* interval_tag_name(IntervalPreset p) {
  switch (p) {
    case IntervalPreset::kDataset:
    case IntervalPreset::kFull: return "full";
    case IntervalPreset::kLate: return "late";
    case IntervalPreset::kIntermediate: return "intermediate";
    case IntervalPreset::kExplicit: return "explicit";
  }
  return "?";
}

std::pair<double, double> resolve_interval(IntervalPreset preset, int experiment,
                                           std::pair<double, double> explicit_ms,
                                           const TrialSet& ts) {
  if (experiment != 1 && experiment != 2)
    throw InvalidArgument("interval preset: experiment must be 1 or 2");
  switch (preset) {
    case IntervalPreset::kDataset:
      return {std::max(0.0, ts.interval_ms.first), ts.interval_ms.second};
    case IntervalPreset::kFull:
      return experiment == 1 ? std::pair{0.0, 7600.0} : std::pair{0.0, 7000.0};
    case IntervalPreset::kLate:
      return experiment == 1 ? std::pair{3300.0, 7500.0} : std::pair{5100.0, 6900.0};
    case IntervalPreset::kIntermediate:
      return experiment == 1 ? std::pair{-500.0, 3000.0} : std::pair{4000.0, 7000.0};
    case IntervalPreset::kExplicit:
      if (explicit_ms.first >= explicit_ms.second)
        throw InvalidArgument("explicit interval: start must precede end");
      return explicit_ms;
  }
  throw InvalidArgument("unknown interval preset");
}

DecodeReport run_decode(const TrialSet& raw, const DecodeConfig& cfg) {
  raw.validate();
  if (cfg.k_folds < 2) throw InvalidArgument("decode: k must be >= 2");
  if (cfg.m_filters < 1) throw InvalidArgument("decode: m must be >= 1");

  DecodeReport report;
  report.config = cfg;

  // Downsample when the input rate is an integer multiple of the target.
  TrialSet ts = raw;
  report.downsample_factor = 1;
  if (cfg.target_fs_hz > 0.0 && ts.fs_hz > cfg.target_fs_hz) {
    const double ratio = ts.fs_hz / cfg.target_fs_hz;
    const int factor = static_cast<int>(std::lround(ratio));
    if (std::fabs(ratio - factor) > 1e-6)
      throw DataError("decode: sampling rate is not an integer multiple of the target rate");
    ts = dsp::downsample_trials(ts, factor);
    report.downsample_factor = factor;
  }

  // Drift removal on the full stored epoch.
  if (cfg.highpass_fc_hz > 0.0) {
    const dsp::IirFilter hp = dsp::design_highpass(cfg.highpass_fc_hz, cfg.highpass_order, ts.fs_hz);
    for (auto& trial : ts.trials)
      dsp::filter_rows(hp, trial, cfg.zero_phase, dsp::FilterInit::kDcSteadyState);
  }

  // Channel cleaning: automatic variance criterion plus manual excludes.
  std::vector<cleaning::ChannelScore> flagged;
  std::vector<std::string> drop = cleaning::detect_noisy_channels(ts, cfg.channel_reject_z, &flagged);
  for (const auto& name : cfg.exclude_channels) {
    if (std::find(drop.begin(), drop.end(), name) == drop.end()) {
      drop.push_back(name);
      flagged.push_back({name, 0.0, 0.0});
    }
  }
  report.cleaning.removed_channels = flagged;
  if (!drop.empty()) ts = cleaning::remove_channels(ts, drop);
  if (2 * cfg.m_filters > ts.n_channels())
    throw DataError("decode: too few channels left for 2m spatial filters");

  // Decoding window, then amplitude rejection over window + preceding context.
  report.interval_ms =
      resolve_interval(cfg.interval_preset, cfg.experiment, cfg.interval_explicit_ms, ts);
  report.interval_tag = interval_tag_name(cfg.interval_preset);
  if (report.interval_ms.first < ts.interval_ms.first - 1e-9 ||
      report.interval_ms.second > ts.interval_ms.second + 1e-9)
    throw DataError("decode: interval [" + std::to_string(report.interval_ms.first) + ", " +
                    std::to_string(report.interval_ms.second) +
                    "] ms is not covered by the dataset's trials");
  ts = cleaning::mark_rejected_trials(ts, cfg.reject_threshold_uv, cfg.reject_pre_ms,
                                      report.interval_ms, &report.cleaning.rejected_trials);

  if (cfg.car) ts = cleaning::common_average_reference(ts);

  report.n_trials = static_cast<long>(ts.n_trials());
  report.n_channels = ts.n_channels();
  report.n_samples_window = window_sample_count(report.interval_ms, ts.fs_hz);
  report.fs_hz = ts.fs_hz;
  report.class_counts[0] = static_cast<long>(ts.count_label(0));
  report.class_counts[1] = static_cast<long>(ts.count_label(1));
  report.trial_ids = ts.trial_ids;
  report.labels = ts.labels;

  report.folds = cfg.blocked_folds ? make_folds_blocked(ts, cfg.k_folds)
                                   : make_folds(ts, cfg.k_folds, cfg.seed);
  const std::vector<FoldIndices> folds = resolve_folds(ts, report.folds);
  report.fold_train_ids.resize(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f)
    for (std::size_t i : folds[f].train)
      report.fold_train_ids[f].push_back(ts.trial_ids[i]);

  report.grid = dsp::build_filter_bank(ts.fs_hz, cfg.band_low_edge_hz, cfg.band_split_hz,
                                       cfg.band_high_edge_hz, cfg.band_low_width_hz,
                                       cfg.band_high_width_hz);

  // Which bands must be computed: the sweep wants all of them, FBCSP subsets
  // just their members.
  std::vector<dsp::BandSpec> needed;
  auto want = [&](const dsp::BandSpec& b) {
    if (std::find(needed.begin(), needed.end(), b) == needed.end()) needed.push_back(b);
  };
  if (cfg.bands_sweep)
    for (const auto& b : report.grid.bands) want(b);
  std::map<int, std::vector<dsp::BandSpec>> subset_bands;
  for (std::size_t s = 0; s < cfg.subsets.size(); ++s) {
    std::vector<dsp::BandSpec> bands;
    switch (cfg.subsets[s]) {
      case BandSubset::kAll: bands = report.grid.bands; break;
      case BandSubset::kBelow20: bands = dsp::bands_below(report.grid, 20.0); break;
      case BandSubset::kAbove60: bands = dsp::bands_above(report.grid, 60.0); break;
    }
    if (bands.empty()) throw DataError("decode: band subset is empty for this grid");
    subset_bands[static_cast<int>(s)] = bands;
    for (const auto& b : bands) want(b);
  }
  std::sort(needed.begin(), needed.end(),
            [](const dsp::BandSpec& a, const dsp::BandSpec& b) { return a.lo_hz < b.lo_hz; });

  // Per-band work: filter, cut, moments, per-fold CSP features, band rLDA.
  struct BandSlot {
    dsp::BandSpec band;
    std::vector<Eigen::MatrixXd> features_per_fold;
    std::vector<double> fold_acc;
    std::vector<int> predictions;
    std::exception_ptr error;
  };
  std::vector<BandSlot> slots(needed.size());
  for (std::size_t i = 0; i < needed.size(); ++i) slots[i].band = needed[i];

  const int jobs = cfg.jobs > 0 ? cfg.jobs
                                : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto band_worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= slots.size()) break;
      BandSlot& slot = slots[i];
      try {
        const auto moments = band_moments(ts, slot.band, report.interval_ms, cfg.zero_phase);
        slot.features_per_fold.reserve(folds.size());
        for (const auto& fold : folds)
          slot.features_per_fold.push_back(
              fold_features(moments, ts.labels, fold, cfg.m_filters));
        evaluate_folds(slot.features_per_fold, folds, ts.labels, cfg.fixed_gamma, slot.fold_acc,
                       slot.predictions);
      } catch (...) {
        slot.error = std::current_exception();
      }
    }
  };
  if (jobs == 1 || slots.size() <= 1) {
    band_worker();
  } else {
    std::vector<std::thread> pool;
    const int n_workers = std::min<std::size_t>(jobs, slots.size());
    for (int j = 0; j < n_workers; ++j) pool.emplace_back(band_worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& slot : slots)
    if (slot.error) std::rethrow_exception(slot.error);

  auto slot_of = [&](const dsp::BandSpec& b) -> const BandSlot& {
    for (const auto& s : slots)
      if (s.band == b) return s;
    throw NumericError("internal: band slot missing");
  };

  if (cfg.bands_sweep) {
    for (const auto& b : report.grid.bands) {
      const BandSlot& slot = slot_of(b);
      BandResult br;
      br.band = b;
      br.fold_acc = slot.fold_acc;
      br.mean_acc = mean_of(slot.fold_acc);
      br.predictions = slot.predictions;
      report.band_results.push_back(std::move(br));
    }
  }

  for (std::size_t s = 0; s < cfg.subsets.size(); ++s) {
    const auto& bands = subset_bands[static_cast<int>(s)];
    std::vector<Eigen::MatrixXd> concat(folds.size());
    for (const auto& b : bands) {
      const BandSlot& slot = slot_of(b);
      for (std::size_t f = 0; f < folds.size(); ++f) {
        if (concat[f].size() == 0) {
          concat[f] = slot.features_per_fold[f];
        } else {
          Eigen::MatrixXd joined(concat[f].rows(),
                                 concat[f].cols() + slot.features_per_fold[f].cols());
          joined << concat[f], slot.features_per_fold[f];
          concat[f] = std::move(joined);
        }
      }
    }

    FbcspResult res;
    res.subset = subset_name(cfg.subsets[s]);
    res.interval_tag = report.interval_tag;
    res.n_features = static_cast<int>(concat.front().cols());
    evaluate_folds(concat, folds, ts.labels, cfg.fixed_gamma, res.fold_acc, res.predictions);
    res.mean_acc = mean_of(res.fold_acc);
    res.sd = sd_of(res.fold_acc, cfg.population_sd);

    if (cfg.n_permutations > 0) {
      stats::PermutationOptions popt;
      popt.n_resamples = cfg.n_permutations;
      popt.seed = mix64(cfg.seed ^ mix64(kPermSeedTag + s));
      popt.raw_fraction = cfg.raw_fraction_p;
      popt.without_replacement = cfg.permute_without_replacement;
      popt.jobs = jobs;
      const stats::PermutationResult pr =
          stats::permutation_pvalue(res.predictions, ts.labels, popt);
      res.p_value = pr.p_value;
      res.observed_accuracy = pr.observed_accuracy;
    }
    report.fbcsp_results.push_back(std::move(res));
  }

  // Exemplary filters/patterns from the best sweep band, fit on all
  // non-rejected trials (visualization aid).
  if (cfg.bands_sweep && !report.band_results.empty()) {
    const auto best = std::max_element(
        report.band_results.begin(), report.band_results.end(),
        [](const BandResult& a, const BandResult& b) { return a.mean_acc < b.mean_acc; });
    const auto moments = band_moments(ts, best->band, report.interval_ms, cfg.zero_phase);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ts.n_trials(); ++i)
      if (!ts.rejected[i]) keep.push_back(i);
    const Eigen::MatrixXd c0 = average_class_moment(moments, ts.labels, keep, 0);
    const Eigen::MatrixXd c1 = average_class_moment(moments, ts.labels, keep, 1);
    ExemplaryCsp ex;
    ex.band = best->band;
    ex.model = csp::select_filters(csp::fit_csp(c1, c0), cfg.m_filters);
    report.exemplary_csp = std::move(ex);
  }

  return report;
}

}  // namespace fbcsp::pipeline
