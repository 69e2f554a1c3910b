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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "core/cleaning.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"
#include "core/synth.hpp"

using namespace fbcsp;
using pipeline::BandSubset;
using pipeline::IntervalPreset;

namespace {

TrialSet labeled_noise(int n0, int n1, int channels, std::uint64_t seed) {
  TrialSet ts;
  ts.fs_hz = 500.0;
  ts.interval_ms = {0.0, 400.0};
  for (int c = 0; c < channels; ++c) ts.channel_names.push_back("ch" + std::to_string(c));
  for (int t = 0; t < n0 + n1; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    Eigen::MatrixXd m(channels, 200);
    for (int c = 0; c < channels; ++c)
      for (int s = 0; s < 200; ++s) m(c, s) = rng.gaussian();
    ts.trials.push_back(m);
    ts.labels.push_back(t < n0 ? 0 : 1);
    ts.trial_ids.push_back(t);
    ts.rejected.push_back(0);
  }
  return ts;
}

synth::SynthConfig planted_config(std::uint64_t seed) {
  synth::SynthConfig cfg;
  cfg.n_channels = 8;
  cfg.n_sources = 8;
  cfg.n_trials_class0 = 150;
  cfg.n_trials_class1 = 150;
  cfg.trial_duration_ms = 1500.0;
  cfg.pre_roll_ms = 500.0;
  cfg.variance_ratio = 5.0;
  cfg.sensor_noise_sigma = 1.0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("stratified folds partition the ids with balanced class counts") {
  TrialSet ts = labeled_noise(50, 50, 2, 1);
  auto plan = pipeline::make_folds(ts, 10, 7);
  REQUIRE(plan.test_ids.size() == 10);

  std::set<long> seen;
  for (const auto& fold : plan.test_ids) {
    CHECK(fold.size() == 10);
    int per_class[2] = {0, 0};
    for (long id : fold) {
      CHECK(seen.insert(id).second);  // disjoint
      per_class[ts.labels[static_cast<std::size_t>(id)]]++;
    }
    CHECK(per_class[0] == 5);
    CHECK(per_class[1] == 5);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("imbalanced stratification stays within one of proportional") {
  TrialSet ts = labeled_noise(61, 41, 2, 2);
  auto plan = pipeline::make_folds(ts, 10, 3);
  for (const auto& fold : plan.test_ids) {
    int per_class[2] = {0, 0};
    for (long id : fold) per_class[ts.labels[static_cast<std::size_t>(id)]]++;
    CHECK(std::abs(per_class[0] - 6) <= 1);
    CHECK(std::abs(per_class[1] - 4) <= 1);
  }
}

TEST_CASE("fold plans are seed-deterministic") {
  TrialSet ts = labeled_noise(30, 30, 2, 3);
  auto a = pipeline::make_folds(ts, 6, 11);
  auto b = pipeline::make_folds(ts, 6, 11);
  CHECK(a.test_ids == b.test_ids);
  auto c = pipeline::make_folds(ts, 6, 12);
  CHECK(a.test_ids != c.test_ids);
}

TEST_CASE("too few trials per class is an error") {
  TrialSet ts = labeled_noise(9, 20, 2, 4);
  CHECK_THROWS_AS(pipeline::make_folds(ts, 10, 0), DataError);
}

TEST_CASE("blocked folds are contiguous in session order") {
  TrialSet ts = labeled_noise(12, 12, 2, 5);
  // interleave labels so blocks keep both classes
  for (std::size_t t = 0; t < ts.n_trials(); ++t) ts.labels[t] = t % 2;
  auto plan = pipeline::make_folds_blocked(ts, 4);
  REQUIRE(plan.test_ids.size() == 4);
  CHECK(plan.test_ids[0] == std::vector<long>{0, 1, 2, 3, 4, 5});
  CHECK(plan.test_ids[3].back() == 23);
}

TEST_CASE("balanced accuracy is the mean of the class accuracies") {
  SUBCASE("always answering the majority class scores one half") {
    std::vector<int> labels, preds;
    for (int i = 0; i < 10; ++i) {
      labels.push_back(i < 6 ? 0 : 1);
      preds.push_back(0);
    }
    CHECK(pipeline::balanced_accuracy(preds, labels) == doctest::Approx(0.5));
  }
  SUBCASE("perfect predictions score one") {
    std::vector<int> labels = {0, 1, 0, 1};
    CHECK(pipeline::balanced_accuracy(labels, labels) == doctest::Approx(1.0));
  }
  SUBCASE("8/10 and 6/10 average to 0.7") {
    std::vector<int> labels, preds;
    for (int i = 0; i < 10; ++i) {
      labels.push_back(0);
      preds.push_back(i < 8 ? 0 : 1);
    }
    for (int i = 0; i < 10; ++i) {
      labels.push_back(1);
      preds.push_back(i < 6 ? 1 : 0);
    }
    CHECK(pipeline::balanced_accuracy(preds, labels) == doctest::Approx(0.7));
  }
  SUBCASE("single-class labels are rejected") {
    CHECK_THROWS_AS(pipeline::balanced_accuracy({0, 0}, {0, 0}), DataError);
  }
}

TEST_CASE("band decoding finds the planted band and nothing else") {
  auto cfg = planted_config(21);
  auto [raw, truth] = synth::generate(cfg);
  auto ts = cleaning::common_average_reference(raw);
  auto folds = pipeline::make_folds(ts, 10, 5);

  auto planted = pipeline::run_band_csp(ts, {10.0, 12.0}, folds, 3);
  CHECK(planted.mean_acc >= 0.9);

  auto empty = pipeline::run_band_csp(ts, {60.0, 66.0}, folds, 3);
  CHECK(std::fabs(empty.mean_acc - 0.5) <= 0.05);

  SUBCASE("shuffled labels kill the signal") {
    TrialSet shuffled = ts;
    Rng rng = Rng::stream(6, 0);
    rng.shuffle(shuffled.labels);
    auto folds2 = pipeline::make_folds(shuffled, 10, 6);
    auto res = pipeline::run_band_csp(shuffled, {10.0, 12.0}, folds2, 3);
    CHECK(std::fabs(res.mean_acc - 0.5) <= 0.05);
  }
}

TEST_CASE("rejected trials never train but are still predicted once") {
  auto cfg = planted_config(31);
  cfg.n_trials_class0 = 60;
  cfg.n_trials_class1 = 60;
  auto [raw, truth] = synth::generate(cfg);
  auto ts = cleaning::common_average_reference(raw);
  // flag a third of the trials
  for (std::size_t t = 0; t < ts.n_trials(); t += 3) ts.rejected[t] = 1;
  auto folds = pipeline::make_folds(ts, 6, 7);
  auto res = pipeline::run_band_csp(ts, {10.0, 12.0}, folds, 3);
  REQUIRE(res.predictions.size() == ts.n_trials());
  for (int p : res.predictions) CHECK((p == 0 || p == 1));
  CHECK(res.fold_acc.size() == 6);
}

TEST_CASE("a training fold losing a class aborts with a diagnostic") {
  TrialSet ts = labeled_noise(12, 12, 3, 8);
  for (std::size_t t = 0; t < ts.n_trials(); ++t)
    if (ts.labels[t] == 1) ts.rejected[t] = 1;  // every class-1 trial rejected
  auto folds = pipeline::make_folds(ts, 4, 9);
  CHECK_THROWS_AS(pipeline::run_band_csp(ts, {8.0, 12.0}, folds, 1), DataError);
}

TEST_CASE("fbcsp concatenates per-band features and tracks the best band") {
  auto cfg = planted_config(41);
  auto [raw, truth] = synth::generate(cfg);
  auto ts = cleaning::common_average_reference(raw);
  auto folds = pipeline::make_folds(ts, 10, 10);

  const auto bank = dsp::build_filter_bank(ts.fs_hz);
  const auto below = dsp::bands_below(bank, 20.0);
  auto fb = pipeline::run_fbcsp(ts, below, folds, 3);
  CHECK(fb.n_features == static_cast<int>(below.size()) * 6);

  // the concatenation must be within 3 points of the best single band
  double best = 0.0;
  for (const auto& band : below) {
    auto res = pipeline::run_band_csp(ts, band, folds, 3);
    best = std::max(best, res.mean_acc);
  }
  CHECK(fb.mean_acc >= best - 0.03);

  const auto above = dsp::bands_above(bank, 60.0);
  auto fb_hi = pipeline::run_fbcsp(ts, above, folds, 3);
  CHECK(std::fabs(fb_hi.mean_acc - 0.5) <= 0.05);

  CHECK_THROWS_AS(pipeline::run_fbcsp(ts, {}, folds, 3), InvalidArgument);
}

TEST_CASE("interval presets resolve to the documented windows") {
  TrialSet ts = labeled_noise(10, 10, 2, 51);
  ts.interval_ms = {-500.0, 8000.0};

  using P = IntervalPreset;
  CHECK(pipeline::resolve_interval(P::kFull, 1, {}, ts) == std::pair{0.0, 7600.0});
  CHECK(pipeline::resolve_interval(P::kLate, 1, {}, ts) == std::pair{3300.0, 7500.0});
  CHECK(pipeline::resolve_interval(P::kIntermediate, 1, {}, ts) == std::pair{-500.0, 3000.0});
  CHECK(pipeline::resolve_interval(P::kFull, 2, {}, ts) == std::pair{0.0, 7000.0});
  CHECK(pipeline::resolve_interval(P::kLate, 2, {}, ts) == std::pair{5100.0, 6900.0});
  CHECK(pipeline::resolve_interval(P::kIntermediate, 2, {}, ts) == std::pair{4000.0, 7000.0});
  CHECK(pipeline::resolve_interval(P::kDataset, 1, {}, ts) == std::pair{0.0, 8000.0});
  CHECK(pipeline::resolve_interval(P::kExplicit, 1, {100.0, 900.0}, ts) ==
        std::pair{100.0, 900.0});
  CHECK_THROWS_AS(pipeline::resolve_interval(P::kExplicit, 1, {900.0, 100.0}, ts),
                  InvalidArgument);
  CHECK_THROWS_AS(pipeline::resolve_interval(P::kFull, 3, {}, ts), InvalidArgument);
}

TEST_CASE("run_decode end to end: audit trail, determinism, scaling invariance") {
  auto cfg = planted_config(61);
  cfg.n_trials_class0 = 60;
  cfg.n_trials_class1 = 40;
  cfg.artifact_amplitude_uv = 1500.0;
  cfg.artifact_fraction = 0.15;
  auto [raw, truth] = synth::generate(cfg);

  pipeline::DecodeConfig dc;
  dc.subsets = {BandSubset::kBelow20};
  dc.n_permutations = 2000;
  dc.seed = 17;
  dc.jobs = 1;
  dc.k_folds = 5;
  auto report = pipeline::run_decode(raw, dc);

  SUBCASE("artifact trials were rejected and excluded from training") {
    CHECK(!report.cleaning.rejected_trials.empty());
    std::set<long> rejected;
    for (const auto& r : report.cleaning.rejected_trials) rejected.insert(r.trial_id);
    for (const auto& train : report.fold_train_ids)
      for (long id : train) CHECK(rejected.count(id) == 0);
  }

  SUBCASE("train and test ids are disjoint per fold, tests partition the set") {
    std::set<long> all_test;
    for (std::size_t f = 0; f < report.folds.test_ids.size(); ++f) {
      std::set<long> train(report.fold_train_ids[f].begin(), report.fold_train_ids[f].end());
      for (long id : report.folds.test_ids[f]) {
        CHECK(train.count(id) == 0);
        CHECK(all_test.insert(id).second);
      }
    }
    CHECK(all_test.size() == raw.n_trials());
  }

  SUBCASE("every trial is predicted exactly once, including rejected ones") {
    REQUIRE(report.fbcsp_results.size() == 1);
    const auto& preds = report.fbcsp_results[0].predictions;
    REQUIRE(preds.size() == raw.n_trials());
    for (int p : preds) CHECK((p == 0 || p == 1));
  }

  SUBCASE("identical runs with different job counts agree bit for bit") {
    auto dc4 = dc;
    dc4.jobs = 4;
    auto report4 = pipeline::run_decode(raw, dc4);
    CHECK(report.fbcsp_results[0].predictions == report4.fbcsp_results[0].predictions);
    CHECK(report.fbcsp_results[0].fold_acc == report4.fbcsp_results[0].fold_acc);
    CHECK(report.fbcsp_results[0].p_value == report4.fbcsp_results[0].p_value);
    CHECK(report::decode_report_json(report).dump() ==
          report::decode_report_json(report4).dump());
  }

  SUBCASE("global scaling leaves the predicted labels untouched") {
    for (double alpha : {0.1, 10.0}) {
      TrialSet scaled = raw;
      for (auto& trial : scaled.trials) trial *= alpha;
      auto dc2 = dc;
      dc2.reject_threshold_uv = 1e12;  // keep the absolute-threshold stage out of the loop
      auto base = pipeline::run_decode(raw, dc2);
      auto res = pipeline::run_decode(scaled, dc2);
      CHECK(base.fbcsp_results[0].predictions == res.fbcsp_results[0].predictions);
    }
  }
}

TEST_CASE("run_decode handles the 5 kHz acquisition path") {
  auto cfg = planted_config(71);
  cfg.n_trials_class0 = 40;
  cfg.n_trials_class1 = 40;
  cfg.fs_hz = 5000.0;
  cfg.trial_duration_ms = 1600.0;
  cfg.pre_roll_ms = 400.0;
  cfg.variance_ratio = 6.0;
  auto [raw, truth] = synth::generate(cfg);
  REQUIRE(raw.fs_hz == 5000.0);

  pipeline::DecodeConfig dc;
  dc.subsets = {BandSubset::kBelow20};
  dc.n_permutations = 0;
  dc.k_folds = 5;
  dc.seed = 3;
  dc.jobs = 1;
  auto report = pipeline::run_decode(raw, dc);
  CHECK(report.downsample_factor == 10);
  CHECK(report.fs_hz == 500.0);
  CHECK(report.fbcsp_results[0].mean_acc > 0.75);  // signal survives decimation
}

TEST_CASE("non-integer rate ratios are refused") {
  TrialSet ts = labeled_noise(20, 20, 2, 81);
  ts.fs_hz = 750.0;
  ts.interval_ms = {0.0, 1000.0 * 200 / 750.0};
  pipeline::DecodeConfig dc;
  dc.n_permutations = 0;
  CHECK_THROWS_AS(pipeline::run_decode(ts, dc), DataError);
}

TEST_CASE("report formatting follows the mean (sd) convention") {
  CHECK(report::format_mean_sd(report::mean_of({0.6, 0.64, 0.62}),
                               report::sd_of({0.6, 0.64, 0.62})) == "0.620 (0.020)");
  CHECK(report::format_mean_sd(report::mean_of({0.55}), report::sd_of({0.55})) ==
        "0.550 (0.000)");
  CHECK(report::format_mean_sd(0.621, 0.057) == "0.621 (0.057)");
  // population vs sample switch
  CHECK(report::sd_of({0.6, 0.64, 0.62}, true) ==
        doctest::Approx(std::sqrt(8e-4 / 3.0)));
}

TEST_CASE("decode reports serialize and aggregate into mean (sd) tables") {
  auto cfg = planted_config(91);
  cfg.n_trials_class0 = 40;
  cfg.n_trials_class1 = 40;
  auto [raw, truth] = synth::generate(cfg);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fbcsp_test_reports";
  fs::remove_all(dir);

  std::vector<fs::path> paths;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    pipeline::DecodeConfig dc;
    dc.subsets = {BandSubset::kBelow20};
    dc.n_permutations = 500;
    dc.seed = seed;
    dc.k_folds = 5;
    dc.jobs = 1;
    auto report = pipeline::run_decode(raw, dc);
    paths.push_back(report::write_decode_report(report, dir / std::to_string(seed)));
    CHECK(fs::exists(dir / std::to_string(seed) / "report.csv"));
  }

  const std::string table = report::aggregate_reports(paths, dir / "table.csv");
  CHECK(table.find("below20") != std::string::npos);
  CHECK(table.find("full") != std::string::npos);
  CHECK(fs::exists(dir / "table.csv"));
  // one aggregated row: subset,interval,n_runs,mean_sd
  CHECK(table.find(",3,") != std::string::npos);

  CHECK_THROWS_AS(report::aggregate_reports({}, ""), InvalidArgument);
}

TEST_CASE("model serialization carries the documented fields") {
  auto spd = [](std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 0);
    Eigen::MatrixXd g(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) = rng.gaussian();
    Eigen::MatrixXd c = g * g.transpose() / 4 + 0.1 * Eigen::MatrixXd::Identity(4, 4);
    return Eigen::MatrixXd(c / c.trace());
  };
  auto model = csp::select_filters(csp::fit_csp(spd(101), spd(102)), 2);
  auto j = report::csp_model_json(model);
  CHECK(j["eigenvalues"].size() == 4);
  CHECK(j["filters"].size() == 4);
  CHECK(j["patterns"].size() == 4);
  CHECK(j["selected"].size() == 4);

  rlda::RldaModel lda;
  lda.w = Eigen::Vector2d(0.5, -1.5);
  lda.b = 0.25;
  lda.gamma = 0.1;
  lda.mean0 = Eigen::Vector2d(0, 0);
  lda.mean1 = Eigen::Vector2d(1, 1);
  auto jl = report::rlda_model_json(lda);
  CHECK(jl["w"].size() == 2);
  CHECK(jl["gamma"] == 0.1);
}
