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

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fbcsp/fbcsp.h"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("fbcsp_capi_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path make_dataset(const char* tag, int trials_per_class = 30, uint64_t seed = 5) {
  const fs::path dir = temp_dir(tag);
  fbcsp_synth_opts opts;
  fbcsp_synth_opts_init(&opts);
  opts.n_channels = 6;
  opts.n_sources = 6;
  opts.n_trials_class0 = trials_per_class;
  opts.n_trials_class1 = trials_per_class;
  opts.duration_ms = 1200;
  opts.pre_roll_ms = 300;
  opts.seed = seed;
  opts.oracle_mc_trials = 0;
  char manifest[1024];
  REQUIRE(fbcsp_synth_generate(&opts, dir.c_str(), manifest, sizeof manifest) == FBCSP_OK);
  return manifest;
}

}  // namespace

TEST_CASE("version and status names are stable strings") {
  CHECK(std::strlen(fbcsp_version()) > 0);
  CHECK(std::string(fbcsp_status_name(FBCSP_OK)) == "ok");
  CHECK(std::string(fbcsp_status_name(FBCSP_ERR_IO)) == "i/o error");
}

TEST_CASE("load/save round trip through opaque handles") {
  const fs::path manifest = make_dataset("roundtrip");

  fbcsp_trialset* ts = nullptr;
  REQUIRE(fbcsp_trialset_load(manifest.c_str(), &ts) == FBCSP_OK);
  REQUIRE(ts != nullptr);
  CHECK(fbcsp_trialset_n_trials(ts) == 60);
  CHECK(fbcsp_trialset_n_channels(ts) == 6);
  CHECK(fbcsp_trialset_fs_hz(ts) == 500.0);
  CHECK(fbcsp_trialset_label(ts, 0) == 0);
  CHECK(fbcsp_trialset_label(ts, 59) == 1);
  CHECK(fbcsp_trialset_label(ts, 60) == -1);

  const fs::path dir2 = temp_dir("roundtrip_save");
  char mpath[1024];
  CHECK(fbcsp_trialset_save(ts, dir2.c_str(), mpath, sizeof mpath) == FBCSP_OK);

  fbcsp_trialset* back = nullptr;
  REQUIRE(fbcsp_trialset_load(mpath, &back) == FBCSP_OK);
  CHECK(fbcsp_trialset_n_trials(back) == 60);

  CHECK(fbcsp_trialset_scale(ts, 2.0) == FBCSP_OK);
  CHECK(fbcsp_trialset_scale(ts, -1.0) == FBCSP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(fbcsp_last_error()) > 0);

  fbcsp_trialset_free(ts);
  fbcsp_trialset_free(back);
}

TEST_CASE("errors map to status codes with messages") {
  fbcsp_trialset* ts = nullptr;
  CHECK(fbcsp_trialset_load("/does/not/exist.json", &ts) == FBCSP_ERR_IO);
  CHECK(ts == nullptr);
  CHECK(std::strlen(fbcsp_last_error()) > 0);
  CHECK(fbcsp_trialset_load(nullptr, &ts) == FBCSP_ERR_INVALID_ARGUMENT);

  fbcsp_synth_opts bad;
  fbcsp_synth_opts_init(&bad);
  bad.variance_ratio = 0.25;  // r >= 1 required
  const fs::path dir = temp_dir("badsynth");
  CHECK(fbcsp_synth_generate(&bad, dir.c_str(), nullptr, 0) == FBCSP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("synth writes dataset plus ground truth with an oracle estimate") {
  const fs::path dir = temp_dir("synthfull");
  fbcsp_synth_opts opts;
  fbcsp_synth_opts_init(&opts);
  opts.n_channels = 4;
  opts.n_sources = 4;
  opts.n_trials_class0 = 10;
  opts.n_trials_class1 = 10;
  opts.duration_ms = 800;
  opts.pre_roll_ms = 200;
  opts.oracle_mc_trials = 1000;
  opts.seed = 9;
  REQUIRE(fbcsp_synth_generate(&opts, dir.c_str(), nullptr, 0) == FBCSP_OK);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "data.f32"));
  REQUIRE(fs::exists(dir / "ground_truth.json"));
  std::ifstream in(dir / "ground_truth.json");
  nlohmann::json j;
  in >> j;
  CHECK(j.contains("mixing"));
  CHECK(j["source_index"] == 0);
  CHECK(j["oracle_accuracy"].get<double>() >= 0.5);
  CHECK(j["oracle_accuracy"].get<double>() <= 1.0);
}

TEST_CASE("decode produces reports and a summary through the C API") {
  const fs::path manifest = make_dataset("decode", 40, 11);
  const fs::path out = temp_dir("decode_out");

  fbcsp_decode_opts opts;
  fbcsp_decode_opts_init(&opts);
  opts.subsets[0] = FBCSP_SUBSET_BELOW20;
  opts.n_subsets = 1;
  opts.k_folds = 5;
  opts.n_permutations = 500;
  opts.seed = 21;
  opts.jobs = 1;

  fbcsp_decode_summary summary;
  REQUIRE(fbcsp_decode_run(manifest.c_str(), &opts, out.c_str(), &summary) == FBCSP_OK);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "report.csv"));
  CHECK(summary.mean_accuracy > 0.4);
  CHECK(summary.mean_accuracy <= 1.0);
  CHECK(summary.table_row[0] == '0');

  std::ifstream in(out / "report.json");
  nlohmann::json j;
  in >> j;
  CHECK(j["fbcsp_results"].size() == 1);
  CHECK(j["fbcsp_results"][0]["subset"] == "below20");

  SUBCASE("aggregation groups runs into table rows") {
    const fs::path out2 = temp_dir("decode_out2");
    opts.seed = 22;
    REQUIRE(fbcsp_decode_run(manifest.c_str(), &opts, out2.c_str(), nullptr) == FBCSP_OK);
    const std::string p1 = (out / "report.json").string();
    const std::string p2 = (out2 / "report.json").string();
    const char* paths[2] = {p1.c_str(), p2.c_str()};
    char table[4096];
    const fs::path csv = out / "agg.csv";
    REQUIRE(fbcsp_report_aggregate(paths, 2, csv.c_str(), 0, table, sizeof table) == FBCSP_OK);
    CHECK(std::string(table).find("below20") != std::string::npos);
    CHECK(fs::exists(csv));
  }

  SUBCASE("sweep mode emits the per-band table") {
    fbcsp_decode_opts sweep = opts;
    sweep.n_subsets = 0;
    sweep.bands_sweep = 1;
    sweep.n_permutations = 0;
    const fs::path out3 = temp_dir("decode_sweep");
    REQUIRE(fbcsp_decode_run(manifest.c_str(), &sweep, out3.c_str(), nullptr) == FBCSP_OK);
    REQUIRE(fs::exists(out3 / "bands.tsv"));
    std::ifstream tsv(out3 / "bands.tsv");
    std::string line;
    int rows = 0;
    while (std::getline(tsv, line))
      if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 34);
    std::ifstream rj(out3 / "report.json");
    nlohmann::json sj;
    rj >> sj;
    CHECK(sj["band_results"].size() == 34);
    CHECK(sj.contains("exemplary_csp"));
  }
}

TEST_CASE("decode option validation surfaces as invalid-argument") {
  const fs::path manifest = make_dataset("badopts", 15, 31);
  fbcsp_decode_opts opts;
  fbcsp_decode_opts_init(&opts);
  opts.n_subsets = 99;
  CHECK(fbcsp_decode_run(manifest.c_str(), &opts, temp_dir("badopts_out").c_str(), nullptr) ==
        FBCSP_ERR_INVALID_ARGUMENT);

  fbcsp_decode_opts opts2;
  fbcsp_decode_opts_init(&opts2);
  opts2.interval_preset = FBCSP_INTERVAL_FULL;  // 0..7600 ms outside 1.2 s trials
  CHECK(fbcsp_decode_run(manifest.c_str(), &opts2, temp_dir("badopts_out2").c_str(), nullptr) ==
        FBCSP_ERR_DATA);
}

TEST_CASE("defaults carry the reference protocol values") {
  fbcsp_decode_opts d;
  fbcsp_decode_opts_init(&d);
  CHECK(d.target_fs_hz == 500.0);
  CHECK(d.highpass_fc_hz == 0.5);
  CHECK(d.highpass_order == 4);
  CHECK(d.reject_threshold_uv == 600.0);
  CHECK(d.reject_pre_ms == 500.0);
  CHECK(d.band_low_edge_hz == 0.5);
  CHECK(d.band_split_hz == 30.0);
  CHECK(d.band_high_edge_hz == 144.0);
  CHECK(d.band_low_width_hz == 2.0);
  CHECK(d.band_high_width_hz == 6.0);
  CHECK(d.k_folds == 10);
  CHECK(d.m_filters == 3);
  CHECK(d.n_permutations == 100000);
  CHECK(d.car == 1);
  CHECK(d.zero_phase == 0);
  CHECK(d.raw_fraction_p == 0);
}
