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

#include "core/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace fbcsp::data {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "dataset payload I/O assumes a little-endian host");

namespace {

constexpr const char* kDataFileName = "data.f32";
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kDtype = "float32, little-endian";
constexpr const char* kLayout = "trial-major [trial][channel][sample]";
constexpr const char* kUnits = "microvolt";

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

std::filesystem::path resolve_manifest_path(const fs::path& dataset) {
  if (fs::is_directory(dataset)) return dataset / kManifestName;
  return dataset;
}

TrialSet load_dataset(const fs::path& manifest_path) {
  const fs::path mpath = resolve_manifest_path(manifest_path);
  json j = read_json_file(mpath);

  TrialSet ts;
  std::string data_file;
  long n_trials = 0, n_samples = 0, n_channels = 0;
  try {
    ts.fs_hz = j.at("fs_hz").get<double>();
    ts.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    n_trials = j.at("n_trials").get<long>();
    n_samples = j.at("n_samples").get<long>();
    ts.labels = j.at("labels").get<std::vector<int>>();
    auto iv = j.at("interval_ms");
    ts.interval_ms = {iv.at(0).get<double>(), iv.at(1).get<double>()};
    data_file = j.at("data_file").get<std::string>();
    if (j.at("units").get<std::string>() != kUnits)
      throw DataError("manifest: unsupported units (expected \"microvolt\")");
    if (j.at("dtype").get<std::string>() != kDtype)
      throw DataError("manifest: unsupported dtype");
    if (j.at("layout").get<std::string>() != kLayout)
      throw DataError("manifest: unsupported layout");
    n_channels = j.contains("n_channels")
                     ? j.at("n_channels").get<long>()
                     : static_cast<long>(ts.channel_names.size());
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + mpath.string() + ": " + e.what());
  }

  if (n_channels != static_cast<long>(ts.channel_names.size()))
    throw DataError("manifest: n_channels disagrees with channel_names");
  if (n_trials <= 0 || n_samples <= 0 || n_channels <= 0)
    throw DataError("manifest: trial/channel/sample counts must be positive");
  if (static_cast<long>(ts.labels.size()) != n_trials)
    throw DataError("manifest: labels length does not match n_trials");
  for (int l : ts.labels)
    if (l != 0 && l != 1) throw DataError("manifest: labels must be binary (0/1)");

  const fs::path dpath = mpath.parent_path() / data_file;
  std::error_code ec;
  const auto file_size = fs::file_size(dpath, ec);
  if (ec) throw IoError("cannot stat data file " + dpath.string());
  const std::uintmax_t expected =
      static_cast<std::uintmax_t>(n_trials) * n_channels * n_samples * 4u;
  if (file_size != expected)
    throw DataError("data file size mismatch: expected " + std::to_string(expected) +
                    " bytes, found " + std::to_string(file_size));

  std::ifstream in(dpath, std::ios::binary);
  if (!in) throw IoError("cannot open data file " + dpath.string());

  ts.trials.reserve(static_cast<std::size_t>(n_trials));
  std::vector<float> buf(static_cast<std::size_t>(n_channels) * n_samples);
  for (long t = 0; t < n_trials; ++t) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw IoError("short read in " + dpath.string());
    Eigen::MatrixXd m(n_channels, n_samples);
    for (long c = 0; c < n_channels; ++c)
      for (long s = 0; s < n_samples; ++s)
        m(c, s) = static_cast<double>(buf[static_cast<std::size_t>(c) * n_samples + s]);
    ts.trials.push_back(std::move(m));
  }

  ts.trial_ids.resize(static_cast<std::size_t>(n_trials));
  for (long t = 0; t < n_trials; ++t) ts.trial_ids[static_cast<std::size_t>(t)] = t;
  ts.rejected.assign(static_cast<std::size_t>(n_trials), 0);

  ts.validate();
  return ts;
}

std::filesystem::path save_dataset(const TrialSet& ts, const fs::path& dir) {
  ts.validate();

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  const long n_trials = static_cast<long>(ts.n_trials());
  const long n_channels = ts.n_channels();
  const long n_samples = ts.n_samples();

  const fs::path dpath = dir / kDataFileName;
  {
    std::ofstream out(dpath, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create data file " + dpath.string());
    std::vector<float> buf(static_cast<std::size_t>(n_channels) * n_samples);
    for (long t = 0; t < n_trials; ++t) {
      const auto& m = ts.trials[static_cast<std::size_t>(t)];
      for (long c = 0; c < n_channels; ++c)
        for (long s = 0; s < n_samples; ++s)
          buf[static_cast<std::size_t>(c) * n_samples + s] = static_cast<float>(m(c, s));
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed for " + dpath.string());
  }

  json j;
  j["fs_hz"] = ts.fs_hz;
  j["channel_names"] = ts.channel_names;
  j["n_channels"] = n_channels;
  j["n_trials"] = n_trials;
  j["n_samples"] = n_samples;
  j["labels"] = ts.labels;
  j["interval_ms"] = {ts.interval_ms.first, ts.interval_ms.second};
  j["units"] = kUnits;
  j["data_file"] = kDataFileName;
  j["dtype"] = kDtype;
  j["layout"] = kLayout;

  const fs::path mpath = dir / kManifestName;
  std::ofstream out(mpath, std::ios::trunc);
  if (!out) throw IoError("cannot create manifest " + mpath.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + mpath.string());
  return mpath;
}

TrialSet epoch(const Recording& recording, const std::vector<Event>& events,
               std::pair<double, double> interval_ms) {
  recording.validate();
  if (interval_ms.first >= interval_ms.second)
    throw InvalidArgument("epoch: interval start must precede its end");
  if (events.empty()) throw DataError("epoch: no events given");

  const long n_samples = window_sample_count(interval_ms, recording.fs_hz);
  if (n_samples <= 0) throw InvalidArgument("epoch: interval too short for fs");

  TrialSet ts;
  ts.fs_hz = recording.fs_hz;
  ts.channel_names = recording.channel_names;
  ts.interval_ms = interval_ms;

  long id = 0;
  for (const Event& ev : events) {
    if (ev.label != 0 && ev.label != 1)
      throw DataError("epoch: labels must be binary (0/1)");
    const long first =
        std::lround((ev.onset_ms + interval_ms.first) / 1000.0 * recording.fs_hz);
    if (first < 0 || first + n_samples > recording.n_samples())
      throw DataError("epoch: event at " + std::to_string(ev.onset_ms) +
                      " ms falls outside the recording");
    ts.trials.emplace_back(recording.samples.middleCols(first, n_samples));
    ts.labels.push_back(ev.label);
    ts.trial_ids.push_back(id++);
    ts.rejected.push_back(0);
  }

  ts.validate();
  return ts;
}

}  // namespace fbcsp::data
