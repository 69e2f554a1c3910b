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

#include "core/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace fbcsp::stats {

namespace {

constexpr long long kChunk = 8192;  // resamples per seed chunk, worker-count independent
constexpr std::uint64_t kPermStreamTag = 0x7065726D'75746174ULL;  // "permutat"

struct LabelCounts {
  long long n0 = 0, n1 = 0;
};

LabelCounts count_labels(const std::vector<int>& labels) {
  LabelCounts c;
  for (int l : labels) {
    if (l == 0)
      ++c.n0;
    else if (l == 1)
      ++c.n1;
    else
      throw DataError("permutation test: labels must be binary (0/1)");
  }
  if (c.n0 == 0 || c.n1 == 0)
    throw DataError("permutation test: both classes must be present in labels");
  return c;
}

}  // namespace

long long balanced_accuracy_statistic(const std::vector<int>& predictions,
                                      const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgument("permutation test: predictions/labels length mismatch");
  const LabelCounts c = count_labels(labels);
  long long correct0 = 0, correct1 = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0 && predictions[i] == 0) ++correct0;
    if (labels[i] == 1 && predictions[i] == 1) ++correct1;
  }
  return correct0 * c.n1 + correct1 * c.n0;
}

PermutationResult permutation_pvalue(const std::vector<int>& predictions,
                                     const std::vector<int>& labels,
                                     const PermutationOptions& opt) {
  if (opt.n_resamples < 1) throw InvalidArgument("permutation test: n_resamples must be >= 1");
  if (predictions.size() != labels.size())
    throw InvalidArgument("permutation test: predictions/labels length mismatch");
  for (int p : predictions)
    if (p != 0 && p != 1) throw DataError("permutation test: predictions must be binary");

  const LabelCounts c = count_labels(labels);
  const std::size_t n_trials = labels.size();
  const long long observed = balanced_accuracy_statistic(predictions, labels);

  const long long n_chunks = (opt.n_resamples + kChunk - 1) / kChunk;
  const int jobs = std::max(1, opt.jobs);
  std::atomic<long long> next_chunk{0};
  std::atomic<long long> tail_count{0};

  auto worker = [&]() {
    std::vector<int> scratch(n_trials);
    long long local = 0;
    for (;;) {
      const long long chunk = next_chunk.fetch_add(1);
      if (chunk >= n_chunks) break;
      const long long begin = chunk * kChunk;
      const long long end = std::min(begin + kChunk, opt.n_resamples);
      Rng rng = Rng::stream(opt.seed, kPermStreamTag, static_cast<std::uint64_t>(chunk));
      for (long long r = begin; r < end; ++r) {
        long long correct0 = 0, correct1 = 0;
        if (opt.without_replacement) {
          scratch = predictions;
          rng.shuffle(scratch);
          for (std::size_t i = 0; i < n_trials; ++i) {
            if (labels[i] == 0 && scratch[i] == 0) ++correct0;
            if (labels[i] == 1 && scratch[i] == 1) ++correct1;
          }
        } else {
          for (std::size_t i = 0; i < n_trials; ++i) {
            const int draw = predictions[static_cast<std::size_t>(rng.below(n_trials))];
            if (labels[i] == 0 && draw == 0) ++correct0;
            if (labels[i] == 1 && draw == 1) ++correct1;
          }
        }
        if (correct0 * c.n1 + correct1 * c.n0 >= observed) ++local;
      }
    }
    tail_count.fetch_add(local);
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  PermutationResult res;
  res.n_resamples = opt.n_resamples;
  res.seed = opt.seed;
  res.observed_accuracy =
      static_cast<double>(observed) / (2.0 * static_cast<double>(c.n0) * static_cast<double>(c.n1));
  const long long tail = tail_count.load();
  res.p_value = opt.raw_fraction
                    ? static_cast<double>(tail) / static_cast<double>(opt.n_resamples)
                    : static_cast<double>(tail + 1) / static_cast<double>(opt.n_resamples + 1);
  return res;
}

PermutationResult permutation_pvalue(const std::vector<int>& predictions,
                                     const std::vector<int>& labels, long long n_resamples,
                                     std::uint64_t seed) {
  PermutationOptions opt;
  opt.n_resamples = n_resamples;
  opt.seed = seed;
  return permutation_pvalue(predictions, labels, opt);
}

double exact_pvalue_small(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgument("exact_pvalue_small: predictions/labels length mismatch");
  const std::size_t n = labels.size();
  if (n == 0 || n > 12) throw InvalidArgument("exact_pvalue_small: supports 1..12 trials");
  count_labels(labels);
  long long ones = 0;
  for (int p : predictions) {
    if (p != 0 && p != 1) throw DataError("exact_pvalue_small: predictions must be binary");
    ones += p;
  }
  const double q = static_cast<double>(ones) / static_cast<double>(n);
  const long long observed = balanced_accuracy_statistic(predictions, labels);

  double tail = 0.0;
  std::vector<int> assignment(n);
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      assignment[i] = static_cast<int>((mask >> i) & 1ULL);
      weight *= assignment[i] ? q : 1.0 - q;
    }
    if (weight == 0.0) continue;
    if (balanced_accuracy_statistic(assignment, labels) >= observed) tail += weight;
  }
  return tail;
}

const char* significance_stars(double p_value) {
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

}  // namespace fbcsp::stats
