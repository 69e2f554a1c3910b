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
#include <vector>

namespace fbcsp::stats {

struct PermutationResult {
  double p_value = 1.0;
  long long n_resamples = 0;
  double observed_accuracy = 0.0;
  std::uint64_t seed = 0;
};

struct PermutationOptions {
  long long n_resamples = 100000;
  std::uint64_t seed = 0;
  /// Report the raw tail fraction r/n instead of the add-one (r+1)/(n+1).
  bool raw_fraction = false;
  /// Permute the prediction vector instead of iid resampling from it.
  bool without_replacement = false;
  int jobs = 1;
};

/// Randomization test for a balanced decoding accuracy.
///
/// Each resample redraws every trial's predicted label independently and
/// uniformly from the multiset of original predictions; the balanced accuracy
/// against the true labels is compared with the observed one. The tail count
/// uses exact integer arithmetic, and resampling is split into fixed-size
/// counter-seeded chunks so the result is independent of the worker count.
PermutationResult permutation_pvalue(const std::vector<int>& predictions,
                                     const std::vector<int>& labels,
                                     const PermutationOptions& opt = {});

PermutationResult permutation_pvalue(const std::vector<int>& predictions,
                                     const std::vector<int>& labels, long long n_resamples,
                                     std::uint64_t seed);

/// Exact tail probability by full enumeration over prediction assignments
/// weighted by the empirical prediction distribution. Limited to 12 trials.
double exact_pvalue_small(const std::vector<int>& predictions, const std::vector<int>& labels);

/// Balanced-accuracy tail statistic scaled to an integer:
/// correct0 * n1 + correct1 * n0 (monotone in the balanced accuracy).
long long balanced_accuracy_statistic(const std::vector<int>& predictions,
                                      const std::vector<int>& labels);

/// Significance marker matching the report convention: "**" for p < 0.01,
/// "*" for p < 0.05, empty otherwise.
const char* significance_stars(double p_value);

}  // namespace fbcsp::stats
