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

#include <cmath>

#include "core/errors.hpp"
#include "core/stats.hpp"

using namespace fbcsp;
using stats::PermutationOptions;

namespace {

double binom_sigma(double p, long long n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("the 4-trial fixture reproduces its exact tail mass of 1/16") {
  const std::vector<int> preds = {0, 0, 1, 1};
  const std::vector<int> labels = {0, 0, 1, 1};
  const double exact = stats::exact_pvalue_small(preds, labels);
  CHECK(exact == doctest::Approx(0.0625).epsilon(1e-12));

  auto mc = stats::permutation_pvalue(preds, labels, 100000, 3);
  CHECK(mc.observed_accuracy == doctest::Approx(1.0));
  CHECK(std::fabs(mc.p_value - exact) < 3.0 * binom_sigma(exact, 100000) + 2e-5);
}

TEST_CASE("one correct prediction per class: exact 1/4 before correction") {
  const std::vector<int> preds = {0, 1};
  const std::vector<int> labels = {0, 1};
  CHECK(stats::exact_pvalue_small(preds, labels) == doctest::Approx(0.25).epsilon(1e-12));
  PermutationOptions opt;
  opt.n_resamples = 100000;
  opt.seed = 4;
  opt.raw_fraction = true;
  auto mc = stats::permutation_pvalue(preds, labels, opt);
  CHECK(std::fabs(mc.p_value - 0.25) < 3.0 * binom_sigma(0.25, 100000));
}

TEST_CASE("single-class predictions score balanced accuracy 1/2 with a computable tail") {
  const std::vector<int> preds = {0, 0, 0, 0, 0, 0};
  const std::vector<int> labels = {0, 0, 0, 0, 1, 1};
  const double exact = stats::exact_pvalue_small(preds, labels);
  CHECK(exact == doctest::Approx(1.0));  // every resample of all-zeros ties the observed 0.5
  auto mc = stats::permutation_pvalue(preds, labels, 50000, 5);
  CHECK(mc.observed_accuracy == doctest::Approx(0.5));
  CHECK(mc.p_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Monte-Carlo estimates converge to enumeration on mixed fixtures") {
  struct Fixture {
    std::vector<int> preds, labels;
  };
  const std::vector<Fixture> fixtures = {
      {{0, 1, 1, 0, 1}, {0, 1, 0, 0, 1}},
      {{1, 1, 0, 0, 1, 0, 1}, {1, 0, 0, 1, 1, 0, 0}},
      {{0, 0, 1, 1, 1, 1, 0, 0}, {0, 0, 1, 1, 0, 1, 0, 1}},
      {{1, 0, 1, 0, 1, 0, 1, 0, 1, 0}, {1, 0, 1, 0, 1, 0, 1, 1, 0, 0}},
      {{0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, {0, 1, 1, 1, 0, 1, 0, 0, 0, 1, 0, 1}},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const double exact = stats::exact_pvalue_small(fixtures[i].preds, fixtures[i].labels);
    PermutationOptions opt;
    opt.n_resamples = 100000;
    opt.seed = 10 + i;
    opt.raw_fraction = true;
    auto mc = stats::permutation_pvalue(fixtures[i].preds, fixtures[i].labels, opt);
    CHECK_MESSAGE(std::fabs(mc.p_value - exact) < 3.0 * binom_sigma(exact, opt.n_resamples),
                  "fixture ", i, " exact=", exact, " mc=", mc.p_value);
  }
}

TEST_CASE("perfect predictions on 40 balanced trials are wildly significant") {
  std::vector<int> preds, labels;
  for (int i = 0; i < 40; ++i) {
    preds.push_back(i % 2);
    labels.push_back(i % 2);
  }
  auto mc = stats::permutation_pvalue(preds, labels, 100000, 6);
  CHECK(mc.p_value < 1e-4);
  CHECK(mc.p_value >= 1.0 / 100001.0);  // add-one floor
}

TEST_CASE("tail count is monotone in the observed statistic") {
  // raising the bar can only shrink the tail
  const std::vector<int> labels = {0, 0, 1, 1, 0, 1, 1, 0};
  const std::vector<int> preds = {0, 1, 1, 1, 0, 0, 1, 0};
  std::vector<std::vector<int>> stronger = {preds};
  stronger.push_back({0, 0, 1, 1, 0, 0, 1, 0});  // one more correct
  stronger.push_back({0, 0, 1, 1, 0, 1, 1, 0});  // perfect
  double last = 2.0;
  for (const auto& p : stronger) {
    const double exact = stats::exact_pvalue_small(p, labels);
    CHECK(exact <= last + 1e-12);
    last = exact;
  }
}

TEST_CASE("determinism and worker-count independence") {
  std::vector<int> preds, labels;
  for (int i = 0; i < 30; ++i) {
    preds.push_back((i * 7) % 3 == 0 ? 1 : 0);
    labels.push_back(i % 2);
  }
  PermutationOptions a;
  a.n_resamples = 20000;
  a.seed = 42;
  a.jobs = 1;
  PermutationOptions b = a;
  b.jobs = 4;
  auto ra = stats::permutation_pvalue(preds, labels, a);
  auto rb = stats::permutation_pvalue(preds, labels, b);
  CHECK(ra.p_value == rb.p_value);

  PermutationOptions c = a;
  c.seed = 43;
  auto rc = stats::permutation_pvalue(preds, labels, c);
  CHECK(std::fabs(rc.p_value - ra.p_value) <
        6.0 * binom_sigma(std::max(ra.p_value, 0.05), a.n_resamples));
}

TEST_CASE("without-replacement mode stays a valid p-value") {
  std::vector<int> preds, labels;
  for (int i = 0; i < 24; ++i) {
    preds.push_back(i % 2);
    labels.push_back(i % 2);
  }
  PermutationOptions opt;
  opt.n_resamples = 5000;
  opt.seed = 9;
  opt.without_replacement = true;
  auto r = stats::permutation_pvalue(preds, labels, opt);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.p_value < 0.01);  // perfect predictions stay significant under permutation too
  auto r2 = stats::permutation_pvalue(preds, labels, opt);
  CHECK(r.p_value == r2.p_value);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(stats::permutation_pvalue({0, 1}, {0, 1}, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(stats::permutation_pvalue({0, 1, 1}, {0, 1}, 100, 1), InvalidArgument);
  CHECK_THROWS_AS(stats::permutation_pvalue({0, 1}, {0, 0}, 100, 1), DataError);
  CHECK_THROWS_AS(stats::permutation_pvalue({0, 2}, {0, 1}, 100, 1), DataError);
  std::vector<int> big(13, 0);
  big[0] = 1;
  std::vector<int> big_labels(13, 0);
  big_labels[1] = 1;
  CHECK_THROWS_AS(stats::exact_pvalue_small(big, big_labels), InvalidArgument);
}

TEST_CASE("significance stars follow the report convention") {
  CHECK(std::string(stats::significance_stars(0.2)) == "");
  CHECK(std::string(stats::significance_stars(0.049)) == "*");
  CHECK(std::string(stats::significance_stars(0.0099)) == "**");
}
