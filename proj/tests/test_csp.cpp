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

#include "core/csp.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

using namespace fbcsp;

namespace {

Eigen::MatrixXd random_spd(int n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 31);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::MatrixXd spd = g * g.transpose() / n + 0.05 * Eigen::MatrixXd::Identity(n, n);
  return spd / spd.trace();
}

TrialSet trials_from(const std::vector<Eigen::MatrixXd>& data, const std::vector<int>& labels,
                     double fs = 500.0) {
  TrialSet ts;
  ts.fs_hz = fs;
  ts.interval_ms = {0.0, 1000.0 * data.front().cols() / fs};
  for (Eigen::Index c = 0; c < data.front().rows(); ++c)
    ts.channel_names.push_back("ch" + std::to_string(c));
  for (std::size_t t = 0; t < data.size(); ++t) {
    ts.trials.push_back(data[t]);
    ts.labels.push_back(labels[t]);
    ts.trial_ids.push_back(static_cast<long>(t));
    ts.rejected.push_back(0);
  }
  return ts;
}

Eigen::MatrixXd gaussian_trial(int channels, int samples, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 77);
  Eigen::MatrixXd m(channels, samples);
  for (int c = 0; c < channels; ++c)
    for (int s = 0; s < samples; ++s) m(c, s) = rng.gaussian();
  return m;
}

// brute-force covariance with explicit loops, the oracle for class_covariance
Eigen::MatrixXd naive_normalized_cov(const std::vector<Eigen::MatrixXd>& trials) {
  const int n = static_cast<int>(trials.front().rows());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (const auto& x : trials) {
    const int ns = static_cast<int>(x.cols());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double mi = 0.0;
      for (int s = 0; s < ns; ++s) mi += x(i, s);
      mi /= ns;
      for (int j = 0; j < n; ++j) {
        double mj = 0.0;
        for (int s = 0; s < ns; ++s) mj += x(j, s);
        mj /= ns;
        double acc_ij = 0.0;
        for (int s = 0; s < ns; ++s) acc_ij += (x(i, s) - mi) * (x(j, s) - mj);
        c(i, j) = acc_ij / (ns - 1);
      }
    }
    acc += c / c.trace();
  }
  acc /= static_cast<double>(trials.size());
  return acc / acc.trace();
}

}  // namespace

TEST_CASE("class covariance: trace-normalized trial average") {
  SUBCASE("single one-channel trial collapses to [[1]]") {
    auto ts = trials_from({gaussian_trial(1, 50, 1)}, {0});
    auto cov = csp::class_covariance(ts, 0);
    CHECK(cov.matrix.rows() == 1);
    CHECK(cov.matrix(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("matches the brute-force oracle on 2x2 trials") {
    std::vector<Eigen::MatrixXd> data = {gaussian_trial(2, 40, 2), gaussian_trial(2, 40, 3)};
    auto ts = trials_from(data, {1, 1});
    auto cov = csp::class_covariance(ts, 1);
    Eigen::MatrixXd expected = naive_normalized_cov(data);
    CHECK((cov.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cov.n_trials == 2);
  }

  SUBCASE("duplicating every trial changes nothing") {
    std::vector<Eigen::MatrixXd> data = {gaussian_trial(3, 30, 4), gaussian_trial(3, 30, 5)};
    auto once = csp::class_covariance(trials_from(data, {0, 0}), 0);
    std::vector<Eigen::MatrixXd> doubled = {data[0], data[1], data[0], data[1]};
    auto twice = csp::class_covariance(trials_from(doubled, {0, 0, 0, 0}), 0);
    CHECK((once.matrix - twice.matrix).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("trace one, symmetric, PSD") {
    std::vector<Eigen::MatrixXd> data;
    for (int t = 0; t < 6; ++t) data.push_back(gaussian_trial(5, 64, 10 + t));
    auto cov = csp::class_covariance(trials_from(data, {0, 0, 0, 0, 0, 0}), 0);
    CHECK(cov.matrix.trace() == doctest::Approx(1.0));
    CHECK((cov.matrix - cov.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.matrix);
    CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  }

  SUBCASE("missing class and rejected-only class raise") {
    auto ts = trials_from({gaussian_trial(2, 20, 6)}, {0});
    CHECK_THROWS_AS(csp::class_covariance(ts, 1), DataError);
    ts.rejected[0] = 1;
    CHECK_THROWS_AS(csp::class_covariance(ts, 0), DataError);
  }
}

TEST_CASE("fit_csp solves the symmetric-definite pencil") {
  SUBCASE("equal covariances put every eigenvalue at 1/2") {
    Eigen::MatrixXd c = random_spd(6, 40);
    auto model = csp::fit_csp(c, c);
    for (int i = 0; i < 6; ++i) CHECK(model.eigenvalues(i) == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("hand-solvable diagonal pair") {
    Eigen::MatrixXd c1 = Eigen::Vector2d(2.0 / 3.0, 1.0 / 3.0).asDiagonal();
    Eigen::MatrixXd c2 = Eigen::Vector2d(1.0 / 3.0, 2.0 / 3.0).asDiagonal();
    auto model = csp::fit_csp(c1, c2);
    CHECK(model.eigenvalues(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(model.eigenvalues(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    // filters lie along the coordinate axes up to sign/scale
    CHECK(std::fabs(model.W(0, 0)) < 1e-6 * std::fabs(model.W(1, 0)));
    CHECK(std::fabs(model.W(1, 1)) < 1e-6 * std::fabs(model.W(0, 1)));
  }

  SUBCASE("defining residual, normalization and pattern duality on random SPD pairs") {
    for (int n : {4, 16, 64}) {
      Eigen::MatrixXd c1 = random_spd(n, 100 + n);
      Eigen::MatrixXd c2 = random_spd(n, 200 + n);
      auto model = csp::fit_csp(c1, c2);
      const Eigen::MatrixXd lhs = c1 * model.W;
      const Eigen::MatrixXd rhs =
          (c1 + c2) * model.W * model.eigenvalues.asDiagonal();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
      const Eigen::MatrixXd gram = model.W.transpose() * (c1 + c2) * model.W;
      CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((model.A.transpose() * model.W - Eigen::MatrixXd::Identity(n, n))
                .cwiseAbs()
                .maxCoeff() < 1e-8);
      for (int i = 0; i < n; ++i) {
        CHECK(model.eigenvalues(i) > 0.0);
        CHECK(model.eigenvalues(i) < 1.0);
        if (i) CHECK(model.eigenvalues(i) >= model.eigenvalues(i - 1));
        // eigenvalue equals the class-1 variance captured by its filter
        CHECK(model.W.col(i).dot(c1 * model.W.col(i)) ==
              doctest::Approx(model.eigenvalues(i)).epsilon(1e-8));
      }
    }
  }

  SUBCASE("class swap mirrors the spectrum and keeps the extreme subspaces") {
    const int n = 8, m = 3;
    Eigen::MatrixXd c1 = random_spd(n, 300);
    Eigen::MatrixXd c2 = random_spd(n, 301);
    auto ab = csp::fit_csp(c1, c2);
    auto ba = csp::fit_csp(c2, c1);
    for (int i = 0; i < n; ++i)
      CHECK(std::fabs(ab.eigenvalues(i) - (1.0 - ba.eigenvalues(n - 1 - i))) < 1e-10);

    // principal angles between the top-m subspace of one model and the
    // bottom-m subspace of the swapped model
    Eigen::MatrixXd top = ab.W.rightCols(m);
    Eigen::MatrixXd bottom = ba.W.leftCols(m);
    Eigen::HouseholderQR<Eigen::MatrixXd> qt(top), qb(bottom);
    Eigen::MatrixXd q1 = qt.householderQ() * Eigen::MatrixXd::Identity(n, m);
    Eigen::MatrixXd q2 = qb.householderQ() * Eigen::MatrixXd::Identity(n, m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q1.transpose() * q2);
    for (int i = 0; i < m; ++i) {
      const double cos_angle = std::min(1.0, svd.singularValues()(i));
      CHECK(std::acos(cos_angle) < 1e-6);
    }
  }

  SUBCASE("scaling both covariances leaves eigenvalues put") {
    Eigen::MatrixXd c1 = random_spd(5, 400);
    Eigen::MatrixXd c2 = random_spd(5, 401);
    auto base = csp::fit_csp(c1, c2);
    auto scaled = csp::fit_csp(Eigen::MatrixXd(42.0 * c1), Eigen::MatrixXd(42.0 * c2));
    CHECK((base.eigenvalues - scaled.eigenvalues).cwiseAbs().maxCoeff() < 1e-12);
    for (int j = 0; j < 5; ++j) {
      // same direction up to scale; signs are pinned by the pattern rule
      const double cos_sim = base.W.col(j).dot(scaled.W.col(j)) /
                             (base.W.col(j).norm() * scaled.W.col(j).norm());
      CHECK(std::fabs(cos_sim) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("asymmetric input is rejected") {
    Eigen::MatrixXd bad = random_spd(4, 500);
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(csp::fit_csp(bad, random_spd(4, 501)), InvalidArgument);
  }
}

TEST_CASE("filter selection keeps the m outermost columns per side") {
  Eigen::MatrixXd c1 = random_spd(10, 600);
  Eigen::MatrixXd c2 = random_spd(10, 601);
  auto model = csp::fit_csp(c1, c2);

  auto picked = csp::select_filters(model, 3);
  CHECK(picked.selected == std::vector<int>{0, 1, 2, 7, 8, 9});

  auto model6 = csp::fit_csp(random_spd(6, 602), random_spd(6, 603));
  CHECK(csp::select_filters(model6, 3).selected == std::vector<int>{0, 1, 2, 3, 4, 5});

  auto model4 = csp::fit_csp(random_spd(4, 604), random_spd(4, 605));
  CHECK_THROWS_AS(csp::select_filters(model4, 3), InvalidArgument);
}

TEST_CASE("apply_csp projects with the selected filters") {
  SUBCASE("identity filters pass trials through") {
    csp::CspModel model;
    model.W = Eigen::MatrixXd::Identity(2, 2);
    model.A = Eigen::MatrixXd::Identity(2, 2);
    model.eigenvalues = Eigen::Vector2d(0.4, 0.6);
    model.selected = {0, 1};
    auto trial = gaussian_trial(2, 30, 700);
    auto out = csp::apply_csp(model, {trial});
    CHECK((out[0] - trial).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("zero trials project to zero, and dimensions are checked") {
    auto model = csp::select_filters(csp::fit_csp(random_spd(4, 701), random_spd(4, 702)), 2);
    auto out = csp::apply_csp(model, {Eigen::MatrixXd::Zero(4, 10)});
    CHECK(out[0].cwiseAbs().maxCoeff() == 0.0);
    CHECK(out[0].rows() == 4);
    CHECK_THROWS_AS(csp::apply_csp(model, {Eigen::MatrixXd::Zero(5, 10)}), InvalidArgument);
  }

  SUBCASE("matches an explicit triple-loop projection") {
    auto model = csp::select_filters(csp::fit_csp(random_spd(5, 703), random_spd(5, 704)), 2);
    auto trial = gaussian_trial(5, 17, 705);
    auto out = csp::apply_csp(model, {trial});
    const Eigen::MatrixXd w = model.selected_filters();
    for (int j = 0; j < 4; ++j)
      for (int s = 0; s < 17; ++s) {
        double acc = 0.0;
        for (int c = 0; c < 5; ++c) acc += w(c, j) * trial(c, s);
        CHECK(out[0](j, s) == doctest::Approx(acc).epsilon(1e-12));
      }
  }
}

TEST_CASE("log-variance features") {
  SUBCASE("constant virtual channel hits the eps floor") {
    Eigen::MatrixXd proj = Eigen::MatrixXd::Constant(1, 40, 3.0);
    auto f = csp::log_variance({proj}, 1e-20);
    CHECK(f(0, 0) == doctest::Approx(std::log(1e-20)));
  }

  SUBCASE("long unit-variance noise gives a near-zero feature") {
    Rng rng = Rng::stream(800, 0);
    Eigen::MatrixXd proj(1, 100000);
    for (int s = 0; s < 100000; ++s) proj(0, s) = rng.gaussian();
    auto f = csp::log_variance({proj});
    CHECK(std::fabs(f(0, 0)) < 0.05);
  }

  SUBCASE("scaling the signal shifts every feature by 2 ln alpha") {
    auto proj = gaussian_trial(3, 64, 801);
    auto f1 = csp::log_variance({proj});
    auto f2 = csp::log_variance({Eigen::MatrixXd(7.0 * proj)});
    for (int j = 0; j < 3; ++j)
      CHECK(f2(0, j) - f1(0, j) == doctest::Approx(2.0 * std::log(7.0)).epsilon(1e-9));
  }

  SUBCASE("projected-variance equals the quadratic form in the second moment") {
    auto model = csp::select_filters(csp::fit_csp(random_spd(4, 802), random_spd(4, 803)), 2);
    auto trial = gaussian_trial(4, 50, 804);
    auto feats = csp::log_variance(csp::apply_csp(model, {trial}));
    const Eigen::MatrixXd moment = csp::trial_second_moment(trial);
    const Eigen::MatrixXd w = model.selected_filters();
    for (int j = 0; j < 4; ++j)
      CHECK(feats(0, j) ==
            doctest::Approx(std::log(w.col(j).dot(moment * w.col(j)))).epsilon(1e-9));
  }
}
