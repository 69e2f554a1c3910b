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
#include <optional>
#include <vector>

namespace fbcsp::rlda {

/// Shrinkage-regularized linear discriminant.
/// score(x) = w . x + b; class 1 iff score > 0, ties go to class 0.
struct RldaModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double gamma = 0.0;
  Eigen::VectorXd mean0, mean1;
};

/// Analytic shrinkage intensity toward nu*I (nu = mean pooled-covariance
/// diagonal), clipped to [0, 1]. Samples are centered per class; a class with
/// fewer than 2 samples forces gamma = 1.
double estimate_shrinkage(const Eigen::MatrixXd& features, const std::vector<int>& labels);

/// Fit on rows-of-features. gamma empty selects the analytic intensity; a
/// fixed value in [0, 1] overrides it. With gamma = 0 a rank-deficient pooled
/// covariance raises NumericError.
RldaModel fit(const Eigen::MatrixXd& features, const std::vector<int>& labels,
              std::optional<double> gamma = {});

struct Prediction {
  std::vector<int> labels;
  Eigen::VectorXd scores;
};

Prediction predict(const RldaModel& model, const Eigen::MatrixXd& features);

}  // namespace fbcsp::rlda
