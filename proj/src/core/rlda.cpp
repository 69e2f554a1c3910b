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

#include "core/rlda.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace fbcsp::rlda {

namespace {

struct ClassSplit {
  std::vector<Eigen::Index> idx0, idx1;
};

ClassSplit split_classes(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw InvalidArgument("rlda: features/labels length mismatch");
  ClassSplit s;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    if (l == 0)
      s.idx0.push_back(i);
    else if (l == 1)
      s.idx1.push_back(i);
    else
      throw DataError("rlda: labels must be binary (0/1)");
  }
  if (s.idx0.empty() || s.idx1.empty()) throw DataError("rlda: both classes must be present");
  return s;
}

Eigen::VectorXd class_mean(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i : idx) m += x.row(i).transpose();
  return m / static_cast<double>(idx.size());
}

/// Rows centered by their class mean.
Eigen::MatrixXd center_by_class(const Eigen::MatrixXd& x, const ClassSplit& s,
                                const Eigen::VectorXd& m0, const Eigen::VectorXd& m1) {
  Eigen::MatrixXd c = x;
  for (Eigen::Index i : s.idx0) c.row(i) -= m0.transpose();
  for (Eigen::Index i : s.idx1) c.row(i) -= m1.transpose();
  return c;
}

}  // namespace

double estimate_shrinkage(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const ClassSplit s = split_classes(x, labels);
  if (s.idx0.size() < 2 || s.idx1.size() < 2) return 1.0;

  const Eigen::VectorXd m0 = class_mean(x, s.idx0);
  const Eigen::VectorXd m1 = class_mean(x, s.idx1);
  const Eigen::MatrixXd c = center_by_class(x, s, m0, m1);

  const double n = static_cast<double>(c.rows());
  const Eigen::Index d = c.cols();

  // Unbiased covariance of the class-centered data and the element-wise
  // variance of its entries (Ledoit-Wolf / Schaefer-Strimmer style).
  const Eigen::MatrixXd wbar = (c.transpose() * c) / n;
  const Eigen::MatrixXd cov = wbar * (n / (n - 1.0));
  const double nu = cov.trace() / static_cast<double>(d);

  Eigen::MatrixXd var_sum = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const Eigen::MatrixXd w = c.row(i).transpose() * c.row(i);
    var_sum += (w - wbar).cwiseAbs2();
  }
  const double numerator = var_sum.sum() * n / ((n - 1.0) * (n - 1.0) * (n - 1.0));

  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(d, d);
  target.diagonal().setConstant(nu);
  const double denominator = (cov - target).squaredNorm();

  if (!(denominator > 0.0)) return 1.0;  // already at the target
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

RldaModel fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
              std::optional<double> gamma) {
  if (!x.allFinite()) throw DataError("rlda: features must be finite");
  const ClassSplit s = split_classes(x, labels);
  const Eigen::Index d = x.cols();

  RldaModel model;
  model.mean0 = class_mean(x, s.idx0);
  model.mean1 = class_mean(x, s.idx1);
  model.gamma = gamma ? *gamma : estimate_shrinkage(x, labels);
  if (model.gamma < 0.0 || model.gamma > 1.0)
    throw InvalidArgument("rlda: gamma must lie in [0, 1]");

  const Eigen::MatrixXd c = center_by_class(x, s, model.mean0, model.mean1);
  const double denom = std::max(1.0, static_cast<double>(x.rows()) - 2.0);
  const Eigen::MatrixXd pooled = (c.transpose() * c) / denom;
  const double nu = pooled.trace() / static_cast<double>(d);

  Eigen::MatrixXd sigma = (1.0 - model.gamma) * pooled;
  sigma.diagonal().array() += model.gamma * nu;

  const Eigen::VectorXd diff = model.mean1 - model.mean0;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("rlda: regularized covariance is not factorizable");
  model.w = ldlt.solve(diff);
  const double residual = (sigma * model.w - diff).norm();
  if (!model.w.allFinite() || residual > 1e-6 * std::max(1.0, diff.norm()))
    throw NumericError("rlda: covariance is singular; use gamma > 0");
  model.b = -model.w.dot(model.mean0 + model.mean1) / 2.0;
  return model;
}

Prediction predict(const RldaModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.w.size())
    throw InvalidArgument("rlda: feature dimension mismatch");
  Prediction p;
  p.scores = features * model.w;
  p.scores.array() += model.b;
  p.labels.resize(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    p.labels[static_cast<std::size_t>(i)] = p.scores(i) > 0.0 ? 1 : 0;
  return p;
}

}  // namespace fbcsp::rlda
