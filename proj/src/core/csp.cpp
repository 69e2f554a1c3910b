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

#include "core/csp.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace fbcsp::csp {

namespace {

constexpr double kCompositeRidge = 1e-9;
constexpr double kSymTol = 1e-8;

void check_symmetric(const Eigen::MatrixXd& c, const char* what) {
  if (c.rows() != c.cols()) throw InvalidArgument(std::string(what) + ": matrix not square");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (((c - c.transpose()).cwiseAbs().maxCoeff()) > kSymTol * scale)
    throw InvalidArgument(std::string(what) + ": matrix not symmetric");
}

}  // namespace

Eigen::MatrixXd trial_second_moment(const Eigen::MatrixXd& trial) {
  const Eigen::Index ns = trial.cols();
  if (ns < 2) throw InvalidArgument("trial_second_moment: need at least 2 samples");
  Eigen::MatrixXd centered = trial.colwise() - trial.rowwise().mean();
  return (centered * centered.transpose()) / static_cast<double>(ns - 1);
}

CovEstimate class_covariance_indexed(const TrialSet& ts, const std::vector<std::size_t>& idx,
                                     int class_id) {
  const Eigen::Index nc = ts.n_channels();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nc, nc);
  int used = 0;
  for (std::size_t t : idx) {
    if (ts.labels[t] != class_id) continue;
    Eigen::MatrixXd s = trial_second_moment(ts.trials[t]);
    const double tr = s.trace();
    if (!(tr > 0.0)) continue;  // zero-variance trial carries no spatial information
    acc += s / tr;
    ++used;
  }
  if (used == 0)
    throw DataError("class_covariance: no usable trials for class " + std::to_string(class_id));
  acc /= static_cast<double>(used);
  const double tr = acc.trace();
  if (!(tr > 0.0)) throw NumericError("class_covariance: degenerate covariance");
  acc /= tr;
  return {std::move(acc), used, class_id};
}

CovEstimate class_covariance(const TrialSet& ts, int class_id) {
  ts.validate();
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < ts.n_trials(); ++t)
    if (!ts.rejected[t]) idx.push_back(t);
  return class_covariance_indexed(ts, idx, class_id);
}

CspModel fit_csp(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2) {
  check_symmetric(c1, "fit_csp C1");
  check_symmetric(c2, "fit_csp C2");
  if (c1.rows() != c2.rows()) throw InvalidArgument("fit_csp: dimension mismatch");
  const Eigen::Index n = c1.rows();

  Eigen::MatrixXd composite = c1 + c2;
  const double ridge = kCompositeRidge * composite.diagonal().mean();
  if (!(ridge > 0.0)) throw NumericError("fit_csp: composite matrix has no energy");
  composite.diagonal().array() += ridge;
  // Half the ridge belongs to each class so the swap duality stays exact.
  Eigen::MatrixXd c1r = c1;
  c1r.diagonal().array() += 0.5 * ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(composite);
  if (llt.info() != Eigen::Success)
    throw NumericError("fit_csp: composite covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();

  // Whiten: S = L^-1 C1 L^-T is symmetric with the pencil's eigenvalues.
  Eigen::MatrixXd s = l.triangularView<Eigen::Lower>().solve(c1r);
  s = l.triangularView<Eigen::Lower>().solve(s.transpose().eval());
  s = 0.5 * (s + s.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw NumericError("fit_csp: eigendecomposition failed");

  CspModel model;
  model.eigenvalues = eig.eigenvalues();  // ascending
  model.W = l.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors());
  model.A = composite * model.W;

  // Deterministic sign: the largest-magnitude pattern entry is positive.
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    model.A.col(j).cwiseAbs().maxCoeff(&imax);
    if (model.A(imax, j) < 0.0) {
      model.A.col(j) *= -1.0;
      model.W.col(j) *= -1.0;
    }
  }
  return model;
}

CspModel fit_csp(const CovEstimate& c1, const CovEstimate& c2) {
  return fit_csp(c1.matrix, c2.matrix);
}

CspModel select_filters(CspModel model, int m) {
  const Eigen::Index n = model.n_channels();
  if (m < 1) throw InvalidArgument("select_filters: m must be >= 1");
  if (2 * static_cast<Eigen::Index>(m) > n)
    throw InvalidArgument("select_filters: 2m exceeds the channel count");
  model.selected.clear();
  for (int i = 0; i < m; ++i) model.selected.push_back(i);
  for (Eigen::Index i = n - m; i < n; ++i) model.selected.push_back(static_cast<int>(i));
  return model;
}

Eigen::MatrixXd CspModel::selected_filters() const {
  Eigen::MatrixXd w(W.rows(), static_cast<Eigen::Index>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j) w.col(static_cast<Eigen::Index>(j)) = W.col(selected[j]);
  return w;
}

std::vector<Eigen::MatrixXd> apply_csp(const CspModel& model,
                                       const std::vector<Eigen::MatrixXd>& trials) {
  if (model.selected.empty()) throw InvalidArgument("apply_csp: no filters selected");
  const Eigen::MatrixXd w = model.selected_filters();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(trials.size());
  for (const auto& trial : trials) {
    if (trial.rows() != w.rows()) throw InvalidArgument("apply_csp: channel count mismatch");
    out.emplace_back(w.transpose() * trial);
  }
  return out;
}

Eigen::MatrixXd log_variance(const std::vector<Eigen::MatrixXd>& projected, double eps) {
  if (projected.empty()) throw InvalidArgument("log_variance: no trials");
  if (eps < 0.0) throw InvalidArgument("log_variance: eps must be non-negative");
  const Eigen::Index d = projected.front().rows();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(projected.size()), d);
  for (std::size_t t = 0; t < projected.size(); ++t) {
    const auto& p = projected[t];
    if (p.cols() < 2) throw InvalidArgument("log_variance: need at least 2 samples");
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto row = p.row(c);
      const double mean = row.mean();
      const double var = (row.array() - mean).square().sum() / static_cast<double>(p.cols() - 1);
      features(static_cast<Eigen::Index>(t), c) = std::log(var + eps);
    }
  }
  return features;
}

}  // namespace fbcsp::csp
