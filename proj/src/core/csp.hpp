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
#include <limits>
#include <vector>

#include "core/types.hpp"

namespace fbcsp::csp {

/// Trace-normalized class covariance.
struct CovEstimate {
  Eigen::MatrixXd matrix;
  int n_trials = 0;
  int class_id = 0;
};

/// Spatial filters from the two-class covariance pencil.
///
/// Columns of W are generalized eigenvectors of C1 w = lambda (C1 + C2) w,
/// eigenvalues ascending in (0, 1), normalized so W^T (C1 + C2) W = I. The
/// activation patterns A = (C1 + C2) W satisfy A^T W = I; a filter extracts a
/// source, the matching pattern shows how that source projects onto sensors.
struct CspModel {
  Eigen::MatrixXd W;
  Eigen::VectorXd eigenvalues;
  std::vector<int> selected;
  Eigen::MatrixXd A;

  Eigen::Index n_channels() const { return W.rows(); }
  /// W restricted to the selected columns.
  Eigen::MatrixXd selected_filters() const;
};

/// Mean over the class's non-rejected trials of the per-trial sample
/// covariance, each trial normalized to unit trace before averaging; the
/// result is re-normalized to trace 1.
CovEstimate class_covariance(const TrialSet& ts, int class_id);

/// Same estimator over an explicit list of trial indices (fold machinery).
CovEstimate class_covariance_indexed(const TrialSet& ts, const std::vector<std::size_t>& idx,
                                     int class_id);

/// Solve the symmetric-definite pencil. The composite C1 + C2 receives a tiny
/// ridge (1e-9 of its mean diagonal, half attributed to each class) so CAR'd
/// rank-deficient inputs stay solvable and the class-swap eigenvalue duality
/// lambda <-> 1 - lambda holds to machine precision.
CspModel fit_csp(const CovEstimate& c1, const CovEstimate& c2);
CspModel fit_csp(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2);

/// Keep the m lowest- and m highest-eigenvalue filters.
CspModel select_filters(CspModel model, int m = 3);

/// Project trials onto the selected filters: out[t] = W_sel^T * trial[t].
std::vector<Eigen::MatrixXd> apply_csp(const CspModel& model,
                                       const std::vector<Eigen::MatrixXd>& trials);

/// ln(var + eps) per virtual channel per trial; rows follow the trial order.
Eigen::MatrixXd log_variance(const std::vector<Eigen::MatrixXd>& projected,
                             double eps = std::numeric_limits<double>::min());

/// Centered per-trial second moment X~ X~^T / (n - 1); the quadratic form
/// w^T S w equals the variance of the projection w^T x, which lets the fold
/// loop reuse one matrix per trial for every filter.
Eigen::MatrixXd trial_second_moment(const Eigen::MatrixXd& trial);

}  // namespace fbcsp::csp
