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

#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace fbcsp::synth {

namespace {

// Stream tags for counter-derived randomness.
constexpr std::uint64_t kMixingStream = 0x6D697869'6E670001ULL;
constexpr std::uint64_t kSourceStream = 0x736F7572'63650001ULL;
constexpr std::uint64_t kNoiseStream = 0x6E6F6973'65000001ULL;
constexpr std::uint64_t kArtifactStream = 0x61727469'66616374ULL;
constexpr std::uint64_t kOracleStream = 0x6F726163'6C650001ULL;

/// Samples discarded at the head of every generated series so band-limited
/// noise reaches steady state before the trial window begins. Derived from
/// the slowest pole, clamped to [1 s, 4 s].
long settle_samples(const dsp::IirFilter& filter, double fs) {
  const double margin = 1.0 - filter.max_pole_modulus();
  const double n = 6.0 / std::max(margin, 1e-6);
  return std::lround(std::clamp(n, fs * 1.0, fs * 4.0));
}

dsp::IirFilter planted_filter(const SynthConfig& cfg) {
  return dsp::design_bandpass(cfg.planted_band, 4, cfg.fs_hz);
}

dsp::IirFilter background_filter(const SynthConfig& cfg) {
  const double hi = std::min(144.0, 0.45 * cfg.fs_hz);
  return dsp::design_bandpass({0.5, hi}, 4, cfg.fs_hz);
}

/// Band-limited unit-variance Gaussian series of length n.
std::vector<double> band_limited_noise(Rng& rng, const dsp::IirFilter& filter, double inv_sqrt_gain,
                                       long n, long settle) {
  std::vector<double> white(static_cast<std::size_t>(n + settle));
  rng.fill_gaussian(white.data(), white.size());
  std::vector<double> shaped = dsp::apply_filter(filter, white);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = shaped[static_cast<std::size_t>(i + settle)] * inv_sqrt_gain;
  return out;
}

Eigen::MatrixXd random_orthonormal(std::uint64_t seed, int rows, int cols) {
  Rng rng = Rng::stream(seed, kMixingStream);
  Eigen::MatrixXd g(rows, rows);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  // Fix column signs for reproducibility across the decomposition details.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    Eigen::Index imax = 0;
    q.col(j).cwiseAbs().maxCoeff(&imax);
    if (q(imax, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_channels < 1) throw InvalidArgument("synth: n_channels must be >= 1");
  if (effective_sources() > n_channels)
    throw InvalidArgument("synth: n_sources cannot exceed n_channels");
  if (n_trials_class0 < 1 || n_trials_class1 < 1)
    throw InvalidArgument("synth: both classes need at least one trial");
  if (fs_hz <= 0.0) throw InvalidArgument("synth: fs_hz must be positive");
  if (trial_duration_ms <= 0.0) throw InvalidArgument("synth: duration must be positive");
  if (pre_roll_ms < 0.0) throw InvalidArgument("synth: pre_roll_ms must be non-negative");
  if (!(planted_band.lo_hz > 0.0 && planted_band.lo_hz < planted_band.hi_hz &&
        planted_band.hi_hz < fs_hz / 2.0))
    throw InvalidArgument("synth: planted band must satisfy 0 < lo < hi < fs/2");
  if (variance_ratio < 1.0) throw InvalidArgument("synth: variance ratio must be >= 1");
  if (background_source_variance < 0.0)
    throw InvalidArgument("synth: background source variance must be non-negative");
  if (sensor_noise_sigma < 0.0) throw InvalidArgument("synth: noise sigma must be non-negative");
  if (amplitude_uv <= 0.0) throw InvalidArgument("synth: amplitude must be positive");
  if (artifact_fraction < 0.0 || artifact_fraction > 1.0)
    throw InvalidArgument("synth: artifact fraction must lie in [0, 1]");
  if (artifact_amplitude_uv < 0.0)
    throw InvalidArgument("synth: artifact amplitude must be non-negative");
  if (mixing.size() > 0 &&
      (mixing.rows() != n_channels || mixing.cols() != effective_sources()))
    throw InvalidArgument("synth: explicit mixing matrix has the wrong shape");
}

std::pair<TrialSet, GroundTruth> generate(const SynthConfig& cfg) {
  cfg.validate();

  const int n_src = cfg.effective_sources();
  const long n_samples =
      window_sample_count({-cfg.pre_roll_ms, cfg.trial_duration_ms}, cfg.fs_hz);
  if (n_samples < 2) throw InvalidArgument("synth: trial window too short");
  const long n_trials = cfg.n_trials_class0 + cfg.n_trials_class1;

  const dsp::IirFilter planted = planted_filter(cfg);
  const dsp::IirFilter background = background_filter(cfg);
  const double planted_gain = dsp::noise_power_gain(planted);
  const double background_gain = dsp::noise_power_gain(background);
  const double inv_planted = 1.0 / std::sqrt(planted_gain);
  const double inv_background = 1.0 / std::sqrt(background_gain);
  const long settle = settle_samples(planted, cfg.fs_hz);

  GroundTruth truth;
  truth.mixing = cfg.mixing.size() > 0 ? cfg.mixing
                                       : random_orthonormal(cfg.seed, cfg.n_channels, n_src);
  truth.source_index = 0;

  TrialSet ts;
  ts.fs_hz = cfg.fs_hz;
  ts.interval_ms = {-cfg.pre_roll_ms, cfg.trial_duration_ms};
  ts.channel_names.reserve(static_cast<std::size_t>(cfg.n_channels));
  for (int c = 0; c < cfg.n_channels; ++c) ts.channel_names.push_back("ch" + std::to_string(c));

  const double amp1 = std::sqrt(cfg.variance_ratio);
  Eigen::MatrixXd sources(n_src, n_samples);

  for (long t = 0; t < n_trials; ++t) {
    const int label = t < cfg.n_trials_class0 ? 0 : 1;
    for (int s = 0; s < n_src; ++s) {
      Rng rng = Rng::stream(cfg.seed, kSourceStream + static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(t));
      const bool discriminative = s == truth.source_index;
      const auto& filt = discriminative ? planted : background;
      const double scale = discriminative
                               ? (label == 1 ? amp1 : 1.0) * inv_planted
                               : std::sqrt(cfg.background_source_variance) * inv_background;
      std::vector<double> series = band_limited_noise(rng, filt, scale, n_samples, settle);
      for (long i = 0; i < n_samples; ++i) sources(s, i) = series[static_cast<std::size_t>(i)];
    }

    Eigen::MatrixXd sensors = truth.mixing * sources;
    if (cfg.sensor_noise_sigma > 0.0) {
      for (int c = 0; c < cfg.n_channels; ++c) {
        Rng rng = Rng::stream(cfg.seed, kNoiseStream + static_cast<std::uint64_t>(c),
                              static_cast<std::uint64_t>(t));
        for (long i = 0; i < n_samples; ++i)
          sensors(c, i) += cfg.sensor_noise_sigma * rng.gaussian();
      }
    }
    sensors *= cfg.amplitude_uv;

    if (cfg.artifact_amplitude_uv > 0.0 && cfg.artifact_fraction > 0.0) {
      Rng rng = Rng::stream(cfg.seed, kArtifactStream, static_cast<std::uint64_t>(t));
      if (rng.uniform01() < cfg.artifact_fraction) {
        const int chan = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_channels)));
        const long width = std::lround(cfg.fs_hz * (0.05 + 0.15 * rng.uniform01()));
        const long max_onset = std::max<long>(1, n_samples - width);
        const long onset = static_cast<long>(rng.below(static_cast<std::uint64_t>(max_onset)));
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        for (long i = onset; i < std::min(n_samples, onset + width); ++i)
          sensors(chan, i) += sign * cfg.artifact_amplitude_uv;
      }
    }

    ts.trials.push_back(std::move(sensors));
    ts.labels.push_back(label);
    ts.trial_ids.push_back(t);
    ts.rejected.push_back(0);
  }

  ts.validate();
  return {std::move(ts), std::move(truth)};
}

Eigen::VectorXd true_unmixing(const GroundTruth& truth) {
  // Pseudo-inverse row for the discriminative source; for orthonormal mixing
  // this is just the matching column.
  const Eigen::MatrixXd& m = truth.mixing;
  Eigen::MatrixXd pinv =
      (m.transpose() * m).ldlt().solve(m.transpose());
  return pinv.row(truth.source_index).transpose();
}

OracleEstimate oracle_accuracy(const SynthConfig& cfg, int n_mc) {
  cfg.validate();
  if (n_mc < 1000) throw InvalidArgument("oracle_accuracy: need at least 1000 Monte-Carlo trials");

  if (cfg.variance_ratio == 1.0) return {0.5, 0.0};  // classes identical by construction

  GroundTruth truth;
  truth.mixing = cfg.mixing.size() > 0
                     ? cfg.mixing
                     : random_orthonormal(cfg.seed, cfg.n_channels, cfg.effective_sources());
  truth.source_index = 0;
  const Eigen::VectorXd u = true_unmixing(truth);
  const double unmix_norm = u.norm();

  // Classes differ only in the recovered source's power inside the planted
  // band. Given the true unmixing, the recovered series y = s + e is a
  // zero-mean Gaussian with covariance A_c G + sigma^2 I, where G is the
  // Toeplitz covariance of the unit-power band-limited source and A_0 = 1,
  // A_1 = r. Both class covariances share G's eigenbasis, so the exact
  // likelihood-ratio statistic is sum_k w_k z_k^2 with z = U^T y and
  //   w_k = 1/(lambda_k + s2) - 1/(r lambda_k + s2),
  // which vanishes wherever lambda_k ~ 0: an optimally weighted band power.
  // The statistic spans the whole stored trial (context included), which
  // upper bounds what any decoder can extract from the window alone.
  const dsp::IirFilter planted = planted_filter(cfg);
  const double g1 = dsp::noise_power_gain(planted);
  const double inv_planted = 1.0 / std::sqrt(g1);
  const double r = cfg.variance_ratio;
  const double noise_var = std::max(
      cfg.sensor_noise_sigma * cfg.sensor_noise_sigma * unmix_norm * unmix_norm, 1e-12);

  const long n =
      window_sample_count({-cfg.pre_roll_ms, cfg.trial_duration_ms}, cfg.fs_hz);
  if (n < 2) throw InvalidArgument("oracle_accuracy: trial window too short");

  // Source autocovariance from the impulse response, then the Toeplitz G.
  std::vector<double> impulse(static_cast<std::size_t>(1 << 16), 0.0);
  impulse[0] = 1.0;
  const std::vector<double> h = dsp::apply_filter(planted, impulse);
  Eigen::VectorXd autocov = Eigen::VectorXd::Zero(n);
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(j) < h.size(); ++t)
      acc += h[t] * h[t + static_cast<std::size_t>(j)];
    autocov(j) = acc / g1;
  }
  Eigen::MatrixXd toeplitz(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) toeplitz(i, j) = autocov(std::abs(i - j));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(toeplitz);
  if (eig.info() != Eigen::Success)
    throw NumericError("oracle_accuracy: source covariance eigendecomposition failed");

  // Keep only eigendirections with appreciable source power; the rest have
  // zero weight in the statistic and cancel in the threshold.
  const double lambda_max = eig.eigenvalues().maxCoeff();
  std::vector<long> kept;
  double threshold = 0.0;
  for (long k = 0; k < n; ++k) {
    const double lambda = std::max(0.0, eig.eigenvalues()(k));
    if (lambda < 1e-12 * lambda_max) continue;
    kept.push_back(k);
    threshold += std::log((r * lambda + noise_var) / (lambda + noise_var));
  }
  Eigen::MatrixXd basis(static_cast<long>(kept.size()), n);  // rows = U_k^T
  Eigen::VectorXd weight(static_cast<long>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double lambda = eig.eigenvalues()(kept[i]);
    basis.row(static_cast<long>(i)) = eig.eigenvectors().col(kept[i]).transpose();
    weight(static_cast<long>(i)) =
        1.0 / (lambda + noise_var) - 1.0 / (r * lambda + noise_var);
  }

  const long settle = settle_samples(planted, cfg.fs_hz);
  const double amp1 = std::sqrt(r);
  Eigen::VectorXd recovered(n);

  long long correct = 0;
  const int n_total = 2 * (n_mc / 2);
  for (int t = 0; t < n_total; ++t) {
    const int label = t % 2;
    Rng rng = Rng::stream(cfg.seed, kOracleStream, static_cast<std::uint64_t>(t));
    const double scale = (label == 1 ? amp1 : 1.0) * inv_planted;
    std::vector<double> src = band_limited_noise(rng, planted, scale, n, settle);
    for (long i = 0; i < n; ++i)
      recovered(i) = src[static_cast<std::size_t>(i)] +
                     cfg.sensor_noise_sigma * unmix_norm * rng.gaussian();
    const Eigen::VectorXd z = basis * recovered;
    const double stat = z.cwiseAbs2().dot(weight);
    const int decision = stat > threshold ? 1 : 0;
    if (decision == label) ++correct;
  }

  OracleEstimate est;
  est.accuracy = static_cast<double>(correct) / static_cast<double>(n_total);
  est.stderr_ = std::sqrt(est.accuracy * (1.0 - est.accuracy) / static_cast<double>(n_total));
  return est;
}

}  // namespace fbcsp::synth
