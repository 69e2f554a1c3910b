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
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace fbcsp::dsp {

/// One second-order section, denominator normalized to a0 = 1.
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// IIR filter as a cascade of second-order sections.
struct IirFilter {
  std::vector<Biquad> sections;
  double fs_hz = 0.0;
  std::string description;

  /// Largest pole modulus over all sections.
  double max_pole_modulus() const;
  bool stable(double margin = 1e-9) const { return max_pole_modulus() < 1.0 - margin; }

  /// Complex frequency response at f_hz.
  std::complex<double> response_at(double f_hz) const;
  double gain_at(double f_hz) const { return std::abs(response_at(f_hz)); }
};

/// A frequency band [lo_hz, hi_hz].
struct BandSpec {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  double width() const { return hi_hz - lo_hz; }
  bool operator==(const BandSpec&) const = default;
};

/// Ordered, non-overlapping band-pass grid.
struct FilterBank {
  std::vector<BandSpec> bands;
  double fs_hz = 0.0;
};

/// Butterworth designs (bilinear transform, realized as stable SOS cascades).
/// `order` is the analog prototype order; band-pass filters therefore carry
/// 2*order poles.
IirFilter design_lowpass(double fc_hz, int order, double fs_hz);
IirFilter design_highpass(double fc_hz, int order, double fs_hz);
IirFilter design_bandpass(BandSpec band, int order, double fs_hz);

enum class FilterInit {
  kZero,           // zero initial state
  kDcSteadyState,  // state preloaded so a constant input passes transient-free
};

/// Causal single-pass filtering; output length equals input length.
std::vector<double> apply_filter(const IirFilter& filter, std::span<const double> signal,
                                 FilterInit init = FilterInit::kZero);

/// Forward-backward pass (approximate zero phase, squared magnitude response).
std::vector<double> apply_filter_zero_phase(const IirFilter& filter,
                                            std::span<const double> signal);

/// Filter every row of a (channel, time) matrix in place.
void filter_rows(const IirFilter& filter, Eigen::MatrixXd& signal, bool zero_phase = false,
                 FilterInit init = FilterInit::kZero);

/// Anti-aliased integer-factor decimation. The guard low-pass is an 8th-order
/// Butterworth at 0.4x the output rate; output length is floor(N / factor).
Recording downsample(const Recording& recording, int factor);

/// Decimate every trial of a TrialSet by the same rule, keeping the trial
/// window consistent with the new rate.
TrialSet downsample_trials(const TrialSet& ts, int factor);

/// Contiguous band grid: low_bw-wide bands from low_edge to split, then
/// high_bw-wide bands up to high_edge. The first band may be narrower so the
/// grid starts exactly at low_edge.
FilterBank build_filter_bank(double fs_hz, double low_edge = 0.5, double split = 30.0,
                             double high_edge = 144.0, double low_bw = 2.0,
                             double high_bw = 6.0);

/// Bands entirely at or below hi_limit_hz (hi <= limit).
std::vector<BandSpec> bands_below(const FilterBank& bank, double hi_limit_hz);
/// Bands entirely at or above lo_limit_hz (lo >= limit).
std::vector<BandSpec> bands_above(const FilterBank& bank, double lo_limit_hz);

/// Total white-noise power gain sum(h[k]^2); used to normalize band-limited
/// noise sources.
double noise_power_gain(const IirFilter& filter, int n_samples = 1 << 16);

}  // namespace fbcsp::dsp
