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

#include "core/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "core/errors.hpp"

namespace fbcsp::dsp {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Zeros/poles/gain filter description used during design.
struct Zpk {
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  double gain = 1.0;
};

/// Analog Butterworth low-pass prototype: unit cutoff, no zeros.
Zpk butterworth_prototype(int order) {
  Zpk proto;
  proto.poles.reserve(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
    proto.poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  proto.gain = 1.0;
  return proto;
}

cplx product_of(const std::vector<cplx>& v, cplx shift) {
  cplx acc(1.0, 0.0);
  for (const cplx& x : v) acc *= (shift - x);
  return acc;
}

Zpk lp_to_lp(const Zpk& proto, double warped_wc) {
  Zpk out;
  for (const cplx& z : proto.zeros) out.zeros.push_back(z * warped_wc);
  for (const cplx& p : proto.poles) out.poles.push_back(p * warped_wc);
  int degree = static_cast<int>(proto.poles.size() - proto.zeros.size());
  out.gain = proto.gain * std::pow(warped_wc, degree);
  return out;
}

Zpk lp_to_hp(const Zpk& proto, double warped_wc) {
  Zpk out;
  cplx num(1.0, 0.0), den(1.0, 0.0);
  for (const cplx& z : proto.zeros) num *= -z;
  for (const cplx& p : proto.poles) den *= -p;
  for (const cplx& z : proto.zeros) out.zeros.push_back(warped_wc / z);
  for (const cplx& p : proto.poles) out.poles.push_back(warped_wc / p);
  int degree = static_cast<int>(proto.poles.size() - proto.zeros.size());
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
  out.gain = proto.gain * (num / den).real();
  return out;
}

Zpk lp_to_bp(const Zpk& proto, double warped_w1, double warped_w2) {
  const double bw = warped_w2 - warped_w1;
  const double w0sq = warped_w1 * warped_w2;
  Zpk out;
  auto transform = [&](const cplx& s) -> std::pair<cplx, cplx> {
    cplx half = s * bw * 0.5;
    cplx disc = std::sqrt(half * half - w0sq);
    return {half + disc, half - disc};
  };
  for (const cplx& z : proto.zeros) {
    auto [z1, z2] = transform(z);
    out.zeros.push_back(z1);
    out.zeros.push_back(z2);
  }
  for (const cplx& p : proto.poles) {
    auto [p1, p2] = transform(p);
    out.poles.push_back(p1);
    out.poles.push_back(p2);
  }
  int degree = static_cast<int>(proto.poles.size() - proto.zeros.size());
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
  out.gain = proto.gain * std::pow(bw, degree);
  return out;
}

/// Map analog s-plane onto the digital z-plane: z = (2fs + s) / (2fs - s).
Zpk bilinear(const Zpk& analog, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk out;
  for (const cplx& z : analog.zeros) out.zeros.push_back((fs2 + z) / (fs2 - z));
  for (const cplx& p : analog.poles) out.poles.push_back((fs2 + p) / (fs2 - p));
  int degree = static_cast<int>(analog.poles.size() - analog.zeros.size());
  // Zeros pushed to infinity land at z = -1.
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(-1.0, 0.0);
  cplx num = product_of(analog.zeros, cplx(fs2, 0.0));
  cplx den = product_of(analog.poles, cplx(fs2, 0.0));
  out.gain = analog.gain * (num / den).real();
  return out;
}

/// Collect conjugate pairs (plus at most one real singleton) from a root set.
/// Roots are sorted so pairing is deterministic.
std::vector<std::pair<cplx, cplx>> pair_roots(std::vector<cplx> roots) {
  std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return std::abs(a.imag()) < std::abs(b.imag());
  });
  std::vector<std::pair<cplx, cplx>> pairs;
  std::vector<cplx> reals;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(roots[i].imag()) < 1e-12) {
      reals.push_back(roots[i]);
      used[i] = true;
      continue;
    }
    // find the conjugate partner
    std::size_t best = i;
    double best_dist = 1e300;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(roots[j] - std::conj(roots[i]));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == i) throw NumericError("filter design: unpaired complex root");
    pairs.emplace_back(roots[i], roots[best]);
    used[i] = used[best] = true;
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(reals[i], reals[i + 1]);
  if (reals.size() % 2 == 1) pairs.emplace_back(reals.back(), cplx(0.0, 0.0));  // first-order tail
  return pairs;
}

/// Convert zeros/poles/gain into second-order sections. Pole pairs closest to
/// the unit circle are matched with the nearest remaining zero pair; the
/// overall gain is spread evenly across sections.
std::vector<Biquad> zpk_to_sos(const Zpk& zpk, bool odd_order_tail) {
  if (zpk.zeros.size() != zpk.poles.size())
    throw NumericError("filter design: zero/pole count mismatch after bilinear transform");
  auto pole_pairs = pair_roots(zpk.poles);
  auto zero_pairs = pair_roots(zpk.zeros);
  if (pole_pairs.size() != zero_pairs.size())
    throw NumericError("filter design: section pairing failed");

  // Order pole pairs by closeness to the unit circle (worst first) and give
  // each the nearest zero pair, which keeps section peaking in check.
  std::sort(pole_pairs.begin(), pole_pairs.end(), [](const auto& a, const auto& b) {
    return std::max(std::abs(a.first), std::abs(a.second)) >
           std::max(std::abs(b.first), std::abs(b.second));
  });
  std::vector<bool> zused(zero_pairs.size(), false);
  std::vector<Biquad> sections;
  const double section_gain =
      std::pow(std::abs(zpk.gain), 1.0 / static_cast<double>(pole_pairs.size()));
  const double gain_sign = zpk.gain < 0.0 ? -1.0 : 1.0;
  bool first = true;

  for (const auto& pp : pole_pairs) {
    std::size_t best = zero_pairs.size();
    double best_dist = 1e300;
    for (std::size_t j = 0; j < zero_pairs.size(); ++j) {
      if (zused[j]) continue;
      double d = std::abs(pp.first - zero_pairs[j].first);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    zused[best] = true;
    const auto& zp = zero_pairs[best];

    Biquad s;
    const bool pole_single = odd_order_tail && std::abs(pp.second) == 0.0 &&
                             std::abs(pp.first.imag()) < 1e-12;
    if (pole_single) {
      s.a1 = -pp.first.real();
      s.a2 = 0.0;
    } else {
      s.a1 = -(pp.first + pp.second).real();
      s.a2 = (pp.first * pp.second).real();
    }
    const double g = section_gain * (first ? gain_sign : 1.0);
    first = false;
    const bool zero_single = odd_order_tail && std::abs(zp.second) == 0.0 &&
                             std::abs(zp.first.imag()) < 1e-12 && pole_single;
    if (zero_single) {
      s.b0 = g;
      s.b1 = -g * zp.first.real();
      s.b2 = 0.0;
    } else {
      s.b0 = g;
      s.b1 = -g * (zp.first + zp.second).real();
      s.b2 = g * (zp.first * zp.second).real();
    }
    sections.push_back(s);
  }
  return sections;
}

double prewarp(double f_hz, double fs) { return 2.0 * fs * std::tan(kPi * f_hz / fs); }

IirFilter finish_design(const Zpk& digital, int order, double fs,
                        const std::string& description) {
  IirFilter f;
  f.sections = zpk_to_sos(digital, order % 2 == 1);
  f.fs_hz = fs;
  f.description = description;
  if (!f.stable(1e-12))
    throw NumericError("filter design produced an unstable cascade: " + description);
  return f;
}

void check_order(int order) {
  if (order < 1 || order > 16) throw InvalidArgument("filter order must be in [1, 16]");
}

}  // namespace

double IirFilter::max_pole_modulus() const {
  double worst = 0.0;
  for (const Biquad& s : sections) {
    // roots of z^2 + a1 z + a2
    cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    worst = std::max(worst, std::abs((-s.a1 + disc) / 2.0));
    worst = std::max(worst, std::abs((-s.a1 - disc) / 2.0));
  }
  return worst;
}

std::complex<double> IirFilter::response_at(double f_hz) const {
  const double w = 2.0 * kPi * f_hz / fs_hz;
  const cplx z1 = std::exp(cplx(0.0, -w));
  const cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const Biquad& s : sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

IirFilter design_lowpass(double fc_hz, int order, double fs_hz) {
  check_order(order);
  if (fs_hz <= 0.0) throw InvalidArgument("fs_hz must be positive");
  if (fc_hz <= 0.0 || fc_hz >= fs_hz / 2.0)
    throw InvalidArgument("lowpass cutoff must lie in (0, fs/2)");
  Zpk digital = bilinear(lp_to_lp(butterworth_prototype(order), prewarp(fc_hz, fs_hz)), fs_hz);
  std::ostringstream d;
  d << "lowpass " << fc_hz << " Hz order " << order;
  return finish_design(digital, order, fs_hz, d.str());
}

IirFilter design_highpass(double fc_hz, int order, double fs_hz) {
  check_order(order);
  if (fs_hz <= 0.0) throw InvalidArgument("fs_hz must be positive");
  if (fc_hz <= 0.0 || fc_hz >= fs_hz / 2.0)
    throw InvalidArgument("highpass cutoff must lie in (0, fs/2)");
  Zpk digital = bilinear(lp_to_hp(butterworth_prototype(order), prewarp(fc_hz, fs_hz)), fs_hz);
  std::ostringstream d;
  d << "highpass " << fc_hz << " Hz order " << order;
  return finish_design(digital, order, fs_hz, d.str());
}

IirFilter design_bandpass(BandSpec band, int order, double fs_hz) {
  check_order(order);
  if (fs_hz <= 0.0) throw InvalidArgument("fs_hz must be positive");
  if (band.lo_hz <= 0.0 || band.lo_hz >= band.hi_hz)
    throw InvalidArgument("bandpass edges must satisfy 0 < lo < hi");
  if (band.hi_hz >= fs_hz / 2.0)
    throw InvalidArgument("bandpass upper edge must stay below fs/2");
  Zpk digital = bilinear(
      lp_to_bp(butterworth_prototype(order), prewarp(band.lo_hz, fs_hz), prewarp(band.hi_hz, fs_hz)),
      fs_hz);
  std::ostringstream d;
  d << "bandpass " << band.lo_hz << "-" << band.hi_hz << " Hz order " << order;
  // A band-pass doubles the pole count; the cascade has no first-order tail.
  IirFilter f;
  f.sections = zpk_to_sos(digital, false);
  f.fs_hz = fs_hz;
  f.description = d.str();
  if (!f.stable(1e-12))
    throw NumericError("filter design produced an unstable cascade: " + d.str());
  return f;
}

std::vector<double> apply_filter(const IirFilter& filter, std::span<const double> signal,
                                 FilterInit init) {
  if (filter.fs_hz <= 0.0 || filter.sections.empty())
    throw InvalidArgument("apply_filter: not a designed filter");
  std::vector<double> out(signal.begin(), signal.end());
  const std::size_t n_sec = filter.sections.size();
  std::vector<double> z1(n_sec, 0.0), z2(n_sec, 0.0);

  if (init == FilterInit::kDcSteadyState && !out.empty()) {
    // Preload each section's state with its steady-state response to a
    // constant equal to the first sample.
    double x = out.front();
    for (std::size_t k = 0; k < n_sec; ++k) {
      const Biquad& s = filter.sections[k];
      const double denom = 1.0 + s.a1 + s.a2;
      const double y = denom != 0.0 ? (s.b0 + s.b1 + s.b2) / denom * x : 0.0;
      z2[k] = s.b2 * x - s.a2 * y;
      z1[k] = s.b1 * x - s.a1 * y + z2[k];
      x = y;
    }
  }

  for (double& v : out) {
    double x = v;
    for (std::size_t k = 0; k < n_sec; ++k) {
      const Biquad& s = filter.sections[k];
      const double y = s.b0 * x + z1[k];
      z1[k] = s.b1 * x - s.a1 * y + z2[k];
      z2[k] = s.b2 * x - s.a2 * y;
      x = y;
    }
    v = x;
  }
  return out;
}

std::vector<double> apply_filter_zero_phase(const IirFilter& filter,
                                            std::span<const double> signal) {
  std::vector<double> fwd = apply_filter(filter, signal);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> back = apply_filter(filter, fwd);
  std::reverse(back.begin(), back.end());
  return back;
}

void filter_rows(const IirFilter& filter, Eigen::MatrixXd& signal, bool zero_phase,
                 FilterInit init) {
  std::vector<double> row(static_cast<std::size_t>(signal.cols()));
  for (Eigen::Index c = 0; c < signal.rows(); ++c) {
    for (Eigen::Index s = 0; s < signal.cols(); ++s)
      row[static_cast<std::size_t>(s)] = signal(c, s);
    std::vector<double> out =
        zero_phase ? apply_filter_zero_phase(filter, row) : apply_filter(filter, row, init);
    for (Eigen::Index s = 0; s < signal.cols(); ++s) signal(c, s) = out[static_cast<std::size_t>(s)];
  }
}

namespace {

IirFilter antialias_filter(double fs_in, int factor) {
  const double fs_out = fs_in / factor;
  return design_lowpass(0.4 * fs_out, 8, fs_in);
}

}  // namespace

Recording downsample(const Recording& recording, int factor) {
  recording.validate();
  if (factor < 1) throw InvalidArgument("downsample: factor must be >= 1");
  if (factor == 1) return recording;
  const long n_out = recording.n_samples() / factor;
  if (n_out < 1) throw InvalidArgument("downsample: factor leaves no samples");

  const IirFilter aa = antialias_filter(recording.fs_hz, factor);
  Recording out;
  out.fs_hz = recording.fs_hz / factor;
  out.channel_names = recording.channel_names;
  out.samples.resize(recording.n_channels(), n_out);

  std::vector<double> row(static_cast<std::size_t>(recording.n_samples()));
  for (Eigen::Index c = 0; c < recording.n_channels(); ++c) {
    for (Eigen::Index s = 0; s < recording.n_samples(); ++s)
      row[static_cast<std::size_t>(s)] = recording.samples(c, s);
    std::vector<double> filtered = apply_filter(aa, row, FilterInit::kDcSteadyState);
    for (long i = 0; i < n_out; ++i)
      out.samples(c, i) = filtered[static_cast<std::size_t>(i) * factor];
  }
  return out;
}

TrialSet downsample_trials(const TrialSet& ts, int factor) {
  ts.validate();
  if (factor < 1) throw InvalidArgument("downsample: factor must be >= 1");
  if (factor == 1) return ts;

  TrialSet out = ts;
  out.fs_hz = ts.fs_hz / factor;
  const long n_out = window_sample_count(ts.interval_ms, out.fs_hz);
  if (n_out < 2 || (n_out - 1) * static_cast<long>(factor) >= ts.n_samples())
    throw InvalidArgument("downsample: factor incompatible with trial window");

  const IirFilter aa = antialias_filter(ts.fs_hz, factor);
  std::vector<double> row(static_cast<std::size_t>(ts.n_samples()));
  for (auto& trial : out.trials) {
    Eigen::MatrixXd dec(trial.rows(), n_out);
    for (Eigen::Index c = 0; c < trial.rows(); ++c) {
      for (Eigen::Index s = 0; s < trial.cols(); ++s) row[static_cast<std::size_t>(s)] = trial(c, s);
      std::vector<double> filtered = apply_filter(aa, row, FilterInit::kDcSteadyState);
      for (long i = 0; i < n_out; ++i)
        dec(c, i) = filtered[static_cast<std::size_t>(i) * factor];
    }
    trial = std::move(dec);
  }
  out.validate();
  return out;
}

FilterBank build_filter_bank(double fs_hz, double low_edge, double split, double high_edge,
                             double low_bw, double high_bw) {
  if (fs_hz <= 0.0) throw InvalidArgument("filter bank: fs_hz must be positive");
  if (!(0.0 < low_edge && low_edge < split && split < high_edge))
    throw InvalidArgument("filter bank: need 0 < low_edge < split < high_edge");
  if (low_bw <= 0.0 || high_bw <= 0.0)
    throw InvalidArgument("filter bank: bandwidths must be positive");
  if (high_edge >= fs_hz / 2.0)
    throw InvalidArgument("filter bank: high edge must stay below fs/2");

  FilterBank bank;
  bank.fs_hz = fs_hz;
  // Low side walks down from the split so interior bands are exactly low_bw
  // wide and only the first band absorbs the remainder at low_edge.
  std::vector<double> edges;
  for (double e = split; e > low_edge + 1e-9; e -= low_bw) edges.push_back(e);
  edges.push_back(low_edge);
  std::reverse(edges.begin(), edges.end());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    bank.bands.push_back({edges[i], edges[i + 1]});
  for (double lo = split; lo < high_edge - 1e-9; lo += high_bw)
    bank.bands.push_back({lo, std::min(lo + high_bw, high_edge)});
  return bank;
}

std::vector<BandSpec> bands_below(const FilterBank& bank, double hi_limit_hz) {
  std::vector<BandSpec> out;
  for (const BandSpec& b : bank.bands)
    if (b.hi_hz <= hi_limit_hz + 1e-9) out.push_back(b);
  return out;
}

std::vector<BandSpec> bands_above(const FilterBank& bank, double lo_limit_hz) {
  std::vector<BandSpec> out;
  for (const BandSpec& b : bank.bands)
    if (b.lo_hz >= lo_limit_hz - 1e-9) out.push_back(b);
  return out;
}

double noise_power_gain(const IirFilter& filter, int n_samples) {
  std::vector<double> impulse(static_cast<std::size_t>(n_samples), 0.0);
  impulse[0] = 1.0;
  std::vector<double> h = apply_filter(filter, impulse);
  double acc = 0.0;
  for (double v : h) acc += v * v;
  return acc;
}

}  // namespace fbcsp::dsp
