// Copyright 2026 The opokit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "opo/squeezing_model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace opo {

void OpoParams::validate() const {
  if (!(transmissivity > 0.0 && transmissivity < 1.0))
    throw InvalidArgument("output coupler transmissivity must lie in (0, 1)");
  if (!(internal_loss >= 0.0 && internal_loss < 1.0))
    throw InvalidArgument("internal loss must lie in [0, 1)");
  if (!(f_hwhm > 0.0) || !std::isfinite(f_hwhm))
    throw InvalidArgument("cavity half-linewidth must be positive");
  opo::normalized_pump(pump_power, threshold_power);
}

double OpoParams::escape_efficiency() const {
  return opo::escape_efficiency(transmissivity, internal_loss);
}

double OpoParams::normalized_pump() const {
  return opo::normalized_pump(pump_power, threshold_power);
}

double escape_efficiency(double transmissivity, double internal_loss) {
  if (!(transmissivity >= 0.0) || !(internal_loss >= 0.0))
    throw InvalidArgument("transmissivity and internal loss must be nonnegative");
  if (transmissivity + internal_loss == 0.0)
    throw InvalidArgument("escape efficiency undefined for T = L = 0");
  return transmissivity / (transmissivity + internal_loss);
}

double normalized_pump(double pump_power, double threshold_power) {
  if (!(threshold_power > 0.0)) throw InvalidArgument("threshold power must be positive");
  if (!(pump_power >= 0.0)) throw InvalidArgument("pump power must be nonnegative");
  if (pump_power >= threshold_power)
    throw PhysicsError("pump power at or above the oscillation threshold is not modeled");
  return std::sqrt(pump_power / threshold_power);
}

ElectronicLossTable::ElectronicLossTable(std::vector<double> frequencies,
                                         std::vector<double> losses)
    : frequencies_(std::move(frequencies)), losses_(std::move(losses)) {
  if (frequencies_.empty() || frequencies_.size() != losses_.size())
    throw InvalidArgument("electronic loss table needs matching, nonempty columns");
  for (std::size_t i = 0; i < losses_.size(); ++i) {
    if (!(losses_[i] >= 0.0 && losses_[i] <= 1.0))
      throw InvalidArgument("electronic loss values must lie in [0, 1]");
    if (i > 0 && !(frequencies_[i] > frequencies_[i - 1]))
      throw InvalidArgument("electronic loss frequencies must be strictly increasing");
  }
}

ElectronicLossTable ElectronicLossTable::constant(double loss) {
  return ElectronicLossTable({0.0}, {loss});
}

ElectronicLossTable ElectronicLossTable::from_snr(std::vector<double> frequencies,
                                                  const std::vector<double>& snr_db) {
  std::vector<double> losses(snr_db.size());
  std::transform(snr_db.begin(), snr_db.end(), losses.begin(),
                 [](double s) { return electronic_loss_from_snr(s); });
  return ElectronicLossTable(std::move(frequencies), std::move(losses));
}

double ElectronicLossTable::operator()(double f) const {
  if (f <= frequencies_.front()) return losses_.front();
  if (f >= frequencies_.back()) return losses_.back();
  const auto it = std::upper_bound(frequencies_.begin(), frequencies_.end(), f);
  const auto hi = static_cast<std::size_t>(it - frequencies_.begin());
  const std::size_t lo = hi - 1;
  const double t = (f - frequencies_[lo]) / (frequencies_[hi] - frequencies_[lo]);
  return losses_[lo] + t * (losses_[hi] - losses_[lo]);
}

bool ElectronicLossTable::is_constant() const {
  return std::all_of(losses_.begin(), losses_.end(),
                     [&](double l) { return l == losses_.front(); });
}

void DetectionChain::validate() const {
  auto fraction = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
  };
  fraction(propagation_loss, "propagation loss");
  fraction(homodyne_visibility, "homodyne visibility");
  fraction(photodiode_efficiency, "photodiode efficiency");
  if (!(phase_jitter_rms >= 0.0 && phase_jitter_rms < M_PI / 2))
    throw InvalidArgument("phase jitter must lie in [0, pi/2)");
}

double DetectionChain::efficiency(double f) const {
  return (1.0 - propagation_loss) * homodyne_visibility * homodyne_visibility *
         photodiode_efficiency * (1.0 - electronic_loss(f));
}

double total_efficiency(const DetectionChain& chain, double f) {
  chain.validate();
  return chain.efficiency(f);
}

VariancePair<double> raw_spectrum(const OpoParams& opo, double efficiency, double f) {
  opo.validate();
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw InvalidArgument("detection efficiency must lie in [0, 1]");
  return raw_variances(opo.normalized_pump(), efficiency * opo.escape_efficiency(),
                       f / opo.f_hwhm);
}

std::string_view to_string(SpectrumLabel label) {
  switch (label) {
    case SpectrumLabel::squeezed:
      return "squeezed";
    case SpectrumLabel::antisqueezed:
      return "antisqueezed";
    case SpectrumLabel::shot:
      return "shot";
    case SpectrumLabel::electronic:
      return "electronic";
  }
  return "unknown";
}

SpectrumPair predicted_spectrum(const OpoParams& opo, const DetectionChain& chain,
                                const Eigen::ArrayXd& frequencies) {
  if (frequencies.size() == 0) throw InvalidArgument("frequency grid is empty");
  opo.validate();
  chain.validate();
  const double xi = opo.normalized_pump();
  const double rho = opo.escape_efficiency();
  const Eigen::Index n = frequencies.size();

  SpectrumPair out;
  out.squeezed = {frequencies, Eigen::ArrayXd(n), SpectrumLabel::squeezed,
                  Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true), 0};
  out.antisqueezed = out.squeezed;
  out.antisqueezed.label = SpectrumLabel::antisqueezed;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = frequencies(i);
    const auto raw = raw_variances(xi, chain.efficiency(f) * rho, f / opo.f_hwhm);
    const auto mixed = apply_phase_noise(raw, chain.phase_jitter_rms);
    out.squeezed.values(i) = mixed.squeezed;
    out.antisqueezed.values(i) = mixed.antisqueezed;
  }
  return out;
}

NoiseSpectrum shot_spectrum(const Eigen::ArrayXd& frequencies) {
  const Eigen::Index n = frequencies.size();
  return {frequencies, Eigen::ArrayXd::Ones(n), SpectrumLabel::shot,
          Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true), 0};
}

namespace {

PumpSweepRow evaluate_at_xi(const OpoParams& opo, const DetectionChain& chain, double f_probe,
                            double xi) {
  const auto raw = raw_variances(xi, chain.efficiency(f_probe) * opo.escape_efficiency(),
                                 f_probe / opo.f_hwhm);
  const auto mixed = apply_phase_noise(raw, chain.phase_jitter_rms);
  return {xi * xi * opo.threshold_power, xi, to_db(mixed.squeezed), to_db(mixed.antisqueezed)};
}

}  // namespace

std::vector<PumpSweepRow> pump_sweep(const OpoParams& opo_template, const DetectionChain& chain,
                                     double f_probe, std::span<const double> pump_powers) {
  chain.validate();
  std::vector<PumpSweepRow> rows;
  rows.reserve(pump_powers.size());
  for (double p : pump_powers) {
    OpoParams opo = opo_template;
    opo.pump_power = p;
    opo.validate();
    PumpSweepRow row = evaluate_at_xi(opo, chain, f_probe, opo.normalized_pump());
    row.pump_power = p;
    rows.push_back(row);
  }
  return rows;
}

std::vector<PumpSweepRow> xi_sweep(const OpoParams& opo_template, const DetectionChain& chain,
                                   double f_probe, std::span<const double> xis) {
  chain.validate();
  std::vector<PumpSweepRow> rows;
  rows.reserve(xis.size());
  for (double xi : xis) {
    if (!(xi >= 0.0 && xi < 1.0)) throw PhysicsError("xi must lie in [0, 1)");
    rows.push_back(evaluate_at_xi(opo_template, chain, f_probe, xi));
  }
  return rows;
}

SqueezingOptimum optimal_squeezing(const OpoParams& opo, const DetectionChain& chain,
                                   double f_probe) {
  chain.validate();
  auto level = [&](double xi) { return evaluate_at_xi(opo, chain, f_probe, xi).squeezing_db; };

  // Coarse scan, then golden-section inside the best cell.
  constexpr int kCoarse = 2000;
  constexpr double kXiMax = 1.0 - 1e-9;
  int best = 1;
  double best_value = level(kXiMax / kCoarse);
  for (int i = 2; i < kCoarse; ++i) {
    const double v = level(kXiMax * i / kCoarse);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = kXiMax * (best - 1) / kCoarse;
  double b = kXiMax * std::min(best + 1, kCoarse) / kCoarse;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = level(x1), f2 = level(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = level(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = level(x2);
    }
  }
  const PumpSweepRow row = evaluate_at_xi(opo, chain, f_probe, 0.5 * (a + b));
  return {row.xi, row.squeezing_db, row.antisqueezing_db};
}

}  // namespace opo
