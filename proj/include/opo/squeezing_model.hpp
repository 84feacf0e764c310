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

#ifndef OPO_SQUEEZING_MODEL_HPP
#define OPO_SQUEEZING_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opo/errors.hpp"

namespace opo {

/// Sub-threshold degenerate OPO. Powers in watts, frequencies in Hz.
struct OpoParams {
  double transmissivity = 0.146;
  double internal_loss = 0.0030;
  double f_hwhm = 65e6;
  double pump_power = 0.225;
  double threshold_power = 0.490;

  /// Throws InvalidArgument, or PhysicsError when pumped at or above threshold.
  void validate() const;
  double escape_efficiency() const;
  double normalized_pump() const;
};

/// rho = T / (T + L).
double escape_efficiency(double transmissivity, double internal_loss);

/// xi = sqrt(P / P_th); the pump amplitude relative to threshold.
double normalized_pump(double pump_power, double threshold_power);

/// Optical loss equivalent to electronic noise sitting `snr_db` below shot noise.
inline double electronic_loss_from_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

template <typename Derived>
Eigen::ArrayXd electronic_loss_from_snr(const Eigen::ArrayBase<Derived>& snr_db) {
  return Eigen::pow(10.0, -snr_db.derived().template cast<double>() / 10.0);
}

/// Tabulated L_elec(f): linear interpolation, flat extrapolation.
class ElectronicLossTable {
 public:
  ElectronicLossTable() = default;
  ElectronicLossTable(std::vector<double> frequencies, std::vector<double> losses);

  static ElectronicLossTable constant(double loss);
  static ElectronicLossTable from_snr(std::vector<double> frequencies,
                                      const std::vector<double>& snr_db);

  double operator()(double f) const;
  bool is_constant() const;

  const std::vector<double>& frequencies() const { return frequencies_; }
  const std::vector<double>& losses() const { return losses_; }

 private:
  std::vector<double> frequencies_{0.0};
  std::vector<double> losses_{0.0};
};

struct DetectionChain {
  double propagation_loss = 0.0;
  /// Mode-match efficiency is the visibility squared.
  double homodyne_visibility = 1.0;
  double photodiode_efficiency = 1.0;
  ElectronicLossTable electronic_loss;
  /// RMS phase jitter in radians.
  double phase_jitter_rms = 0.0;

  void validate() const;
  double efficiency(double f) const;
};

/// eta(f) = (1 - propagation) * visibility^2 * photodiode * (1 - L_elec(f)).
double total_efficiency(const DetectionChain& chain, double f);

template <typename Scalar>
struct VariancePair {
  Scalar squeezed;
  Scalar antisqueezed;
};

/// Quadrature variances relative to shot noise at sideband f, with
/// f_ratio = f / f_hwhm and eta_rho the product of detection and escape
/// efficiencies:
///   squeezed     = 1 - eta_rho 4 xi / ((1 + xi)^2 + f_ratio^2)
///   antisqueezed = 1 + eta_rho 4 xi / ((1 - xi)^2 + f_ratio^2)
template <typename Scalar>
VariancePair<Scalar> raw_variances(Scalar xi, Scalar eta_rho, Scalar f_ratio) {
  const Scalar gain = Scalar(4) * eta_rho * xi;
  const Scalar f2 = f_ratio * f_ratio;
  return {Scalar(1) - gain / ((Scalar(1) + xi) * (Scalar(1) + xi) + f2),
          Scalar(1) + gain / ((Scalar(1) - xi) * (Scalar(1) - xi) + f2)};
}

/// Mixes the branches by an RMS phase error theta (radians, [0, pi/2)).
template <typename Scalar>
VariancePair<Scalar> apply_phase_noise(const VariancePair<Scalar>& r, Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta) * cos(theta);
  const Scalar s = sin(theta) * sin(theta);
  return {r.squeezed * c + r.antisqueezed * s, r.antisqueezed * c + r.squeezed * s};
}

VariancePair<double> raw_spectrum(const OpoParams& opo, double efficiency, double f);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

template <typename Derived>
Eigen::ArrayXd to_db(const Eigen::ArrayBase<Derived>& linear) {
  return 10.0 * linear.derived().log10();
}

template <typename Derived>
Eigen::ArrayXd from_db(const Eigen::ArrayBase<Derived>& db) {
  return Eigen::pow(10.0, db.derived() / 10.0);
}

enum class SpectrumLabel { squeezed, antisqueezed, shot, electronic };

std::string_view to_string(SpectrumLabel label);

/// Variance relative to shot noise on a frequency grid.
struct NoiseSpectrum {
  Eigen::ArrayXd frequencies;
  Eigen::ArrayXd values;
  SpectrumLabel label = SpectrumLabel::squeezed;
  /// False for bins the acquisition chain does not represent faithfully.
  Eigen::Array<bool, Eigen::Dynamic, 1> reliable;
  /// Segment averages behind an analyzed spectrum; 0 for analytic ones.
  std::size_t averages = 0;

  Eigen::ArrayXd decibels() const { return to_db(values); }
};

struct SpectrumPair {
  NoiseSpectrum squeezed;
  NoiseSpectrum antisqueezed;
};

SpectrumPair predicted_spectrum(const OpoParams& opo, const DetectionChain& chain,
                                const Eigen::ArrayXd& frequencies);

NoiseSpectrum shot_spectrum(const Eigen::ArrayXd& frequencies);

struct PumpSweepRow {
  double pump_power = 0.0;
  double xi = 0.0;
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
};

/// Squeezed and anti-squeezed levels at f_probe for each pump power.
std::vector<PumpSweepRow> pump_sweep(const OpoParams& opo_template, const DetectionChain& chain,
                                     double f_probe, std::span<const double> pump_powers);

/// Same as pump_sweep, parametrized directly by xi in [0, 1).
std::vector<PumpSweepRow> xi_sweep(const OpoParams& opo_template, const DetectionChain& chain,
                                   double f_probe, std::span<const double> xis);

struct SqueezingOptimum {
  double xi = 0.0;
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
};

/// Deepest squeezing at f_probe over xi in (0, 1).
SqueezingOptimum optimal_squeezing(const OpoParams& opo, const DetectionChain& chain,
                                   double f_probe);

}  // namespace opo

#endif  // OPO_SQUEEZING_MODEL_HPP
