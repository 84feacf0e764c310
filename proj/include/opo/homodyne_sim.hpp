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

#ifndef OPO_HOMODYNE_SIM_HPP
#define OPO_HOMODYNE_SIM_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opo/squeezing_model.hpp"

namespace opo {

/// Continuous-time section H(s) = (s + zero) / (s + pole), rad/s.
struct AnalogSection {
  double zero = 0.0;
  double pole = 0.0;
};

/// |H(i omega)|^2.
double power_response(const AnalogSection& section, double omega);

/// Spectral factors of the loss-free OPO output: |H(i 2 pi f)|^2 equals the
/// squeezed / anti-squeezed variance with eta = 1.
struct QuadratureFilters {
  AnalogSection squeezed;
  AnalogSection antisqueezed;
};

/// gamma = 2 pi f_hwhm (rad/s), xi in [0, 1), rho in (0, 1].
QuadratureFilters quadrature_filters(double gamma, double xi, double rho);

/// y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]
class FirstOrderIir {
 public:
  FirstOrderIir() = default;
  FirstOrderIir(double b0, double b1, double a1) : b0_(b0), b1_(b1), a1_(a1) {}

  /// Bilinear transform with the frequency axis prewarped at `prewarp_hz`.
  static FirstOrderIir bilinear(const AnalogSection& section, double sample_rate,
                                double prewarp_hz);
  /// First-order high-pass s / (s + 2 pi cutoff).
  static FirstOrderIir highpass(double cutoff_hz, double sample_rate);

  double step(double x) {
    const double y = b0_ * x + b1_ * x1_ - a1_ * y1_;
    x1_ = x;
    y1_ = y;
    return y;
  }
  void filter(std::span<double> data) {
    for (double& v : data) v = step(v);
  }
  void reset() { x1_ = y1_ = 0.0; }

  std::complex<double> response(double f, double sample_rate) const;

  double b0() const { return b0_; }
  double b1() const { return b1_; }
  double a1() const { return a1_; }

 private:
  double b0_ = 1.0, b1_ = 0.0, a1_ = 0.0;
  double x1_ = 0.0, y1_ = 0.0;
};

struct TraceConfig {
  double sample_rate = 1e9;
  double duration = 1e-3;
  std::uint64_t seed = 1;
  /// 0 measures the squeezed quadrature, pi/2 the anti-squeezed one.
  double lock_angle = 0.0;
  /// Overrides the detection chain's RMS jitter when set.
  std::optional<double> phase_jitter_rms;
  double jitter_correlation_time = 1e-3;
  /// 0 disables the high-pass.
  double highpass_cutoff = 300e3;
  std::size_t block_size = std::size_t{1} << 16;

  void validate() const;
  std::size_t sample_count() const;
};

struct AnalyzerConfig {
  double rbw = 300e3;
  double vbw = 300e3;
  std::size_t n_averages = 600;
  double f_min = 0.0;
  double f_max = 200e6;
  bool log_average = false;

  void validate() const;
};

/// Throws InvalidArgument when the sample rate does not cover the analysis
/// span (fs > 4 f_max).
void validate(const TraceConfig& trace, const AnalyzerConfig& analyzer);

/// Samples in units where vacuum noise has unit variance.
struct HomodyneRecord {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;
  std::uint64_t seed = 0;
  double highpass_cutoff = 0.0;
  std::string params_hash;
};

/// Unit-variance white Gaussian noise for `stream`, generated block by block
/// from independent seed-derived engines.
Eigen::VectorXd white_noise(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                            std::size_t block_size);

/// Stationary Gaussian process with RMS `rms` and exponential correlation.
Eigen::VectorXd phase_jitter(std::uint64_t seed, std::size_t count, double sample_rate,
                             double rms, double correlation_time, std::size_t block_size);

/// Minimum-phase FIR whose magnitude response approximates `magnitude(f)`.
std::vector<double> minimum_phase_fir(const std::function<double(double)>& magnitude,
                                      double sample_rate, std::size_t taps);

/// Causal direct-form convolution truncated to the input length.
Eigen::VectorXd fir_filter(std::span<const double> taps, const Eigen::VectorXd& x);

HomodyneRecord generate_trace(const OpoParams& opo, const DetectionChain& chain,
                              const TraceConfig& config);

/// Vacuum record processed like a signal record (same high-pass).
HomodyneRecord generate_shot_record(const TraceConfig& config);

/// Gaussian window of length n with noise-equivalent bandwidth `rbw` at fs.
Eigen::ArrayXd gaussian_window(std::size_t n, double rbw, double sample_rate);
double equivalent_noise_bandwidth(const Eigen::ArrayXd& window, double sample_rate);
/// Eight window sigmas, rounded up to a 2-3-5 smooth FFT size.
std::size_t segment_length_for_rbw(double rbw, double sample_rate);

/// One-sided PSD of a single windowed segment (units^2 / Hz).
Eigen::ArrayXd periodogram(std::span<const double> segment, const Eigen::ArrayXd& window,
                           double sample_rate);

/// Bins below this are flagged unreliable when the high-pass is enabled.
inline constexpr double kHighpassReliableAbove = 1e6;

/// Swept-analyzer emulation normalized to an identically processed shot record.
NoiseSpectrum analyze_spectrum(const HomodyneRecord& record, const HomodyneRecord& shot_record,
                               const AnalyzerConfig& config);

/// Samples needed for `n_averages` sweeps of the configured analyzer.
std::size_t required_samples(const AnalyzerConfig& config, double sample_rate);

std::string params_hash(const OpoParams& opo, const DetectionChain& chain,
                        const TraceConfig& config);

void write_record(const HomodyneRecord& record, std::ostream& out);
HomodyneRecord read_record(std::istream& in);

}  // namespace opo

#endif  // OPO_HOMODYNE_SIM_HPP
