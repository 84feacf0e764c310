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

#include "opo/homodyne_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/FFT>

#include "json.hpp"

namespace opo {

namespace {

constexpr std::uint64_t kStreamAntisqueezed = 1;
constexpr std::uint64_t kStreamSqueezed = 2;
constexpr std::uint64_t kStreamDetectionVacuum = 3;
constexpr std::uint64_t kStreamJitter = 4;
constexpr std::uint64_t kStreamShot = 5;

constexpr char kRecordMagic[] = "OPOREC1\n";

void fill_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t block,
                 std::span<double> out) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(block), hi(block)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(engine);
}

// Runs `jobs` either inline or on std::async, always in a fixed order of
// results so output never depends on scheduling.
void run_jobs(std::vector<std::function<void()>>& jobs) {
  if (std::thread::hardware_concurrency() <= 1 || jobs.size() <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(jobs.size());
  for (auto& job : jobs) futures.push_back(std::async(std::launch::async, job));
  for (auto& f : futures) f.get();
}

std::size_t next_pow2(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 1)); }

// Smallest 2^a 3^b 5^c >= n (sizes the FFT handles without a slow radix).
std::size_t next_smooth(std::size_t n) {
  std::size_t best = next_pow2(n);
  for (std::size_t p5 = 1; p5 < best; p5 *= 5)
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v *= 2;
      best = std::min(best, v);
    }
  return best;
}

// FIR with history carried across blocks.
class StreamingFir {
 public:
  explicit StreamingFir(std::vector<double> taps)
      : taps_(std::move(taps)), history_(taps_.size(), 0.0) {}

  double step(double x) {
    history_[head_] = x;
    double acc = 0.0;
    std::size_t idx = head_;
    for (double t : taps_) {
      acc += t * history_[idx];
      idx = idx == 0 ? history_.size() - 1 : idx - 1;
    }
    head_ = (head_ + 1) % history_.size();
    return acc;
  }

 private:
  std::vector<double> taps_;
  std::vector<double> history_;
  std::size_t head_ = 0;
};

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

double power_response(const AnalogSection& section, double omega) {
  const double w2 = omega * omega;
  return (w2 + section.zero * section.zero) / (w2 + section.pole * section.pole);
}

QuadratureFilters quadrature_filters(double gamma, double xi, double rho) {
  if (!(gamma > 0.0)) throw InvalidArgument("cavity decay rate must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) throw InvalidArgument("xi must lie in [0, 1)");
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("escape efficiency must lie in (0, 1]");
  const double gain = 4.0 * xi * rho * gamma * gamma;
  QuadratureFilters f;
  f.squeezed.pole = gamma * (1.0 + xi);
  // (1 + xi)^2 >= 4 xi >= 4 xi rho, so the radicand is nonnegative.
  f.squeezed.zero = std::sqrt(std::max(0.0, f.squeezed.pole * f.squeezed.pole - gain));
  f.antisqueezed.pole = gamma * (1.0 - xi);
  f.antisqueezed.zero = std::sqrt(f.antisqueezed.pole * f.antisqueezed.pole + gain);
  return f;
}

FirstOrderIir FirstOrderIir::bilinear(const AnalogSection& section, double sample_rate,
                                      double prewarp_hz) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  if (!(prewarp_hz > 0.0 && prewarp_hz < 0.5 * sample_rate))
    throw InvalidArgument("prewarp frequency must lie in (0, fs/2)");
  const double w0 = 2.0 * M_PI * prewarp_hz;
  const double k = w0 / std::tan(w0 / (2.0 * sample_rate));
  const double norm = k + section.pole;
  return FirstOrderIir((k + section.zero) / norm, (section.zero - k) / norm,
                       (section.pole - k) / norm);
}

FirstOrderIir FirstOrderIir::highpass(double cutoff_hz, double sample_rate) {
  return bilinear(AnalogSection{0.0, 2.0 * M_PI * cutoff_hz}, sample_rate, cutoff_hz);
}

std::complex<double> FirstOrderIir::response(double f, double sample_rate) const {
  const std::complex<double> zinv = std::polar(1.0, -2.0 * M_PI * f / sample_rate);
  return (b0_ + b1_ * zinv) / (1.0 + a1_ * zinv);
}

void TraceConfig::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw InvalidArgument("sample rate must be positive");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  if (sample_count() < (std::size_t{1} << 16))
    throw InvalidArgument("record must contain at least 2^16 samples");
  if (!std::isfinite(lock_angle)) throw InvalidArgument("lock angle must be finite");
  if (phase_jitter_rms && !(*phase_jitter_rms >= 0.0 && *phase_jitter_rms < M_PI / 2))
    throw InvalidArgument("phase jitter must lie in [0, pi/2)");
  if (!(jitter_correlation_time > 0.0))
    throw InvalidArgument("jitter correlation time must be positive");
  if (!(highpass_cutoff >= 0.0 && highpass_cutoff < 0.5 * sample_rate))
    throw InvalidArgument("high-pass cutoff must lie in [0, fs/2)");
  if (block_size == 0) throw InvalidArgument("block size must be positive");
}

std::size_t TraceConfig::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void AnalyzerConfig::validate() const {
  if (!(rbw > 0.0)) throw InvalidArgument("resolution bandwidth must be positive");
  if (!(vbw > 0.0)) throw InvalidArgument("video bandwidth must be positive");
  if (n_averages < 1) throw InvalidArgument("at least one average is required");
  if (!(f_min >= 0.0 && f_max > f_min)) throw InvalidArgument("analyzer span must satisfy 0 <= f_min < f_max");
}

void validate(const TraceConfig& trace, const AnalyzerConfig& analyzer) {
  trace.validate();
  analyzer.validate();
  if (!(trace.sample_rate > 4.0 * analyzer.f_max))
    throw InvalidArgument("sample rate must exceed four times the highest analysis frequency");
}

Eigen::VectorXd white_noise(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                            std::size_t block_size) {
  if (block_size == 0) throw InvalidArgument("block size must be positive");
  Eigen::VectorXd out(static_cast<Eigen::Index>(count));
  const std::size_t blocks = (count + block_size - 1) / block_size;
  std::vector<std::function<void()>> jobs;
  for (std::size_t b = 0; b < blocks; ++b) {
    jobs.emplace_back([&, b] {
      const std::size_t begin = b * block_size;
      const std::size_t len = std::min(block_size, count - begin);
      fill_normal(seed, stream, b, std::span<double>(out.data() + begin, len));
    });
  }
  run_jobs(jobs);
  return out;
}

Eigen::VectorXd phase_jitter(std::uint64_t seed, std::size_t count, double sample_rate,
                             double rms, double correlation_time, std::size_t block_size) {
  Eigen::VectorXd theta = white_noise(seed, kStreamJitter, count, block_size);
  if (count == 0) return theta;
  const double a = std::exp(-1.0 / (sample_rate * correlation_time));
  const double drive = rms * std::sqrt(1.0 - a * a);
  theta(0) *= rms;
  for (Eigen::Index i = 1; i < theta.size(); ++i) theta(i) = a * theta(i - 1) + drive * theta(i);
  return theta;
}

std::vector<double> minimum_phase_fir(const std::function<double(double)>& magnitude,
                                      double sample_rate, std::size_t taps) {
  if (taps == 0) throw InvalidArgument("FIR needs at least one tap");
  const std::size_t nfft = next_pow2(std::max<std::size_t>(1024, 16 * taps));
  std::vector<std::complex<double>> log_mag(nfft), cepstrum(nfft), spectrum(nfft), impulse(nfft);
  for (std::size_t k = 0; k < nfft; ++k) {
    const std::size_t mirrored = k <= nfft / 2 ? k : nfft - k;
    const double f = sample_rate * static_cast<double>(mirrored) / static_cast<double>(nfft);
    log_mag[k] = std::log(std::max(magnitude(f), 1e-12));
  }
  Eigen::FFT<double> fft;
  fft.inv(cepstrum, log_mag);
  // Fold the real cepstrum onto positive quefrencies.
  for (std::size_t k = 0; k < nfft; ++k) {
    double c = cepstrum[k].real();
    if (k == 0 || k == nfft / 2) {
    } else if (k < nfft / 2) {
      c *= 2.0;
    } else {
      c = 0.0;
    }
    cepstrum[k] = c;
  }
  fft.fwd(spectrum, cepstrum);
  for (auto& s : spectrum) s = std::exp(s);
  fft.inv(impulse, spectrum);
  std::vector<double> h(taps);
  for (std::size_t i = 0; i < taps; ++i) h[i] = impulse[i].real();
  return h;
}

Eigen::VectorXd fir_filter(std::span<const double> taps, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    const auto kmax = std::min<Eigen::Index>(static_cast<Eigen::Index>(taps.size()) - 1, n);
    for (Eigen::Index k = 0; k <= kmax; ++k) acc += taps[static_cast<std::size_t>(k)] * x(n - k);
    y(n) = acc;
  }
  return y;
}

HomodyneRecord generate_trace(const OpoParams& opo, const DetectionChain& chain,
                              const TraceConfig& config) {
  opo.validate();
  chain.validate();
  config.validate();
  if (!(opo.f_hwhm < 0.5 * config.sample_rate))
    throw InvalidArgument("cavity linewidth must lie below the Nyquist frequency");

  const std::size_t n = config.sample_count();
  const std::size_t block = config.block_size;
  const double fs = config.sample_rate;
  const auto filters =
      quadrature_filters(2.0 * M_PI * opo.f_hwhm, opo.normalized_pump(), opo.escape_efficiency());
  FirstOrderIir squeezed = FirstOrderIir::bilinear(filters.squeezed, fs, opo.f_hwhm);
  FirstOrderIir antisqueezed = FirstOrderIir::bilinear(filters.antisqueezed, fs, opo.f_hwhm);
  std::optional<FirstOrderIir> highpass;
  if (config.highpass_cutoff > 0.0) highpass = FirstOrderIir::highpass(config.highpass_cutoff, fs);

  const double theta_rms = config.phase_jitter_rms.value_or(chain.phase_jitter_rms);
  const double jitter_a = std::exp(-1.0 / (fs * config.jitter_correlation_time));
  const double jitter_drive = theta_rms * std::sqrt(1.0 - jitter_a * jitter_a);
  double theta = 0.0;

  // Detection efficiency: scalar when flat, minimum-phase FIR pair otherwise.
  const bool flat_efficiency = chain.electronic_loss.is_constant();
  const double eta = chain.efficiency(0.0);
  const double signal_gain = std::sqrt(eta);
  const double vacuum_gain = std::sqrt(1.0 - eta);
  std::optional<StreamingFir> signal_fir, vacuum_fir;
  if (!flat_efficiency) {
    constexpr std::size_t kTaps = 129;
    signal_fir.emplace(minimum_phase_fir(
        [&](double f) { return std::sqrt(chain.efficiency(f)); }, fs, kTaps));
    vacuum_fir.emplace(minimum_phase_fir(
        [&](double f) { return std::sqrt(1.0 - chain.efficiency(f)); }, fs, kTaps));
  }

  const double lock_sin = std::sin(config.lock_angle);
  const double lock_cos = std::cos(config.lock_angle);

  HomodyneRecord record;
  record.samples.resize(static_cast<Eigen::Index>(n));
  record.sample_rate = fs;
  record.seed = config.seed;
  record.highpass_cutoff = config.highpass_cutoff;
  record.params_hash = params_hash(opo, chain, config);

  std::vector<double> x(block), p(block), v(block), w(block);
  const std::size_t blocks = (n + block - 1) / block;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t begin = b * block;
    const std::size_t len = std::min(block, n - begin);
    std::vector<std::function<void()>> jobs{
        [&] { fill_normal(config.seed, kStreamAntisqueezed, b, std::span(x.data(), len)); },
        [&] { fill_normal(config.seed, kStreamSqueezed, b, std::span(p.data(), len)); },
        [&] { fill_normal(config.seed, kStreamDetectionVacuum, b, std::span(v.data(), len)); }};
    if (theta_rms > 0.0)
      jobs.emplace_back([&] { fill_normal(config.seed, kStreamJitter, b, std::span(w.data(), len)); });
    run_jobs(jobs);

    for (std::size_t i = 0; i < len; ++i) {
      const double xa = antisqueezed.step(x[i]);
      const double ps = squeezed.step(p[i]);
      double q;
      if (theta_rms > 0.0) {
        theta = (begin + i == 0) ? theta_rms * w[i] : jitter_a * theta + jitter_drive * w[i];
        const double angle = config.lock_angle + theta;
        q = xa * std::sin(angle) + ps * std::cos(angle);
      } else {
        q = xa * lock_sin + ps * lock_cos;
      }
      double detected = flat_efficiency ? signal_gain * q + vacuum_gain * v[i]
                                        : signal_fir->step(q) + vacuum_fir->step(v[i]);
      if (highpass) detected = highpass->step(detected);
      record.samples(static_cast<Eigen::Index>(begin + i)) = detected;
    }
  }
  return record;
}

HomodyneRecord generate_shot_record(const TraceConfig& config) {
  config.validate();
  HomodyneRecord record;
  record.samples = white_noise(config.seed, kStreamShot, config.sample_count(), config.block_size);
  if (config.highpass_cutoff > 0.0) {
    FirstOrderIir hp = FirstOrderIir::highpass(config.highpass_cutoff, config.sample_rate);
    hp.filter(std::span<double>(record.samples.data(), static_cast<std::size_t>(record.samples.size())));
  }
  record.sample_rate = config.sample_rate;
  record.seed = config.seed;
  record.highpass_cutoff = config.highpass_cutoff;
  record.params_hash = "shot";
  return record;
}

double equivalent_noise_bandwidth(const Eigen::ArrayXd& window, double sample_rate) {
  const double sum = window.sum();
  return sample_rate * window.square().sum() / (sum * sum);
}

Eigen::ArrayXd gaussian_window(std::size_t n, double rbw, double sample_rate) {
  if (n < 2) throw InvalidArgument("window needs at least two samples");
  if (!(rbw > sample_rate / static_cast<double>(n)))
    throw InvalidArgument("resolution bandwidth is narrower than the segment allows");
  const double center = 0.5 * static_cast<double>(n - 1);
  auto window = [&](double sigma) {
    return Eigen::ArrayXd::NullaryExpr(static_cast<Eigen::Index>(n), [&](Eigen::Index i) {
      const double t = (static_cast<double>(i) - center) / sigma;
      return std::exp(-0.5 * t * t);
    }).eval();
  };
  // ENBW falls monotonically with sigma; bisect in log space.
  double lo = std::log(0.25), hi = std::log(100.0 * static_cast<double>(n));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (equivalent_noise_bandwidth(window(std::exp(mid)), sample_rate) > rbw)
      lo = mid;
    else
      hi = mid;
  }
  return window(std::exp(0.5 * (lo + hi)));
}

std::size_t segment_length_for_rbw(double rbw, double sample_rate) {
  if (!(rbw > 0.0) || !(sample_rate > 0.0))
    throw InvalidArgument("resolution bandwidth and sample rate must be positive");
  const double sigma = sample_rate / (2.0 * std::sqrt(M_PI) * rbw);
  return next_smooth(std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(8.0 * sigma))));
}

Eigen::ArrayXd periodogram(std::span<const double> segment, const Eigen::ArrayXd& window,
                           double sample_rate) {
  const std::size_t n = segment.size();
  if (static_cast<std::size_t>(window.size()) != n || n < 2)
    throw InvalidArgument("segment and window lengths differ");
  std::vector<double> buffer(n);
  for (std::size_t i = 0; i < n; ++i) buffer[i] = segment[i] * window(static_cast<Eigen::Index>(i));
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(spectrum, buffer);
  const double scale = 1.0 / (sample_rate * window.square().sum());
  const std::size_t bins = n / 2 + 1;
  Eigen::ArrayXd psd(static_cast<Eigen::Index>(bins));
  for (std::size_t k = 0; k < bins; ++k) {
    const double one_sided = (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
    psd(static_cast<Eigen::Index>(k)) = one_sided * scale * std::norm(spectrum[k]);
  }
  return psd;
}

std::size_t required_samples(const AnalyzerConfig& config, double sample_rate) {
  config.validate();
  const std::size_t per_sweep = std::max<long>(1, std::lround(config.rbw / config.vbw));
  return segment_length_for_rbw(config.rbw, sample_rate) * per_sweep * config.n_averages;
}

NoiseSpectrum analyze_spectrum(const HomodyneRecord& record, const HomodyneRecord& shot_record,
                               const AnalyzerConfig& config) {
  config.validate();
  if (record.sample_rate != shot_record.sample_rate ||
      record.samples.size() != shot_record.samples.size())
    throw InvalidArgument("record and shot record must share length and sample rate");
  const double fs = record.sample_rate;
  const std::size_t seg = segment_length_for_rbw(config.rbw, fs);
  const auto total = static_cast<std::size_t>(record.samples.size());
  if (total < seg) throw InvalidArgument("record is shorter than one RBW segment");

  const Eigen::ArrayXd window = gaussian_window(seg, config.rbw, fs);
  std::size_t per_sweep = std::max<long>(1, std::lround(config.rbw / config.vbw));
  const std::size_t available = total / seg;
  std::size_t sweeps = std::min(config.n_averages, available / per_sweep);
  if (sweeps == 0) {
    sweeps = 1;
    per_sweep = available;
  }

  std::vector<Eigen::Index> bins;
  for (std::size_t k = 0; k <= seg / 2; ++k) {
    const double f = fs * static_cast<double>(k) / static_cast<double>(seg);
    if (f >= config.f_min && f <= config.f_max) bins.push_back(static_cast<Eigen::Index>(k));
  }
  if (bins.empty()) throw InvalidArgument("analyzer span contains no frequency bins");

  auto accumulate = [&](const HomodyneRecord& r) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(seg / 2 + 1));
    for (std::size_t s = 0; s < sweeps; ++s) {
      Eigen::ArrayXd sweep = Eigen::ArrayXd::Zero(acc.size());
      for (std::size_t j = 0; j < per_sweep; ++j) {
        const std::size_t begin = (s * per_sweep + j) * seg;
        sweep += periodogram(std::span<const double>(r.samples.data() + begin, seg), window, fs);
      }
      sweep /= static_cast<double>(per_sweep);
      acc += config.log_average ? sweep.log10().eval() : sweep;
    }
    return (acc / static_cast<double>(sweeps)).eval();
  };
  const Eigen::ArrayXd signal = accumulate(record);
  const Eigen::ArrayXd shot = accumulate(shot_record);

  NoiseSpectrum out;
  const auto m = static_cast<Eigen::Index>(bins.size());
  out.frequencies.resize(m);
  out.values.resize(m);
  out.reliable.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = bins[static_cast<std::size_t>(i)];
    out.frequencies(i) = fs * static_cast<double>(k) / static_cast<double>(seg);
    out.values(i) = config.log_average ? std::pow(10.0, signal(k) - shot(k)) : signal(k) / shot(k);
    out.reliable(i) = record.highpass_cutoff <= 0.0 || out.frequencies(i) >= kHighpassReliableAbove;
  }
  out.averages = sweeps * per_sweep;
  return out;
}

std::string params_hash(const OpoParams& opo, const DetectionChain& chain,
                        const TraceConfig& config) {
  std::ostringstream text;
  text.precision(17);
  text << opo.transmissivity << ' ' << opo.internal_loss << ' ' << opo.f_hwhm << ' '
       << opo.pump_power << ' ' << opo.threshold_power << ' ' << chain.propagation_loss << ' '
       << chain.homodyne_visibility << ' ' << chain.photodiode_efficiency << ' '
       << chain.phase_jitter_rms << ' ';
  for (std::size_t i = 0; i < chain.electronic_loss.frequencies().size(); ++i)
    text << chain.electronic_loss.frequencies()[i] << ':' << chain.electronic_loss.losses()[i] << ' ';
  text << config.sample_rate << ' ' << config.duration << ' ' << config.seed << ' '
       << config.lock_angle << ' ' << config.phase_jitter_rms.value_or(-1.0) << ' '
       << config.jitter_correlation_time << ' ' << config.highpass_cutoff << ' '
       << config.block_size;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(text.str())));
  return hex;
}

void write_record(const HomodyneRecord& record, std::ostream& out) {
  nlohmann::json header = {{"sample_rate_hz", record.sample_rate},
                           {"seed", record.seed},
                           {"params_hash", record.params_hash},
                           {"highpass_cutoff_hz", record.highpass_cutoff},
                           {"count", record.samples.size()},
                           {"encoding", "float64-le"}};
  out.write(kRecordMagic, sizeof kRecordMagic - 1);
  const std::string line = header.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.write(reinterpret_cast<const char*>(record.samples.data()),
            static_cast<std::streamsize>(record.samples.size() * sizeof(double)));
  if (!out) throw ConfigError("failed to write homodyne record");
}

HomodyneRecord read_record(std::istream& in) {
  char magic[sizeof kRecordMagic - 1];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kRecordMagic, sizeof magic) != 0)
    throw ConfigError("not a homodyne record file");
  std::string line;
  std::getline(in, line);
  HomodyneRecord record;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    record.sample_rate = header.at("sample_rate_hz").get<double>();
    record.seed = header.at("seed").get<std::uint64_t>();
    record.params_hash = header.at("params_hash").get<std::string>();
    record.highpass_cutoff = header.at("highpass_cutoff_hz").get<double>();
    count = header.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed record header: ") + e.what());
  }
  record.samples.resize(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(record.samples.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ConfigError("homodyne record is truncated");
  return record;
}

}  // namespace opo
