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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "opo/fitting.hpp"
#include "opo/gaussian_cavity.hpp"
#include "opo/homodyne_sim.hpp"
#include "opo/squeezing_model.hpp"
#include "oracle.hpp"

namespace {

using namespace opo;

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

OpoParams default_opo() {
  OpoParams o;
  o.transmissivity = 0.146;
  o.internal_loss = 0.0030;
  o.f_hwhm = 65e6;
  o.pump_power = 0.225;
  o.threshold_power = 0.490;
  return o;
}

DetectionChain default_chain() {
  DetectionChain c;
  c.propagation_loss = 0.034;
  c.homodyne_visibility = 0.991;
  c.photodiode_efficiency = 0.98;
  c.electronic_loss = ElectronicLossTable::from_snr({0.0, 200e6}, {20.0, 20.0});
  c.phase_jitter_rms = 0.8 * M_PI / 180.0;
  return c;
}

Outcome linewidth_check() {
  const double f = linewidth(0.146, 53e-3).f_hwhm;
  const double ref = oracle::hwhm(0.146, 53e-3);
  const bool ok = f >= 64.0e6 && f <= 66.5e6 && std::abs(f - ref) < 1.0;
  return {ok, fmt("f_HWHM = %.3f MHz (window [64.0, 66.5])", f * 1e-6)};
}

Outcome waist_crossing_check() {
  const CavityLayout layout = triangle_ring_layout();
  const double d = find_circular_waist_distance(layout, 20e-3, 24e-3);
  const auto rows = waist_scan(layout, distance_grid(20e-3, 24e-3, 0.01e-3));
  const auto crossings = waist_crossings(rows);
  // Oracle: bisection on the closed-form waists.
  auto diff = [](double x) {
    return oracle::ring_axis(x, 11.5e-3, 15e-3, 10, true).waist -
           oracle::ring_axis(x, 11.5e-3, 15e-3, 10, false).waist;
  };
  double lo = 21e-3, hi = 24e-3;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (diff(lo) * diff(mid) <= 0 ? hi : lo) = mid;
  }
  const bool ok = d >= 22.2e-3 && d <= 23.2e-3 && crossings.size() == 1 &&
                  std::abs(d - 0.5 * (lo + hi)) < 1e-6;
  return {ok, fmt("d* = %.4f mm (window [22.2, 23.2]), %zu crossing(s) in [20, 24] mm", d * 1e3,
                  crossings.size())};
}

Outcome mode_match_check() {
  const CavityLayout layout = triangle_ring_layout().with_mirror_distance(22.0e-3);
  const double eff = best_circular_match(output_mode(layout)).efficiency;
  return {eff >= 0.995, fmt("overlap = %.6f (>= 0.995)", eff)};
}

Outcome squeezing_3mhz_check() {
  const auto s = predicted_spectrum(default_opo(), default_chain(), Eigen::ArrayXd::Constant(1, 3e6));
  const double v = to_db(s.squeezed.values(0));
  const double ref = oracle::db(oracle::squeezing(std::sqrt(225.0 / 490.0),
                                                  oracle::budget_eta() * oracle::budget_rho(),
                                                  3.0 / 65.0, 0.8 * M_PI / 180)
                                    .minus);
  const bool ok = v >= -9.2 && v <= -8.0 && std::abs(v - ref) < 1e-9;
  return {ok, fmt("squeezing at 3 MHz = %.3f dB (window [-9.2, -8.0])", v)};
}

Outcome squeezing_100mhz_check() {
  const auto s = predicted_spectrum(default_opo(), default_chain(), Eigen::ArrayXd::Constant(1, 100e6));
  const double v = to_db(s.squeezed.values(0));
  const double ref = oracle::db(oracle::squeezing(std::sqrt(225.0 / 490.0),
                                                  oracle::budget_eta() * oracle::budget_rho(),
                                                  100.0 / 65.0, 0.8 * M_PI / 180)
                                    .minus);
  const bool ok = v >= -3.1 && v <= -2.2 && std::abs(v - ref) < 1e-9;
  return {ok, fmt("squeezing at 100 MHz = %.3f dB (window [-3.1, -2.2])", v)};
}

Outcome optimum_check() {
  const SqueezingOptimum opt = optimal_squeezing(default_opo(), default_chain(), 0.0);
  double best = 0.0;
  for (int i = 1; i < 100000; ++i) {
    const double xi = i / 100000.0;
    best = std::min(best, oracle::db(oracle::squeezing(xi, oracle::budget_eta() * oracle::budget_rho(),
                                                       0.0, 0.8 * M_PI / 180)
                                         .minus));
  }
  const bool ok = std::abs(-opt.squeezing_db - 9.0) <= 0.4 && std::abs(opt.squeezing_db - best) < 1e-3;
  return {ok, fmt("optimum = %.3f dB at xi = %.3f (target 9.0 +/- 0.4 dB)", opt.squeezing_db, opt.xi)};
}

Outcome escape_check() {
  const double rho = escape_efficiency(0.146, 0.0030);
  return {std::abs(rho - 0.980) <= 0.001, fmt("rho = %.5f (0.980 +/- 0.001)", rho)};
}

Outcome electronic_loss_check() {
  const double l = electronic_loss_from_snr(20.0);
  return {std::abs(l - 0.01) < 1e-12, fmt("SNR 20 dB -> loss = %.4f%%", l * 100)};
}

// Trace and analyzer settings shared by the simulation checks.
TraceConfig sim_trace(std::uint64_t seed) {
  TraceConfig t;
  t.sample_rate = 2e9;
  t.seed = seed;
  t.jitter_correlation_time = 1e-6;
  t.highpass_cutoff = 300e3;
  return t;
}

AnalyzerConfig sim_analyzer() {
  AnalyzerConfig a;
  a.rbw = 2e6;
  a.vbw = 2e6;
  a.n_averages = 20000;
  a.f_min = 1e6;
  a.f_max = 200e6;
  return a;
}

Outcome oracle_equivalence_check() {
  const AnalyzerConfig analyzer = sim_analyzer();
  TraceConfig trace = sim_trace(7);
  trace.duration = double(required_samples(analyzer, trace.sample_rate)) / trace.sample_rate;
  const HomodyneRecord shot = generate_shot_record(trace);

  double worst = 0.0;
  std::size_t min_averages = SIZE_MAX;
  std::string worst_case;
  int cases = 0;
  for (double xi : {0.0, 0.3, 0.68, 0.9}) {
    for (double theta_deg : {0.0, 0.8, 5.0}) {
      OpoParams opo = default_opo();
      opo.pump_power = xi * xi * opo.threshold_power;
      DetectionChain chain = default_chain();
      chain.phase_jitter_rms = theta_deg * M_PI / 180.0;
      trace.seed = 100 + static_cast<std::uint64_t>(cases++);
      const NoiseSpectrum s = analyze_spectrum(generate_trace(opo, chain, trace), shot, analyzer);
      min_averages = std::min(min_averages, s.averages);
      const double eta_rho = oracle::budget_eta() * oracle::budget_rho();
      for (Eigen::Index i = 0; i < s.frequencies.size(); ++i) {
        const double f = s.frequencies(i);
        if (f < 1e6 || f > 200e6) continue;
        const double ref =
            oracle::db(oracle::squeezing(xi, eta_rho, f / 65e6, theta_deg * M_PI / 180).minus);
        const double err = std::abs(to_db(s.values(i)) - ref);
        if (err > worst) {
          worst = err;
          worst_case = fmt("xi=%.2f theta=%.1f f=%.1f MHz", xi, theta_deg, f * 1e-6);
        }
      }
    }
  }
  const bool ok = worst <= 0.3 && min_averages >= 20000;
  return {ok, fmt("12 cases, %zu averages, max |error| = %.3f dB (%s) (<= 0.3)", min_averages, worst,
                  worst_case.c_str())};
}

Outcome fit_recovery_check() {
  const OpoParams truth = default_opo();
  const DetectionChain chain = default_chain();
  const double eta_rho = chain.efficiency(0.0) * truth.escape_efficiency();
  const double theta = chain.phase_jitter_rms;
  const double xi_true = truth.normalized_pump();
  constexpr double kNoiseDb = 0.1;
  constexpr int kSeeds = 100;

  int passed = 0;
  double worst_xi = 0, worst_f = 0, worst_p = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(20261015u + static_cast<unsigned>(seed));
    std::normal_distribution<double> noise(0.0, kNoiseDb);

    // Spectrum: 1 to 199 MHz in 2 MHz steps, both quadratures.
    SpectrumData data;
    const Eigen::Index n = 100;
    data.frequencies = Eigen::ArrayXd::LinSpaced(n, 1e6, 199e6);
    data.squeezed_db.resize(n);
    data.antisqueezed_db.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = oracle::squeezing(xi_true, eta_rho, data.frequencies(i) / truth.f_hwhm, theta);
      data.squeezed_db(i) = oracle::db(v.minus) + noise(rng);
      data.antisqueezed_db(i) = oracle::db(v.plus) + noise(rng);
    }
    data.mask = default_mask(data.frequencies);
    FitProblem problem = standard_problem(truth, chain);
    const FitResult fit = fit_spectrum(data, problem);
    const double e_xi = std::abs(fit.estimates.at(ModelParameter::xi) / xi_true - 1);
    const double e_f = std::abs(fit.estimates.at(ModelParameter::f_hwhm) / truth.f_hwhm - 1);

    // Pump sweep at 3 MHz, 25 to 400 mW.
    std::vector<PumpPoint> points;
    for (int k = 1; k <= 16; ++k) {
      const double p = 0.025 * k;
      const auto v = oracle::squeezing(std::sqrt(p / truth.threshold_power), eta_rho,
                                       3e6 / truth.f_hwhm, theta);
      points.push_back({p, oracle::db(v.minus) + noise(rng), oracle::db(v.plus) + noise(rng)});
    }
    ThresholdModel model;
    model.f_hwhm = truth.f_hwhm;
    model.efficiency = chain.efficiency(3e6);
    model.escape_efficiency = truth.escape_efficiency();
    model.phase_jitter = theta;
    model.f_probe = 3e6;
    const double e_p =
        std::abs(estimate_threshold(points, model).threshold_power / truth.threshold_power - 1);

    worst_xi = std::max(worst_xi, e_xi);
    worst_f = std::max(worst_f, e_f);
    worst_p = std::max(worst_p, e_p);
    if (fit.converged && e_xi <= 0.02 && e_f <= 0.02 && e_p <= 0.02) ++passed;
  }
  return {passed >= 95, fmt("%d/%d seeds within 2%% (worst xi %.2f%%, f %.2f%%, P_th %.2f%%)",
                            passed, kSeeds, worst_xi * 100, worst_f * 100, worst_p * 100)};
}

Outcome invariants_check() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  double worst_det = 0, worst_self = 0, worst_sum = 0;

  // Ray-matrix determinant and eigenmode self-consistency on random rings.
  for (int i = 0; i < 500; ++i) {
    TriangleRingDesign design;
    design.mirror_distance = 15e-3 + 15e-3 * u(rng);
    design.short_edge = 5e-3 + 15e-3 * u(rng);
    design.mirror_radius = 10e-3 + 40e-3 * u(rng);
    design.curved_aoi = 30.0 * M_PI / 180.0 * u(rng);
    const CavityLayout layout = triangle_ring_layout(design);
    for (TransversePlane plane : kTransversePlanes) {
      const auto m = roundtrip_matrix(layout, plane);
      worst_det = std::max(worst_det, std::abs(m.determinant() - 1));
      const double h = stability_parameter(m);
      if (!is_stable(h)) continue;
      const AxisMode mode = eigenmode(layout, plane);
      const std::complex<double> q_reduced = mode.q / layout.reference_index();
      const auto q2 = transform_q(m, q_reduced);
      worst_self = std::max(worst_self, std::abs(q2 - q_reduced) / std::abs(q_reduced));
    }
  }
  violations += worst_det > 1e-9;
  violations += worst_self > 1e-9;

  // R_minus <= 1 <= R_plus and phase-mixing sum preservation.
  for (int i = 0; i < 20000; ++i) {
    const double xi = 0.999 * u(rng);
    const double er = u(rng);
    const double fr = 5 * u(rng);
    const double th = 0.5 * M_PI * u(rng);
    const auto r = raw_variances(xi, er, fr);
    if (r.squeezed > 1.0 + 1e-15 || r.antisqueezed < 1.0 - 1e-15) ++violations;
    const auto m = apply_phase_noise(r, th);
    const double sum = r.squeezed + r.antisqueezed;
    worst_sum = std::max(worst_sum, std::abs(m.squeezed + m.antisqueezed - sum) / sum);
  }
  violations += worst_sum > 1e-12;

  // Shot normalization: a vacuum-only record analyzed against an independent
  // shot record is flat at 0 dB within the statistical bound.
  AnalyzerConfig analyzer = sim_analyzer();
  analyzer.n_averages = 2000;
  TraceConfig trace = sim_trace(3);
  trace.duration = double(required_samples(analyzer, trace.sample_rate)) / trace.sample_rate;
  OpoParams vacuum = default_opo();
  vacuum.pump_power = 0.0;
  DetectionChain chain = default_chain();
  chain.phase_jitter_rms = 0.0;
  TraceConfig shot_cfg = trace;
  shot_cfg.seed = 4;
  const NoiseSpectrum s =
      analyze_spectrum(generate_trace(vacuum, chain, trace), generate_shot_record(shot_cfg), analyzer);
  const Eigen::ArrayXd d = s.decibels();
  // Each ratio carries two independent estimates of 1/sqrt(K) relative error.
  const double sigma_db = 10 / std::log(10.0) * std::sqrt(2.0 / double(s.averages));
  const double mean = d.mean();
  const double max_dev = d.abs().maxCoeff();
  const bool flat = std::abs(mean) < 3 * sigma_db && max_dev < 6 * sigma_db;
  violations += !flat;

  return {violations == 0,
          fmt("det %.1e, self-consistency %.1e, sum %.1e, shot mean %.3f dB max %.3f dB (6 sigma %.3f)",
              worst_det, worst_self, worst_sum, mean, max_dev, 6 * sigma_db)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 linewidth", linewidth_check},
      {"2 waist crossing", waist_crossing_check},
      {"3 mode match", mode_match_check},
      {"4 squeezing at 3 MHz", squeezing_3mhz_check},
      {"5 squeezing at 100 MHz", squeezing_100mhz_check},
      {"6 pump-sweep optimum", optimum_check},
      {"7 escape efficiency", escape_check},
      {"8 electronic loss", electronic_loss_check},
      {"9 oracle equivalence", oracle_equivalence_check},
      {"10 fit recovery", fit_recovery_check},
      {"11 invariant suites", invariants_check},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
