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


#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "opo/fitting.hpp"
#include "oracle.hpp"

using namespace opo;
using doctest::Approx;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Truth {
  double xi = std::sqrt(0.225 / 0.490);
  double f_hwhm = 65e6;
  double eta_rho = oracle::budget_eta() * oracle::budget_rho();
  double theta = 0.8 * M_PI / 180;
};

SpectrumData synthetic(const Truth& t, Eigen::Index bins, double noise_db, std::uint64_t seed,
                       bool squeezed = true, bool antisqueezed = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_db);
  SpectrumData d;
  d.frequencies = Eigen::ArrayXd::LinSpaced(bins, 0.1 * t.f_hwhm, 3.0 * t.f_hwhm);
  d.squeezed_db.resize(bins);
  d.antisqueezed_db.resize(bins);
  for (Eigen::Index i = 0; i < bins; ++i) {
    const auto v = oracle::squeezing(t.xi, t.eta_rho, d.frequencies(i) / t.f_hwhm, t.theta);
    d.squeezed_db(i) = squeezed ? oracle::db(v.minus) + noise(rng) : kNaN;
    d.antisqueezed_db(i) = antisqueezed ? oracle::db(v.plus) + noise(rng) : kNaN;
  }
  d.mask = default_mask(d.frequencies);
  return d;
}

FitProblem nominal_problem() {
  OpoParams opo;
  DetectionChain chain;
  chain.propagation_loss = 0.034;
  chain.homodyne_visibility = 0.991;
  chain.photodiode_efficiency = 0.98;
  chain.electronic_loss = ElectronicLossTable::constant(0.01);
  chain.phase_jitter_rms = 0.8 * M_PI / 180;
  return standard_problem(opo, chain);
}

}  // namespace

TEST_CASE("parameter names and default bounds") {
  for (auto p : {ModelParameter::xi, ModelParameter::threshold_power, ModelParameter::f_hwhm,
                 ModelParameter::efficiency, ModelParameter::escape_efficiency,
                 ModelParameter::internal_loss, ModelParameter::phase_jitter})
    CHECK(parse_model_parameter(to_string(p)) == p);
  CHECK_FALSE(parse_model_parameter("bogus").has_value());
  const ParameterSpec xi = default_spec(ModelParameter::xi, 0.5, true);
  CHECK(xi.lower == 0.0);
  CHECK(xi.upper < 1.0);
  const ParameterSpec th = default_spec(ModelParameter::threshold_power, 0.49, true, 0.225);
  CHECK(th.lower > 0.225);
}

TEST_CASE("problem validation") {
  FitProblem p = nominal_problem();
  CHECK_NOTHROW(p.validate());
  CHECK(p.free_count() == 4);
  FitProblem both = p;
  both.parameters[ModelParameter::threshold_power] =
      default_spec(ModelParameter::threshold_power, 0.49, false, 0.225);
  CHECK_THROWS_AS(both.validate(), InvalidArgument);
  FitProblem missing = p;
  missing.parameters.erase(ModelParameter::f_hwhm);
  CHECK_THROWS_AS(missing.validate(), InvalidArgument);
  FitProblem out_of_bounds = p;
  out_of_bounds.parameters[ModelParameter::xi].value = 1.5;
  CHECK_THROWS_AS(out_of_bounds.validate(), InvalidArgument);
}

TEST_CASE("default mask excludes the high-pass region") {
  Eigen::ArrayXd f(4);
  f << 0.2e6, 0.99e6, 1e6, 5e6;
  const auto m = default_mask(f);
  CHECK_FALSE(m(0));
  CHECK_FALSE(m(1));
  CHECK(m(2));
  CHECK(m(3));
}

TEST_CASE("noiseless round trip recovers the generating parameters") {
  const Truth t;
  const SpectrumData d = synthetic(t, 60, 0.0, 1);
  const FitResult r = fit_spectrum(d, nominal_problem());
  CHECK(r.converged);
  CHECK(r.estimates.at(ModelParameter::xi) == Approx(t.xi).epsilon(1e-3));
  CHECK(r.estimates.at(ModelParameter::f_hwhm) == Approx(t.f_hwhm).epsilon(1e-3));
  CHECK(r.estimates.at(ModelParameter::efficiency) == Approx(t.eta_rho).epsilon(1e-3));
  CHECK(r.estimates.at(ModelParameter::phase_jitter) == Approx(t.theta).epsilon(1e-2));
  CHECK(r.residual_rms < 1e-6);
  CHECK(r.residual_count == 120);

  // Same spectrum through the model evaluator.
  FitProblem truth = nominal_problem();
  truth.parameters[ModelParameter::xi].value = t.xi;
  truth.parameters[ModelParameter::efficiency].value = t.eta_rho;
  const SpectrumPair m = model_spectrum(truth, d.frequencies);
  CHECK(((m.squeezed.decibels() - d.squeezed_db).abs() < 1e-9).all());
}

TEST_CASE("accepted steps lower the objective monotonically") {
  const FitResult r = fit_spectrum(synthetic(Truth{}, 60, 0.1, 2), nominal_problem());
  REQUIRE(r.objective_history.size() >= 2);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i)
    CHECK(r.objective_history[i] < r.objective_history[i - 1]);
  CHECK(r.objective_history.back() == r.objective);
}

TEST_CASE("estimates stay within bounds") {
  FitProblem p = nominal_problem();
  p.parameters[ModelParameter::f_hwhm].upper = 50e6;
  p.parameters[ModelParameter::f_hwhm].value = 40e6;
  const FitResult r = fit_spectrum(synthetic(Truth{}, 60, 0.05, 3), p);
  for (const auto& [param, v] : r.estimates) {
    CHECK(v >= p.parameters.at(param).lower);
    CHECK(v <= p.parameters.at(param).upper);
  }
  CHECK(r.estimates.at(ModelParameter::f_hwhm) == Approx(50e6));
}

TEST_CASE("fit ignores bin order and masked bins") {
  const SpectrumData d = synthetic(Truth{}, 60, 0.1, 4);
  const FitResult base = fit_spectrum(d, nominal_problem());

  std::vector<Eigen::Index> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  SpectrumData shuffled = d;
  for (Eigen::Index i = 0; i < 60; ++i) {
    shuffled.frequencies(i) = d.frequencies(perm[std::size_t(i)]);
    shuffled.squeezed_db(i) = d.squeezed_db(perm[std::size_t(i)]);
    shuffled.antisqueezed_db(i) = d.antisqueezed_db(perm[std::size_t(i)]);
    shuffled.mask(i) = d.mask(perm[std::size_t(i)]);
  }
  const FitResult permuted = fit_spectrum(shuffled, nominal_problem());

  SpectrumData padded = d;
  const Eigen::Index n = 70;
  padded.frequencies.conservativeResize(n);
  padded.squeezed_db.conservativeResize(n);
  padded.antisqueezed_db.conservativeResize(n);
  padded.mask.conservativeResize(n);
  for (Eigen::Index i = 60; i < n; ++i) {
    padded.frequencies(i) = 0.5e6;
    padded.squeezed_db(i) = 5.0;
    padded.antisqueezed_db(i) = -5.0;
    padded.mask(i) = false;
  }
  const FitResult masked = fit_spectrum(padded, nominal_problem());

  for (const auto& [p, v] : base.estimates) {
    CHECK(permuted.estimates.at(p) == Approx(v).epsilon(1e-6));
    CHECK(masked.estimates.at(p) == Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("standard errors shrink as one over root N") {
  const FitResult small = fit_spectrum(synthetic(Truth{}, 50, 0.1, 5), nominal_problem());
  const FitResult large = fit_spectrum(synthetic(Truth{}, 800, 0.1, 6), nominal_problem());
  for (auto p : {ModelParameter::xi, ModelParameter::f_hwhm}) {
    const double ratio = small.standard_errors.at(p) / large.standard_errors.at(p);
    CHECK(ratio == Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("noisy fits recover xi, linewidth and jitter") {
  // 0.8 degrees sits below the jitter resolution of 0.1 dB data; 5 degrees does not.
  Truth t;
  t.theta = 5.0 * M_PI / 180;
  int ok = 0;
  constexpr int kSeeds = 20;
  for (int s = 0; s < kSeeds; ++s) {
    const FitResult r = fit_spectrum(synthetic(t, 60, 0.1, 100 + s), nominal_problem());
    const bool pass = std::abs(r.estimates.at(ModelParameter::xi) / t.xi - 1) <= 0.02 &&
                      std::abs(r.estimates.at(ModelParameter::f_hwhm) / t.f_hwhm - 1) <= 0.02 &&
                      std::abs(r.estimates.at(ModelParameter::phase_jitter) / t.theta - 1) <= 0.2;
    ok += pass;
  }
  CHECK(ok >= 18);
}

TEST_CASE("lumped efficiency on a single branch; separate factors are unidentifiable") {
  const Truth t;
  FitProblem p = nominal_problem();
  p.parameters[ModelParameter::phase_jitter].free = false;
  p.parameters[ModelParameter::phase_jitter].value = t.theta;
  const FitResult r = fit_spectrum(synthetic(t, 60, 0.0, 7, true, false), p);
  CHECK(r.converged);
  CHECK(r.estimates.at(ModelParameter::efficiency) == Approx(t.eta_rho).epsilon(1e-3));

  FitProblem both = nominal_problem();
  both.parameters[ModelParameter::escape_efficiency].free = true;
  CHECK_THROWS_AS(fit_spectrum(synthetic(t, 60, 0.0, 7, true, false), both), NumericalError);
}

TEST_CASE("threshold parametrization and too-small data sets") {
  const Truth t;
  FitProblem p = nominal_problem();
  p.parameters.erase(ModelParameter::xi);
  p.pump_power = 0.225;
  p.parameters[ModelParameter::threshold_power] =
      default_spec(ModelParameter::threshold_power, 0.6, true, 0.225);
  const FitResult r = fit_spectrum(synthetic(t, 60, 0.0, 8), p);
  CHECK(r.estimates.at(ModelParameter::threshold_power) == Approx(0.490).epsilon(1e-3));

  const SpectrumData tiny = synthetic(t, 3, 0.0, 9);
  CHECK_THROWS_AS(fit_spectrum(tiny, nominal_problem()), InvalidArgument);
  SpectrumData misaligned = synthetic(t, 10, 0.0, 9);
  misaligned.squeezed_db.conservativeResize(9);
  CHECK_THROWS_AS(misaligned.validate(), InvalidArgument);
}

TEST_CASE("linear residual space also recovers the parameters") {
  FitProblem p = nominal_problem();
  p.options.residual_space = ResidualSpace::linear;
  const FitResult r = fit_spectrum(synthetic(Truth{}, 60, 0.0, 10), p);
  CHECK(r.estimates.at(ModelParameter::xi) == Approx(Truth{}.xi).epsilon(1e-3));
}

namespace {

std::vector<PumpPoint> pump_points(double p_th, double noise_db, std::uint64_t seed,
                                   bool with_squeezing = true) {
  const Truth t;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_db);
  std::vector<PumpPoint> pts;
  for (int k = 1; k <= 12; ++k) {
    const double p = 0.03 * k;
    const auto v = oracle::squeezing(std::sqrt(p / p_th), t.eta_rho, 3e6 / t.f_hwhm, t.theta);
    pts.push_back({p, with_squeezing ? oracle::db(v.minus) + noise(rng) : kNaN,
                   oracle::db(v.plus) + noise(rng)});
  }
  return pts;
}

ThresholdModel nominal_threshold_model() {
  const Truth t;
  ThresholdModel m;
  m.f_hwhm = t.f_hwhm;
  m.efficiency = oracle::budget_eta();
  m.escape_efficiency = oracle::budget_rho();
  m.phase_jitter = t.theta;
  m.f_probe = 3e6;
  return m;
}

}  // namespace

TEST_CASE("threshold estimation") {
  const ThresholdModel model = nominal_threshold_model();
  const ThresholdEstimate exact = estimate_threshold(pump_points(0.490, 0.0, 1), model);
  CHECK(exact.threshold_power == Approx(0.490).epsilon(1e-6));
  CHECK(exact.residual_rms_db < 1e-6);
  CHECK(exact.residual_count == 24);

  const ThresholdEstimate noisy = estimate_threshold(pump_points(0.490, 0.1, 2), model);
  CHECK(noisy.threshold_power == Approx(0.490).epsilon(0.02));
  CHECK(noisy.standard_error > 0.0);
  CHECK(std::abs(noisy.threshold_power - 0.490) < 5 * noisy.standard_error);

  const ThresholdEstimate anti = estimate_threshold(pump_points(0.490, 0.1, 3, false), model);
  CHECK(anti.threshold_power == Approx(0.490).epsilon(0.02));
  CHECK(anti.residual_count == 12);

  const auto pts = pump_points(0.490, 0.0, 4);
  const std::vector<PumpPoint> two(pts.begin(), pts.begin() + 2);
  CHECK_THROWS_AS(estimate_threshold(two, model), InvalidArgument);
  std::vector<PumpPoint> swapped = pts;
  std::swap(swapped[3].squeezing_db, swapped[3].antisqueezing_db);
  CHECK_THROWS_AS(estimate_threshold(swapped, model), PhysicsError);
}
