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


#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "opo/squeezing_model.hpp"
#include "oracle.hpp"

using namespace opo;
using doctest::Approx;

namespace {

OpoParams default_opo() { return OpoParams{}; }

DetectionChain default_chain() {
  DetectionChain c;
  c.propagation_loss = 0.034;
  c.homodyne_visibility = 0.991;
  c.photodiode_efficiency = 0.98;
  c.electronic_loss = ElectronicLossTable::constant(0.01);
  c.phase_jitter_rms = 0.8 * M_PI / 180.0;
  return c;
}

}  // namespace

TEST_CASE("escape efficiency and normalized pump") {
  CHECK(escape_efficiency(0.146, 0.0030) == Approx(0.146 / 0.149));
  CHECK(escape_efficiency(0.1, 0.0) == 1.0);
  CHECK(escape_efficiency(0.02, 0.02) == Approx(0.5));
  CHECK_THROWS_AS(escape_efficiency(0.0, 0.0), InvalidArgument);

  CHECK(normalized_pump(0.225, 0.490) == Approx(0.6776).epsilon(1e-4));
  CHECK(normalized_pump(0.0, 0.490) == 0.0);
  CHECK(normalized_pump(0.490 / 4, 0.490) == Approx(0.5));
  CHECK_THROWS_AS(normalized_pump(0.5, 0.490), PhysicsError);
  CHECK_THROWS_AS(normalized_pump(0.490, 0.490), PhysicsError);

  OpoParams above = default_opo();
  above.pump_power = 0.6;
  CHECK_THROWS_AS(above.validate(), PhysicsError);
  OpoParams bad = default_opo();
  bad.transmissivity = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("electronic loss") {
  CHECK(electronic_loss_from_snr(20.0) == Approx(0.01));
  CHECK(electronic_loss_from_snr(10.0) == Approx(0.10));
  CHECK(electronic_loss_from_snr(300.0) < 1e-29);
  Eigen::ArrayXd snr(3);
  snr << 10, 20, 30;
  const Eigen::ArrayXd l = electronic_loss_from_snr(snr);
  CHECK(l(2) == Approx(1e-3));

  const ElectronicLossTable t({10e6, 100e6}, {0.01, 0.05});
  CHECK(t(0.0) == Approx(0.01));
  CHECK(t(55e6) == Approx(0.03));
  CHECK(t(1e9) == Approx(0.05));
  CHECK_FALSE(t.is_constant());
  CHECK(ElectronicLossTable::from_snr({0, 1e6}, {20, 20}).is_constant());
  CHECK_THROWS_AS(ElectronicLossTable({2e6, 1e6}, {0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(ElectronicLossTable({1e6}, {1.5}), InvalidArgument);
}

TEST_CASE("detection efficiency budget") {
  const DetectionChain c = default_chain();
  CHECK(total_efficiency(c, 0.0) == Approx(oracle::budget_eta()));
  CHECK(total_efficiency(c, 0.0) == Approx(0.920).epsilon(0.003));
  CHECK(total_efficiency(DetectionChain{}, 1e6) == 1.0);
  DetectionChain swamped = c;
  swamped.electronic_loss = ElectronicLossTable({0.0, 1e6}, {0.0, 1.0});
  CHECK(total_efficiency(swamped, 2e6) == 0.0);
  DetectionChain bad = c;
  bad.homodyne_visibility = 1.2;
  CHECK_THROWS_AS(total_efficiency(bad, 0.0), InvalidArgument);
  bad = c;
  bad.phase_jitter_rms = M_PI / 2;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("raw spectrum reference values") {
  const auto r0 = raw_variances(0.6776, 0.918 * 0.980, 0.0);
  CHECK(r0.squeezed == Approx(0.1336).epsilon(2e-3));
  CHECK(r0.antisqueezed == Approx(24.5).epsilon(2e-3));
  const auto r100 = raw_variances(0.6776, 0.918 * 0.980, 100.0 / 65.0);
  CHECK(r100.squeezed == Approx(0.529).epsilon(2e-3));
  const auto mixed = apply_phase_noise(r0, 0.8 * M_PI / 180);
  CHECK(mixed.squeezed == Approx(0.1384).epsilon(2e-3));
  const auto vacuum = raw_variances(0.0, 0.9, 0.3);
  CHECK(vacuum.squeezed == 1.0);
  CHECK(vacuum.antisqueezed == 1.0);
}

TEST_CASE("phase-noise mixing") {
  const VariancePair<double> r{0.2, 7.0};
  const auto same = apply_phase_noise(r, 0.0);
  CHECK(same.squeezed == r.squeezed);
  CHECK(same.antisqueezed == r.antisqueezed);
  const auto half = apply_phase_noise(r, M_PI / 4);
  CHECK(half.squeezed == Approx(3.6));
  CHECK(half.antisqueezed == Approx(3.6));
}

TEST_CASE("spectrum properties over random parameters") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    const double xi = 0.999 * u(rng);
    const double er = u(rng);
    const double fr = 10 * u(rng);
    const auto r = raw_variances(xi, er, fr);
    CHECK(r.squeezed <= 1.0);
    CHECK(r.antisqueezed >= 1.0);
    CHECK(r.squeezed > 0.0);
    if (xi > 1e-3 && er > 1e-3) {
      CHECK(r.squeezed < 1.0);
      CHECK(r.antisqueezed > 1.0);
    }
    // Monotone in xi and in eta*rho.
    const auto up = raw_variances(std::min(xi + 1e-3, 0.9995), er, fr);
    CHECK(up.squeezed < r.squeezed + 1e-15);
    CHECK(up.antisqueezed > r.antisqueezed - 1e-15);
    CHECK(raw_variances(xi, std::min(er + 1e-3, 1.0), fr).squeezed <= r.squeezed);
    // Threshold bound at DC.
    CHECK(raw_variances(xi, er, 0.0).squeezed >= 1.0 - er - 1e-12);
    // Mixing preserves the sum.
    const auto m = apply_phase_noise(r, 1.5 * u(rng));
    CHECK(m.squeezed + m.antisqueezed == Approx(r.squeezed + r.antisqueezed).epsilon(1e-12));
  }
  CHECK(raw_variances(0.99999, 0.8, 0.0).squeezed == Approx(1 - 0.8).epsilon(1e-4));
  const auto far = raw_variances(0.9, 0.95, 1e6);
  CHECK(std::abs(far.squeezed - 1) < 1e-6);
  CHECK(std::abs(far.antisqueezed - 1) < 1e-6);
}

TEST_CASE("decibel round trip") {
  for (double v : {1e-6, 0.1336, 1.0, 24.5, 3e5}) CHECK(from_db(to_db(v)) == Approx(v).epsilon(1e-12));
  Eigen::ArrayXd a(3);
  a << 0.5, 1.0, 2.0;
  CHECK(((from_db(to_db(a)) - a).abs() < 1e-12).all());
}

TEST_CASE("predicted spectrum with default parameters") {
  const OpoParams opo = default_opo();
  const DetectionChain chain = default_chain();
  Eigen::ArrayXd f(3);
  f << 0.0, 3e6, 100e6;
  const SpectrumPair s = predicted_spectrum(opo, chain, f);
  const double er = oracle::budget_eta() * oracle::budget_rho();
  const double xi = std::sqrt(0.225 / 0.490);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto ref = oracle::squeezing(xi, er, f(i) / 65e6, 0.8 * M_PI / 180);
    CHECK(s.squeezed.values(i) == Approx(ref.minus).epsilon(1e-12));
    CHECK(s.antisqueezed.values(i) == Approx(ref.plus).epsilon(1e-12));
  }
  CHECK(s.squeezed.decibels()(1) == Approx(-8.6).epsilon(0.1 / 8.6));
  CHECK(s.squeezed.decibels()(1) == Approx(-8.641).epsilon(1e-3));
  CHECK(s.antisqueezed.decibels()(1) == Approx(13.81).epsilon(1e-3));
  CHECK(s.squeezed.decibels()(2) == Approx(-2.770).epsilon(1e-3));
  CHECK(s.squeezed.label == SpectrumLabel::squeezed);
  CHECK(s.antisqueezed.label == SpectrumLabel::antisqueezed);

  OpoParams low = opo;
  low.pump_power = 0.050;
  const double dc = predicted_spectrum(low, chain, Eigen::ArrayXd::Zero(1)).squeezed.decibels()(0);
  CHECK(dc == Approx(-4.6).epsilon(0.15 / 4.6));

  OpoParams off = opo;
  off.pump_power = 0.0;
  const SpectrumPair flat = predicted_spectrum(off, chain, f);
  CHECK((flat.squeezed.decibels().abs() < 1e-12).all());
  CHECK((flat.antisqueezed.decibels().abs() < 1e-12).all());

  const NoiseSpectrum shot = shot_spectrum(f);
  CHECK((shot.values == 1.0).all());
  CHECK(shot.label == SpectrumLabel::shot);
}

TEST_CASE("pump sweep and optimum") {
  const OpoParams opo = default_opo();
  const DetectionChain chain = default_chain();
  const std::vector<double> pumps{0.0, 0.050, 0.225, 0.400};
  const auto rows = pump_sweep(opo, chain, 3e6, pumps);
  REQUIRE(rows.size() == pumps.size());
  CHECK(rows[0].squeezing_db == Approx(0.0).scale(1));
  CHECK(rows[2].xi == Approx(std::sqrt(0.225 / 0.490)));
  CHECK(rows[2].squeezing_db == Approx(-8.641).epsilon(1e-3));
  const std::vector<double> above{0.1, 0.5};
  CHECK_THROWS_AS(pump_sweep(opo, chain, 3e6, above), PhysicsError);

  const SqueezingOptimum opt = optimal_squeezing(opo, chain, 0.0);
  CHECK(opt.squeezing_db == Approx(-9.0906).epsilon(1e-4));
  CHECK(opt.xi == Approx(0.789).epsilon(2e-3));

  // Without jitter the squeezing deepens monotonically toward 1 - eta*rho.
  DetectionChain clean = chain;
  clean.phase_jitter_rms = 0.0;
  std::vector<double> xis;
  for (int i = 0; i <= 99; ++i) xis.push_back(i / 100.0);
  const auto sweep = xi_sweep(opo, clean, 0.0, xis);
  for (std::size_t i = 1; i < sweep.size(); ++i)
    CHECK(sweep[i].squeezing_db < sweep[i - 1].squeezing_db);
  const double floor_db = oracle::db(1 - oracle::budget_eta() * oracle::budget_rho());
  CHECK(sweep.back().squeezing_db > floor_db);
  CHECK(optimal_squeezing(opo, clean, 0.0).squeezing_db == Approx(floor_db).epsilon(1e-2));
}
