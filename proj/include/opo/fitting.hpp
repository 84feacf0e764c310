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

#ifndef OPO_FITTING_HPP
#define OPO_FITTING_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "opo/squeezing_model.hpp"

namespace opo {

enum class ModelParameter {
  xi,
  threshold_power,
  f_hwhm,
  efficiency,
  escape_efficiency,
  internal_loss,
  phase_jitter,
};

std::string_view to_string(ModelParameter p);
std::optional<ModelParameter> parse_model_parameter(std::string_view name);

struct ParameterSpec {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool free = false;
};

/// Default bounds; threshold bounds scale with the pump power.
ParameterSpec default_spec(ModelParameter p, double value, bool free, double pump_power = 0.0);

enum class ResidualSpace { decibel, linear };

/// Measured or synthetic spectra. NaN marks a missing value in one branch.
struct SpectrumData {
  Eigen::ArrayXd frequencies;
  Eigen::ArrayXd squeezed_db;
  Eigen::ArrayXd antisqueezed_db;
  std::optional<Eigen::ArrayXd> shot_db;
  /// True for bins entering the residual.
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;

  void validate() const;
  std::size_t residual_count() const;
};

/// Excludes bins below `f_min` (the high-pass region).
Eigen::Array<bool, Eigen::Dynamic, 1> default_mask(const Eigen::ArrayXd& frequencies,
                                                   double f_min = 1e6);

struct FitOptions {
  ResidualSpace residual_space = ResidualSpace::decibel;
  int max_iterations = 200;
  int grid_points = 5;
  int max_starts = 625;
  double jacobian_step = 1e-6;
};

/// Exactly one of {xi, threshold_power} and one of {escape_efficiency,
/// internal_loss} must be present, plus f_hwhm, efficiency, phase_jitter.
struct FitProblem {
  std::map<ModelParameter, ParameterSpec> parameters;
  /// Needed when threshold_power parametrizes the pump.
  double pump_power = 0.0;
  /// Needed when internal_loss parametrizes the escape efficiency.
  double transmissivity = 0.0;
  FitOptions options;

  void validate() const;
  std::size_t free_count() const;
};

/// Starting problem from nominal parameters: xi, f_hwhm, lumped efficiency
/// (eta * rho, with rho fixed at 1) and phase jitter free.
FitProblem standard_problem(const OpoParams& opo, const DetectionChain& chain);

struct FitResult {
  std::map<ModelParameter, double> estimates;
  std::map<ModelParameter, double> standard_errors;
  double residual_rms = 0.0;
  double objective = 0.0;
  std::size_t residual_count = 0;
  bool converged = false;
  int iterations = 0;
  int starts = 0;
  /// Objective at the start and after each accepted step of the winning run.
  std::vector<double> objective_history;
};

/// Damped least squares, multi-start over a grid spanning the bounds.
FitResult fit_spectrum(const SpectrumData& data, const FitProblem& problem);

/// Evaluates the model spectra for a full parameter set (problem values).
SpectrumPair model_spectrum(const FitProblem& problem, const Eigen::ArrayXd& frequencies);

struct PumpPoint {
  double pump_power = 0.0;
  /// NaN when the branch was not measured.
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
};

struct ThresholdModel {
  double f_hwhm = 65e6;
  double efficiency = 1.0;
  double escape_efficiency = 1.0;
  double phase_jitter = 0.0;
  double f_probe = 3e6;
};

struct ThresholdEstimate {
  double threshold_power = 0.0;
  double standard_error = 0.0;
  double residual_rms_db = 0.0;
  std::size_t residual_count = 0;
};

/// One-dimensional least squares over the oscillation threshold.
ThresholdEstimate estimate_threshold(std::span<const PumpPoint> points,
                                     const ThresholdModel& model);

}  // namespace opo

#endif  // OPO_FITTING_HPP
