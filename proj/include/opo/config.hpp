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

#ifndef OPO_CONFIG_HPP
#define OPO_CONFIG_HPP

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "opo/fitting.hpp"
#include "opo/gaussian_cavity.hpp"
#include "opo/homodyne_sim.hpp"
#include "opo/squeezing_model.hpp"

namespace opo {

/// `key=value` overrides from the command line. Each loader consumes the
/// keys it knows; leftovers are reported as unknown parameters.
class Overrides {
 public:
  Overrides() = default;
  explicit Overrides(std::span<const std::string> items);

  /// Writes every override whose key is in `known` into `target`.
  void apply(nlohmann::json& target, std::span<const std::string_view> known);
  /// Throws ConfigError listing keys no loader consumed.
  void require_all_consumed() const;

 private:
  std::vector<std::pair<std::string, nlohmann::json>> items_;
  std::vector<bool> used_;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

// Layout files: ordered elements with kind, length_mm, roc_mm, aoi_deg,
// index; wavelength_nm; reference_plane; optional mirror_distance,
// output_coupler and d_mm.
CavityLayout parse_layout(const nlohmann::json& j);
CavityLayout load_layout(const std::filesystem::path& path, Overrides& overrides);
nlohmann::json layout_to_json(const CavityLayout& layout);

struct ToolkitParams {
  OpoParams opo;
  DetectionChain chain;
};

ToolkitParams parse_params(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ToolkitParams load_params(const std::filesystem::path& path, Overrides& overrides);

/// Electronic-loss table CSV with freq_MHz and either loss or snr_dB.
ElectronicLossTable load_electronic_loss_table(const std::filesystem::path& path);

struct SimulationConfig {
  TraceConfig trace;
  AnalyzerConfig analyzer;
};

SimulationConfig parse_simulation(const nlohmann::json& j);
SimulationConfig load_simulation(const std::filesystem::path& path, Overrides& overrides);

/// Parameter names as they appear in files, with units in the key.
std::string_view file_key(ModelParameter p);
double file_scale(ModelParameter p);

struct FitConfig {
  FitProblem problem;
  /// Bins below this frequency are left out of spectrum fits.
  double mask_below = 1e6;
  /// Analysis frequency for pump-power (threshold) fits.
  double f_probe = 3e6;
};

/// Starts from standard_problem(params); entries in `j` replace parameters
/// or switch parametrization (P_th_mW for xi, L_internal for rho).
FitConfig parse_fit_config(const nlohmann::json& j, const ToolkitParams& params);

nlohmann::json to_json(const FitResult& result);
nlohmann::json to_json(const ThresholdEstimate& estimate);

}  // namespace opo

#endif  // OPO_CONFIG_HPP
