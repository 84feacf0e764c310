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
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "opo/config.hpp"
#include "opo/csv.hpp"

namespace opo {

namespace {

constexpr std::string_view kParamKeys[] = {
    "format",          "T",          "L_internal",          "f_HWHM_MHz",
    "l_opt_mm",        "P_pump_mW",  "P_th_mW",             "propagation_loss",
    "visibility",      "photodiode_efficiency", "electronic_loss", "electronic_snr_dB",
    "electronic_loss_table", "theta_bar_deg"};

constexpr std::string_view kSimulationKeys[] = {
    "format",          "sample_rate_MHz", "duration_ms",     "lock_angle_deg",
    "jitter_rms_deg",  "jitter_correlation_time_us", "highpass_cutoff_kHz", "block_size",
    "rbw_kHz",         "vbw_kHz",         "n_averages",      "f_min_MHz",
    "f_max_MHz",       "log_average"};

constexpr std::string_view kFitKeys[] = {"format",     "parameters",  "P_pump_mW",     "T",
                                         "residual_space", "max_iterations", "grid_points",
                                         "max_starts", "mask_below_MHz", "f_probe_MHz"};

constexpr double kDeg = M_PI / 180.0;

void reject_unknown(const nlohmann::json& j, std::span<const std::string_view> known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const nlohmann::json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

nlohmann::json parse_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (!text.empty() && end == text.c_str() + text.size()) return v;
  return text;
}

}  // namespace

Overrides::Overrides(std::span<const std::string> items) {
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + item + "' is not of the form key=value");
    items_.emplace_back(item.substr(0, eq), parse_value(item.substr(eq + 1)));
  }
  used_.assign(items_.size(), false);
}

void Overrides::apply(nlohmann::json& target, std::span<const std::string_view> known) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    for (auto k : known) {
      if (k == items_[i].first) {
        target[items_[i].first] = items_[i].second;
        used_[i] = true;
      }
    }
  }
}

void Overrides::require_all_consumed() const {
  std::string unknown;
  for (std::size_t i = 0; i < items_.size(); ++i)
    if (!used_[i]) unknown += (unknown.empty() ? "" : ", ") + items_[i].first;
  if (!unknown.empty()) throw ConfigError("unknown override key(s): " + unknown);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ElectronicLossTable load_electronic_loss_table(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path);
  const std::size_t fcol = table.require_column("freq_MHz");
  const auto loss_col = table.column("loss");
  const auto snr_col = table.column("snr_dB");
  if (!loss_col && !snr_col)
    throw ConfigError(path.string() + ": needs a 'loss' or 'snr_dB' column");
  std::vector<double> f, v;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    f.push_back(table.number(r, fcol) * 1e6);
    v.push_back(table.number(r, loss_col ? *loss_col : *snr_col));
  }
  try {
    return loss_col ? ElectronicLossTable(std::move(f), std::move(v))
                    : ElectronicLossTable::from_snr(std::move(f), v);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ToolkitParams parse_params(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, kParamKeys, "parameters");
  ToolkitParams p;
  OpoParams& o = p.opo;
  o.transmissivity = number_or(j, "T", o.transmissivity);
  o.internal_loss = number_or(j, "L_internal", o.internal_loss);
  if (j.contains("f_HWHM_MHz") && j.contains("l_opt_mm"))
    throw ConfigError("give either f_HWHM_MHz or l_opt_mm, not both");
  try {
    if (j.contains("f_HWHM_MHz"))
      o.f_hwhm = number(j, "f_HWHM_MHz") * 1e6;
    else if (j.contains("l_opt_mm"))
      o.f_hwhm = linewidth(o.transmissivity, number(j, "l_opt_mm") * 1e-3).f_hwhm;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid linewidth inputs: ") + e.what());
  }
  o.pump_power = number_or(j, "P_pump_mW", o.pump_power * 1e3) * 1e-3;
  o.threshold_power = number_or(j, "P_th_mW", o.threshold_power * 1e3) * 1e-3;

  DetectionChain& c = p.chain;
  c.propagation_loss = number_or(j, "propagation_loss", c.propagation_loss);
  c.homodyne_visibility = number_or(j, "visibility", c.homodyne_visibility);
  c.photodiode_efficiency = number_or(j, "photodiode_efficiency", c.photodiode_efficiency);
  c.phase_jitter_rms = number_or(j, "theta_bar_deg", 0.0) * kDeg;
  const int loss_sources = int(j.contains("electronic_loss")) + int(j.contains("electronic_snr_dB")) +
                           int(j.contains("electronic_loss_table"));
  if (loss_sources > 1)
    throw ConfigError("give one of electronic_loss, electronic_snr_dB, electronic_loss_table");
  if (j.contains("electronic_loss")) {
    c.electronic_loss = ElectronicLossTable::constant(number(j, "electronic_loss"));
  } else if (j.contains("electronic_snr_dB")) {
    c.electronic_loss =
        ElectronicLossTable::constant(electronic_loss_from_snr(number(j, "electronic_snr_dB")));
  } else if (j.contains("electronic_loss_table")) {
    if (!j.at("electronic_loss_table").is_string())
      throw ConfigError("'electronic_loss_table' must be a path");
    std::filesystem::path table = j.at("electronic_loss_table").get<std::string>();
    if (table.is_relative()) table = base_dir / table;
    c.electronic_loss = load_electronic_loss_table(table);
  }

  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid detection chain: ") + e.what());
  }
  try {
    o.validate();
  } catch (const PhysicsError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid OPO parameters: ") + e.what());
  }
  return p;
}

ToolkitParams load_params(const std::filesystem::path& path, Overrides& overrides) {
  nlohmann::json j = path.empty() ? nlohmann::json::object() : read_json_file(path);
  overrides.apply(j, kParamKeys);
  return parse_params(j, path.empty() ? std::filesystem::path{} : path.parent_path());
}

SimulationConfig parse_simulation(const nlohmann::json& j) {
  reject_unknown(j, kSimulationKeys, "simulation");
  SimulationConfig s;
  TraceConfig& t = s.trace;
  AnalyzerConfig& a = s.analyzer;
  t.sample_rate = number_or(j, "sample_rate_MHz", t.sample_rate * 1e-6) * 1e6;
  t.lock_angle = number_or(j, "lock_angle_deg", 0.0) * kDeg;
  if (j.contains("jitter_rms_deg")) t.phase_jitter_rms = number(j, "jitter_rms_deg") * kDeg;
  t.jitter_correlation_time =
      number_or(j, "jitter_correlation_time_us", t.jitter_correlation_time * 1e6) * 1e-6;
  t.highpass_cutoff = number_or(j, "highpass_cutoff_kHz", t.highpass_cutoff * 1e-3) * 1e3;
  const double block = number_or(j, "block_size", double(t.block_size));
  if (!(block >= 1.0) || block != std::floor(block))
    throw ConfigError("'block_size' must be a positive integer");
  t.block_size = static_cast<std::size_t>(block);

  a.rbw = number_or(j, "rbw_kHz", a.rbw * 1e-3) * 1e3;
  a.vbw = number_or(j, "vbw_kHz", a.vbw * 1e-3) * 1e3;
  const double averages = number_or(j, "n_averages", double(a.n_averages));
  if (!(averages >= 1.0) || averages != std::floor(averages))
    throw ConfigError("'n_averages' must be a positive integer");
  a.n_averages = static_cast<std::size_t>(averages);
  a.f_min = number_or(j, "f_min_MHz", a.f_min * 1e-6) * 1e6;
  a.f_max = number_or(j, "f_max_MHz", a.f_max * 1e-6) * 1e6;
  if (j.contains("log_average")) {
    if (!j.at("log_average").is_boolean()) throw ConfigError("'log_average' must be true or false");
    a.log_average = j.at("log_average").get<bool>();
  }

  try {
    a.validate();
    if (j.contains("duration_ms")) {
      t.duration = number(j, "duration_ms") * 1e-3;
    } else {
      const double n = std::max<double>(double(required_samples(a, t.sample_rate)), 65536.0);
      t.duration = n / t.sample_rate;
    }
    t.validate();
    validate(t, a);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid simulation settings: ") + e.what());
  }
  return s;
}

SimulationConfig load_simulation(const std::filesystem::path& path, Overrides& overrides) {
  nlohmann::json j = path.empty() ? nlohmann::json::object() : read_json_file(path);
  overrides.apply(j, kSimulationKeys);
  return parse_simulation(j);
}

std::string_view file_key(ModelParameter p) {
  switch (p) {
    case ModelParameter::xi: return "xi";
    case ModelParameter::threshold_power: return "P_th_mW";
    case ModelParameter::f_hwhm: return "f_HWHM_MHz";
    case ModelParameter::efficiency: return "eta";
    case ModelParameter::escape_efficiency: return "rho";
    case ModelParameter::internal_loss: return "L_internal";
    case ModelParameter::phase_jitter: return "theta_bar_deg";
  }
  return "";
}

double file_scale(ModelParameter p) {
  switch (p) {
    case ModelParameter::threshold_power: return 1e-3;
    case ModelParameter::f_hwhm: return 1e6;
    case ModelParameter::phase_jitter: return kDeg;
    default: return 1.0;
  }
}

FitConfig parse_fit_config(const nlohmann::json& j, const ToolkitParams& params) {
  reject_unknown(j, kFitKeys, "fit problem");
  FitConfig cfg;
  FitProblem& prob = cfg.problem;
  prob = standard_problem(params.opo, params.chain);
  prob.pump_power = number_or(j, "P_pump_mW", params.opo.pump_power * 1e3) * 1e-3;
  prob.transmissivity = number_or(j, "T", params.opo.transmissivity);

  if (j.contains("parameters")) {
    const auto& ps = j.at("parameters");
    if (!ps.is_object()) throw ConfigError("'parameters' must be an object");
    for (const auto& [key, spec] : ps.items()) {
      std::optional<ModelParameter> which;
      for (auto p : {ModelParameter::xi, ModelParameter::threshold_power, ModelParameter::f_hwhm,
                     ModelParameter::efficiency, ModelParameter::escape_efficiency,
                     ModelParameter::internal_loss, ModelParameter::phase_jitter})
        if (file_key(p) == key) which = p;
      if (!which) throw ConfigError("fit problem: unknown parameter '" + key + "'");
      const double scale = file_scale(*which);
      constexpr std::string_view spec_keys[] = {"value", "lower", "upper", "free"};
      nlohmann::json obj = spec.is_number() ? nlohmann::json{{"value", spec}} : spec;
      reject_unknown(obj, spec_keys, "parameter '" + key + "'");
      if (!obj.contains("value")) throw ConfigError("parameter '" + key + "' needs a value");
      const bool free = obj.contains("free") && obj.at("free").get<bool>();
      ParameterSpec ps_out = default_spec(*which, number(obj, "value") * scale, free, prob.pump_power);
      ps_out.lower = number_or(obj, "lower", ps_out.lower / scale) * scale;
      ps_out.upper = number_or(obj, "upper", ps_out.upper / scale) * scale;
      if (*which == ModelParameter::threshold_power) prob.parameters.erase(ModelParameter::xi);
      if (*which == ModelParameter::xi) prob.parameters.erase(ModelParameter::threshold_power);
      if (*which == ModelParameter::internal_loss) prob.parameters.erase(ModelParameter::escape_efficiency);
      if (*which == ModelParameter::escape_efficiency) prob.parameters.erase(ModelParameter::internal_loss);
      prob.parameters[*which] = ps_out;
    }
  }

  if (j.contains("residual_space")) {
    const std::string rs = j.at("residual_space").get<std::string>();
    if (rs == "dB" || rs == "decibel")
      prob.options.residual_space = ResidualSpace::decibel;
    else if (rs == "linear")
      prob.options.residual_space = ResidualSpace::linear;
    else
      throw ConfigError("residual_space must be 'dB' or 'linear'");
  }
  prob.options.max_iterations = int(number_or(j, "max_iterations", prob.options.max_iterations));
  prob.options.grid_points = int(number_or(j, "grid_points", prob.options.grid_points));
  prob.options.max_starts = int(number_or(j, "max_starts", prob.options.max_starts));
  cfg.mask_below = number_or(j, "mask_below_MHz", cfg.mask_below * 1e-6) * 1e6;
  cfg.f_probe = number_or(j, "f_probe_MHz", cfg.f_probe * 1e-6) * 1e6;

  try {
    prob.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid fit problem: ") + e.what());
  }
  return cfg;
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json j;
  j["format"] = "opokit-fit-result/1";
  for (const auto& [p, v] : result.estimates) {
    const std::string key(file_key(p));
    const double scale = file_scale(p);
    j["estimates"][key] = v / scale;
    const auto se = result.standard_errors.find(p);
    if (se != result.standard_errors.end())
      j["standard_errors"][key] = std::isfinite(se->second) ? nlohmann::json(se->second / scale)
                                                            : nlohmann::json(nullptr);
  }
  j["residual_rms"] = result.residual_rms;
  j["objective"] = result.objective;
  j["residual_count"] = result.residual_count;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["starts"] = result.starts;
  return j;
}

nlohmann::json to_json(const ThresholdEstimate& estimate) {
  return {{"format", "opokit-threshold/1"},
          {"P_th_mW", estimate.threshold_power * 1e3},
          {"P_th_stderr_mW", estimate.standard_error * 1e3},
          {"residual_rms_dB", estimate.residual_rms_db},
          {"residual_count", estimate.residual_count}};
}

}  // namespace opo
