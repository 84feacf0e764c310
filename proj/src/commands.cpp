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

#include "opo/commands.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "opo/config.hpp"
#include "opo/csv.hpp"
#include "opo/errors.hpp"
#include "opo/fitting.hpp"
#include "opo/gaussian_cavity.hpp"
#include "opo/homodyne_sim.hpp"
#include "opo/squeezing_model.hpp"

namespace opo {

namespace {

using Json = nlohmann::json;

std::vector<double> split_numbers(const std::string& text, char sep, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size())
      throw ConfigError(std::string("cannot parse ") + what + " '" + text + "'");
    values.push_back(v);
  }
  return values;
}

void write_json(std::ostream& out, const Json& j) { out << std::setw(2) << j << '\n'; }

CavityLayout resolve_layout(const GlobalOptions& global, Overrides& overrides) {
  if (!global.config.empty()) return load_layout(global.config, overrides);
  Json j = layout_to_json(triangle_ring_layout());
  constexpr std::string_view keys[] = {"wavelength_nm", "d_mm", "substrate_index"};
  overrides.apply(j, keys);
  return parse_layout(j);
}

Json axis_report(const CavityLayout& layout, TransversePlane plane) {
  const double m = stability_parameter(roundtrip_matrix(layout, plane));
  Json j{{"half_trace", m}, {"stable", is_stable(m)}};
  if (is_stable(m)) {
    const AxisMode mode = eigenmode(layout, plane);
    j["waist_um"] = mode.waist_radius() * 1e6;
    j["waist_offset_mm"] = mode.waist_offset() * 1e3;
  }
  return j;
}

ToolkitParams resolve_params(const GlobalOptions& global, Overrides& overrides) {
  return load_params(global.config, overrides);
}

Eigen::ArrayXd linear_grid(double lo, double hi, int points) {
  if (points < 1) throw ConfigError("--points must be positive");
  if (!(hi >= lo) || !(lo >= 0.0)) throw ConfigError("frequency range must satisfy 0 <= fmin <= fmax");
  if (points == 1) return Eigen::ArrayXd::Constant(1, lo);
  return Eigen::ArrayXd::LinSpaced(points, lo, hi);
}

SpectrumData read_spectrum_csv(const std::filesystem::path& path, double mask_below) {
  const CsvTable t = read_csv_file(path);
  const std::size_t fc = t.require_column("freq_MHz");
  const std::size_t sc = t.require_column("squeezed_dB");
  const std::size_t ac = t.require_column("antisqueezed_dB");
  const auto shot = t.column("shot_dB");
  const auto reliable = t.column("reliable");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  SpectrumData d;
  d.frequencies.resize(n);
  d.squeezed_db.resize(n);
  d.antisqueezed_db.resize(n);
  if (shot) d.shot_db = Eigen::ArrayXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    d.frequencies(i) = t.number(r, fc) * 1e6;
    d.squeezed_db(i) = t.number(r, sc);
    d.antisqueezed_db(i) = t.number(r, ac);
    if (shot) (*d.shot_db)(i) = t.number(r, *shot);
  }
  d.mask = default_mask(d.frequencies, mask_below);
  if (reliable)
    for (Eigen::Index i = 0; i < n; ++i)
      d.mask(i) = d.mask(i) && t.number(static_cast<std::size_t>(i), *reliable) != 0.0;
  try {
    d.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return d;
}

std::vector<PumpPoint> read_pump_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv_file(path);
  const std::size_t pc = t.require_column("P_mW");
  const std::size_t sc = t.require_column("sqz_dB");
  const std::size_t ac = t.require_column("antisqz_dB");
  std::vector<PumpPoint> points;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    points.push_back({t.number(r, pc) * 1e-3, t.number(r, sc), t.number(r, ac)});
  return points;
}

}  // namespace

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const PhysicsError&) {
    return kExitPhysics;
  } catch (const NumericalError&) {
    return kExitNumerical;
  } catch (const InvalidArgument&) {
    return kExitConfig;
  } catch (...) {
    return kExitFailure;
  }
}

int cmd_cavity(const GlobalOptions& global, const CavityOptions& options, std::ostream& out,
               std::ostream&) {
  Overrides overrides(global.overrides);
  CavityLayout layout = resolve_layout(global, overrides);
  overrides.require_all_consumed();
  const int modes = int(options.scan.has_value()) + int(options.solve_circular) + int(options.eigenmode);
  if (modes > 1) throw ConfigError("choose one of --scan, --solve-circular, --eigenmode");

  if (options.scan) {
    const auto v = split_numbers(*options.scan, ':', "--scan range");
    if (v.size() != 3) throw ConfigError("--scan expects d_min:d_max:step in mm");
    std::vector<double> grid;
    try {
      grid = distance_grid(v[0] * 1e-3, v[1] * 1e-3, v[2] * 1e-3);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--scan: ") + e.what());
    }
    const auto rows = waist_scan(layout, grid);
    CsvWriter csv(out, "waist-scan",
                  {"d_mm", "waist_tangential_um", "waist_sagittal_um", "stable_t", "stable_s"});
    for (const auto& row : rows) {
      csv.row({format_number(row.mirror_distance * 1e3),
               row.tangential ? format_number(*row.tangential * 1e6) : "",
               row.sagittal ? format_number(*row.sagittal * 1e6) : "",
               row.tangential ? "1" : "0", row.sagittal ? "1" : "0"});
    }
    for (double d : waist_crossings(rows)) csv.comment("crossing_d_mm=" + format_number(d * 1e3));
    return kExitOk;
  }

  if (options.solve_circular) {
    const auto b = split_numbers(options.bracket, ':', "--bracket");
    if (b.size() != 2) throw ConfigError("--bracket expects d_lo:d_hi in mm");
    const double d = find_circular_waist_distance(layout, b[0] * 1e-3, b[1] * 1e-3);
    const GaussianMode mode = eigenmode(layout.with_mirror_distance(d));
    write_json(out, {{"format", "opokit-circular/1"},
                     {"d_mm", d * 1e3},
                     {"waist_um", mode.tangential.waist_radius() * 1e6},
                     {"ellipticity", mode.ellipticity()}});
    return kExitOk;
  }

  if (options.distance_mm) layout = layout.with_mirror_distance(*options.distance_mm * 1e-3);
  const GaussianMode mode = eigenmode(layout);
  Json j{{"format", "opokit-eigenmode/1"},
         {"d_mm", layout.distance ? Json(layout.mirror_distance() * 1e3) : Json(nullptr)},
         {"reference_plane", layout.reference_plane},
         {"tangential", axis_report(layout, TransversePlane::tangential)},
         {"sagittal", axis_report(layout, TransversePlane::sagittal)},
         {"ellipticity", mode.ellipticity()},
         {"overlap_best_circular_intracavity", best_circular_match(mode).efficiency}};
  if (layout.output_coupler) {
    const CircularMatch match = best_circular_match(output_mode(layout));
    j["overlap_best_circular"] = match.efficiency;
    j["best_circular_waist_um"] = match.circular.waist_radius() * 1e6;
  }
  const double l_opt = layout.optical_path_length();
  j["optical_path_length_mm"] = l_opt * 1e3;
  write_json(out, j);
  return kExitOk;
}

int cmd_spectrum(const GlobalOptions& global, const SpectrumOptions& options, std::ostream& out,
                 std::ostream&) {
  Overrides overrides(global.overrides);
  const ToolkitParams params = resolve_params(global, overrides);
  overrides.require_all_consumed();
  const Eigen::ArrayXd f = linear_grid(options.f_min, options.f_max, options.points);

  std::vector<double> pumps = options.pump_list;
  const bool listed = !pumps.empty();
  if (!listed) pumps.push_back(params.opo.pump_power);

  std::vector<std::string> header{"freq_MHz", "squeezed_dB", "antisqueezed_dB", "shot_dB"};
  if (listed) header.insert(header.begin(), "pump_mW");
  CsvWriter csv(out, "spectrum", header);
  for (double pump : pumps) {
    OpoParams opo = params.opo;
    opo.pump_power = pump;
    const SpectrumPair s = predicted_spectrum(opo, params.chain, f);
    const Eigen::ArrayXd sq = s.squeezed.decibels();
    const Eigen::ArrayXd aq = s.antisqueezed.decibels();
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      std::vector<std::string> row{format_number(f(i) * 1e-6), format_number(sq(i) + 0.0),
                                   format_number(aq(i) + 0.0), "0"};
      if (listed) row.insert(row.begin(), format_number(pump * 1e3));
      csv.row(row);
    }
  }
  return kExitOk;
}

int cmd_pump_sweep(const GlobalOptions& global, const PumpSweepOptions& options,
                   std::ostream& out, std::ostream& log) {
  Overrides overrides(global.overrides);
  const ToolkitParams params = resolve_params(global, overrides);
  overrides.require_all_consumed();
  if (options.points < 2) throw ConfigError("--points must be at least 2");
  const double p_th = params.opo.threshold_power;
  const double p_max = options.p_max.value_or(p_th);
  if (!(p_max > 0.0)) throw ConfigError("--pmax must be positive");

  std::vector<double> powers;
  bool truncated = false;
  for (int i = 0; i < options.points; ++i) {
    const double p = p_max * i / (options.points - 1);
    if (p >= p_th) {
      truncated = true;
      break;
    }
    powers.push_back(p);
  }
  if (truncated)
    log << "warning: pump powers at or above threshold (" << p_th * 1e3
        << " mW) were dropped\n";

  const auto rows = pump_sweep(params.opo, params.chain, options.f_probe, powers);
  CsvWriter csv(out, "pump-sweep", {"P_mW", "xi", "sqz_dB", "antisqz_dB"});
  for (const auto& r : rows)
    csv.row({format_number(r.pump_power * 1e3), format_number(r.xi),
             format_number(r.squeezing_db + 0.0), format_number(r.antisqueezing_db + 0.0)});
  for (double f : {options.f_probe, 0.0}) {
    const SqueezingOptimum opt = optimal_squeezing(params.opo, params.chain, f);
    csv.comment("optimum f_MHz=" + format_number(f * 1e-6) + " xi=" + format_number(opt.xi, 6) +
                " sqz_dB=" + format_number(opt.squeezing_db, 6) +
                " antisqz_dB=" + format_number(opt.antisqueezing_db, 6));
  }
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& global, const SimulateOptions& options, std::ostream& out,
                 std::ostream&) {
  Overrides overrides(global.overrides);
  const ToolkitParams params = resolve_params(global, overrides);
  SimulationConfig sim = load_simulation(options.trace_config, overrides);
  overrides.require_all_consumed();
  sim.trace.seed = global.seed;

  const HomodyneRecord shot = generate_shot_record(sim.trace);
  const HomodyneRecord squeezed = generate_trace(params.opo, params.chain, sim.trace);
  if (!options.record.empty()) {
    std::ofstream rec(options.record, std::ios::binary);
    if (!rec) throw ConfigError("cannot write " + options.record.string());
    write_record(squeezed, rec);
  }
  const NoiseSpectrum sq = analyze_spectrum(squeezed, shot, sim.analyzer);

  TraceConfig orthogonal = sim.trace;
  orthogonal.lock_angle += M_PI / 2;
  const NoiseSpectrum aq =
      analyze_spectrum(generate_trace(params.opo, params.chain, orthogonal), shot, sim.analyzer);

  CsvWriter csv(out, "simulated-spectrum",
                {"freq_MHz", "squeezed_dB", "antisqueezed_dB", "shot_dB", "reliable"});
  csv.comment("seed=" + std::to_string(global.seed) + " params_hash=" + squeezed.params_hash +
              " averages=" + std::to_string(sq.averages));
  const Eigen::ArrayXd sq_db = sq.decibels();
  const Eigen::ArrayXd aq_db = aq.decibels();
  for (Eigen::Index i = 0; i < sq.frequencies.size(); ++i)
    csv.row({format_number(sq.frequencies(i) * 1e-6), format_number(sq_db(i)),
             format_number(aq_db(i)), "0", sq.reliable(i) ? "1" : "0"});
  return kExitOk;
}

int cmd_fit(const GlobalOptions& global, const FitOptionsCli& options, std::ostream& out,
            std::ostream& log) {
  if (options.spectrum_csv.empty() == options.pump_csv.empty())
    throw ConfigError("give exactly one of --spectrum and --pump");
  Overrides overrides(global.overrides);
  const ToolkitParams params = resolve_params(global, overrides);
  overrides.require_all_consumed();
  const FitConfig cfg = parse_fit_config(
      options.problem.empty() ? Json::object() : read_json_file(options.problem), params);

  if (!options.pump_csv.empty()) {
    const auto points = read_pump_csv(options.pump_csv);
    ThresholdModel model;
    model.f_hwhm = params.opo.f_hwhm;
    model.efficiency = params.chain.efficiency(cfg.f_probe);
    model.escape_efficiency = params.opo.escape_efficiency();
    model.phase_jitter = params.chain.phase_jitter_rms;
    model.f_probe = cfg.f_probe;
    write_json(out, to_json(estimate_threshold(points, model)));
    return kExitOk;
  }

  const SpectrumData data = read_spectrum_csv(options.spectrum_csv, cfg.mask_below);
  const FitResult result = fit_spectrum(data, cfg.problem);
  write_json(out, to_json(result));
  if (!result.converged) {
    log << "error: fit did not converge\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace opo
