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

#include <fstream>
#include <sstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "opo/commands.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opokit: squeezed-light OPO cavity design, noise model, simulation and fitting"};
  app.require_subcommand(1);
  app.fallthrough();

  opo::GlobalOptions global;
  std::string out_path;
  app.add_option("--config", global.config,
                 "layout file (cavity) or parameter file (other commands); bundled defaults if absent")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "output file (stdout if absent)");
  app.add_option("--seed", global.seed, "random seed for simulate");
  app.add_option("--set", global.overrides, "override a configuration key: key=value")
      ->allow_extra_args(false);

  opo::CavityOptions cavity;
  auto* c = app.add_subcommand("cavity", "cavity eigenmode, waist scan and circular-waist solver");
  c->add_option("--scan", cavity.scan, "waist scan d_min:d_max:step (mm)");
  c->add_flag("--solve-circular", cavity.solve_circular, "find the distance of equal waists");
  c->add_option("--bracket", cavity.bracket, "search bracket d_lo:d_hi (mm)")->capture_default_str();
  c->add_flag("--eigenmode", cavity.eigenmode, "eigenmode report (default)");
  c->add_option("--d", cavity.distance_mm, "mirror distance for --eigenmode (mm)");

  opo::SpectrumOptions spectrum;
  std::string pump_list;
  auto* s = app.add_subcommand("spectrum", "predicted squeezed and anti-squeezed spectra");
  s->add_option("--fmin", spectrum.f_min, "lowest frequency (Hz)")->capture_default_str();
  s->add_option("--fmax", spectrum.f_max, "highest frequency (Hz)")->capture_default_str();
  s->add_option("--points", spectrum.points, "number of frequencies")->capture_default_str();
  s->add_option("--pump-list", pump_list, "comma-separated pump powers (W)");

  opo::PumpSweepOptions sweep;
  auto* p = app.add_subcommand("pump-sweep", "squeezing and anti-squeezing versus pump power");
  p->add_option("--pmax", sweep.p_max, "highest pump power (W); defaults to threshold");
  p->add_option("--points", sweep.points, "number of pump powers")->capture_default_str();
  p->add_option("--fprobe", sweep.f_probe, "analysis frequency (Hz)")->capture_default_str();

  opo::SimulateOptions simulate;
  auto* m = app.add_subcommand("simulate", "time-domain homodyne simulation and analyzer emulation");
  m->add_option("--trace", simulate.trace_config, "trace and analyzer settings (JSON)")
      ->check(CLI::ExistingFile);
  m->add_option("--record", simulate.record, "write the squeezed-quadrature record here");

  opo::FitOptionsCli fit;
  auto* f = app.add_subcommand("fit", "fit model parameters to a spectrum or pump sweep");
  f->add_option("--spectrum", fit.spectrum_csv, "spectrum CSV")->check(CLI::ExistingFile);
  f->add_option("--pump", fit.pump_csv, "pump-sweep CSV")->check(CLI::ExistingFile);
  f->add_option("--problem", fit.problem, "fit problem (JSON)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : opo::kExitConfig;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return opo::kExitConfig;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  try {
    if (*c) return opo::cmd_cavity(global, cavity, out, std::cerr);
    if (*s) {
      if (!pump_list.empty()) spectrum.pump_list = parse_list(pump_list);
      return opo::cmd_spectrum(global, spectrum, out, std::cerr);
    }
    if (*p) return opo::cmd_pump_sweep(global, sweep, out, std::cerr);
    if (*m) return opo::cmd_simulate(global, simulate, out, std::cerr);
    if (*f) return opo::cmd_fit(global, fit, out, std::cerr);
  } catch (const std::invalid_argument&) {
    std::cerr << "error: --pump-list must be comma-separated numbers\n";
    return opo::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return opo::exit_code_for_current_exception();
  }
  return opo::kExitFailure;
}
