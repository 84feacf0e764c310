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

#ifndef OPO_COMMANDS_HPP
#define OPO_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace opo {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitPhysics = 3,
  kExitNumerical = 4,
};

/// Maps the active exception to an exit code; call inside a catch block.
int exit_code_for_current_exception();

struct GlobalOptions {
  std::filesystem::path config;
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
};

struct CavityOptions {
  std::optional<std::string> scan;  // "d_min:d_max:step" in mm
  bool solve_circular = false;
  std::string bracket = "21:24";  // mm
  bool eigenmode = false;
  std::optional<double> distance_mm;
};

struct SpectrumOptions {
  double f_min = 1e6;
  double f_max = 200e6;
  int points = 200;
  std::vector<double> pump_list;  // W
};

struct PumpSweepOptions {
  std::optional<double> p_max;  // W; defaults to the threshold
  int points = 101;
  double f_probe = 3e6;
};

struct SimulateOptions {
  std::filesystem::path trace_config;
  std::filesystem::path record;
};

struct FitOptionsCli {
  std::filesystem::path spectrum_csv;
  std::filesystem::path pump_csv;
  std::filesystem::path problem;
};

int cmd_cavity(const GlobalOptions& global, const CavityOptions& options, std::ostream& out,
               std::ostream& log);
int cmd_spectrum(const GlobalOptions& global, const SpectrumOptions& options, std::ostream& out,
                 std::ostream& log);
int cmd_pump_sweep(const GlobalOptions& global, const PumpSweepOptions& options,
                   std::ostream& out, std::ostream& log);
int cmd_simulate(const GlobalOptions& global, const SimulateOptions& options, std::ostream& out,
                 std::ostream& log);
int cmd_fit(const GlobalOptions& global, const FitOptionsCli& options, std::ostream& out,
            std::ostream& log);

}  // namespace opo

#endif  // OPO_COMMANDS_HPP
