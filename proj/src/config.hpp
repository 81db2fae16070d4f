// Copyright 2026 The dynred authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynred/semigroup.hpp"
#include "experiments.hpp"

namespace dynred {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Run modes and experiment names accepted by the `experiment` key.
const std::vector<std::string>& known_experiments();  // the six experiments
const std::vector<std::string>& known_modes();        // experiments + evolve/analytic/trajectories

struct GridConfig {
  double t_end = 1.0;
  int count = 201;
  bool log_scale = false;
  double t_start = 1e-4;  // first positive point of a log grid

  bool operator==(const GridConfig&) const = default;
};

// Full run configuration. Defaults reproduce the headline scenario:
// eps = 1e-4, lam = 100/s, A = i, equal superposition.
struct RunConfig {
  std::string experiment = "mixture-vs-pure";
  std::uint64_t master_seed = 1;
  std::string out_dir;  // empty: resolved from DYNRED_OUTPUT_DIR or ./dynred_out

  double lam = 100.0;
  double eps = 1e-4;
  double A_phase = 1.5707963267948966;  // pi/2, i.e. A = i
  double a_mod = 0.70710678118654752;   // 1/sqrt(2)
  double a_phase = 0.0;
  double b_mod = 0.70710678118654752;
  double b_phase = 0.0;
  std::optional<double> t_eval;  // default: derived from the plateau window

  GridConfig grid;
  std::size_t n_traj = 10000;
  unsigned n_threads = 1;
  std::string initial = "pure";  // evolve/analytic initial state: pure | mixture

  double fourd_eps = 0.05;
  std::uint64_t fourd_seed = 77;
  double fourd_t_eval = 0.1;
  int sweep_points = 11;

  ExperimentTolerances tol;

  bool operator==(const RunConfig&) const;

  TwoLevelParams<double> params() const {
    return TwoLevelParams<double>::from_eps(lam, eps, unit_phase(A_phase));
  }
  std::complex<double> a() const { return a_mod * unit_phase(a_phase); }
  std::complex<double> b() const { return b_mod * unit_phase(b_phase); }

  static std::complex<double> unit_phase(double phi) {
    return {std::cos(phi), std::sin(phi)};
  }
};

// Parses `key = value` lines (# comments, blank lines allowed). Unknown keys,
// malformed lines and unparseable values raise ConfigError naming the line.
RunConfig parse_config(const std::string& text);

// Semantic validation; `mode` is the subcommand about to run ("analytic"
// rejects eps = 1/4, where the closed form degenerates).
void validate_config(const RunConfig& cfg, const std::string& mode);

// Canonical echo of every setting; parse_config(echo_config(c)) == c.
std::string echo_config(const RunConfig& cfg);

// Evaluation time for the plateau experiments: the explicit setting, or
// max(10 t_min, 1 s) capped below the window end.
double resolve_t_eval(const RunConfig& cfg);

// Time grid for evolve/analytic/trajectories; always starts at 0.
std::vector<double> make_time_grid(const GridConfig& grid);

}  // namespace dynred
