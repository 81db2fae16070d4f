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

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "report_io.hpp"

namespace dynred {

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{
      "mixture-vs-pure", "sign-flip", "macroscopic",
      "spohn",           "degenerate-4d", "decoherence"};
  return names;
}

const std::vector<std::string>& known_modes() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v = known_experiments();
    v.push_back("evolve");
    v.push_back("analytic");
    v.push_back("trajectories");
    return v;
  }();
  return names;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return experiment == o.experiment && master_seed == o.master_seed &&
         out_dir == o.out_dir && lam == o.lam && eps == o.eps &&
         A_phase == o.A_phase && a_mod == o.a_mod && a_phase == o.a_phase &&
         b_mod == o.b_mod && b_phase == o.b_phase && t_eval == o.t_eval &&
         grid == o.grid && n_traj == o.n_traj && n_threads == o.n_threads &&
         initial == o.initial && fourd_eps == o.fourd_eps &&
         fourd_seed == o.fourd_seed && fourd_t_eval == o.fourd_t_eval &&
         sweep_points == o.sweep_points && tol == o.tol;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_double(int line, const std::string& key, const std::string& value) {
  double out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    fail(line, "value '" + value + "' for key '" + key + "' is not a number");
  }
  return out;
}

std::uint64_t parse_u64(int line, const std::string& key,
                        const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    fail(line, "value '" + value + "' for key '" + key +
                   "' is not an unsigned integer");
  }
  return out;
}

struct Key {
  std::function<void(RunConfig&, int, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  // When false the key is omitted from the echo if it is in default state.
  bool always_echo = true;
};

using KeyMap = std::vector<std::pair<std::string, Key>>;

Key double_key(double RunConfig::*member) {
  return Key{[member](RunConfig& c, int line, const std::string& v) {
               c.*member = parse_double(line, "", v);
             },
             [member](const RunConfig& c) { return format_g17(c.*member); }};
}

Key tol_key(double ExperimentTolerances::*member) {
  return Key{[member](RunConfig& c, int line, const std::string& v) {
               c.tol.*member = parse_double(line, "", v);
             },
             [member](const RunConfig& c) { return format_g17(c.tol.*member); }};
}

// Canonical key order; echo emits keys in this order.
const KeyMap& key_map() {
  static const KeyMap keys = [] {
    KeyMap m;
    m.emplace_back("experiment",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         for (const auto& name : known_modes()) {
                           if (v == name) {
                             c.experiment = v;
                             return;
                           }
                         }
                         fail(line, "unknown experiment '" + v + "'");
                       },
                       [](const RunConfig& c) { return c.experiment; }});
    m.emplace_back("master_seed",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.master_seed = parse_u64(line, "master_seed", v);
                       },
                       [](const RunConfig& c) {
                         return std::to_string(c.master_seed);
                       }});
    m.emplace_back("out_dir",
                   Key{[](RunConfig& c, int, const std::string& v) {
                         c.out_dir = v;
                       },
                       [](const RunConfig& c) { return c.out_dir; }});
    m.emplace_back("lam", double_key(&RunConfig::lam));
    m.emplace_back("eps", double_key(&RunConfig::eps));
    m.emplace_back("A_phase", double_key(&RunConfig::A_phase));
    m.emplace_back("a_mod", double_key(&RunConfig::a_mod));
    m.emplace_back("a_phase", double_key(&RunConfig::a_phase));
    m.emplace_back("b_mod", double_key(&RunConfig::b_mod));
    m.emplace_back("b_phase", double_key(&RunConfig::b_phase));
    m.emplace_back("t_eval",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.t_eval = parse_double(line, "t_eval", v);
                       },
                       [](const RunConfig& c) {
                         return c.t_eval ? format_g17(*c.t_eval) : std::string();
                       },
                       false});
    m.emplace_back("t_end",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.grid.t_end = parse_double(line, "t_end", v);
                       },
                       [](const RunConfig& c) { return format_g17(c.grid.t_end); }});
    m.emplace_back("grid_count",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.grid.count = int(parse_u64(line, "grid_count", v));
                       },
                       [](const RunConfig& c) {
                         return std::to_string(c.grid.count);
                       }});
    m.emplace_back("grid_scale",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         if (v == "linear") {
                           c.grid.log_scale = false;
                         } else if (v == "log") {
                           c.grid.log_scale = true;
                         } else {
                           fail(line, "grid_scale must be linear or log");
                         }
                       },
                       [](const RunConfig& c) {
                         return c.grid.log_scale ? "log" : "linear";
                       }});
    m.emplace_back("grid_t_start",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.grid.t_start = parse_double(line, "grid_t_start", v);
                       },
                       [](const RunConfig& c) {
                         return format_g17(c.grid.t_start);
                       }});
    m.emplace_back("n_traj",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.n_traj = std::size_t(parse_u64(line, "n_traj", v));
                       },
                       [](const RunConfig& c) { return std::to_string(c.n_traj); }});
    m.emplace_back("n_threads",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.n_threads = unsigned(parse_u64(line, "n_threads", v));
                       },
                       [](const RunConfig& c) {
                         return std::to_string(c.n_threads);
                       }});
    m.emplace_back("initial",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         if (v != "pure" && v != "mixture") {
                           fail(line, "initial must be pure or mixture");
                         }
                         c.initial = v;
                       },
                       [](const RunConfig& c) { return c.initial; }});
    m.emplace_back("fourd_eps", double_key(&RunConfig::fourd_eps));
    m.emplace_back("fourd_seed",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.fourd_seed = parse_u64(line, "fourd_seed", v);
                       },
                       [](const RunConfig& c) {
                         return std::to_string(c.fourd_seed);
                       }});
    m.emplace_back("fourd_t_eval", double_key(&RunConfig::fourd_t_eval));
    m.emplace_back("sweep_points",
                   Key{[](RunConfig& c, int line, const std::string& v) {
                         c.sweep_points = int(parse_u64(line, "sweep_points", v));
                       },
                       [](const RunConfig& c) {
                         return std::to_string(c.sweep_points);
                       }});
    m.emplace_back("tol_mixture_r", tol_key(&ExperimentTolerances::mixture_r));
    m.emplace_back("tol_plateau_factor",
                   tol_key(&ExperimentTolerances::plateau_factor));
    m.emplace_back("tol_sign_flip", tol_key(&ExperimentTolerances::sign_flip));
    m.emplace_back("tol_decomposition",
                   tol_key(&ExperimentTolerances::decomposition));
    m.emplace_back("tol_spohn_distance",
                   tol_key(&ExperimentTolerances::spohn_distance));
    m.emplace_back("tol_spohn_rate_rel",
                   tol_key(&ExperimentTolerances::spohn_rate_rel));
    m.emplace_back("tol_macro_freq_sigmas",
                   tol_key(&ExperimentTolerances::macro_freq_sigmas));
    m.emplace_back("tol_macro_first_jump_deadline",
                   tol_key(&ExperimentTolerances::macro_first_jump_deadline));
    m.emplace_back("tol_macro_first_jump_fraction",
                   tol_key(&ExperimentTolerances::macro_first_jump_fraction));
    m.emplace_back("tol_macro_median_rel",
                   tol_key(&ExperimentTolerances::macro_median_rel));
    m.emplace_back("tol_macro_offdiag",
                   tol_key(&ExperimentTolerances::macro_offdiag));
    m.emplace_back("tol_macro_mc_rate_rel",
                   tol_key(&ExperimentTolerances::macro_mc_rate_rel));
    m.emplace_back("tol_fourd_weight_drift",
                   tol_key(&ExperimentTolerances::fourd_weight_drift));
    m.emplace_back("tol_fourd_weight_sum",
                   tol_key(&ExperimentTolerances::fourd_weight_sum));
    m.emplace_back("tol_fourd_equal_weights",
                   tol_key(&ExperimentTolerances::fourd_equal_weights));
    m.emplace_back("tol_fourd_min_conditional_distance",
                   tol_key(&ExperimentTolerances::fourd_min_conditional_distance));
    m.emplace_back("tol_interference_linearity",
                   tol_key(&ExperimentTolerances::interference_linearity));
    return m;
  }();
  return keys;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
    bool handled = false;
    for (const auto& [name, handler] : key_map()) {
      if (name == key) {
        handler.set(cfg, line_no, value);
        handled = true;
        break;
      }
    }
    if (!handled) fail(line_no, "unknown key '" + key + "'");
  }
  return cfg;
}

void validate_config(const RunConfig& cfg, const std::string& mode) {
  if (!(cfg.lam > 0)) throw ConfigError("lam must be > 0");
  if (!(cfg.eps >= 0)) throw ConfigError("eps must be >= 0");
  if (!(cfg.a_mod >= 0) || !(cfg.b_mod >= 0)) {
    throw ConfigError("a_mod and b_mod must be >= 0");
  }
  const double norm = cfg.a_mod * cfg.a_mod + cfg.b_mod * cfg.b_mod;
  if (std::abs(norm - 1.0) > 1e-9) {
    throw ConfigError("a and b must be normalized: |a|^2 + |b|^2 = " +
                      format_g17(norm));
  }
  if (cfg.t_eval && !(*cfg.t_eval > 0)) throw ConfigError("t_eval must be > 0");
  if (cfg.grid.count < 2) throw ConfigError("grid_count must be >= 2");
  if (!(cfg.grid.t_end > 0)) throw ConfigError("t_end must be > 0");
  if (cfg.grid.log_scale &&
      (!(cfg.grid.t_start > 0) || !(cfg.grid.t_start < cfg.grid.t_end))) {
    throw ConfigError("log grid requires 0 < grid_t_start < t_end");
  }
  if (cfg.n_traj == 0) throw ConfigError("n_traj must be >= 1");
  if (cfg.n_threads == 0) throw ConfigError("n_threads must be >= 1");
  if (!(cfg.fourd_eps > 0)) throw ConfigError("fourd_eps must be > 0");
  if (!(cfg.fourd_t_eval > 0)) throw ConfigError("fourd_t_eval must be > 0");
  if (cfg.sweep_points < 3) throw ConfigError("sweep_points must be >= 3");
  if (mode == "analytic" && std::abs(cfg.eps - 0.25) < 1e-12) {
    throw ConfigError(
        "closed form degenerate at eps = 1/4 (equal relaxation rates); "
        "use the ODE path (evolve)");
  }
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [name, handler] : key_map()) {
    if (!handler.always_echo && name == "t_eval" && !cfg.t_eval) continue;
    os << name << " = " << handler.get(cfg) << "\n";
  }
  return os.str();
}

double resolve_t_eval(const RunConfig& cfg) {
  if (cfg.t_eval) return *cfg.t_eval;
  const RegimeWindow<double> window = regime_window(cfg.params());
  const double candidate = std::max(10.0 * window.t_min, 1.0);
  if (candidate < 0.95 * window.t_max) return candidate;
  return 0.5 * (window.t_min + window.t_max);
}

std::vector<double> make_time_grid(const GridConfig& grid) {
  std::vector<double> out;
  if (grid.count < 2) throw ConfigError("grid_count must be >= 2");
  if (!grid.log_scale) {
    out.reserve(std::size_t(grid.count));
    for (int i = 0; i < grid.count; ++i) {
      out.push_back(grid.t_end * double(i) / double(grid.count - 1));
    }
    out.back() = grid.t_end;
  } else {
    out.reserve(std::size_t(grid.count) + 1);
    out.push_back(0.0);
    const double ratio = grid.t_end / grid.t_start;
    for (int i = 0; i < grid.count; ++i) {
      out.push_back(grid.t_start *
                    std::pow(ratio, double(i) / double(grid.count - 1)));
    }
    out.back() = grid.t_end;
  }
  return out;
}

}  // namespace dynred
