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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

#include "config.hpp"

using namespace dynred;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults reproduce the headline scenario") {
  RunConfig cfg;
  CHECK(cfg.experiment == "mixture-vs-pure");
  CHECK(cfg.lam == 100.0);
  CHECK(cfg.eps == 1e-4);
  CHECK(cfg.master_seed == 1);
  CHECK_FALSE(cfg.t_eval.has_value());
  // A = i, a = b = 1/sqrt(2).
  CHECK(std::abs(cfg.params().A() - std::complex<double>(0, 1)) < 1e-15);
  CHECK(std::abs(cfg.a() - cfg.b()) == 0.0);
  CHECK(std::abs(std::norm(cfg.a()) + std::norm(cfg.b()) - 1.0) < 1e-15);
  CHECK_NOTHROW(validate_config(cfg, "evolve"));
  CHECK(parse_config("") == RunConfig{});
}

TEST_CASE("known experiment and mode lists") {
  CHECK(known_experiments().size() == 6);
  CHECK(known_modes().size() == 9);
}

TEST_CASE("parser assigns values and tolerates comments") {
  const std::string text =
      "# headline override\n"
      "lam = 250\n"
      "eps=0.2\n"
      "\n"
      "experiment = spohn\n"
      "grid_scale = log\n"
      "grid_t_start = 1e-3\n"
      "t_eval = 2.5\n"
      "n_traj = 500\n"
      "tol_spohn_rate_rel = 0.02\n";
  RunConfig cfg = parse_config(text);
  CHECK(cfg.lam == 250.0);
  CHECK(cfg.eps == 0.2);
  CHECK(cfg.experiment == "spohn");
  CHECK(cfg.grid.log_scale);
  CHECK(cfg.grid.t_start == 1e-3);
  REQUIRE(cfg.t_eval.has_value());
  CHECK(*cfg.t_eval == 2.5);
  CHECK(cfg.n_traj == 500);
  CHECK(cfg.tol.spohn_rate_rel == 0.02);
}

TEST_CASE("parser errors name the offending line") {
  CHECK(error_of([] { parse_config("lam = 1\nbogus = 2\n"); }) ==
        "config line 2: unknown key 'bogus'");
  CHECK(error_of([] { parse_config("lam = 1\nlam = 2\n"); }) ==
        "config line 2: duplicate key 'lam'");
  CHECK(error_of([] { parse_config("lam 1\n"); }) ==
        "config line 1: expected 'key = value', got 'lam 1'");
  CHECK(error_of([] {
          parse_config("lam = fast\n");
        }).find("is not a number") != std::string::npos);
  CHECK(error_of([] {
          parse_config("experiment = nonsense\n");
        }).find("unknown experiment") != std::string::npos);
  CHECK(error_of([] {
          parse_config("grid_scale = cubic\n");
        }).find("grid_scale must be linear or log") != std::string::npos);
  CHECK(error_of([] {
          parse_config("initial = thermal\n");
        }).find("initial must be pure or mixture") != std::string::npos);
  CHECK(error_of([] {
          parse_config("n_traj = -5\n");
        }).find("not an unsigned integer") != std::string::npos);
}

TEST_CASE("semantic validation messages") {
  RunConfig cfg;
  cfg.lam = 0;
  CHECK(error_of([&] { validate_config(cfg, "evolve"); }) == "lam must be > 0");

  cfg = RunConfig{};
  cfg.eps = -0.1;
  CHECK(error_of([&] { validate_config(cfg, "evolve"); }) == "eps must be >= 0");

  cfg = RunConfig{};
  cfg.a_mod = 1.0;
  cfg.b_mod = 1.0;
  CHECK(error_of([&] {
          validate_config(cfg, "evolve");
        }).find("a and b must be normalized") != std::string::npos);

  cfg = RunConfig{};
  cfg.n_traj = 0;
  CHECK(error_of([&] { validate_config(cfg, "trajectories"); }) ==
        "n_traj must be >= 1");

  cfg = RunConfig{};
  cfg.grid.count = 1;
  CHECK(error_of([&] { validate_config(cfg, "evolve"); }) ==
        "grid_count must be >= 2");

  cfg = RunConfig{};
  cfg.grid.log_scale = true;
  cfg.grid.t_start = 2.0;  // beyond t_end = 1
  CHECK(error_of([&] {
          validate_config(cfg, "evolve");
        }).find("log grid requires") != std::string::npos);
}

TEST_CASE("the closed form is refused exactly at the degenerate coupling") {
  RunConfig cfg;
  cfg.eps = 0.25;
  CHECK(error_of([&] {
          validate_config(cfg, "analytic");
        }).find("closed form degenerate at eps = 1/4") != std::string::npos);
  // The ODE path handles the same coupling.
  CHECK_NOTHROW(validate_config(cfg, "evolve"));
  cfg.eps = 0.2501;
  CHECK_NOTHROW(validate_config(cfg, "analytic"));
}

TEST_CASE("echo emits a canonical round-trippable form") {
  RunConfig cfg;
  cfg.experiment = "sign-flip";
  cfg.master_seed = 99;
  cfg.lam = 123.456;
  cfg.eps = 1.0 / 3.0;
  cfg.t_eval = 0.7;
  cfg.grid.log_scale = true;
  cfg.grid.t_start = 1e-5;
  cfg.n_threads = 4;
  cfg.initial = "mixture";
  cfg.tol.sign_flip = 5e-10;
  cfg.out_dir = "results";

  const std::string echoed = echo_config(cfg);
  CHECK(echoed.find("experiment = sign-flip\n") != std::string::npos);
  CHECK(echoed.find("t_eval = ") != std::string::npos);
  CHECK(parse_config(echoed) == cfg);

  // Without an explicit t_eval the echo omits the key entirely
  // (fourd_t_eval, which embeds the same substring, is always present).
  RunConfig plain;
  const std::string echoed_plain = echo_config(plain);
  CHECK(echoed_plain.find("\nt_eval = ") == std::string::npos);
  CHECK(echoed_plain.rfind("t_eval = ", 0) == std::string::npos);
  CHECK(parse_config(echoed_plain) == plain);
}

TEST_CASE("plateau evaluation time resolution") {
  RunConfig cfg;  // lam = 100, eps = 1e-4: window (0.1, 25000)
  CHECK(resolve_t_eval(cfg) == 1.0);

  cfg.t_eval = 3.0;
  CHECK(resolve_t_eval(cfg) == 3.0);

  // Narrow window: fall back to the window midpoint.
  RunConfig narrow;
  narrow.eps = 0.03;  // window (0.1, 0.2777...)
  const double expect_mid = 0.5 * (0.1 + 0.1 / (4.0 * 100.0 * 0.03 * 0.03));
  CHECK(resolve_t_eval(narrow) == doctest::Approx(expect_mid).epsilon(1e-12));

  RunConfig empty_window;
  empty_window.eps = 0.2;
  CHECK_THROWS_AS(resolve_t_eval(empty_window), NoPlateau);
}

TEST_CASE("time grids") {
  GridConfig lin;
  lin.t_end = 2.0;
  lin.count = 5;
  auto g = make_time_grid(lin);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g[2] == 1.0);
  CHECK(g.back() == 2.0);

  GridConfig lg;
  lg.t_end = 1.0;
  lg.count = 3;
  lg.log_scale = true;
  lg.t_start = 0.01;
  auto gl = make_time_grid(lg);
  REQUIRE(gl.size() == 4);  // 0 prepended to the geometric points
  CHECK(gl[0] == 0.0);
  CHECK(gl[1] == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(gl[2] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(gl[3] == 1.0);
}
