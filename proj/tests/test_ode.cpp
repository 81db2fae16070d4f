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
#include <complex>
#include <vector>

#include "dynred/core.hpp"
#include "dynred/ode.hpp"

using namespace dynred;

namespace {

std::vector<double> linspace(double t0, double t1, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = t0 + (t1 - t0) * i / (n - 1);
  out.back() = t1;
  return out;
}

CMatrixd scalar1(double v) {
  CMatrixd m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

TEST_CASE("pure decay matches exp(-t) within tolerance") {
  auto grid = linspace(0.0, 5.0, 21);
  std::vector<double> ts, ys;
  OdeOptions<double> opts;
  integrate_grid<double>(
      [](double, const CMatrixd& y) { return (-y).eval(); }, scalar1(1.0), grid,
      opts, [&](double t, const CMatrixd& y) {
        ts.push_back(t);
        ys.push_back(y(0, 0).real());
      });
  REQUIRE(ts.size() == grid.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    // Grid times are hit exactly, not approximately.
    CHECK(ts[i] == grid[i]);
    CHECK(std::abs(ys[i] - std::exp(-ts[i])) < 1e-9);
  }
}

TEST_CASE("oscillator preserves modulus and phase") {
  const double w = 3.0;
  auto grid = linspace(0.0, 2.0, 9);
  std::vector<std::complex<double>> ys;
  integrate_grid<double>(
      [&](double, const CMatrixd& y) {
        return (std::complex<double>(0, w) * y).eval();
      },
      scalar1(1.0), grid, {}, [&](double, const CMatrixd& y) {
        ys.push_back(y(0, 0));
      });
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const std::complex<double> expect =
        std::exp(std::complex<double>(0, w * grid[i]));
    CHECK(std::abs(ys[i] - expect) < 1e-9);
  }
}

TEST_CASE("matrix-valued system integrates each entry") {
  // y' = [[0, 1], [0, 0]] acting entrywise through the rhs closure:
  // y00' = y01, y01' = 0, so y00(t) = t with y01 = 1.
  CMatrixd y0 = CMatrixd::Zero(2, 2);
  y0(0, 1) = 1.0;
  auto grid = linspace(0.0, 1.0, 5);
  CMatrixd last;
  integrate_grid<double>(
      [](double, const CMatrixd& y) {
        CMatrixd d = CMatrixd::Zero(2, 2);
        d(0, 0) = y(0, 1);
        return d;
      },
      y0, grid, {}, [&](double, const CMatrixd& y) { last = y; });
  CHECK(std::abs(last(0, 0).real() - 1.0) < 1e-12);
  CHECK(last(0, 1) == std::complex<double>(1, 0));
}

TEST_CASE("stiff decay stays accurate under tight tolerances") {
  const double lam = 1000.0;
  auto grid = linspace(0.0, 0.05, 6);
  OdeOptions<double> opts;
  opts.rel_tol = 1e-12;
  opts.abs_tol = 1e-14;
  double y_end = 0;
  OdeStats stats = integrate_grid<double>(
      [&](double, const CMatrixd& y) { return (-lam * y).eval(); },
      scalar1(1.0), grid, opts,
      [&](double, const CMatrixd& y) { y_end = y(0, 0).real(); });
  CHECK(std::abs(y_end - std::exp(-lam * 0.05)) < 1e-12);
  CHECK(stats.n_accepted > 0);
}

TEST_CASE("max_step caps the accepted step size") {
  auto grid = linspace(0.0, 1.0, 2);
  OdeOptions<double> opts;
  opts.max_step = 1e-3;
  OdeStats stats = integrate_grid<double>(
      [](double, const CMatrixd& y) { return (-y).eval(); }, scalar1(1.0),
      grid, opts, [](double, const CMatrixd&) {});
  // 1.0 / 1e-3 = 1000 steps at least.
  CHECK(stats.n_accepted >= 1000);
}

TEST_CASE("controller step recovers after a tiny grid-clamped step") {
  // A dense grid point immediately after a coarse stretch must not collapse
  // the step for the rest of the integration.
  std::vector<double> grid = {0.0, 0.5, 0.5 + 1e-9, 1.5};
  OdeStats stats = integrate_grid<double>(
      [](double, const CMatrixd& y) { return (-y).eval(); }, scalar1(1.0),
      grid, {}, [](double, const CMatrixd&) {});
  CHECK(stats.n_accepted < 200);
}

TEST_CASE("invalid inputs are rejected") {
  auto decay = [](double, const CMatrixd& y) { return (-y).eval(); };
  CHECK_THROWS_AS(integrate_grid<double>(decay, scalar1(1.0),
                                         std::vector<double>{0.0}, {},
                                         [](double, const CMatrixd&) {}),
                  Error);
  CHECK_THROWS_AS(integrate_grid<double>(decay, scalar1(1.0),
                                         std::vector<double>{0.0, 1.0, 1.0}, {},
                                         [](double, const CMatrixd&) {}),
                  Error);
  OdeOptions<double> bad;
  bad.rel_tol = 0;
  CHECK_THROWS_AS(integrate_grid<double>(decay, scalar1(1.0),
                                         std::vector<double>{0.0, 1.0}, bad,
                                         [](double, const CMatrixd&) {}),
                  Error);
}

TEST_CASE("non-finite derivatives abort the integration") {
  auto nan_rhs = [](double, const CMatrixd& y) {
    return (y * std::numeric_limits<double>::quiet_NaN()).eval();
  };
  CHECK_THROWS_AS(integrate_grid<double>(nan_rhs, scalar1(1.0),
                                         std::vector<double>{0.0, 1.0}, {},
                                         [](double, const CMatrixd&) {}),
                  Error);
}

TEST_CASE("step budget exhaustion raises a descriptive error") {
  OdeOptions<double> opts;
  opts.max_steps = 10;
  opts.max_step = 1e-6;
  CHECK_THROWS_WITH_AS(
      integrate_grid<double>(
          [](double, const CMatrixd& y) { return (-y).eval(); }, scalar1(1.0),
          std::vector<double>{0.0, 1.0}, opts, [](double, const CMatrixd&) {}),
      doctest::Contains("step budget"), Error);
}
