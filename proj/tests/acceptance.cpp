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

// Acceptance harness: every release-blocking property in one binary.
// Prints one [PASS]/[FAIL] line per criterion with the elapsed time and
// exits with the number of failures.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dynred/core.hpp"
#include "dynred/rng.hpp"
#include "dynred/semigroup.hpp"
#include "dynred/states.hpp"
#include "dynred/unraveling.hpp"
#include "experiments.hpp"
#include "report_io.hpp"

using namespace dynred;

namespace {

const Complexd kI(0, 1);
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::vector<double> linspace(double t0, double t1, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = t0 + (t1 - t0) * i / (n - 1);
  out.back() = t1;
  return out;
}

DensityOp<double> random_density(std::uint64_t seed) {
  SplitMix64 rng(seed);
  CMatrixd g(2, 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      g(i, j) = Complexd(rng.uniform() - 0.5, rng.uniform() - 0.5);
    }
  }
  CMatrixd m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOp<double>(std::move(m));
}

void require(Outcome& out, bool cond, const std::string& msg) {
  if (cond) return;
  out.ok = false;
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += msg;
}

void note(Outcome& out, const std::string& msg) {
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += msg;
}

std::string fmt(double x) { return format_g17(x); }

// C1: equal superposition at lam = 100/s, eps = 1e-4 settles on the plateau
// r = 1/2 + eps while the matching mixture stays at 1/2.
Outcome c1_plateau() {
  Outcome out;
  const double eps = 1e-4;
  auto p = TwoLevelParams<double>::from_eps(100.0, eps, kI);
  auto spec = two_level_reduction(p);
  std::vector<double> grid{0.0, 1.0};

  auto pure0 = density_from_pure(
      PureState<double>::superposition(kInvSqrt2, kInvSqrt2));
  CMatrixd m = CMatrixd::Zero(2, 2);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  DensityOp<double> mixt0(std::move(m));

  const double r_pure =
      evolve_master(pure0, spec, grid).states[1].matrix()(0, 0).real();
  const double r_mixt =
      evolve_master(mixt0, spec, grid).states[1].matrix()(0, 0).real();

  require(out, std::abs(r_mixt - 0.5) <= 1e-8,
          "mixture plateau off: r = " + fmt(r_mixt));
  require(out, std::abs(r_pure - 0.5 - eps) <= 5 * eps * eps + 1e-9,
          "pure plateau off: r = " + fmt(r_pure));
  require(out, r_pure > r_mixt, "plateau shift has the wrong sign");
  note(out, "r_pure - 1/2 = " + fmt(r_pure - 0.5) + ", r_mixt - 1/2 = " +
                fmt(r_mixt - 0.5));
  return out;
}

// C2: flipping the relative sign moves the plateau symmetrically and the
// ensemble average is indistinguishable from the mixture; both
// decompositions of the mixture evolve identically.
Outcome c2_no_signalling() {
  Outcome out;
  auto p = TwoLevelParams<double>::from_eps(100.0, 0.2, kI);
  auto rep = exp_sign_flip_no_signalling(p, std::sqrt(0.6),
                                         std::sqrt(0.4) * std::polar(1.0, 0.3),
                                         0.5, 51);
  for (const auto& v : rep.verdicts) {
    require(out, v.passed, v.name + " failed: " + v.detail);
  }
  if (out.ok) {
    note(out,
         "cancellation, averaging and decomposition invariance hold at "
         "eps = 0.2");
  }
  return out;
}

// C3: the re-derived closed form matches the adaptive integrator to 1e-8
// across couplings (including the oscillatory regime), coupling phases and
// seeded initial states.
Outcome c3_closed_form() {
  Outcome out;
  double worst = 0;
  const auto grid = linspace(0.0, 0.8, 21);
  for (double eps : {0.01, 0.1, 0.2, 0.3}) {
    for (Complexd A : {kI, Complexd(1, 0), std::polar(1.0, 2.2)}) {
      auto p = TwoLevelParams<double>::from_eps(10.0, eps, A);
      auto spec = two_level_reduction(p);
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        DensityOp<double> rho0 = random_density(900 + seed);
        const double r0 = bloch_r(rho0);
        const Complexd beta0 = bloch_beta(rho0);
        auto ev = evolve_master(rho0, spec, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const BlochPoint<double> pt =
              analytic_two_level(r0, beta0, p, grid[i]);
          worst = std::max(worst,
                           std::abs(pt.r - ev.states[i].matrix()(0, 0).real()));
          worst =
              std::max(worst, std::abs(pt.beta - ev.states[i].matrix()(0, 1)));
        }
      }
    }
  }
  require(out, worst <= 1e-8, "closed form deviates by " + fmt(worst));
  note(out, "max |closed form - integrator| = " + fmt(worst) +
                " over 120 runs x 21 times");
  return out;
}

// C4: the slowest relaxation rate observed in the population matches the
// predicted slow eigenvalue, which at small eps is 4 lam eps^2, and the
// state converges to the stationary state.
Outcome c4_spohn() {
  Outcome out;
  {
    auto p = TwoLevelParams<double>::from_eps(50.0, 0.2, kI);
    auto rep = exp_spohn_longtime(
        p, density_from_pure(
               PureState<double>::superposition(kInvSqrt2, kInvSqrt2)));
    require(out, rep.passed(), "eps = 0.2 relaxation report failed");
    for (const auto& r : rep.results) {
      if (r.label == "rate_fit") {
        require(out, std::abs(r.value - p.slow_rate()) <= 0.01 * p.slow_rate(),
                "eps = 0.2 rate off: " + fmt(r.value));
        note(out, "rate(eps=0.2) = " + fmt(r.value) + " vs " +
                      fmt(p.slow_rate()));
      }
    }
  }
  {
    const double lam = 100.0, eps = 1e-4;
    auto p = TwoLevelParams<double>::from_eps(lam, eps, kI);
    auto rep = exp_spohn_longtime(
        p, density_from_pure(
               PureState<double>::superposition(kInvSqrt2, kInvSqrt2)));
    require(out, rep.passed(), "eps = 1e-4 relaxation report failed");
    const double leading = 4.0 * lam * eps * eps;
    bool saw_fit = false;
    for (const auto& r : rep.results) {
      if (r.label == "rate_fit") {
        saw_fit = true;
        require(out, std::abs(r.value - leading) <= 0.01 * leading,
                "eps = 1e-4 rate off: " + fmt(r.value) + " vs 4 lam eps^2 = " +
                    fmt(leading));
        note(out, "rate(eps=1e-4) = " + fmt(r.value) + " vs " +
                      fmt(leading));
      }
    }
    require(out, saw_fit, "eps = 1e-4 fit was skipped");
  }
  return out;
}

// C5: the jump-unraveling ensemble mean reproduces the master equation
// within four standard errors entrywise, and the ensemble is bit-identical
// across thread counts.
Outcome c5_unraveling() {
  Outcome out;
  auto p = TwoLevelParams<double>::from_eps(10.0, 0.1, kI);
  auto spec = two_level_reduction(p);
  auto psi0 = PureState<double>::superposition(
      std::sqrt(0.6), std::sqrt(0.4) * std::polar(1.0, 0.5));
  // Horizon lam * t_end = 4: the imaginary part of the mean is carried by
  // the no-jump survivors (fraction e^{-lam t}), so the horizon must leave
  // that population well sampled for the entrywise 4-sigma test to be sound.
  const auto grid = linspace(0.0, 0.4, 20);
  const std::size_t n = 20000;

  EnsembleOptions<double> opts1;
  opts1.n_threads = 1;
  auto stats = run_ensemble(psi0, spec, grid, n, 2026, opts1);
  auto ev = evolve_master(density_from_pure(psi0), spec, grid);

  double worst_pull = 0;
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    const CMatrixd& mc = stats.mean_rho[ti].matrix();
    const CMatrixd& ode = ev.states[ti].matrix();
    for (Eigen::Index j = 0; j < 2; ++j) {
      for (Eigen::Index i = 0; i < 2; ++i) {
        const double dre = std::abs(mc(i, j).real() - ode(i, j).real());
        const double dim = std::abs(mc(i, j).imag() - ode(i, j).imag());
        require(out,
                dre <= 4.0 * stats.stderr_re[ti](i, j) + 1e-12,
                "re entry (" + std::to_string(i) + "," + std::to_string(j) +
                    ") off by " + fmt(dre) + " at t = " + fmt(grid[ti]));
        require(out,
                dim <= 4.0 * stats.stderr_im[ti](i, j) + 1e-12,
                "im entry (" + std::to_string(i) + "," + std::to_string(j) +
                    ") off by " + fmt(dim) + " at t = " + fmt(grid[ti]));
        const double se = stats.stderr_re[ti](i, j);
        if (se > 0) worst_pull = std::max(worst_pull, dre / se);
      }
    }
  }

  EnsembleOptions<double> opts2;
  opts2.n_threads = 2;
  auto stats2 = run_ensemble(psi0, spec, grid, n, 2026, opts2);
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    require(out,
            (stats.mean_rho[ti].matrix() - stats2.mean_rho[ti].matrix())
                    .norm() == 0.0,
            "thread count changed the ensemble mean at t = " + fmt(grid[ti]));
  }
  note(out, std::to_string(n) + " trajectories, worst pull " +
                fmt(worst_pull) + " sigma; 2-thread rerun bit-identical");
  return out;
}

// C6: at the macroscopic reduction rate the outcome frequencies follow the
// Born weights and essentially every trajectory has reduced within a
// microsecond.
Outcome c6_macroscopic() {
  Outcome out;
  auto rep = exp_macroscopic(std::sqrt(0.7), std::sqrt(0.3), 10000, 6);
  for (const auto& v : rep.verdicts) {
    require(out, v.passed, v.name + " failed: " + v.detail);
  }
  double freq = 0, fast_fraction = 0;
  for (const auto& r : rep.results) {
    if (r.label == "freq_plus") freq = r.value;
    if (r.label == "fast_fraction") fast_fraction = r.value;
  }
  require(out, std::abs(freq - 0.7) <= 0.0138,
          "frequency " + fmt(freq) + " outside 3 sigma of 0.7");
  require(out, fast_fraction >= 0.999,
          "only " + fmt(fast_fraction) + " reduced within 1e-6 s");
  note(out, "freq(plus) = " + fmt(freq) + ", settled fraction = " +
                fmt(fast_fraction));
  return out;
}

// C7: the propagated map is linear on density operators.
Outcome c7_linearity() {
  Outcome out;
  auto p = TwoLevelParams<double>::from_eps(10.0, 0.1, kI);
  auto spec = two_level_reduction(p);
  const std::vector<double> grid{0.0, 0.05, 0.1};
  double worst = 0;
  SplitMix64 alpha_rng(777);
  for (int k = 0; k < 100; ++k) {
    auto r1 = random_density(2000 + 2 * k);
    auto r2 = random_density(2001 + 2 * k);
    const double alpha = alpha_rng.uniform();
    DensityOp<double> mix(alpha * r1.matrix() + (1 - alpha) * r2.matrix());
    auto e1 = evolve_master(r1, spec, grid);
    auto e2 = evolve_master(r2, spec, grid);
    auto em = evolve_master(mix, spec, grid);
    for (std::size_t ti = 1; ti < grid.size(); ++ti) {
      CMatrixd combined = alpha * e1.states[ti].matrix() +
                          (1 - alpha) * e2.states[ti].matrix();
      worst = std::max(
          worst, frobenius_distance<double>(em.states[ti].matrix(), combined));
    }
  }
  require(out, worst <= 1e-9, "linearity violated by " + fmt(worst));
  note(out, "max deviation " + fmt(worst) + " over 100 seeded triples");
  return out;
}

// C8: two degenerate manifolds with equal weights: cross coupling makes the
// conditional states distinguish pure preparation from mixture, while the
// block-diagonal control conserves the weights.
Outcome c8_degenerate() {
  Outcome out;
  auto rep = exp_degenerate_4d(100.0, 0.05, 77, 0.1);
  for (const auto& v : rep.verdicts) {
    require(out, v.passed, v.name + " failed: " + v.detail);
  }
  for (const auto& r : rep.results) {
    if (r.label == "conditional_distance") {
      require(out, r.value > 1e-6,
              "conditional distance too small: " + fmt(r.value));
      note(out, "conditional distance = " + fmt(r.value));
    }
    if (r.label == "blockdiag_weight_drift") {
      require(out, std::abs(r.value) <= 1e-9,
              "control weights drifted by " + fmt(r.value));
      note(out, "control drift = " + fmt(r.value));
    }
  }
  return out;
}

// C9: the projector expectation is exactly the mixture value at zero
// environment overlap and exactly linear in the overlap.
Outcome c9_decoherence() {
  Outcome out;
  auto rep = exp_decoherence_demo(11);
  for (const auto& v : rep.verdicts) {
    require(out, v.passed, v.name + " failed: " + v.detail);
  }
  note(out, "zero-overlap value bitwise equal to the mixture; linearity "
                "within 1e-12");
  return out;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1 plateau-shift", 5.0, c1_plateau},
      {"C2 no-signalling", 10.0, c2_no_signalling},
      {"C3 closed-form-vs-integrator", 60.0, c3_closed_form},
      {"C4 spohn-relaxation", 30.0, c4_spohn},
      {"C5 unraveling-mean", 120.0, c5_unraveling},
      {"C6 macroscopic-reduction", 60.0, c6_macroscopic},
      {"C7 linearity", 30.0, c7_linearity},
      {"C8 degenerate-manifolds", 30.0, c8_degenerate},
      {"C9 decoherence-overlap", 1.0, c9_decoherence},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > c.budget_seconds) {
      out.ok = false;
      out.detail += (out.detail.empty() ? "" : "; ");
      out.detail += "budget exceeded";
    }
    std::printf("[%s] %s (%.2fs / %.0fs budget): %s\n",
                out.ok ? "PASS" : "FAIL", c.name, elapsed, c.budget_seconds,
                out.detail.c_str());
    failures += out.ok ? 0 : 1;
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("acceptance: %d criteria failed\n", failures);
  }
  return failures;
}
