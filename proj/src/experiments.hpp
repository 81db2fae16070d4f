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
#include <utility>

#include "dynred/semigroup.hpp"
#include "dynred/unraveling.hpp"
#include "report.hpp"

namespace dynred {

// Acceptance thresholds of the experiment verdicts. Members map onto the
// tol_* configuration keys.
struct ExperimentTolerances {
  double mixture_r = 1e-8;
  // Allowed residual of the first-order plateau formula, in units of eps^2.
  double plateau_factor = 5.0;
  double sign_flip = 1e-9;
  double decomposition = 1e-12;
  double spohn_distance = 1e-6;
  double spohn_rate_rel = 0.01;
  double macro_freq_sigmas = 3.0;
  double macro_first_jump_deadline = 1e-6;
  double macro_first_jump_fraction = 0.999;
  double macro_median_rel = 0.10;
  double macro_offdiag = 1e-10;
  double macro_mc_rate_rel = 0.05;
  double fourd_weight_drift = 1e-9;
  double fourd_weight_sum = 1e-9;
  double fourd_equal_weights = 1e-12;
  double fourd_min_conditional_distance = 1e-6;
  double interference_linearity = 1e-12;

  bool operator==(const ExperimentTolerances&) const = default;
};

// Plateau populations of the pure superposition a|+> + b|-> against the
// matching diagonal mixture, evaluated at t_eval inside the plateau window.
ExperimentReport exp_mixture_vs_pure(const TwoLevelParams<double>& params,
                                     std::complex<double> a,
                                     std::complex<double> b, double t_eval,
                                     int grid_count = 201,
                                     const ExperimentTolerances& tol = {});

// Evolves a|+> + b|-> and a|+> - b|->: their plateau deviations from the
// mixture cancel exactly, and the mixture is invariant under the choice of
// decomposition, so the sign of the superposition cannot signal.
ExperimentReport exp_sign_flip_no_signalling(const TwoLevelParams<double>& params,
                                             std::complex<double> a,
                                             std::complex<double> b,
                                             double t_eval, int grid_count = 201,
                                             const ExperimentTolerances& tol = {});

// Jump ensemble at the macroscopic reduction rate (1e7 per second, no
// Hamiltonian): outcome frequencies follow |a|^2, essentially every
// trajectory has settled within a microsecond, and the ensemble coherence
// decays at the reduction rate.
ExperimentReport exp_macroscopic(std::complex<double> a, std::complex<double> b,
                                 std::size_t n_traj, std::uint64_t master_seed,
                                 const ExperimentTolerances& tol = {});

// Long-time relaxation toward the unique stationary state: fits the slowest
// decay rate from the population and checks convergence in Frobenius
// distance. The distance check switches to the closed form when the required
// horizon exceeds the integration step budget.
ExperimentReport exp_spohn_longtime(const TwoLevelParams<double>& params,
                                    const DensityOp<double>& rho0,
                                    const ExperimentTolerances& tol = {});

// Four-dimensional model with two rank-two manifolds.
struct FourDSpec {
  CMatrixd h4;
  double lam = 0;

  GeneralReduction<double> reduction() const {
    return GeneralReduction<double>(h4, two_manifold_projectors_4d<double>(),
                                    lam);
  }
};

// Seeded random Hermitian Hamiltonian scaled so its spectral norm is
// lam * eps; with cross_coupling = false the inter-manifold blocks vanish.
FourDSpec make_seeded_four_d_spec(double lam, double eps, std::uint64_t seed,
                                  bool cross_coupling);

// Pure state with exactly equal manifold weights (seeded random directions
// inside each manifold) and its manifold-dephased mixture.
std::pair<DensityOp<double>, DensityOp<double>> make_four_d_initial_pair(
    std::uint64_t seed);

// Degenerate-manifold discrimination: with cross coupling the conditional
// states inside each manifold distinguish the pure preparation from the
// mixture; without it the manifold weights are conserved.
ExperimentReport exp_degenerate_4d(double lam, double eps, std::uint64_t seed,
                                   double t_eval,
                                   const ExperimentTolerances& tol = {});

// Overlap-controlled interference: the deviation of a projector expectation
// from its mixture value is exactly linear in the environment overlap and
// vanishes identically at overlap zero.
ExperimentReport exp_decoherence_demo(int n_points = 11,
                                      const ExperimentTolerances& tol = {});

}  // namespace dynred
