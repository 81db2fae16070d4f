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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "dynred/core.hpp"
#include "dynred/rng.hpp"
#include "dynred/semigroup.hpp"
#include "dynred/states.hpp"

namespace dynred {

// Exact unitary propagator exp(-i H t) through one eigendecomposition of H.
template <typename Scalar>
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const CMatrix<Scalar>& h) {
    trivial_ = h.norm() == Scalar(0);
    if (trivial_) return;
    Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(h);
    if (es.info() != Eigen::Success) {
      throw Error("UnitaryPropagator: eigendecomposition failed");
    }
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }

  CVector<Scalar> apply(const CVector<Scalar>& psi, Scalar t) const {
    if (trivial_ || t == Scalar(0)) return psi;
    CVector<Scalar> coeffs = evecs_.adjoint() * psi;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      coeffs(i) *= std::exp(Complex<Scalar>(0, -evals_(i) * t));
    }
    return evecs_ * coeffs;
  }

 private:
  bool trivial_;
  RVector<Scalar> evals_;
  CMatrix<Scalar> evecs_;
};

template <typename Scalar>
struct JumpEvent {
  Scalar time;
  std::size_t outcome;  // index into the projector family
  CVector<Scalar> state;
};

template <typename Scalar>
struct Trajectory {
  std::uint64_t seed;
  std::vector<JumpEvent<Scalar>> events;
  std::vector<Scalar> sample_times;
  std::vector<CVector<Scalar>> sampled_states;
};

namespace detail {

template <typename Scalar>
void validate_sample_times(std::span<const Scalar> sample_times, Scalar t_end) {
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < Scalar(0) || sample_times[i] > t_end) {
      throw Error("run_trajectory: sample times must lie in [0, t_end]");
    }
    if (i > 0 && !(sample_times[i] > sample_times[i - 1])) {
      throw Error("run_trajectory: sample times must increase strictly");
    }
  }
}

// Core jump loop driven by an externally owned random stream. Between
// Poisson(lam) epochs the state flies unitarily; at an epoch outcome k is
// selected with probability ||Q_k psi||^2, then the state is projected and
// renormalized. Completeness of the family makes the epoch times
// state-independent, so they are drawn directly as exponential variates.
// Only jumps consume the stream; the sample grid never does.
template <typename Scalar>
Trajectory<Scalar> run_trajectory_core(const PureState<Scalar>& psi0,
                                       const GeneralReduction<Scalar>& spec,
                                       const UnitaryPropagator<Scalar>& prop,
                                       Scalar t_end, std::uint64_t seed,
                                       std::span<const Scalar> sample_times,
                                       SplitMix64& rng) {
  const ProjectorFamily<Scalar>& fam = spec.family();

  Trajectory<Scalar> traj;
  traj.seed = seed;
  traj.sample_times.assign(sample_times.begin(), sample_times.end());
  traj.sampled_states.reserve(sample_times.size());

  CVector<Scalar> anchor = psi0.amplitudes();
  Scalar t_anchor = Scalar(0);
  std::size_t si = 0;
  Scalar t_jump = Scalar(rng.exponential(static_cast<double>(spec.lam())));
  std::vector<Scalar> probs(fam.size());

  for (;;) {
    const Scalar t_next = std::min(t_jump, t_end);
    while (si < sample_times.size() && sample_times[si] <= t_next) {
      traj.sampled_states.push_back(
          prop.apply(anchor, sample_times[si] - t_anchor));
      ++si;
    }
    if (t_jump >= t_end) break;

    CVector<Scalar> pre = prop.apply(anchor, t_jump - t_anchor);
    Scalar total = Scalar(0);
    for (std::size_t k = 0; k < fam.size(); ++k) {
      probs[k] = (fam.projector(k) * pre).squaredNorm();
      total += probs[k];
    }
    if (!(total > Scalar(1e-14))) {
      throw Error("run_trajectory: all outcome probabilities vanished");
    }
    const Scalar u = Scalar(rng.uniform()) * total;
    std::size_t outcome = fam.size() - 1;
    Scalar acc = Scalar(0);
    for (std::size_t k = 0; k < fam.size(); ++k) {
      acc += probs[k];
      if (u < acc) {
        outcome = k;
        break;
      }
    }
    CVector<Scalar> post = fam.projector(outcome) * pre;
    const Scalar norm = post.norm();
    if (!(norm > Scalar(1e-100))) {
      throw Error("run_trajectory: selected outcome has vanishing weight");
    }
    anchor = post / norm;
    t_anchor = t_jump;
    traj.events.push_back(JumpEvent<Scalar>{t_jump, outcome, anchor});
    t_jump += Scalar(rng.exponential(static_cast<double>(spec.lam())));
  }
  return traj;
}

}  // namespace detail

// One jump trajectory with its own stream seeded by `seed`.
template <typename Scalar>
Trajectory<Scalar> run_trajectory(const PureState<Scalar>& psi0,
                                  const GeneralReduction<Scalar>& spec,
                                  Scalar t_end, std::uint64_t seed,
                                  std::type_identity_t<std::span<const Scalar>>
                                      sample_times = {}) {
  if (psi0.dim() != spec.dim()) {
    throw Error("run_trajectory: state and model dimensions differ");
  }
  if (!(t_end >= Scalar(0))) throw Error("run_trajectory: t_end must be >= 0");
  detail::validate_sample_times(sample_times, t_end);
  const UnitaryPropagator<Scalar> prop(spec.hamiltonian());
  SplitMix64 rng(seed);
  return detail::run_trajectory_core(psi0, spec, prop, t_end, seed,
                                     sample_times, rng);
}

template <typename Scalar>
struct EnsembleOptions {
  unsigned n_threads = 1;
  // Trajectories are accumulated in fixed blocks folded in index order, so
  // the result is bit-identical for any thread count.
  std::size_t block_size = 256;
};

template <typename Scalar>
struct EnsembleStats {
  std::size_t n_traj = 0;
  std::vector<Scalar> t_grid;
  std::vector<DensityOp<Scalar>> mean_rho;
  // Standard error of the mean, entrywise, for real and imaginary parts.
  std::vector<RMatrix<Scalar>> stderr_re;
  std::vector<RMatrix<Scalar>> stderr_im;
  std::vector<std::string> outcome_labels;
  // Fraction of trajectories ending in each manifold at the final grid time.
  std::vector<Scalar> outcome_freq;
  // Time of the first jump of each trajectory (infinity when none occurred).
  std::vector<Scalar> first_jump_times;
};

namespace detail {

template <typename Scalar>
struct EnsembleBlock {
  std::vector<CMatrix<Scalar>> sum_rho;
  std::vector<RMatrix<Scalar>> sum_re2;
  std::vector<RMatrix<Scalar>> sum_im2;
  std::vector<std::uint64_t> outcome_counts;
  std::vector<Scalar> first_jumps;

  EnsembleBlock(std::size_t n_times, Eigen::Index dim, std::size_t n_outcomes)
      : sum_rho(n_times, CMatrix<Scalar>::Zero(dim, dim)),
        sum_re2(n_times, RMatrix<Scalar>::Zero(dim, dim)),
        sum_im2(n_times, RMatrix<Scalar>::Zero(dim, dim)),
        outcome_counts(n_outcomes, 0) {}
};

// Initial state for trajectory `index`: when rho0 has several components the
// first uniform variate of the per-trajectory stream selects one, and the
// rest of the stream drives the jumps.
template <typename Scalar>
struct InitialSampler {
  std::vector<PureState<Scalar>> components;
  std::vector<Scalar> cumulative;  // unused when there is one component

  const PureState<Scalar>& draw(SplitMix64& rng) const {
    if (components.size() == 1) return components[0];
    const Scalar u = Scalar(rng.uniform());
    std::size_t pick = components.size() - 1;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) {
        pick = i;
        break;
      }
    }
    return components[pick];
  }
};

template <typename Scalar>
EnsembleStats<Scalar> run_ensemble_impl(const InitialSampler<Scalar>& sampler,
                                        const GeneralReduction<Scalar>& spec,
                                        std::span<const Scalar> t_grid,
                                        std::size_t n_traj,
                                        std::uint64_t master_seed,
                                        const EnsembleOptions<Scalar>& opts) {
  if (t_grid.empty()) throw Error("run_ensemble: empty time grid");
  if (n_traj == 0) throw Error("run_ensemble: n_traj must be > 0");
  const Scalar t_end = t_grid[t_grid.size() - 1];
  validate_sample_times(t_grid, t_end);
  const Eigen::Index dim = spec.dim();
  const std::size_t n_times = t_grid.size();
  const std::size_t n_outcomes = spec.family().size();
  const std::size_t block_size = std::max<std::size_t>(1, opts.block_size);
  const std::size_t n_blocks = (n_traj + block_size - 1) / block_size;
  const UnitaryPropagator<Scalar> prop(spec.hamiltonian());

  auto run_block = [&](std::size_t b, EnsembleBlock<Scalar>& block) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n_traj, begin + block_size);
    block.first_jumps.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t seed = master_seed + static_cast<std::uint64_t>(i);
      SplitMix64 rng(seed);
      const PureState<Scalar>& psi0 = sampler.draw(rng);
      Trajectory<Scalar> traj =
          run_trajectory_core(psi0, spec, prop, t_end, seed, t_grid, rng);
      for (std::size_t ti = 0; ti < n_times; ++ti) {
        const CVector<Scalar>& v = traj.sampled_states[ti];
        CMatrix<Scalar> outer = v * v.adjoint();
        block.sum_rho[ti] += outer;
        block.sum_re2[ti] += outer.real().cwiseAbs2();
        block.sum_im2[ti] += outer.imag().cwiseAbs2();
      }
      const CVector<Scalar>& last = traj.sampled_states[n_times - 1];
      std::size_t final_outcome = 0;
      Scalar best = Scalar(-1);
      for (std::size_t k = 0; k < n_outcomes; ++k) {
        Scalar wk = (spec.family().projector(k) * last).squaredNorm();
        if (wk > best) {
          best = wk;
          final_outcome = k;
        }
      }
      ++block.outcome_counts[final_outcome];
      block.first_jumps.push_back(
          traj.events.empty() ? std::numeric_limits<Scalar>::infinity()
                              : traj.events[0].time);
    }
  };

  std::vector<EnsembleBlock<Scalar>> blocks(
      n_blocks, EnsembleBlock<Scalar>(n_times, dim, n_outcomes));
  const unsigned n_threads = std::max(1u, opts.n_threads);
  if (n_threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b, blocks[b]);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t b = next.fetch_add(1);
          if (b >= n_blocks) return;
          run_block(b, blocks[b]);
        }
      });
    }
    for (auto& th : workers) th.join();
  }

  EnsembleStats<Scalar> stats;
  stats.n_traj = n_traj;
  stats.t_grid.assign(t_grid.begin(), t_grid.end());
  stats.outcome_labels = spec.family().labels();
  stats.outcome_freq.assign(n_outcomes, Scalar(0));
  stats.first_jump_times.reserve(n_traj);

  std::vector<CMatrix<Scalar>> sum_rho(n_times, CMatrix<Scalar>::Zero(dim, dim));
  std::vector<RMatrix<Scalar>> sum_re2(n_times, RMatrix<Scalar>::Zero(dim, dim));
  std::vector<RMatrix<Scalar>> sum_im2(n_times, RMatrix<Scalar>::Zero(dim, dim));
  std::vector<std::uint64_t> counts(n_outcomes, 0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t ti = 0; ti < n_times; ++ti) {
      sum_rho[ti] += blocks[b].sum_rho[ti];
      sum_re2[ti] += blocks[b].sum_re2[ti];
      sum_im2[ti] += blocks[b].sum_im2[ti];
    }
    for (std::size_t k = 0; k < n_outcomes; ++k) {
      counts[k] += blocks[b].outcome_counts[k];
    }
    stats.first_jump_times.insert(stats.first_jump_times.end(),
                                  blocks[b].first_jumps.begin(),
                                  blocks[b].first_jumps.end());
  }

  const Scalar n = Scalar(n_traj);
  stats.mean_rho.reserve(n_times);
  for (std::size_t ti = 0; ti < n_times; ++ti) {
    CMatrix<Scalar> mean = sum_rho[ti] / n;
    RMatrix<Scalar> var_re =
        (sum_re2[ti] / n - mean.real().cwiseAbs2()).cwiseMax(Scalar(0));
    RMatrix<Scalar> var_im =
        (sum_im2[ti] / n - mean.imag().cwiseAbs2()).cwiseMax(Scalar(0));
    stats.stderr_re.push_back((var_re / n).cwiseSqrt());
    stats.stderr_im.push_back((var_im / n).cwiseSqrt());
    stats.mean_rho.emplace_back(std::move(mean));
  }
  for (std::size_t k = 0; k < n_outcomes; ++k) {
    stats.outcome_freq[k] = Scalar(counts[k]) / n;
  }
  return stats;
}

}  // namespace detail

// Ensemble of jump trajectories from a pure initial state. Trajectory i is
// seeded master_seed + i; results are bit-reproducible for any thread count,
// and trajectory i reproduces run_trajectory(psi0, ..., master_seed + i).
template <typename Scalar>
EnsembleStats<Scalar> run_ensemble(const PureState<Scalar>& psi0,
                                   const GeneralReduction<Scalar>& spec,
                                   std::type_identity_t<std::span<const Scalar>> t_grid,
                                   std::size_t n_traj, std::uint64_t master_seed,
                                   const EnsembleOptions<Scalar>& opts = {}) {
  if (psi0.dim() != spec.dim()) {
    throw Error("run_ensemble: state and model dimensions differ");
  }
  detail::InitialSampler<Scalar> sampler;
  sampler.components.push_back(psi0);
  return detail::run_ensemble_impl(sampler, spec, t_grid, n_traj, master_seed,
                                   opts);
}

// Ensemble from a mixed initial state: each trajectory first draws an
// eigenvector of rho0 with its eigenvalue as weight, then evolves it.
template <typename Scalar>
EnsembleStats<Scalar> run_ensemble(const DensityOp<Scalar>& rho0,
                                   const GeneralReduction<Scalar>& spec,
                                   std::type_identity_t<std::span<const Scalar>> t_grid,
                                   std::size_t n_traj, std::uint64_t master_seed,
                                   const EnsembleOptions<Scalar>& opts = {}) {
  if (rho0.dim() != spec.dim()) {
    throw Error("run_ensemble: state and model dimensions differ");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(rho0.matrix());
  if (es.info() != Eigen::Success) {
    throw Error("run_ensemble: eigendecomposition of rho0 failed");
  }
  detail::InitialSampler<Scalar> sampler;
  std::vector<Scalar> weights;
  for (Eigen::Index i = 0; i < rho0.dim(); ++i) {
    const Scalar w = es.eigenvalues()(i);
    if (w > Scalar(1e-12)) {
      CVector<Scalar> v = es.eigenvectors().col(i);
      sampler.components.emplace_back(v / v.norm(), Scalar(1e-6));
      weights.push_back(w);
    }
  }
  if (sampler.components.empty()) {
    throw Error("run_ensemble: rho0 has no significant eigencomponents");
  }
  Scalar total = Scalar(0);
  for (Scalar w : weights) total += w;
  if (sampler.components.size() > 1) {
    Scalar acc = Scalar(0);
    for (Scalar w : weights) {
      acc += w / total;
      sampler.cumulative.push_back(acc);
    }
  }
  return detail::run_ensemble_impl(sampler, spec, t_grid, n_traj, master_seed,
                                   opts);
}

}  // namespace dynred
