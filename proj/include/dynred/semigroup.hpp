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
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "dynred/core.hpp"
#include "dynred/ode.hpp"
#include "dynred/states.hpp"

namespace dynred {

// Two-level model parameters: coupling omega, reduction rate lam, and the
// unit-modulus matrix element A of the coupling operator.
template <typename Scalar>
class TwoLevelParams {
 public:
  TwoLevelParams(Scalar omega, Scalar lam, Complex<Scalar> A)
      : omega_(omega), lam_(lam), A_(A) {
    if (!(lam_ > Scalar(0))) throw Error("TwoLevelParams: lam must be > 0");
    if (!(omega_ >= Scalar(0))) throw Error("TwoLevelParams: omega must be >= 0");
    if (std::abs(std::abs(A_) - Scalar(1)) > default_equality_tol<Scalar>()) {
      throw Error("TwoLevelParams: |A| must equal 1");
    }
  }

  static TwoLevelParams from_eps(Scalar lam, Scalar eps, Complex<Scalar> A) {
    if (!(lam > Scalar(0))) throw Error("TwoLevelParams: lam must be > 0");
    if (!(eps >= Scalar(0))) throw Error("TwoLevelParams: eps must be >= 0");
    return TwoLevelParams(lam * eps, lam, A);
  }

  Scalar omega() const { return omega_; }
  Scalar lam() const { return lam_; }
  Complex<Scalar> A() const { return A_; }
  Scalar eps() const { return omega_ / lam_; }

  // delta = sqrt(1 - 16 eps^2); purely imaginary for eps > 1/4.
  Complex<Scalar> delta() const {
    Scalar d2 = Scalar(1) - Scalar(16) * eps() * eps();
    if (d2 >= Scalar(0)) return Complex<Scalar>(std::sqrt(d2), 0);
    return Complex<Scalar>(0, std::sqrt(-d2));
  }

  // Decay rate of the slowest relaxation mode, lam * (1 - Re delta) / 2,
  // evaluated through 1 - delta = 16 eps^2 / (1 + delta) to avoid
  // cancellation at small eps.
  Scalar slow_rate() const {
    Complex<Scalar> one_minus =
        Scalar(16) * eps() * eps() / (Complex<Scalar>(1, 0) + delta());
    return lam_ / Scalar(2) * one_minus.real();
  }

  Scalar fast_rate() const {
    return lam_ / Scalar(2) * (Scalar(1) + delta().real());
  }

 private:
  Scalar omega_;
  Scalar lam_;
  Complex<Scalar> A_;
};

// Reduction model on an n-dimensional space: Hamiltonian H, a complete
// orthogonal projector family, and reduction rate lam >= 0.
template <typename Scalar>
class GeneralReduction {
 public:
  GeneralReduction(CMatrix<Scalar> h, ProjectorFamily<Scalar> family, Scalar lam)
      : h_(std::move(h)), family_(std::move(family)), lam_(lam) {
    if (h_.rows() != h_.cols() || h_.rows() != family_.dim()) {
      throw Error("GeneralReduction: Hamiltonian and projector dimensions differ");
    }
    Scalar scale = std::max(Scalar(1), Scalar(h_.norm()));
    if (hermiticity_residual(h_) > Scalar(1e-12) * scale) {
      throw Error("GeneralReduction: Hamiltonian must be Hermitian");
    }
    if (!(lam_ >= Scalar(0))) throw Error("GeneralReduction: lam must be >= 0");
    h_scale_ = spectral_norm(h_);
  }

  Eigen::Index dim() const { return h_.rows(); }
  const CMatrix<Scalar>& hamiltonian() const { return h_; }
  const ProjectorFamily<Scalar>& family() const { return family_; }
  Scalar lam() const { return lam_; }
  Scalar hamiltonian_scale() const { return h_scale_; }

 private:
  CMatrix<Scalar> h_;
  ProjectorFamily<Scalar> family_;
  Scalar lam_;
  Scalar h_scale_;
};

template <typename Scalar>
GeneralReduction<Scalar> two_level_reduction(const TwoLevelParams<Scalar>& p) {
  return GeneralReduction<Scalar>(make_two_level_hamiltonian(p.omega(), p.A()),
                                  two_level_projectors<Scalar>(), p.lam());
}

// Right-hand side of the reduction master equation:
//   -i[H, rho] + lam * sum_k Q_k rho Q_k - lam * rho.
template <typename Scalar>
CMatrix<Scalar> lindblad_rhs(const CMatrix<Scalar>& rho,
                             const GeneralReduction<Scalar>& spec) {
  if (rho.rows() != spec.dim() || rho.cols() != spec.dim()) {
    throw Error("lindblad_rhs: state and model dimensions differ");
  }
  const Complex<Scalar> minus_i(0, -1);
  CMatrix<Scalar> out = minus_i * (spec.hamiltonian() * rho - rho * spec.hamiltonian());
  if (spec.lam() > Scalar(0)) {
    const ProjectorFamily<Scalar>& fam = spec.family();
    CMatrix<Scalar> gain = CMatrix<Scalar>::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < fam.size(); ++k) {
      gain += fam.projector(k) * rho * fam.projector(k);
    }
    out += spec.lam() * (gain - rho);
  }
  return out;
}

template <typename Scalar>
CMatrix<Scalar> lindblad_rhs(const DensityOp<Scalar>& rho,
                             const GeneralReduction<Scalar>& spec) {
  return lindblad_rhs(rho.matrix(), spec);
}

template <typename Scalar>
struct EvolveOptions {
  OdeOptions<Scalar> ode;
  // Density invariants are re-validated at every grid time with this
  // tolerance; a violation aborts. Drift is reported, never corrected.
  Scalar validate_tol = Scalar(1e-8);
  // Cap the step at 0.05 * min(1/lam, 1/||H||) so no dynamical time scale
  // is skipped over.
  bool cap_step_by_rates = true;
};

template <typename Scalar>
struct EvolveDiagnostics {
  Scalar max_trace_drift = Scalar(0);
  Scalar max_hermiticity_residual = Scalar(0);
  Scalar min_eigenvalue = Scalar(1);
  OdeStats ode;
};

template <typename Scalar>
struct Evolution {
  std::vector<Scalar> times;
  std::vector<DensityOp<Scalar>> states;
  EvolveDiagnostics<Scalar> diagnostics;
};

// Integrates the master equation over the given time grid (which must start
// at 0 and increase strictly) and returns validated states at grid times.
template <typename Scalar>
Evolution<Scalar> evolve_master(const DensityOp<Scalar>& rho0,
                                const GeneralReduction<Scalar>& spec,
                                std::type_identity_t<std::span<const Scalar>> t_grid,
                                EvolveOptions<Scalar> opts = {}) {
  if (rho0.dim() != spec.dim()) {
    throw Error("evolve_master: state and model dimensions differ");
  }
  if (t_grid.empty() || t_grid[0] != Scalar(0)) {
    throw Error("evolve_master: time grid must start at 0");
  }

  if (opts.cap_step_by_rates) {
    Scalar cap = std::numeric_limits<Scalar>::infinity();
    if (spec.lam() > Scalar(0)) cap = std::min(cap, Scalar(1) / spec.lam());
    if (spec.hamiltonian_scale() > Scalar(0)) {
      cap = std::min(cap, Scalar(1) / spec.hamiltonian_scale());
    }
    opts.ode.max_step = std::min(opts.ode.max_step, Scalar(0.05) * cap);
  }

  Evolution<Scalar> result;
  result.times.assign(t_grid.begin(), t_grid.end());
  result.states.reserve(t_grid.size());
  DensityCheck<Scalar> check{opts.validate_tol, opts.validate_tol,
                             -opts.validate_tol};

  auto rhs = [&spec](Scalar, const CMatrix<Scalar>& y) {
    return lindblad_rhs(y, spec);
  };
  auto observe = [&](Scalar t, const CMatrix<Scalar>& y) {
    Scalar drift = std::abs(y.trace() - Complex<Scalar>(1, 0));
    Scalar herm = hermiticity_residual(y);
    Scalar min_eig = min_eigenvalue_hermitian(y);
    auto& d = result.diagnostics;
    d.max_trace_drift = std::max(d.max_trace_drift, drift);
    d.max_hermiticity_residual = std::max(d.max_hermiticity_residual, herm);
    d.min_eigenvalue = std::min(d.min_eigenvalue, min_eig);
    try {
      result.states.emplace_back(y, check);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "evolve_master: state invariant violated at t = " << t << ": "
         << e.what();
      throw Error(os.str());
    }
  };

  if (t_grid.size() == 1) {
    observe(t_grid[0], rho0.matrix());
  } else {
    result.diagnostics.ode =
        integrate_grid<Scalar>(rhs, rho0.matrix(), t_grid, opts.ode, observe);
  }
  return result;
}

// Population/coherence trajectory of a two-level evolution.
template <typename Scalar>
struct BlochRecord {
  std::vector<Scalar> times;
  std::vector<Scalar> r;
  std::vector<Scalar> re_beta;
  std::vector<Scalar> im_beta;

  static BlochRecord from_evolution(const Evolution<Scalar>& ev) {
    BlochRecord rec;
    rec.times = ev.times;
    rec.r.reserve(ev.states.size());
    rec.re_beta.reserve(ev.states.size());
    rec.im_beta.reserve(ev.states.size());
    for (const auto& st : ev.states) {
      if (st.dim() != 2) {
        throw Error("BlochRecord: two-dimensional states required");
      }
      Scalar r = st.matrix()(0, 0).real();
      Complex<Scalar> beta = st.matrix()(0, 1);
      if (r < Scalar(-1e-9) || r > Scalar(1) + Scalar(1e-9)) {
        throw Error("BlochRecord: population outside [0, 1]");
      }
      Scalar cap = std::sqrt(std::max(Scalar(0), r * (Scalar(1) - r)));
      if (std::abs(beta) > cap + Scalar(1e-9)) {
        throw Error("BlochRecord: coherence exceeds population bound");
      }
      rec.r.push_back(r);
      rec.re_beta.push_back(beta.real());
      rec.im_beta.push_back(beta.imag());
    }
    return rec;
  }
};

// Raised by the closed form at eps = 1/4 where the two relaxation rates
// collide and the two-exponential representation degenerates.
class DegenerateDelta : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
struct BlochPoint {
  Scalar r;
  Complex<Scalar> beta;
};

// Amplitudes of the fast/slow relaxation modes of x = r - 1/2 and of the
// rotated coherence component u, plus the initial pure-decay component w0:
//   x(t) = Re(c_fast e^{s_f t} + c_slow e^{s_s t}),
//   u(t) = Re(a_fast e^{s_f t} + b_slow e^{s_s t}),  w(t) = w0 e^{-lam t}.
template <typename Scalar>
struct ModeAmplitudes {
  Complex<Scalar> c_fast, c_slow;
  Complex<Scalar> a_fast, b_slow;
  Scalar w0;
  Complex<Scalar> s_fast, s_slow;
};

template <typename Scalar>
ModeAmplitudes<Scalar> two_level_mode_amplitudes(Scalar r0, Complex<Scalar> beta0,
                                                 const TwoLevelParams<Scalar>& p) {
  const Scalar eps = p.eps();
  const Scalar d2 = Scalar(1) - Scalar(16) * eps * eps;
  if (std::abs(d2) < Scalar(1e-12)) {
    throw DegenerateDelta(
        "two_level_mode_amplitudes: relaxation rates degenerate at eps = 1/4; "
        "use the ODE path");
  }
  const Complex<Scalar> delta = p.delta();
  const Complex<Scalar> one_minus = Scalar(16) * eps * eps / (Complex<Scalar>(1) + delta);
  const Complex<Scalar> one_plus = Complex<Scalar>(1) + delta;

  const Scalar x0 = r0 - Scalar(0.5);
  // u = Im(A conj(beta)), w = Re(A conj(beta)).
  const Complex<Scalar> a_beta = p.A() * std::conj(beta0);
  const Scalar u0 = a_beta.imag();
  const Scalar w0 = a_beta.real();

  ModeAmplitudes<Scalar> m;
  m.s_fast = -(p.lam() / Scalar(2)) * one_plus;
  m.s_slow = -(p.lam() / Scalar(2)) * one_minus;
  const Complex<Scalar> inv2d = Scalar(1) / (Scalar(2) * delta);
  const Complex<Scalar> eps_over_d = Scalar(2) * eps / delta;
  m.c_fast = -(one_minus * inv2d) * x0 - eps_over_d * u0;
  m.c_slow = (one_plus * inv2d) * x0 + eps_over_d * u0;
  m.a_fast = eps_over_d * x0 + (one_plus * inv2d) * u0;
  m.b_slow = -eps_over_d * x0 - (one_minus * inv2d) * u0;
  m.w0 = w0;
  return m;
}

// Closed-form solution of the two-level master equation, valid away from
// eps = 1/4. The complex mode arithmetic covers both the overdamped
// (eps < 1/4) and oscillatory (eps > 1/4) regimes; the imaginary parts of
// the reconstructed observables must cancel to within 1e-10.
template <typename Scalar>
BlochPoint<Scalar> analytic_two_level(Scalar r0, Complex<Scalar> beta0,
                                      const TwoLevelParams<Scalar>& p, Scalar t) {
  if (!(t >= Scalar(0))) throw Error("analytic_two_level: t must be >= 0");
  if (r0 < Scalar(-1e-9) || r0 > Scalar(1) + Scalar(1e-9)) {
    throw Error("analytic_two_level: r0 outside [0, 1]");
  }
  Scalar cap2 = std::max(Scalar(0), r0 * (Scalar(1) - r0));
  if (std::norm(beta0) > cap2 + Scalar(1e-9)) {
    throw Error("analytic_two_level: |beta0|^2 exceeds r0 (1 - r0)");
  }

  const ModeAmplitudes<Scalar> m = two_level_mode_amplitudes(r0, beta0, p);
  const Complex<Scalar> ef = std::exp(m.s_fast * t);
  const Complex<Scalar> es = std::exp(m.s_slow * t);
  const Complex<Scalar> xc = m.c_fast * ef + m.c_slow * es;
  const Complex<Scalar> uc = m.a_fast * ef + m.b_slow * es;
  if (std::abs(xc.imag()) > Scalar(1e-10) || std::abs(uc.imag()) > Scalar(1e-10)) {
    throw Error("analytic_two_level: imaginary residue exceeds 1e-10");
  }
  const Scalar x = xc.real();
  const Scalar u = uc.real();
  const Scalar w = m.w0 * std::exp(-p.lam() * t);

  BlochPoint<Scalar> out;
  out.r = Scalar(0.5) + x;
  // beta = A (w - i u).
  const Complex<Scalar> beta = p.A() * Complex<Scalar>(w, -u);
  out.beta = beta;
  return out;
}

// Raised when the stationary state is not unique; carries the dimension of
// the stationary subspace so the caller can decide how to proceed.
class NonUniqueSteadyState : public Error {
 public:
  NonUniqueSteadyState(const std::string& msg, int null_dimension)
      : Error(msg), null_dimension_(null_dimension) {}
  int null_dimension() const { return null_dimension_; }

 private:
  int null_dimension_;
};

// Stationary density operator from the null space of the vectorized
// generator; vec(A rho B) = (B^T (x) A) vec(rho) with column-major vec.
template <typename Scalar>
DensityOp<Scalar> steady_state(const GeneralReduction<Scalar>& spec,
                               Scalar sv_rel_tol = Scalar(1e-10)) {
  const Eigen::Index n = spec.dim();
  const Eigen::Index n2 = n * n;
  const CMatrix<Scalar> id = CMatrix<Scalar>::Identity(n, n);
  const CMatrix<Scalar> ht = spec.hamiltonian().transpose();

  CMatrix<Scalar> L = Complex<Scalar>(0, -1) *
                      (kron<Scalar>(id, spec.hamiltonian()) - kron<Scalar>(ht, id));
  for (std::size_t k = 0; k < spec.family().size(); ++k) {
    const CMatrix<Scalar>& q = spec.family().projector(k);
    L += spec.lam() * kron<Scalar>(q.transpose(), q);
  }
  L -= spec.lam() * CMatrix<Scalar>::Identity(n2, n2);

  Eigen::JacobiSVD<CMatrix<Scalar>> svd(L, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Scalar threshold = std::max(sv(0) * sv_rel_tol,
                                    std::numeric_limits<Scalar>::min());
  int null_dim = 0;
  for (Eigen::Index i = 0; i < n2; ++i) {
    if (sv(i) <= threshold) ++null_dim;
  }
  if (null_dim == 0) {
    throw Error("steady_state: no stationary state found");
  }
  if (null_dim > 1) {
    std::ostringstream os;
    os << "steady_state: stationary state not unique (null space dimension "
       << null_dim << ")";
    throw NonUniqueSteadyState(os.str(), null_dim);
  }

  CMatrix<Scalar> raw =
      Eigen::Map<const CMatrix<Scalar>>(svd.matrixV().col(n2 - 1).data(), n, n);
  // The kernel is closed under the adjoint, so one of the two Hermitian
  // combinations carries the state.
  CMatrix<Scalar> h1 = (raw + raw.adjoint()) / Scalar(2);
  CMatrix<Scalar> h2 = (raw - raw.adjoint()) / Complex<Scalar>(0, 2);
  bool use_first = h1.norm() >= h2.norm();
  CMatrix<Scalar> pick = use_first ? h1 : h2;
  Scalar tr = pick.trace().real();
  if (std::abs(tr) < Scalar(1e-10) * pick.norm()) {
    pick = use_first ? h2 : h1;
    tr = pick.trace().real();
    if (std::abs(tr) < Scalar(1e-10) * pick.norm()) {
      throw Error("steady_state: stationary element has vanishing trace");
    }
  }
  CMatrix<Scalar> rho = pick / tr;

  Scalar residual = Scalar(lindblad_rhs(rho, spec).norm());
  Scalar scale = Scalar(1) + spec.lam() + spec.hamiltonian_scale();
  if (residual > Scalar(1e-10) * scale) {
    std::ostringstream os;
    os << "steady_state: generator residual " << residual
       << " too large for scale " << scale;
    throw Error(os.str());
  }
  return DensityOp<Scalar>(std::move(rho));
}

// Raised when no time window exists in which the fast mode has died while
// the slow drift has not yet set in.
class NoPlateau : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
struct RegimeWindow {
  Scalar t_min;
  Scalar t_max;
};

// Window (10/lam, 0.1/(4 lam eps^2)) in which the reduction has completed
// but the slow relaxation is still negligible. Empty exactly when
// eps >= 0.05; unbounded above when eps = 0.
template <typename Scalar>
RegimeWindow<Scalar> regime_window(const TwoLevelParams<Scalar>& p) {
  RegimeWindow<Scalar> w;
  w.t_min = Scalar(10) / p.lam();
  const Scalar eps = p.eps();
  w.t_max = eps > Scalar(0)
                ? Scalar(0.1) / (Scalar(4) * p.lam() * eps * eps)
                : std::numeric_limits<Scalar>::infinity();
  if (!(w.t_min < w.t_max)) {
    std::ostringstream os;
    os << "regime_window: no reduction plateau at eps = " << eps;
    throw NoPlateau(os.str());
  }
  return w;
}

// First-order plateau population for the superposition a|+> + b|-> (pure)
// or the corresponding diagonal mixture. Only meaningful inside the plateau
// window; throws NoPlateau when that window is empty.
template <typename Scalar>
Scalar first_order_r(const TwoLevelParams<Scalar>& p, Complex<Scalar> a,
                     Complex<Scalar> b, bool pure) {
  if (std::abs(std::norm(a) + std::norm(b) - Scalar(1)) >
      default_equality_tol<Scalar>()) {
    throw Error("first_order_r: |a|^2 + |b|^2 must equal 1");
  }
  regime_window(p);
  const Scalar pop = std::norm(a);
  if (!pure) return pop;
  const Complex<Scalar> ab = a * std::conj(b);
  return pop - Scalar(2) * p.eps() *
                   (p.A().real() * ab.imag() - p.A().imag() * ab.real());
}

}  // namespace dynred
