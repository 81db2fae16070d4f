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

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynred/core.hpp"

namespace dynred {

// Normalized state vector. Construction validates the norm.
template <typename Scalar>
class PureState {
 public:
  explicit PureState(CVector<Scalar> amplitudes,
                     Scalar norm_tol = default_equality_tol<Scalar>())
      : amp_(std::move(amplitudes)) {
    if (amp_.size() == 0) throw Error("PureState: empty amplitude vector");
    if (!all_finite(amp_)) throw Error("PureState: non-finite amplitude");
    Scalar n = amp_.norm();
    if (std::abs(n - Scalar(1)) > norm_tol) {
      std::ostringstream os;
      os << "PureState: norm " << n << " deviates from 1 beyond " << norm_tol;
      throw Error(os.str());
    }
  }

  static PureState basis(Eigen::Index dim, Eigen::Index k) {
    if (k < 0 || k >= dim) throw Error("PureState::basis: index out of range");
    CVector<Scalar> v = CVector<Scalar>::Zero(dim);
    v(k) = Complex<Scalar>(1, 0);
    return PureState(std::move(v));
  }

  // a|0> + b|1> in the two-dimensional case.
  static PureState superposition(Complex<Scalar> a, Complex<Scalar> b,
                                 Scalar norm_tol = default_equality_tol<Scalar>()) {
    CVector<Scalar> v(2);
    v << a, b;
    return PureState(std::move(v), norm_tol);
  }

  Eigen::Index dim() const { return amp_.size(); }
  const CVector<Scalar>& amplitudes() const { return amp_; }
  Complex<Scalar> operator[](Eigen::Index i) const { return amp_(i); }

 private:
  CVector<Scalar> amp_;
};

// Tolerances for validating a density operator: Hermiticity and unit trace
// as absolute residuals, and a floor on the smallest eigenvalue.
template <typename Scalar>
struct DensityCheck {
  Scalar hermitian_tol = Scalar(1e-12);
  Scalar trace_tol = Scalar(1e-12);
  Scalar eigen_floor = Scalar(-1e-10);
};

// Density operator. Construction enforces Hermiticity, unit trace and
// positivity up to the supplied tolerances; violations raise Error.
template <typename Scalar>
class DensityOp {
 public:
  explicit DensityOp(CMatrix<Scalar> mat, const DensityCheck<Scalar>& check = {})
      : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
      throw Error("DensityOp: matrix must be square and non-empty");
    }
    if (!all_finite(mat_)) throw Error("DensityOp: non-finite entry");
    Scalar herm = hermiticity_residual(mat_);
    if (herm > check.hermitian_tol) {
      std::ostringstream os;
      os << "DensityOp: Hermiticity residual " << herm << " exceeds "
         << check.hermitian_tol;
      throw Error(os.str());
    }
    Complex<Scalar> tr = mat_.trace();
    if (std::abs(tr - Complex<Scalar>(1, 0)) > check.trace_tol) {
      std::ostringstream os;
      os << "DensityOp: trace (" << tr.real() << "," << tr.imag()
         << ") deviates from 1 beyond " << check.trace_tol;
      throw Error(os.str());
    }
    Scalar min_eig = min_eigenvalue_hermitian(mat_);
    if (min_eig < check.eigen_floor) {
      std::ostringstream os;
      os << "DensityOp: smallest eigenvalue " << min_eig << " below floor "
         << check.eigen_floor;
      throw Error(os.str());
    }
  }

  Eigen::Index dim() const { return mat_.rows(); }
  const CMatrix<Scalar>& matrix() const { return mat_; }

 private:
  CMatrix<Scalar> mat_;
};

template <typename Scalar>
DensityOp<Scalar> density_from_pure(const PureState<Scalar>& psi) {
  CMatrix<Scalar> m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityOp<Scalar>(std::move(m));
}

// Upper-level population and coherence of a two-dimensional density matrix.
template <typename Scalar>
Scalar bloch_r(const DensityOp<Scalar>& rho) {
  if (rho.dim() != 2) throw Error("bloch_r: two-dimensional operator required");
  return rho.matrix()(0, 0).real();
}

template <typename Scalar>
Complex<Scalar> bloch_beta(const DensityOp<Scalar>& rho) {
  if (rho.dim() != 2) throw Error("bloch_beta: two-dimensional operator required");
  return rho.matrix()(0, 1);
}

// Complete family of mutually orthogonal projectors. Construction verifies
// idempotence, Hermiticity, pairwise orthogonality and completeness.
template <typename Scalar>
class ProjectorFamily {
 public:
  ProjectorFamily(std::vector<CMatrix<Scalar>> projectors,
                  std::vector<std::string> labels, Scalar tol = Scalar(1e-10))
      : projectors_(std::move(projectors)), labels_(std::move(labels)) {
    if (projectors_.empty()) throw Error("ProjectorFamily: empty family");
    if (labels_.size() != projectors_.size()) {
      throw Error("ProjectorFamily: one label per projector required");
    }
    const Eigen::Index n = projectors_[0].rows();
    CMatrix<Scalar> sum = CMatrix<Scalar>::Zero(n, n);
    for (std::size_t k = 0; k < projectors_.size(); ++k) {
      const CMatrix<Scalar>& q = projectors_[k];
      if (q.rows() != n || q.cols() != n) {
        throw Error("ProjectorFamily: dimension mismatch in projector '" +
                    labels_[k] + "'");
      }
      if (hermiticity_residual(q) > tol) {
        throw Error("ProjectorFamily: projector '" + labels_[k] +
                    "' is not Hermitian");
      }
      if (frobenius_distance<Scalar>(q * q, q) > tol) {
        throw Error("ProjectorFamily: projector '" + labels_[k] +
                    "' is not idempotent");
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (Scalar((projectors_[j] * q).norm()) > tol) {
          throw Error("ProjectorFamily: projectors '" + labels_[j] + "' and '" +
                      labels_[k] + "' are not orthogonal");
        }
      }
      sum += q;
    }
    if (frobenius_distance<Scalar>(sum, CMatrix<Scalar>::Identity(n, n)) > tol) {
      throw Error("ProjectorFamily: projectors do not sum to the identity");
    }
  }

  std::size_t size() const { return projectors_.size(); }
  Eigen::Index dim() const { return projectors_[0].rows(); }
  const CMatrix<Scalar>& projector(std::size_t k) const { return projectors_[k]; }
  const std::string& label(std::size_t k) const { return labels_[k]; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<CMatrix<Scalar>> projectors_;
  std::vector<std::string> labels_;
};

// The two rank-one projectors onto the basis states of a two-level system.
template <typename Scalar>
ProjectorFamily<Scalar> two_level_projectors() {
  CMatrix<Scalar> p0 = CMatrix<Scalar>::Zero(2, 2);
  CMatrix<Scalar> p1 = CMatrix<Scalar>::Zero(2, 2);
  p0(0, 0) = Complex<Scalar>(1, 0);
  p1(1, 1) = Complex<Scalar>(1, 0);
  return ProjectorFamily<Scalar>({p0, p1}, {"plus", "minus"});
}

// Two rank-two projectors splitting a four-dimensional space into the spans
// of the first and last two basis vectors.
template <typename Scalar>
ProjectorFamily<Scalar> two_manifold_projectors_4d() {
  CMatrix<Scalar> q1 = CMatrix<Scalar>::Zero(4, 4);
  CMatrix<Scalar> q2 = CMatrix<Scalar>::Zero(4, 4);
  q1(0, 0) = q1(1, 1) = Complex<Scalar>(1, 0);
  q2(2, 2) = q2(3, 3) = Complex<Scalar>(1, 0);
  return ProjectorFamily<Scalar>({q1, q2}, {"manifold1", "manifold2"});
}

// H = omega * [[0, A], [conj(A), 0]] with |A| = 1 (hbar = 1).
template <typename Scalar>
CMatrix<Scalar> make_two_level_hamiltonian(Scalar omega, Complex<Scalar> A) {
  if (!(omega >= Scalar(0))) {
    throw Error("make_two_level_hamiltonian: omega must be >= 0");
  }
  if (std::abs(std::abs(A) - Scalar(1)) > default_equality_tol<Scalar>()) {
    throw Error("make_two_level_hamiltonian: |A| must equal 1");
  }
  CMatrix<Scalar> h(2, 2);
  h << Complex<Scalar>(0, 0), omega * A, omega * std::conj(A),
      Complex<Scalar>(0, 0);
  return h;
}

// Matrix elements of a single projector between the two branch states of a
// superposition a|phi> + b|chi>.
template <typename Scalar>
struct ProjectorElements {
  Complex<Scalar> phi_phi;
  Complex<Scalar> chi_chi;
  Complex<Scalar> phi_chi;  // <phi|P|chi>
};

// Expectation of a projector in the mixture |a|^2 |phi><phi| + |b|^2 |chi><chi|.
template <typename Scalar>
Scalar mixture_expectation(Complex<Scalar> a, Complex<Scalar> b,
                           const ProjectorElements<Scalar>& elems) {
  return std::norm(a) * elems.phi_phi.real() + std::norm(b) * elems.chi_chi.real();
}

// Expectation of a projector in the superposition a|phi>|E_phi> + b|chi>|E_chi>
// after tracing out the second factor; env_overlap = <E_phi|E_chi>.
// The interference term vanishes identically when env_overlap = 0.
template <typename Scalar>
Scalar projector_expectation(Complex<Scalar> a, Complex<Scalar> b,
                             const ProjectorElements<Scalar>& elems,
                             Complex<Scalar> env_overlap) {
  if (std::abs(std::norm(a) + std::norm(b) - Scalar(1)) >
      default_equality_tol<Scalar>()) {
    throw Error("projector_expectation: |a|^2 + |b|^2 must equal 1");
  }
  if (std::abs(env_overlap) > Scalar(1) + default_equality_tol<Scalar>()) {
    throw Error("projector_expectation: |env_overlap| must be <= 1");
  }
  Scalar mixture = mixture_expectation(a, b, elems);
  Scalar interference =
      Scalar(2) * (std::conj(a) * b * elems.phi_chi * env_overlap).real();
  return mixture + interference;
}

}  // namespace dynred
