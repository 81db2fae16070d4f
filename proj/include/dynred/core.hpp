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
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dynred {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrixd = CMatrix<double>;
using CVectord = CVector<double>;
using RMatrixd = RMatrix<double>;
using RVectord = RVector<double>;
using Complexd = Complex<double>;

// Base class for all failures raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
inline constexpr Scalar default_equality_tol() {
  return Scalar(1e-12);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// Entrywise comparison with an absolute tolerance.
template <typename Scalar>
bool approx_equal(const CMatrix<Scalar>& a, const CMatrix<Scalar>& b,
                  Scalar tol = default_equality_tol<Scalar>()) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return ((a - b).cwiseAbs().maxCoeff() <= tol);
}

template <typename Scalar>
Scalar frobenius_distance(const CMatrix<Scalar>& a, const CMatrix<Scalar>& b) {
  return (a - b).norm();
}

template <typename Scalar>
Scalar hermiticity_residual(const CMatrix<Scalar>& a) {
  return (a - a.adjoint()).norm();
}

template <typename Scalar>
bool is_hermitian(const CMatrix<Scalar>& a,
                  Scalar tol = default_equality_tol<Scalar>()) {
  return a.rows() == a.cols() && hermiticity_residual(a) <= tol;
}

// Smallest eigenvalue of the Hermitian part of a.
template <typename Scalar>
Scalar min_eigenvalue_hermitian(const CMatrix<Scalar>& a) {
  CMatrix<Scalar> h = (a + a.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(h,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error("eigenvalue computation failed");
  }
  return es.eigenvalues().minCoeff();
}

template <typename Scalar>
CMatrix<Scalar> kron(const CMatrix<Scalar>& a, const CMatrix<Scalar>& b) {
  CMatrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Spectral norm (largest singular value); used to scale integration steps.
template <typename Scalar>
Scalar spectral_norm(const CMatrix<Scalar>& a) {
  if (a.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<CMatrix<Scalar>> svd(a);
  return svd.singularValues()(0);
}

}  // namespace dynred
