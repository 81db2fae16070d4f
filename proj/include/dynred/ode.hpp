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
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <type_traits>

#include "dynred/core.hpp"

namespace dynred {

template <typename Scalar>
struct OdeOptions {
  Scalar rel_tol = Scalar(1e-10);
  Scalar abs_tol = Scalar(1e-12);
  Scalar max_step = std::numeric_limits<Scalar>::infinity();
  std::uint64_t max_steps = 50'000'000;
};

struct OdeStats {
  std::uint64_t n_accepted = 0;
  std::uint64_t n_rejected = 0;
};

namespace detail {

// Scaled max-norm of the embedded error estimate; <= 1 means acceptable.
template <typename Scalar>
Scalar error_ratio(const CMatrix<Scalar>& err, const CMatrix<Scalar>& y0,
                   const CMatrix<Scalar>& y1, const OdeOptions<Scalar>& opts) {
  Scalar worst = Scalar(0);
  for (Eigen::Index j = 0; j < err.cols(); ++j) {
    for (Eigen::Index i = 0; i < err.rows(); ++i) {
      Scalar scale = opts.abs_tol +
                     opts.rel_tol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
      worst = std::max(worst, std::abs(err(i, j)) / scale);
    }
  }
  return worst;
}

}  // namespace detail

// Dormand-Prince 5(4) with the first-same-as-last evaluation reuse.
// Integrates y' = rhs(t, y) from t_grid.front() and invokes
// observe(t_grid[i], y) at every grid time, including the first.
// The grid must be strictly increasing. Steps are clamped so each grid
// time is hit exactly; the controller step survives across grid points.
template <typename Scalar, typename Rhs, typename Observer>
OdeStats integrate_grid(Rhs&& rhs, CMatrix<Scalar> y,
                        std::type_identity_t<std::span<const Scalar>> t_grid,
                        const OdeOptions<Scalar>& opts, Observer&& observe) {
  if (t_grid.size() < 2) throw Error("integrate_grid: at least two grid times required");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw Error("integrate_grid: grid times must be strictly increasing");
    }
  }
  if (!(opts.rel_tol > Scalar(0)) || !(opts.abs_tol > Scalar(0))) {
    throw Error("integrate_grid: tolerances must be positive");
  }

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // Difference between the fifth- and fourth-order weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;

  OdeStats stats;
  Scalar t = t_grid[0];
  observe(t, y);

  const Scalar span = t_grid.back() - t_grid.front();
  Scalar h = std::min(opts.max_step, span / Scalar(100));
  CMatrix<Scalar> k1 = rhs(t, y);
  if (!all_finite(k1)) throw Error("integrate_grid: non-finite derivative at start");

  for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
    const Scalar t_target = t_grid[gi];
    while (t < t_target) {
      if (stats.n_accepted + stats.n_rejected >= opts.max_steps) {
        std::ostringstream os;
        os << "integrate_grid: step budget " << opts.max_steps
           << " exhausted at t = " << t;
        throw Error(os.str());
      }
      const bool clamped = t_target - t <= h;
      Scalar h_try = clamped ? t_target - t : h;
      // Underflow guards the controller step only; a clamped sliver is
      // legitimate and always reaches t_target on acceptance.
      if (!clamped &&
          !(h_try > Scalar(16) * std::numeric_limits<Scalar>::epsilon() *
                        std::max(std::abs(t), Scalar(1)))) {
        std::ostringstream os;
        os << "integrate_grid: step underflow at t = " << t;
        throw Error(os.str());
      }

      CMatrix<Scalar> k2 = rhs(t + c2 * h_try, (y + h_try * (Scalar(a21) * k1)).eval());
      CMatrix<Scalar> k3 = rhs(t + c3 * h_try,
                               (y + h_try * (Scalar(a31) * k1 + Scalar(a32) * k2)).eval());
      CMatrix<Scalar> k4 = rhs(
          t + c4 * h_try,
          (y + h_try * (Scalar(a41) * k1 + Scalar(a42) * k2 + Scalar(a43) * k3)).eval());
      CMatrix<Scalar> k5 =
          rhs(t + c5 * h_try, (y + h_try * (Scalar(a51) * k1 + Scalar(a52) * k2 +
                                            Scalar(a53) * k3 + Scalar(a54) * k4))
                                  .eval());
      CMatrix<Scalar> k6 =
          rhs(t + h_try, (y + h_try * (Scalar(a61) * k1 + Scalar(a62) * k2 +
                                       Scalar(a63) * k3 + Scalar(a64) * k4 +
                                       Scalar(a65) * k5))
                             .eval());
      CMatrix<Scalar> y_new =
          y + h_try * (Scalar(b1) * k1 + Scalar(b3) * k3 + Scalar(b4) * k4 +
                       Scalar(b5) * k5 + Scalar(b6) * k6);
      CMatrix<Scalar> k7 = rhs(t + h_try, y_new);
      CMatrix<Scalar> err =
          h_try * (Scalar(e1) * k1 + Scalar(e3) * k3 + Scalar(e4) * k4 +
                   Scalar(e5) * k5 + Scalar(e6) * k6 + Scalar(e7) * k7);

      bool finite = all_finite(y_new) && all_finite(err);
      Scalar ratio = finite
                         ? detail::error_ratio(err, y, y_new, opts)
                         : std::numeric_limits<Scalar>::infinity();
      if (ratio <= Scalar(1)) {
        t = clamped ? t_target : t + h_try;
        y.swap(y_new);
        k1.swap(k7);
        ++stats.n_accepted;
        Scalar grow = std::isfinite(ratio) && ratio > Scalar(0)
                          ? Scalar(0.9) * std::pow(ratio, Scalar(-0.2))
                          : Scalar(5);
        Scalar candidate = h_try * std::clamp(grow, Scalar(0.2), Scalar(5));
        // A grid-clamped step must not drag the controller step down.
        h = std::min(opts.max_step, clamped ? std::max(h, candidate) : candidate);
      } else {
        ++stats.n_rejected;
        Scalar shrink = std::isfinite(ratio)
                            ? Scalar(0.9) * std::pow(ratio, Scalar(-0.2))
                            : Scalar(0.2);
        h = h_try * std::clamp(shrink, Scalar(0.1), Scalar(0.9));
      }
    }
    observe(t_target, y);
  }
  return stats;
}

}  // namespace dynred
