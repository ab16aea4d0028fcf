// SPDX-License-Identifier: Apache-2.0
//
// bios-htt: channel estimation and beamforming for bilayer omni-surfaces
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Optimization over the manifold of complex m x n matrices of fixed rank r,
// using the embedded geometry with SVD factors X = U diag(s) V^H.
//
// Tangent vectors at X are parameterized as
//   xi = U M V^H + Up V^H + U Vp^H,   U^H Up = 0,  V^H Vp = 0,
// and the metric is the real Frobenius inner product Re tr(A^H B). The
// retraction is the rank-r truncated SVD of X + t xi.

#pragma once

#include "bios/rng.hpp"
#include "bios/types.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bios {

struct FixedRankPoint {
  CMat u;      // m x r, orthonormal columns
  RVec sigma;  // r, positive, descending
  CMat v;      // n x r, orthonormal columns

  int rank() const { return static_cast<int>(sigma.size()); }
  Eigen::Index rows() const { return u.rows(); }
  Eigen::Index cols() const { return v.rows(); }
  CMat matrix() const { return u * sigma.asDiagonal() * v.adjoint(); }
};

/// Singular values below this fraction of sigma_max are lifted to it so the
/// point stays on the rank-r manifold.
inline constexpr double kRankGuard = 1e-12;

/// Rank-r truncated SVD of a dense matrix.
inline FixedRankPoint truncate_to_rank(const CMat &x, int rank) {
  require(rank >= 1, "truncate_to_rank: rank must be >= 1");
  require(rank <= std::min(x.rows(), x.cols()), "truncate_to_rank: rank exceeds matrix size");
  Eigen::JacobiSVD<CMat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FixedRankPoint p{svd.matrixU().leftCols(rank), svd.singularValues().head(rank),
                   svd.matrixV().leftCols(rank)};
  const double smax = p.sigma(0) > 0 ? p.sigma(0) : 1.0;
  const double floor = kRankGuard * smax;
  for (int i = 0; i < rank; ++i)
    if (p.sigma(i) < floor) p.sigma(i) = floor;
  return p;
}

/// Gaussian factors orthonormalized by QR, unit spectrum.
inline FixedRankPoint random_fixed_rank(Rng &rng, Eigen::Index rows, Eigen::Index cols, int rank) {
  require(rank >= 1 && rank <= std::min(rows, cols), "random_fixed_rank: invalid rank");
  auto orthonormal = [&](Eigen::Index n) {
    const CMat g = complex_normal_matrix(rng, n, rank);
    Eigen::HouseholderQR<CMat> qr(g);
    return CMat(qr.householderQ() * CMat::Identity(n, rank));
  };
  FixedRankPoint p;
  p.u = orthonormal(rows);
  p.v = orthonormal(cols);
  p.sigma = RVec::Ones(rank);
  return p;
}

struct TangentVector {
  CMat m;  // r x r
  CMat up; // m x r
  CMat vp; // n x r

  CMat ambient(const FixedRankPoint &x) const {
    return x.u * m * x.v.adjoint() + up * x.v.adjoint() + x.u * vp.adjoint();
  }
  double squared_norm() const { return m.squaredNorm() + up.squaredNorm() + vp.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }

  TangentVector operator*(double a) const { return {a * m, a * up, a * vp}; }
  TangentVector operator+(const TangentVector &o) const { return {m + o.m, up + o.up, vp + o.vp}; }
  TangentVector operator-() const { return {-m, -up, -vp}; }
};

inline double inner(const TangentVector &a, const TangentVector &b) {
  return frob_inner(a.m, b.m).real() + frob_inner(a.up, b.up).real() +
         frob_inner(a.vp, b.vp).real();
}

/// Orthogonal projection of an ambient matrix onto the tangent space at x.
inline TangentVector project_tangent(const FixedRankPoint &x, const CMat &z) {
  require(z.rows() == x.rows() && z.cols() == x.cols(), "project_tangent: shape mismatch");
  const CMat zv = z * x.v;
  const CMat zhu = z.adjoint() * x.u;
  TangentVector t;
  t.m = x.u.adjoint() * zv;
  t.up = zv - x.u * t.m;
  t.vp = zhu - x.v * t.m.adjoint();
  return t;
}

inline FixedRankPoint retract(const FixedRankPoint &x, const TangentVector &xi, double step) {
  require(step > 0, "retract: step must be > 0");
  return truncate_to_rank(x.matrix() + step * xi.ambient(x), x.rank());
}

enum class SearchDirection { gradient, conjugate_gradient };

enum class StopReason { relative_decrease, gradient_norm, max_iterations, line_search_failed };

inline const char *to_string(StopReason r) {
  switch (r) {
  case StopReason::relative_decrease: return "relative_decrease";
  case StopReason::gradient_norm: return "gradient_norm";
  case StopReason::max_iterations: return "max_iterations";
  case StopReason::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

struct ArmijoOptions {
  int max_iterations = 200;
  double relative_decrease_tol = 1e-6;
  double gradient_tol = 1e-12;
  double sufficient_decrease = 1e-4; // c
  double backtrack = 0.5;            // beta
  int max_backtracks = 25;
  double initial_step = 1.0;
  bool barzilai_borwein = true;
  SearchDirection direction = SearchDirection::gradient;
};

struct MinimizeResult {
  FixedRankPoint x;
  double f = 0.0;
  std::vector<double> trace; // f(x0) followed by every accepted iterate
  int iterations = 0;
  double grad_norm = 0.0;
  StopReason reason = StopReason::max_iterations;
};

namespace detail {

inline void check_finite(double v, const char *what, int iteration) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "armijo_minimize: non-finite " << what << " at iteration " << iteration;
    throw std::runtime_error(os.str());
  }
}

} // namespace detail

/// Riemannian descent with Armijo backtracking on the fixed-rank manifold.
///
/// `objective(X)` returns f at the dense matrix X; `egrad(X)` returns the
/// Euclidean gradient with respect to Re tr(A^H B) (for a real function of a
/// complex matrix this is twice the conjugate Wirtinger derivative).
///
/// Every accepted step satisfies f(R(x, t d)) <= f(x) + c t <grad, d>, so the
/// trace is non-increasing.
template <class Objective, class Gradient>
MinimizeResult armijo_minimize(Objective &&objective, Gradient &&egrad, FixedRankPoint x0,
                               const ArmijoOptions &opt = {}) {
  MinimizeResult res;
  res.x = std::move(x0);
  CMat xmat = res.x.matrix();
  double fx = objective(xmat);
  detail::check_finite(fx, "objective", 0);
  res.trace.push_back(fx);

  CMat egrad_x = egrad(xmat);
  TangentVector grad = project_tangent(res.x, egrad_x);
  double gnorm2 = grad.squared_norm();
  detail::check_finite(gnorm2, "gradient", 0);

  TangentVector dir = -grad;
  double step0 = opt.initial_step;
  CMat prev_x_amb, prev_g_amb;
  bool have_prev = false;

  res.reason = StopReason::max_iterations;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (std::sqrt(gnorm2) <= opt.gradient_tol) {
      res.reason = StopReason::gradient_norm;
      break;
    }
    double slope = inner(grad, dir);
    if (!(slope < 0)) {
      dir = -grad;
      slope = -gnorm2;
    }

    if (opt.barzilai_borwein && have_prev) {
      const CMat s = xmat - prev_x_amb;
      const CMat y = grad.ambient(res.x) - prev_g_amb;
      const double sy = frob_inner(s, y).real();
      const double ss = s.squaredNorm();
      if (sy > 0 && ss > 0) {
        // BB1 length along the steepest-descent scale, rescaled to dir.
        step0 = (ss / sy) * std::sqrt(gnorm2 / dir.squared_norm());
      }
    }
    if (!(step0 > 0) || !std::isfinite(step0)) step0 = opt.initial_step;

    double t = step0;
    FixedRankPoint cand;
    double fc = 0.0;
    bool accepted = false;
    for (int b = 0; b <= opt.max_backtracks; ++b) {
      cand = retract(res.x, dir, t);
      fc = objective(cand.matrix());
      if (std::isfinite(fc) && fc <= fx + opt.sufficient_decrease * t * slope) {
        accepted = true;
        break;
      }
      t *= opt.backtrack;
    }
    if (!accepted) {
      res.reason = StopReason::line_search_failed;
      break;
    }

    prev_x_amb = xmat;
    prev_g_amb = grad.ambient(res.x);
    const CMat prev_d_amb = dir.ambient(res.x);
    have_prev = true;

    const double f_prev = fx;
    res.x = std::move(cand);
    xmat = res.x.matrix();
    fx = fc;
    res.trace.push_back(fx);
    res.iterations = it + 1;

    egrad_x = egrad(xmat);
    TangentVector new_grad = project_tangent(res.x, egrad_x);
    const double new_gnorm2 = new_grad.squared_norm();
    detail::check_finite(new_gnorm2, "gradient", it + 1);

    if (opt.direction == SearchDirection::conjugate_gradient) {
      // Polak-Ribiere+ with transport by projection onto the new tangent space.
      const TangentVector old_grad_t = project_tangent(res.x, prev_g_amb);
      const double beta =
          std::max(0.0, (new_gnorm2 - inner(new_grad, old_grad_t)) / std::max(gnorm2, 1e-300));
      dir = -new_grad + project_tangent(res.x, prev_d_amb) * beta;
    } else {
      dir = -new_grad;
    }
    grad = std::move(new_grad);
    gnorm2 = new_gnorm2;
    step0 = t / opt.backtrack; // allow the next search to grow again

    const double denom = std::max(std::abs(f_prev), std::numeric_limits<double>::min());
    if ((f_prev - fx) / denom < opt.relative_decrease_tol) {
      res.reason = StopReason::relative_decrease;
      break;
    }
  }
  res.f = fx;
  res.grad_norm = std::sqrt(gnorm2);
  return res;
}

} // namespace bios
