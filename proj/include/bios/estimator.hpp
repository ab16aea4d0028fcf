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

// Two-timescale channel estimation on fixed-rank manifolds.
//
// Large timescale: a refraction-side UE sends T_G pilots and (G, H_kc) are
// estimated by alternating rank-constrained, l1-regularized least squares.
// Small timescale: with G fixed, every H_k is estimated from T_H pilots.
//
// Gradient conventions: the egrad_* functions return the conjugate
// Wirtinger derivative d f / d X^*. The steepest-ascent direction for the
// real inner product Re tr(A^H B) is twice that, which is what the manifold
// solver consumes.

#pragma once

#include "bios/geometry.hpp"
#include "bios/manifold.hpp"
#include "bios/signal.hpp"
#include "bios/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bios {

enum class SmallInit { random, spectral };

struct EstimationConfig {
  int t_g = 900;
  int t_h = 120;
  int tau = 4;
  int rank_g = 5; // P
  int rank_h = 5; // Q
  /// Negative values select the noise-scaled default, see default_upsilon.
  double upsilon_g = -1.0;
  double upsilon_h = -1.0;
  double upsilon_scale = 1.0;
  double outer_tol = 1e-4;
  int outer_max = 50;
  int inner_max = 20;
  ArmijoOptions small{};
  SmallInit small_init = SmallInit::random;
  SearchDirection direction = SearchDirection::gradient;

  void validate() const {
    require(t_g >= 1, "estimation.t_g must be >= 1");
    require(t_h >= 1, "estimation.t_h must be >= 1");
    require(tau >= 1, "estimation.tau must be >= 1");
    require(rank_g >= 1, "estimation.rank_g must be >= 1");
    require(rank_h >= 1, "estimation.rank_h must be >= 1");
    require(upsilon_scale >= 0, "estimation.upsilon_scale must be >= 0");
    require(outer_tol >= 0, "estimation.outer_tol must be >= 0");
    require(outer_max >= 1, "estimation.outer_max must be >= 1");
    require(inner_max >= 1, "estimation.inner_max must be >= 1");
  }
};

/// upsilon = c sigma^2 sqrt(log(dictionary size)).
inline double default_upsilon(double noise_variance, double dictionary_size, double c = 1.0) {
  require(dictionary_size >= 1, "default_upsilon: dictionary size must be >= 1");
  return c * noise_variance * std::sqrt(std::log(dictionary_size));
}

inline double resolve_upsilon_g(const EstimationConfig &cfg, double noise_variance,
                                const Dictionaries &d) {
  if (cfg.upsilon_g >= 0) return cfg.upsilon_g;
  return default_upsilon(noise_variance, static_cast<double>(d.a_bs.cols() * d.a_i.cols()),
                         cfg.upsilon_scale);
}

inline double resolve_upsilon_h(const EstimationConfig &cfg, double noise_variance,
                                const Dictionaries &d) {
  if (cfg.upsilon_h >= 0) return cfg.upsilon_h;
  return default_upsilon(noise_variance, static_cast<double>(d.a_i.cols() * d.a_ue.cols()),
                         cfg.upsilon_scale);
}

// ---------------------------------------------------------------- l1 term

/// Y_ij = T_ij / |T_ij| with T = A_left^H X A_right; zero where |T_ij| < 1e-12.
inline CMat sign_matrix(const CMat &x, const CMat &a_left, const CMat &a_right) {
  require(a_left.rows() == x.rows() && x.cols() == a_right.rows(), "sign_matrix: shape mismatch");
  CMat y = a_left.adjoint() * x * a_right;
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double a = std::abs(y(i, j));
      y(i, j) = a < 1e-12 ? cd{0.0, 0.0} : y(i, j) / a;
    }
  return y;
}

struct L1Penalty {
  CMat a_left;
  CMat a_right;
  double weight = 0.0;

  double value(const CMat &x) const {
    if (weight == 0.0) return 0.0;
    return weight * l1_norm(a_left.adjoint() * x * a_right);
  }
  /// Wirtinger (sub)gradient: (w / 2) A_left Y A_right^H.
  CMat wgrad(const CMat &x) const {
    if (weight == 0.0) return CMat::Zero(x.rows(), x.cols());
    return 0.5 * weight * (a_left * sign_matrix(x, a_left, a_right) * a_right.adjoint());
  }
};

// ------------------------------------------------------- quadratic models

/// f(X) = c - 2 Re tr(B^H X) + tr(X P X^H), i.e. sum_t ||r_t - X u_t||^2
/// with B = sum r_t u_t^H, P = sum u_t u_t^H, c = sum ||r_t||^2.
struct RightGramModel {
  CMat b;
  CMat p;
  double c = 0.0;

  double value(const CMat &x) const {
    return std::max(0.0, c - 2.0 * frob_inner(b, x).real() + frob_inner(x, x * p).real());
  }
  CMat wgrad(const CMat &x) const { return x * p - b; }
};

/// f(X) = c - 2 Re(b^H x) + x^H Q x with x = vec(X), i.e.
/// sum_t ||r_t - C_t X s_t||^2 with Q = sum (conj(s_t) s_t^T) kron (C_t^H C_t).
struct VecGramModel {
  CMat q;
  CVec b;
  double c = 0.0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  double value(const CMat &x) const {
    const Eigen::Map<const CVec> v(x.data(), x.size());
    return std::max(0.0, c - 2.0 * b.dot(v).real() + v.dot(q * v).real());
  }
  CMat wgrad(const CMat &x) const {
    const Eigen::Map<const CVec> v(x.data(), x.size());
    CVec g = q * v - b;
    return Eigen::Map<const CMat>(g.data(), rows, cols);
  }
};

/// Builds the model of X -> sum_t ||r_t - C_t X s_t||^2, where `c_of(t)`
/// returns C_t. R is T x N_BS and S is T x N_UE, one pilot per row.
template <class COf>
VecGramModel build_vec_model(COf &&c_of, const CMat &r, const CMat &s, Eigen::Index x_rows) {
  const Eigen::Index T = r.rows();
  const Eigen::Index n = s.cols();
  const Eigen::Index m = x_rows;
  require(s.rows() == T, "build_vec_model: pilot and receive lengths differ");

  VecGramModel mdl;
  mdl.rows = m;
  mdl.cols = n;
  mdl.c = r.squaredNorm();
  CMat bmat = CMat::Zero(m, n);

  // Accumulate Z(j + n l, a + m b) = sum_t conj(s_j) s_l K_t(a, b) as a
  // product of two tall matrices, chunked over t to bound memory.
  CMat z = CMat::Zero(n * n, m * m);
  const Eigen::Index chunk = 64;
  CMat smat(n * n, chunk), kmat(chunk, m * m);
  for (Eigen::Index t0 = 0; t0 < T; t0 += chunk) {
    const Eigen::Index len = std::min(chunk, T - t0);
    for (Eigen::Index dt = 0; dt < len; ++dt) {
      const Eigen::Index t = t0 + dt;
      const CMat ct = c_of(t);
      require(ct.rows() == r.cols() && ct.cols() == m, "build_vec_model: C_t shape mismatch");
      const CVec st = s.row(t).transpose();
      const CVec rt = r.row(t).transpose();
      const CMat kt = ct.adjoint() * ct;
      kmat.row(dt) = Eigen::Map<const CVec>(kt.data(), kt.size()).transpose();
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index j = 0; j < n; ++j) smat(j + n * l, dt) = std::conj(st(j)) * st(l);
      bmat.noalias() += (ct.adjoint() * rt) * st.adjoint();
    }
    z.noalias() += smat.leftCols(len) * kmat.topRows(len);
  }

  mdl.q.resize(m * n, m * n);
  Eigen::RowVectorXcd row(m * m);
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index j = 0; j < n; ++j) {
      row = z.row(j + n * l);
      mdl.q.block(j * m, l * m, m, m) = Eigen::Map<const CMat>(row.data(), m, m);
    }
  mdl.b = Eigen::Map<const CVec>(bmat.data(), bmat.size());
  return mdl;
}

namespace detail {

inline CMat fra_coefficient(const PhaseSchedule &sch, const CMat &L, double eps, Eigen::Index t) {
  return effective_phase_uplink(sch.phi1.row(t).transpose(), sch.phi2.row(t).transpose(), L, eps,
                                Side::fra);
}

/// Columns u_t = Phi_t H s_t of the G-subproblem.
inline CMat fra_forward_columns(const CMat &h, const PhaseSchedule &sch, const PilotSchedule &p,
                                const CMat &L, double eps) {
  const Eigen::Index T = p.s.rows();
  const double a = std::sqrt(1.0 - eps);
  CMat u(h.rows(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    CVec v = sch.phi2.row(t).transpose().cwiseProduct(h * p.s.row(t).transpose());
    v = L * v;
    u.col(t) = a * sch.phi1.row(t).transpose().cwiseProduct(v);
  }
  return u;
}

inline void check_large_inputs(const CMat &r, const PhaseSchedule &sch, const PilotSchedule &p) {
  require(r.rows() == p.s.rows() && sch.length() == p.length(),
          "large-timescale inputs: received, phase and pilot lengths differ");
}

} // namespace detail

inline RightGramModel build_g_model(const CMat &h, const CMat &r, const PhaseSchedule &sch,
                                    const PilotSchedule &p, const CMat &L, double eps) {
  detail::check_large_inputs(r, sch, p);
  const CMat u = detail::fra_forward_columns(h, sch, p, L, eps);
  const CMat rm = r.transpose();
  return {rm * u.adjoint(), u * u.adjoint(), r.squaredNorm()};
}

inline VecGramModel build_h_model_large(const CMat &g, const CMat &r, const PhaseSchedule &sch,
                                        const PilotSchedule &p, const CMat &L, double eps) {
  detail::check_large_inputs(r, sch, p);
  const double a = std::sqrt(1.0 - eps);
  auto c_of = [&](Eigen::Index t) {
    CMat gd = g * sch.phi1.row(t).transpose().asDiagonal();
    return CMat(a * (gd * L) * sch.phi2.row(t).transpose().asDiagonal());
  };
  return build_vec_model(c_of, r, p.s, g.cols());
}

inline VecGramModel build_h_model_small(const CMat &g, const CMat &r,
                                        const std::vector<CMat> &eff, const PilotSchedule &p) {
  require(static_cast<Eigen::Index>(eff.size()) == r.rows(),
          "small-timescale inputs: effective phases and received lengths differ");
  auto c_of = [&](Eigen::Index t) { return CMat(g * eff[t]); };
  return build_vec_model(c_of, r, p.s, g.cols());
}

// ------------------------------------------- reference (per-pilot) forms

inline double objective_large(const CMat &g, const CMat &h, const CMat &r,
                              const PhaseSchedule &sch, const PilotSchedule &p, const CMat &L,
                              double eps, double upsilon_g, double upsilon_h,
                              const Dictionaries &d) {
  detail::check_large_inputs(r, sch, p);
  require(upsilon_g >= 0 && upsilon_h >= 0, "objective_large: weights must be >= 0");
  double f = 0.0;
  for (Eigen::Index t = 0; t < r.rows(); ++t) {
    const CMat phi = detail::fra_coefficient(sch, L, eps, t);
    f += (r.row(t).transpose() - g * phi * h * p.s.row(t).transpose()).squaredNorm();
  }
  return f + L1Penalty{d.a_bs, d.a_i, upsilon_g}.value(g) +
         L1Penalty{d.a_i, d.a_ue, upsilon_h}.value(h);
}

inline CMat egrad_G_large(const CMat &g, const CMat &h, const CMat &r, const PhaseSchedule &sch,
                          const PilotSchedule &p, const CMat &L, double eps, double upsilon_g,
                          const Dictionaries &d) {
  detail::check_large_inputs(r, sch, p);
  CMat out = CMat::Zero(g.rows(), g.cols());
  for (Eigen::Index t = 0; t < r.rows(); ++t) {
    const CMat phi = detail::fra_coefficient(sch, L, eps, t); // includes sqrt(1 - eps)
    const CVec u = phi * h * p.s.row(t).transpose();
    out += (g * u - r.row(t).transpose()) * u.adjoint();
  }
  return out + L1Penalty{d.a_bs, d.a_i, upsilon_g}.wgrad(g);
}

/// sum_t C_t^H (C_t H s_t - r_t) s_t^H + (upsilon/2) A_I Y A_UE^H.
template <class COf>
CMat egrad_H_generic(COf &&c_of, const CMat &h, const CMat &r, const CMat &s, double upsilon_h,
                     const Dictionaries &d) {
  CMat out = CMat::Zero(h.rows(), h.cols());
  for (Eigen::Index t = 0; t < r.rows(); ++t) {
    const CMat ct = c_of(t);
    const CVec st = s.row(t).transpose();
    out += ct.adjoint() * (ct * h * st - r.row(t).transpose()) * st.adjoint();
  }
  return out + L1Penalty{d.a_i, d.a_ue, upsilon_h}.wgrad(h);
}

inline CMat egrad_H_large(const CMat &g, const CMat &h, const CMat &r, const PhaseSchedule &sch,
                          const PilotSchedule &p, const CMat &L, double eps, double upsilon_h,
                          const Dictionaries &d) {
  detail::check_large_inputs(r, sch, p);
  auto c_of = [&](Eigen::Index t) { return CMat(g * detail::fra_coefficient(sch, L, eps, t)); };
  return egrad_H_generic(c_of, h, r, p.s, upsilon_h, d);
}

inline double objective_small(const CMat &h, const CMat &g, const CMat &r,
                              const std::vector<CMat> &eff, const PilotSchedule &p,
                              double upsilon_h, const Dictionaries &d) {
  require(static_cast<Eigen::Index>(eff.size()) == r.rows() && p.s.rows() == r.rows(),
          "objective_small: input lengths differ");
  double f = 0.0;
  for (Eigen::Index t = 0; t < r.rows(); ++t)
    f += (r.row(t).transpose() - g * eff[t] * h * p.s.row(t).transpose()).squaredNorm();
  return f + L1Penalty{d.a_i, d.a_ue, upsilon_h}.value(h);
}

inline CMat egrad_H_small(const CMat &h, const CMat &g, const CMat &r,
                          const std::vector<CMat> &eff, const PilotSchedule &p, double upsilon_h,
                          const Dictionaries &d) {
  require(static_cast<Eigen::Index>(eff.size()) == r.rows() && p.s.rows() == r.rows(),
          "egrad_H_small: input lengths differ");
  auto c_of = [&](Eigen::Index t) { return CMat(g * eff[t]); };
  return egrad_H_generic(c_of, h, r, p.s, upsilon_h, d);
}

// ---------------------------------------------------------------- solvers

struct LargeEstimate {
  FixedRankPoint g_hat;
  FixedRankPoint h_hat;
  std::vector<double> trace; // joint objective: initial, then after every outer iteration
  int outer_iterations = 0;
  int inner_iterations = 0;
  double upsilon_g = 0.0;
  double upsilon_h = 0.0;
};

struct SmallEstimate {
  FixedRankPoint h_hat;
  std::vector<double> trace;
  int iterations = 0;
  StopReason reason = StopReason::max_iterations;
};

namespace detail {

template <class Model>
MinimizeResult minimize_model(const Model &mdl, const L1Penalty &pen, FixedRankPoint x0,
                              const ArmijoOptions &opt) {
  auto f = [&](const CMat &x) { return mdl.value(x) + pen.value(x); };
  auto g = [&](const CMat &x) { return CMat(2.0 * (mdl.wgrad(x) + pen.wgrad(x))); };
  return armijo_minimize(f, g, std::move(x0), opt);
}

} // namespace detail

/// Alternating minimization over (G, H_kc). The received block must come
/// from a refraction-side UE: with a reflection-side UE, G is identifiable
/// only up to per-column scalars, which the other users cannot resolve.
inline LargeEstimate estimate_large_timescale(const ReceivedBlock &rx, const PhaseSchedule &sch,
                                              const PilotSchedule &pilots, const CMat &L,
                                              double eps, const Dictionaries &d,
                                              const EstimationConfig &cfg, Rng &rng) {
  cfg.validate();
  require_power_split(eps);
  if (rx.side != Side::fra)
    throw std::invalid_argument(
        "estimate_large_timescale: k_c must be a refraction-side UE (got reflection-side UE " +
        std::to_string(rx.ue_index + 1) + ")");
  detail::check_large_inputs(rx.r, sch, pilots);

  const Eigen::Index n_bs = rx.r.cols();
  const Eigen::Index m = L.rows();
  const Eigen::Index n_ue = pilots.s.cols();
  const double var = pilots.noise_variance();

  LargeEstimate out;
  out.upsilon_g = resolve_upsilon_g(cfg, var, d);
  out.upsilon_h = resolve_upsilon_h(cfg, var, d);
  const L1Penalty pen_g{d.a_bs, d.a_i, out.upsilon_g};
  const L1Penalty pen_h{d.a_i, d.a_ue, out.upsilon_h};

  out.g_hat = random_fixed_rank(rng, n_bs, m, cfg.rank_g);
  out.h_hat = random_fixed_rank(rng, m, n_ue, cfg.rank_h);

  ArmijoOptions inner;
  inner.max_iterations = cfg.inner_max;
  inner.direction = cfg.direction;

  auto joint = [&](const CMat &g, const CMat &h, double data) {
    return data + pen_g.value(g) + pen_h.value(h);
  };
  {
    const CMat g = out.g_hat.matrix(), h = out.h_hat.matrix();
    out.trace.push_back(joint(g, h, build_g_model(h, rx.r, sch, pilots, L, eps).value(g)));
  }

  for (int it = 0; it < cfg.outer_max; ++it) {
    const CMat h_fixed = out.h_hat.matrix();
    const RightGramModel gm = build_g_model(h_fixed, rx.r, sch, pilots, L, eps);
    MinimizeResult rg = detail::minimize_model(gm, pen_g, out.g_hat, inner);
    out.g_hat = std::move(rg.x);
    out.inner_iterations += rg.iterations;

    const CMat g_fixed = out.g_hat.matrix();
    const VecGramModel hm = build_h_model_large(g_fixed, rx.r, sch, pilots, L, eps);
    MinimizeResult rh = detail::minimize_model(hm, pen_h, out.h_hat, inner);
    out.h_hat = std::move(rh.x);
    out.inner_iterations += rh.iterations;

    // rh.f is data + pen_h at the new H; add the G penalty.
    const double f_new = rh.f + pen_g.value(g_fixed);
    const double f_prev = out.trace.back();
    out.trace.push_back(f_new);
    out.outer_iterations = it + 1;
    const double denom = std::max(std::abs(f_prev), std::numeric_limits<double>::min());
    if ((f_prev - f_new) / denom < cfg.outer_tol) break;
  }
  return out;
}

/// Rank-Q estimate of one H_k given the large-timescale G estimate.
inline SmallEstimate estimate_small_timescale(const ReceivedBlock &rx, const CMat &g_hat,
                                              const std::vector<CMat> &eff,
                                              const PilotSchedule &pilots, const Dictionaries &d,
                                              const EstimationConfig &cfg, Rng &rng) {
  cfg.validate();
  const Eigen::Index m = g_hat.cols();
  const Eigen::Index n_ue = pilots.s.cols();
  const double var = pilots.noise_variance();
  const L1Penalty pen{d.a_i, d.a_ue, resolve_upsilon_h(cfg, var, d)};
  const VecGramModel mdl = build_h_model_small(g_hat, rx.r, eff, pilots);

  FixedRankPoint x0;
  if (cfg.small_init == SmallInit::spectral) {
    // Back-projection truncated to rank Q, scaled to minimize the data term.
    const CMat bp = Eigen::Map<const CMat>(mdl.b.data(), m, n_ue);
    x0 = truncate_to_rank(bp, cfg.rank_h);
    const CMat x = x0.matrix();
    const Eigen::Map<const CVec> v(x.data(), x.size());
    const double quad = v.dot(mdl.q * v).real();
    const double lin = mdl.b.dot(v).real();
    if (quad > 0 && lin > 0) x0.sigma *= lin / quad;
  } else {
    x0 = random_fixed_rank(rng, m, n_ue, cfg.rank_h);
  }

  ArmijoOptions opt = cfg.small;
  opt.direction = cfg.direction;
  MinimizeResult res = detail::minimize_model(mdl, pen, std::move(x0), opt);
  return {std::move(res.x), std::move(res.trace), res.iterations, res.reason};
}

// -------------------------------------------------------------- metrics

/// ||H^T kron G - Hh^T kron Gh||_F^2 / ||H^T kron G||_F^2, evaluated through
/// ||X kron Y - U kron V||^2 = ||X||^2 ||Y||^2 + ||U||^2 ||V||^2
///                            - 2 Re(<X, U> <Y, V>).
inline double nmse_kron(const CMat &g, const CMat &h, const CMat &g_hat, const CMat &h_hat) {
  require_same_shape(g, g_hat, "nmse_kron(G)");
  require_same_shape(h, h_hat, "nmse_kron(H)");
  const double ref = h.squaredNorm() * g.squaredNorm();
  require(ref > 0, "nmse_kron: true cascaded channel is zero");
  const double est = h_hat.squaredNorm() * g_hat.squaredNorm();
  const double cross = (frob_inner(h, h_hat) * frob_inner(g, g_hat)).real();
  return std::max(0.0, ref + est - 2.0 * cross) / ref;
}

inline double nmse_avg(const CMat &g, const std::vector<CMat> &h, const CMat &g_hat,
                       const std::vector<CMat> &h_hat) {
  require(!h.empty(), "nmse_avg: K must be >= 1");
  require(h.size() == h_hat.size(), "nmse_avg: channel and estimate counts differ");
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += nmse_kron(g, h[k], g_hat, h_hat[k]);
  return s / static_cast<double>(h.size());
}

struct NMSEReport {
  double nmse_fra = 0.0;
  double nmse_avg = 0.0;
  std::vector<double> per_ue;
};

// ------------------------------------------------------------- overhead

/// T_tot = T_G + tau K T_H.
inline std::int64_t total_overhead(std::int64_t t_g, std::int64_t t_h, std::int64_t tau,
                                   std::int64_t k) {
  require(t_g >= 0 && t_h >= 0 && tau >= 0 && k >= 0, "total_overhead: inputs must be >= 0");
  return t_g + tau * k * t_h;
}

/// Minimum pilot count of per-user least squares on the cascaded channels
/// over one large timescale: tau (K_fle M N_UE + K_fra M^2 N_UE).
inline std::int64_t ls_overhead_bound(std::int64_t k_fle, std::int64_t k_fra, std::int64_t m,
                                      std::int64_t n_ue, std::int64_t tau) {
  require(k_fle >= 0 && k_fra >= 0 && m >= 0 && n_ue >= 0 && tau >= 0,
          "ls_overhead_bound: inputs must be >= 0");
  return tau * (k_fle * m * n_ue + k_fra * m * m * n_ue);
}

} // namespace bios
