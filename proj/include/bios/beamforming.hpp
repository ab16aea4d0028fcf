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

// Downlink sum-rate maximization through the weighted-MMSE reformulation:
// closed-form combiners and weights, a power-normalized precoder, and
// coordinate descent over the unit-modulus coefficients of both layers.
//
// Surface modes:
//   bios  fle: sqrt(eps) H^H D1 G^H        fra: sqrt(1-eps) H^H D2 L^H D1 G^H
//   ios   fle: sqrt(eps) H^H D1 G^H        fra: sqrt(1-eps) H^H D1 G^H
//   irs   fle: H^H D1 G^H                  fra: 0

#pragma once

#include "bios/geometry.hpp"
#include "bios/rng.hpp"
#include "bios/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace bios {

enum class RisMode { bios, ios, irs };

inline const char *to_string(RisMode m) {
  switch (m) {
  case RisMode::bios: return "bios";
  case RisMode::ios: return "ios";
  case RisMode::irs: return "irs";
  }
  return "unknown";
}

/// Precoder update policy. `guarded` takes the normalized closed form and
/// falls back to the exact power-constrained minimizer whenever the closed
/// form would increase the objective.
enum class PrecoderUpdate { closed_form, exact, guarded };

struct BeamformingConfig {
  RisMode mode = RisMode::bios;
  double eps = 0.5;
  int n_s = 1;
  double noise_variance = 0.1; // sigma_d^2
  int max_iterations = 100;
  double tol = 1e-4;
  int cd_sweeps = 1;
  PrecoderUpdate precoder = PrecoderUpdate::guarded;

  void validate() const {
    require(eps >= 0.0 && eps <= 1.0, "beamforming.eps must lie in [0, 1]");
    require(n_s >= 1, "beamforming.n_s must be >= 1");
    require(noise_variance > 0, "beamforming.noise_variance must be > 0");
    require(max_iterations >= 1, "beamforming.max_iterations must be >= 1");
    require(tol >= 0, "beamforming.tol must be >= 0");
    require(cd_sweeps >= 1, "beamforming.cd_sweeps must be >= 1");
  }
  /// The IRS reflects all power.
  double power_split() const { return mode == RisMode::irs ? 1.0 : eps; }
};

/// Channels seen by the optimizer: G, H_k, L and the number of reflection-side
/// users (users 0..k_fle-1 are fle, the rest fra).
struct DownlinkChannels {
  CMat g;
  std::vector<CMat> h;
  CMat l;
  int k_fle = 0;

  int k() const { return static_cast<int>(h.size()); }
  Side side(int k) const { return k < k_fle ? Side::fle : Side::fra; }
  Eigen::Index n_bs() const { return g.rows(); }
  Eigen::Index m() const { return g.cols(); }
  Eigen::Index n_ue() const { return h.empty() ? 0 : h.front().cols(); }

  static DownlinkChannels from(const ChannelRealization &ch, int k_fle) {
    return {ch.g, ch.h, ch.l, k_fle};
  }
};

struct BeamformerState {
  CMat f;                 // N_BS x (N_s K)
  std::vector<CMat> w;    // N_UE x N_s
  std::vector<CMat> psi;  // N_s x N_s
  CVec phi1;              // M
  CVec phi2;              // M
  double noise_variance = 0.0;
  std::vector<double> trace; // objective after every block update
  int iterations = 0;
  int precoder_fallbacks = 0;

  CMat f_block(int k, int n_s) const { return f.middleCols(k * n_s, n_s); }
};

struct RateReport {
  std::vector<double> per_ue; // bit/s/Hz
  double sum = 0.0;
  double overhead_factor = 1.0;
};

// ------------------------------------------------------------- channels

/// Row block of the stacked surface-to-user matrix H_Phi^H for user k, i.e.
/// He_k = H_Phi,k^H diag(phi1) G^H.
inline CMat phi1_left_factor(const DownlinkChannels &ch, int k, const CVec &phi2, RisMode mode,
                             double eps) {
  const CMat hh = ch.h[k].adjoint();
  if (ch.side(k) == Side::fle) return (mode == RisMode::irs ? 1.0 : std::sqrt(eps)) * hh;
  switch (mode) {
  case RisMode::bios: return std::sqrt(1.0 - eps) * (hh * phi2.asDiagonal() * ch.l.adjoint());
  case RisMode::ios: return std::sqrt(1.0 - eps) * hh;
  case RisMode::irs: return CMat::Zero(hh.rows(), hh.cols());
  }
  return hh;
}

/// He_k = H_k^H Phi_d G^H for a single user.
inline CMat effective_channel(const CMat &h, const CVec &phi_d1, const CVec &phi_d2, const CMat &L,
                              const CMat &g, double eps, Side side, RisMode mode = RisMode::bios) {
  require(eps >= 0.0 && eps <= 1.0, "effective_channel: eps must lie in [0, 1]");
  require(h.rows() == g.cols() && phi_d1.size() == g.cols(), "effective_channel: shape mismatch");
  const CMat gh = phi_d1.asDiagonal() * g.adjoint();
  const CMat hh = h.adjoint();
  if (side == Side::fle) return (mode == RisMode::irs ? 1.0 : std::sqrt(eps)) * (hh * gh);
  switch (mode) {
  case RisMode::bios:
    require(phi_d2.size() == g.cols() && L.rows() == g.cols() && L.cols() == g.cols(),
            "effective_channel: L or phi_d2 shape mismatch");
    return std::sqrt(1.0 - eps) * (hh * phi_d2.asDiagonal() * L.adjoint() * gh);
  case RisMode::ios: return std::sqrt(1.0 - eps) * (hh * gh);
  case RisMode::irs: return CMat::Zero(h.cols(), g.rows());
  }
  return CMat();
}

inline std::vector<CMat> effective_channels(const DownlinkChannels &ch, const CVec &phi1,
                                            const CVec &phi2, const BeamformingConfig &cfg) {
  std::vector<CMat> he;
  he.reserve(ch.k());
  for (int k = 0; k < ch.k(); ++k)
    he.push_back(effective_channel(ch.h[k], phi1, phi2, ch.l, ch.g, cfg.power_split(),
                                   ch.side(k), cfg.mode));
  return he;
}

// ------------------------------------------------------------ MSE and rate

namespace detail {

/// Sum over i != k of He F_i F_i^H He^H plus sigma^2 I.
inline CMat interference_plus_noise(const CMat &he, const CMat &f, int k, int n_s, double var) {
  CMat lam = var * CMat::Identity(he.rows(), he.rows());
  const int streams = static_cast<int>(f.cols()) / n_s;
  for (int i = 0; i < streams; ++i) {
    if (i == k) continue;
    const CMat hf = he * f.middleCols(i * n_s, n_s);
    lam.noalias() += hf * hf.adjoint();
  }
  return lam;
}

inline double log_det_hpd(const CMat &a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) {
    const RVec ev = Eigen::SelfAdjointEigenSolver<CMat>(a, Eigen::EigenvaluesOnly).eigenvalues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::log(std::max(ev(i), 1e-300));
    return s;
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i).real());
  return s;
}

inline CMat inverse_hpd(const CMat &a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) {
    const CMat reg = a + 1e-12 * CMat::Identity(a.rows(), a.cols());
    return reg.ldlt().solve(CMat::Identity(a.rows(), a.cols()));
  }
  return llt.solve(CMat::Identity(a.rows(), a.cols()));
}

inline CMat hermitian_part(const CMat &a) { return 0.5 * (a + a.adjoint()); }

} // namespace detail

/// E_k = (I - W^H He F_k)(I - W^H He F_k)^H + W^H Lambda_k W.
inline CMat mse_matrix(const CMat &he_k, const CMat &f, const CMat &w_k, int k, int n_s,
                       double noise_variance) {
  const CMat a = CMat::Identity(n_s, n_s) - w_k.adjoint() * he_k * f.middleCols(k * n_s, n_s);
  const CMat lam = detail::interference_plus_noise(he_k, f, k, n_s, noise_variance);
  return detail::hermitian_part(a * a.adjoint() + w_k.adjoint() * lam * w_k);
}

/// sum_k tr(Psi_k E_k) - log|Psi_k| (natural log).
inline double wmmse_objective(const std::vector<CMat> &he, const BeamformerState &s, int n_s) {
  double obj = 0.0;
  for (std::size_t k = 0; k < he.size(); ++k) {
    const CMat e = mse_matrix(he[k], s.f, s.w[k], static_cast<int>(k), n_s, s.noise_variance);
    obj += (s.psi[k] * e).trace().real() - detail::log_det_hpd(s.psi[k]);
  }
  return obj;
}

/// (1 - T_tot / Upsilon) log2 |I + F_k^H He^H Lambda_k^-1 He F_k| per user.
inline RateReport sum_rate(const std::vector<CMat> &he, const CMat &f, int n_s,
                           double noise_variance, double t_tot, double upsilon_large) {
  require(upsilon_large > 0, "sum_rate: large-timescale length must be > 0");
  require(t_tot >= 0 && t_tot <= upsilon_large, "sum_rate: overhead exceeds the timescale");
  require(noise_variance > 0, "sum_rate: noise variance must be > 0");
  RateReport rep;
  rep.overhead_factor = 1.0 - t_tot / upsilon_large;
  for (std::size_t k = 0; k < he.size(); ++k) {
    const int kk = static_cast<int>(k);
    const CMat lam = detail::interference_plus_noise(he[k], f, kk, n_s, noise_variance);
    const CMat hf = he[k] * f.middleCols(kk * n_s, n_s);
    const CMat m = CMat::Identity(n_s, n_s) + hf.adjoint() * lam.ldlt().solve(hf);
    const double r = rep.overhead_factor * detail::log_det_hpd(detail::hermitian_part(m)) /
                     std::log(2.0);
    rep.per_ue.push_back(std::max(0.0, r));
    rep.sum += rep.per_ue.back();
  }
  return rep;
}

inline RateReport sum_rate(const BeamformerState &s, const DownlinkChannels &ch,
                           const BeamformingConfig &cfg, double t_tot, double upsilon_large) {
  return sum_rate(effective_channels(ch, s.phi1, s.phi2, cfg), s.f, cfg.n_s, s.noise_variance,
                  t_tot, upsilon_large);
}

// ---------------------------------------------------------- block updates

/// W_k = (Lambda_k + He F_k F_k^H He^H)^-1 He F_k, then Psi_k = E_k^-1.
inline void update_W_Psi(const std::vector<CMat> &he, BeamformerState &s, int n_s) {
  for (std::size_t k = 0; k < he.size(); ++k) {
    const int kk = static_cast<int>(k);
    const CMat hf = he[k] * s.f.middleCols(kk * n_s, n_s);
    const CMat lam = detail::interference_plus_noise(he[k], s.f, kk, n_s, s.noise_variance);
    s.w[k] = (lam + hf * hf.adjoint()).ldlt().solve(hf);
    s.psi[k] = detail::hermitian_part(
        detail::inverse_hpd(mse_matrix(he[k], s.f, s.w[k], kk, n_s, s.noise_variance)));
  }
}

namespace detail {

/// A = He^H W Psi W^H He and B = He^H W Psi for the stacked system.
inline void precoder_terms(const std::vector<CMat> &he, const BeamformerState &s, int n_s,
                           CMat &a, CMat &b, double &trace_psi_ww) {
  const Eigen::Index n_bs = he.front().cols();
  const int k_users = static_cast<int>(he.size());
  a = CMat::Zero(n_bs, n_bs);
  b = CMat::Zero(n_bs, n_s * k_users);
  trace_psi_ww = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const CMat hw = he[k].adjoint() * s.w[k]; // N_BS x N_s
    a.noalias() += hw * s.psi[k] * hw.adjoint();
    b.middleCols(k * n_s, n_s) = hw * s.psi[k];
    trace_psi_ww += (s.psi[k] * s.w[k].adjoint() * s.w[k]).trace().real();
  }
  a = hermitian_part(a);
}

/// argmin tr(F^H A F) - 2 Re tr(B^H F) subject to ||F||_F <= 1.
inline CMat exact_precoder(const CMat &a, const CMat &b) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  const RVec d = es.eigenvalues().cwiseMax(0.0);
  const CMat ub = es.eigenvectors().adjoint() * b;
  const RVec w = ub.rowwise().squaredNorm();
  auto norm2 = [&](double mu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double den = d(i) + mu;
      if (den <= 0.0) {
        if (w(i) > 0) return std::numeric_limits<double>::infinity();
        continue;
      }
      s += w(i) / (den * den);
    }
    return s;
  };
  auto solve = [&](double mu) {
    CMat scaled = ub;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double den = d(i) + mu;
      scaled.row(i) = den > 0 ? CMat(ub.row(i) / den) : CMat::Zero(1, ub.cols());
    }
    return CMat(es.eigenvectors() * scaled);
  };
  const double dmax = std::max(d.maxCoeff(), 1e-300);
  if (norm2(1e-14 * dmax) <= 1.0) return solve(1e-14 * dmax);
  double lo = 0.0, hi = std::max(1.0, std::sqrt(w.sum()));
  while (norm2(hi) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm2(mid) > 1.0 ? lo : hi) = mid;
  }
  CMat f = solve(hi);
  const double n = f.norm();
  return n > 1.0 ? CMat(f / n) : f;
}

} // namespace detail

/// F = zeta Ft^-1 He^H W Psi with Ft = He^H W Psi W^H He + sigma^2 tr(Psi W^H W) I.
inline CMat closed_form_precoder(const std::vector<CMat> &he, const BeamformerState &s, int n_s) {
  CMat a, b;
  double tpw = 0.0;
  detail::precoder_terms(he, s, n_s, a, b, tpw);
  const CMat ft = a + s.noise_variance * tpw * CMat::Identity(a.rows(), a.cols());
  const CMat raw = ft.ldlt().solve(b);
  const double n = raw.norm();
  if (!(n > 0)) return s.f;
  return raw / n;
}

/// Returns true when the fallback was taken.
inline bool update_F(const std::vector<CMat> &he, BeamformerState &s, int n_s,
                     PrecoderUpdate policy) {
  if (policy == PrecoderUpdate::closed_form) {
    s.f = closed_form_precoder(he, s, n_s);
    return false;
  }
  CMat a, b;
  double tpw = 0.0;
  detail::precoder_terms(he, s, n_s, a, b, tpw);
  if (policy == PrecoderUpdate::exact) {
    s.f = detail::exact_precoder(a, b);
    return false;
  }
  auto f_val = [&](const CMat &f) {
    return (f.adjoint() * a * f).trace().real() - 2.0 * frob_inner(b, f).real();
  };
  const CMat cand = closed_form_precoder(he, s, n_s);
  const double before = f_val(s.f);
  if (f_val(cand) <= before + 1e-12 * std::max(1.0, std::abs(before))) {
    s.f = cand;
    return false;
  }
  s.f = detail::exact_precoder(a, b);
  return true;
}

struct QuadraticForm {
  CMat xi;  // M x M, Hermitian PSD
  CVec rho; // M
};

/// phi^H Xi phi - 2 Re(rho^H phi) as a function of phi_d1.
inline QuadraticForm build_Xi_rho(const DownlinkChannels &ch, const BeamformerState &s,
                                  const BeamformingConfig &cfg) {
  const Eigen::Index m = ch.m();
  const int n_s = cfg.n_s;
  const double eps = cfg.power_split();
  CMat hwpw = CMat::Zero(m, m); // H_Phi W Psi W^H H_Phi^H
  CMat hwpf = CMat::Zero(m, ch.n_bs()); // H_Phi W Psi F^H
  for (int k = 0; k < ch.k(); ++k) {
    const CMat hp = phi1_left_factor(ch, k, s.phi2, cfg.mode, eps).adjoint(); // M x N_UE
    const CMat hw = hp * s.w[k];
    hwpw.noalias() += hw * s.psi[k] * hw.adjoint();
    hwpf.noalias() += hw * s.psi[k] * s.f_block(k, n_s).adjoint();
  }
  const CMat gf = ch.g.adjoint() * s.f; // M x N_s K
  const CMat b = gf * gf.adjoint();
  QuadraticForm q;
  q.xi = detail::hermitian_part(hwpw.cwiseProduct(b.transpose()));
  q.rho = (hwpf * ch.g).diagonal();
  return q;
}

/// phi^H Xi phi - 2 Re(rho^H phi) + const as a function of phi_d2 (bios only).
inline QuadraticForm build_Xi_rho_fra(const DownlinkChannels &ch, const BeamformerState &s,
                                      const BeamformingConfig &cfg) {
  const Eigen::Index m = ch.m();
  const int n_s = cfg.n_s;
  const double a = std::sqrt(1.0 - cfg.power_split());
  CMat hwpw = CMat::Zero(m, m);
  CMat hwpf = CMat::Zero(m, ch.n_bs());
  for (int k = ch.k_fle; k < ch.k(); ++k) {
    const CMat hw = a * ch.h[k] * s.w[k];
    hwpw.noalias() += hw * s.psi[k] * hw.adjoint();
    hwpf.noalias() += hw * s.psi[k] * s.f_block(k, n_s).adjoint();
  }
  // T = L^H D1 G^H, so He_k = sqrt(1-eps) H_k^H D2 T.
  const CMat t = ch.l.adjoint() * s.phi1.asDiagonal() * ch.g.adjoint();
  const CMat tf = t * s.f;
  QuadraticForm q;
  q.xi = detail::hermitian_part(hwpw.cwiseProduct((tf * tf.adjoint()).transpose()));
  q.rho = (hwpf * t.adjoint()).diagonal();
  return q;
}

inline double quadratic_value(const QuadraticForm &q, const CVec &phi) {
  return phi.dot(q.xi * phi).real() - 2.0 * q.rho.dot(phi).real();
}

/// Minimizer of the quadratic over entry m with the rest fixed:
/// phi_m = -b / |b|, b = sum_{m' != m} Xi_{m m'} phi_{m'} - rho_m.
/// A zero b leaves the entry unchanged.
inline cd cd_update_phi(const CVec &phi, const CMat &xi, const CVec &rho, Eigen::Index m) {
  const cd b = (xi.row(m) * phi)(0) - xi(m, m) * phi(m) - rho(m);
  const double a = std::abs(b);
  if (a < 1e-300) return phi(m);
  return -b / a;
}

/// Cyclic sweeps m = 0..M-1 with an incrementally maintained Xi phi.
inline void cd_sweep(CVec &phi, const QuadraticForm &q, int sweeps) {
  CVec v = q.xi * phi;
  for (int s = 0; s < sweeps; ++s)
    for (Eigen::Index m = 0; m < phi.size(); ++m) {
      const cd b = v(m) - q.xi(m, m) * phi(m) - q.rho(m);
      const double a = std::abs(b);
      if (a < 1e-300) continue;
      const cd nw = -b / a;
      v += q.xi.col(m) * (nw - phi(m));
      phi(m) = nw;
    }
}

// ------------------------------------------------------------------ solver

inline BeamformerState initial_state(const DownlinkChannels &ch, const BeamformingConfig &cfg,
                                     Rng &rng) {
  BeamformerState s;
  s.noise_variance = cfg.noise_variance;
  s.phi1 = unit_phase_vector(rng, ch.m());
  s.phi2 = unit_phase_vector(rng, ch.m());
  s.f = complex_normal_matrix(rng, ch.n_bs(), cfg.n_s * ch.k());
  s.f /= s.f.norm();
  for (int k = 0; k < ch.k(); ++k) {
    s.w.push_back(CMat::Zero(ch.n_ue(), cfg.n_s));
    s.psi.push_back(CMat::Identity(cfg.n_s, cfg.n_s));
  }
  return s;
}

/// Alternates W/Psi, F, phi_d1 and phi_d2 until the relative objective
/// decrease (relative to max(|f|, 1)) drops below tol.
inline BeamformerState wmmse_cd_solve(const DownlinkChannels &ch, const BeamformingConfig &cfg,
                                      Rng &rng) {
  cfg.validate();
  require(ch.k() >= 1, "wmmse_cd_solve: need at least one user");
  require(ch.k_fle >= 0 && ch.k_fle <= ch.k(), "wmmse_cd_solve: invalid k_fle");
  BeamformerState s = initial_state(ch, cfg, rng);
  const int n_s = cfg.n_s;
  const bool use_phi2 = cfg.mode == RisMode::bios && ch.k_fle < ch.k();

  std::vector<CMat> he = effective_channels(ch, s.phi1, s.phi2, cfg);
  double f_prev = wmmse_objective(he, s, n_s);
  s.trace.push_back(f_prev);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    update_W_Psi(he, s, n_s);
    s.trace.push_back(wmmse_objective(he, s, n_s));

    if (update_F(he, s, n_s, cfg.precoder)) ++s.precoder_fallbacks;
    s.trace.push_back(wmmse_objective(he, s, n_s));

    cd_sweep(s.phi1, build_Xi_rho(ch, s, cfg), cfg.cd_sweeps);
    he = effective_channels(ch, s.phi1, s.phi2, cfg);
    s.trace.push_back(wmmse_objective(he, s, n_s));

    if (use_phi2) {
      cd_sweep(s.phi2, build_Xi_rho_fra(ch, s, cfg), cfg.cd_sweeps);
      he = effective_channels(ch, s.phi1, s.phi2, cfg);
      s.trace.push_back(wmmse_objective(he, s, n_s));
    }

    s.iterations = it + 1;
    const double f_now = s.trace.back();
    if ((f_prev - f_now) / std::max(std::abs(f_prev), 1.0) < cfg.tol) break;
    f_prev = f_now;
  }
  // Final combiner refresh so W and Psi match the returned F and phases.
  update_W_Psi(he, s, n_s);
  s.trace.push_back(wmmse_objective(he, s, n_s));
  return s;
}

} // namespace bios
