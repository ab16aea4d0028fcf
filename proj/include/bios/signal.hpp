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

// Uplink signal model: surface coefficient matrices, pilot/phase schedules,
// noisy received blocks, and the Khatri-Rao / Kronecker cascaded-channel
// forms with their per-pilot sensing operators.

#pragma once

#include "bios/geometry.hpp"
#include "bios/rng.hpp"
#include "bios/types.hpp"

#include <cmath>
#include <vector>

namespace bios {

/// Per-pilot diagonal coefficients of both layers; row t holds diag(Phi_1[t])
/// and diag(Phi_2[t]).
struct PhaseSchedule {
  CMat phi1; // T x M
  CMat phi2; // T x M

  int length() const { return static_cast<int>(phi1.rows()); }
};

struct PilotSchedule {
  CMat s; // T x N_UE, row t is s[t]^T
  double pnr_db = 20.0;

  int length() const { return static_cast<int>(s.rows()); }
  /// sigma^2 = 10^(-PNR/10) for unit pilot power.
  double noise_variance() const { return std::pow(10.0, -pnr_db / 10.0); }
};

struct ReceivedBlock {
  CMat r; // T x N_BS, row t is r[t]^T
  Side side = Side::fra;
  int ue_index = 0;
};

inline void require_power_split(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("power split eps must lie in (0, 1), got " + std::to_string(eps));
}

/// Uplink effective coefficient matrix:
///   fle: sqrt(eps) diag(phi1)
///   fra: sqrt(1 - eps) diag(phi1) L diag(phi2)
inline CMat effective_phase_uplink(const CVec &phi1, const CVec &phi2, const CMat &L, double eps,
                                   Side side) {
  require_power_split(eps);
  if (side == Side::fle) {
    CMat out = CMat::Zero(phi1.size(), phi1.size());
    out.diagonal() = std::sqrt(eps) * phi1;
    return out;
  }
  require(L.rows() == phi1.size() && L.cols() == phi2.size(),
          "effective_phase_uplink: L does not match phase vectors");
  return std::sqrt(1.0 - eps) * (phi1.asDiagonal() * L * phi2.asDiagonal());
}

/// Downlink effective coefficient matrix:
///   fle: sqrt(eps) diag(phi_d1)
///   fra: sqrt(1 - eps) diag(phi_d2) L^H diag(phi_d1)
inline CMat effective_phase_downlink(const CVec &phi_d1, const CVec &phi_d2, const CMat &L,
                                     double eps, Side side) {
  require_power_split(eps);
  if (side == Side::fle) {
    CMat out = CMat::Zero(phi_d1.size(), phi_d1.size());
    out.diagonal() = std::sqrt(eps) * phi_d1;
    return out;
  }
  require(L.rows() == phi_d1.size() && L.cols() == phi_d2.size(),
          "effective_phase_downlink: L does not match phase vectors");
  return std::sqrt(1.0 - eps) * (phi_d2.asDiagonal() * L.adjoint() * phi_d1.asDiagonal());
}

/// r = G Phi H s + z with z ~ CN(0, sigma^2 I).
inline CVec uplink_received(const CMat &G, const CMat &H, const CMat &eff_phase, const CVec &s,
                            double noise_variance, Rng &rng) {
  require(G.cols() == eff_phase.rows() && eff_phase.cols() == H.rows() && H.cols() == s.size(),
          "uplink_received: shape mismatch");
  require(noise_variance >= 0, "uplink_received: noise variance must be >= 0");
  CVec r = G * (eff_phase * (H * s));
  if (noise_variance > 0)
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += complex_normal(rng, noise_variance);
  return r;
}

/// Column-wise Kronecker product.
inline CMat khatri_rao(const CMat &a, const CMat &b) {
  require(a.cols() == b.cols(), "khatri_rao: column counts differ");
  CMat out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    out.col(j) = kron(CVec(a.col(j)), CVec(b.col(j)));
  return out;
}

/// J_fle = H^T (Khatri-Rao) G, (N_UE N_BS) x M.
inline CMat cascaded_fle(const CMat &H, const CMat &G) {
  require(H.rows() == G.cols(), "cascaded_fle: H^T and G column counts differ");
  return khatri_rao(H.transpose(), G);
}

/// J_fra = H^T (Kronecker) G, (N_UE N_BS) x M^2.
inline CMat cascaded_fra(const CMat &H, const CMat &G) {
  require(H.rows() == G.cols(), "cascaded_fra: H^T and G column counts differ");
  return kron(CMat(H.transpose()), G);
}

inline CVec vec(const CMat &x) { return Eigen::Map<const CVec>(x.data(), x.size()); }

/// Random unit-modulus coefficients for both layers. With hold_length > 1
/// each draw is repeated for that many consecutive pilots.
inline PhaseSchedule random_phase_schedule(Rng &rng, int length, int m, int hold_length = 1) {
  require(length >= 1 && m >= 1, "random_phase_schedule: T and M must be >= 1");
  require(hold_length >= 1, "random_phase_schedule: hold length must be >= 1");
  PhaseSchedule sch{CMat(length, m), CMat(length, m)};
  for (int t = 0; t < length; ++t) {
    if (t % hold_length == 0) {
      for (int i = 0; i < m; ++i) sch.phi1(t, i) = unit_phase(rng);
      for (int i = 0; i < m; ++i) sch.phi2(t, i) = unit_phase(rng);
    } else {
      sch.phi1.row(t) = sch.phi1.row(t - 1);
      sch.phi2.row(t) = sch.phi2.row(t - 1);
    }
  }
  return sch;
}

/// Pilots with unit-modulus entries scaled by 1/sqrt(N_UE), so ||s[t]|| = 1.
inline PilotSchedule random_pilots(Rng &rng, int length, int n_ue, double pnr_db) {
  require(length >= 1 && n_ue >= 1, "random_pilots: T and N_UE must be >= 1");
  PilotSchedule p{CMat(length, n_ue), pnr_db};
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_ue));
  for (int t = 0; t < length; ++t)
    for (int i = 0; i < n_ue; ++i) p.s(t, i) = scale * unit_phase(rng);
  return p;
}

/// Per-pilot effective phases for a user on the given side.
inline std::vector<CMat> effective_phases(const PhaseSchedule &sch, const CMat &L, double eps,
                                          Side side) {
  std::vector<CMat> out;
  out.reserve(sch.length());
  for (int t = 0; t < sch.length(); ++t)
    out.push_back(effective_phase_uplink(sch.phi1.row(t).transpose(),
                                         sch.phi2.row(t).transpose(), L, eps, side));
  return out;
}

/// Transmits the whole pilot schedule of one user and collects the BS block.
inline ReceivedBlock simulate_uplink(const CMat &G, const CMat &H, const std::vector<CMat> &eff,
                                     const PilotSchedule &pilots, Side side, int ue_index,
                                     Rng &rng) {
  require(static_cast<int>(eff.size()) == pilots.length(),
          "simulate_uplink: schedule and pilot lengths differ");
  ReceivedBlock out{CMat(pilots.length(), G.rows()), side, ue_index};
  const double var = pilots.noise_variance();
  for (int t = 0; t < pilots.length(); ++t)
    out.r.row(t) = uplink_received(G, H, eff[t], pilots.s.row(t).transpose(), var, rng).transpose();
  return out;
}

/// Noiseless variant (sigma^2 = 0), used for identity checks and recovery tests.
inline ReceivedBlock noiseless_uplink(const CMat &G, const CMat &H, const std::vector<CMat> &eff,
                                      const PilotSchedule &pilots, Side side, int ue_index) {
  require(static_cast<int>(eff.size()) == pilots.length(),
          "noiseless_uplink: schedule and pilot lengths differ");
  ReceivedBlock out{CMat(pilots.length(), G.rows()), side, ue_index};
  for (int t = 0; t < pilots.length(); ++t)
    out.r.row(t) = (G * (eff[t] * (H * pilots.s.row(t).transpose()))).transpose();
  return out;
}

/// Measurement operator of one pilot acting on vec(J):
///   fle: sqrt(eps)     (phi1^T                 kron (s^T kron I))
///   fra: sqrt(1 - eps) (vec(Phi1 L Phi2)^T     kron (s^T kron I))
inline CMat ls_sensing_row(const CVec &s, const CVec &phi1, const CVec &phi2, const CMat &L,
                           double eps, Side side, int n_bs) {
  require_power_split(eps);
  const CMat sI = kron(CMat(s.transpose()), CMat(CMat::Identity(n_bs, n_bs)));
  if (side == Side::fle) return std::sqrt(eps) * kron(CMat(phi1.transpose()), sI);
  const CMat inner = phi1.asDiagonal() * L * phi2.asDiagonal();
  return std::sqrt(1.0 - eps) * kron(CMat(vec(inner).transpose()), sI);
}

} // namespace bios
