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

// Array responses, angular dictionaries, Saleh-Valenzuela channel synthesis
// and the near-field coupling matrix between the two surface layers.
//
// Element ordering on the surface follows the Kronecker order of the UPA
// response: element m = ix * m_y + iy, with ix along x and iy along y.

#pragma once

#include "bios/rng.hpp"
#include "bios/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

namespace bios {

struct ArrayGeometry {
  int n_bs = 8;
  int n_ue = 8;
  int m_x = 7;
  int m_y = 7;
  double wavelength = 0.03;
  double element_spacing = 0.015; // lambda / 2
  double layer_gap = 0.03;
  double element_size = 0.015; // "a" in the near-field model, lambda / 2

  int m() const { return m_x * m_y; }

  void validate() const {
    require(n_bs >= 1, "geometry.n_bs: must be >= 1");
    require(n_ue >= 1, "geometry.n_ue: must be >= 1");
    require(m_x >= 1, "geometry.m_x: must be >= 1");
    require(m_y >= 1, "geometry.m_y: must be >= 1");
    require(wavelength > 0, "geometry.wavelength: must be > 0");
    require(element_spacing > 0, "geometry.element_spacing: must be > 0");
    require(layer_gap > 0, "geometry.layer_gap: must be > 0");
    require(element_size > 0, "geometry.element_size: must be > 0");
  }
};

/// Which link a path set describes.
enum class LinkRole { bios_bs, ue_bios };

/// Multipath parameters of one channel. `linear_angle` is the BS AoA (for
/// BIOS-BS links) or the UE AoD (for UE-BIOS links); elevation/azimuth are
/// measured at the surface, elevation from the surface normal.
struct PathSet {
  std::vector<cd> gains;
  std::vector<double> linear_angle;
  std::vector<double> elevation;
  std::vector<double> azimuth;

  int size() const { return static_cast<int>(gains.size()); }
};

/// a(n, x) = [1, e^{j pi x}, ..., e^{j pi (n-1) x}]^T / sqrt(n)
inline CVec ula_response(int n, double x) {
  require(n >= 1, "ula_response: n must be >= 1");
  CVec a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) a(i) = std::polar(scale, kPi * i * x);
  return a;
}

/// Spatial frequencies seen by a UPA for a given elevation/azimuth.
struct UpaFrequency {
  double x;
  double y;
};

inline UpaFrequency upa_frequency(double elevation, double azimuth) {
  return {-std::sin(elevation) * std::sin(azimuth), -std::sin(elevation) * std::cos(azimuth)};
}

inline CVec kron(const CVec &a, const CVec &b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline CVec upa_response_freq(int m_x, int m_y, UpaFrequency f) {
  return kron(ula_response(m_x, f.x), ula_response(m_y, f.y));
}

inline CVec upa_response(int m_x, int m_y, double elevation, double azimuth) {
  return upa_response_freq(m_x, m_y, upa_frequency(elevation, azimuth));
}

/// Normalized power radiation pattern |cos^3 theta| of a surface element.
inline double radiation_pattern(double elevation) {
  const double c = std::cos(elevation);
  return std::abs(c * c * c);
}

/// Draws a path set with the LoS-first gain profile: path 1 ~ CN(0, 1),
/// paths 2..P ~ CN(0, 0.1). BS/UE angles are uniform on [0, pi], surface
/// azimuth uniform on [0, 2 pi), surface elevation uniform on [0, pi/4]
/// (reflection side) or [3 pi/4, pi] (refraction side).
inline PathSet sample_paths(Rng &rng, int count, Side side, double los_variance = 1.0,
                            double nlos_variance = 0.1) {
  require(count >= 1, "sample_paths: path count must be >= 1");
  PathSet p;
  p.gains.reserve(count);
  for (int i = 0; i < count; ++i) {
    p.gains.push_back(complex_normal(rng, i == 0 ? los_variance : nlos_variance));
    p.linear_angle.push_back(uniform(rng, 0.0, kPi));
    p.azimuth.push_back(uniform(rng, 0.0, 2.0 * kPi));
    const double el = uniform(rng, 0.0, kPi / 4.0);
    p.elevation.push_back(side == Side::fle ? el : kPi - el);
  }
  return p;
}

/// Saleh-Valenzuela synthesis. For LinkRole::bios_bs this returns the
/// N_BS x M matrix G; for LinkRole::ue_bios the M x N_UE matrix H_k.
inline CMat synth_channel(const PathSet &paths, const ArrayGeometry &geo, LinkRole role) {
  const int count = paths.size();
  require(count >= 1, "synth_channel: empty path set");
  require(static_cast<int>(paths.linear_angle.size()) == count &&
              static_cast<int>(paths.elevation.size()) == count &&
              static_cast<int>(paths.azimuth.size()) == count,
          "synth_channel: ragged path set");
  const int m = geo.m();
  const int n = role == LinkRole::bios_bs ? geo.n_bs : geo.n_ue;
  const double scale = std::sqrt(static_cast<double>(n) * m / count);

  CMat out = role == LinkRole::bios_bs ? CMat::Zero(n, m) : CMat::Zero(m, n);
  for (int p = 0; p < count; ++p) {
    const CVec a_lin = ula_response(n, std::cos(paths.linear_angle[p]));
    const CVec a_sur = upa_response(geo.m_x, geo.m_y, paths.elevation[p], paths.azimuth[p]);
    const cd w = scale * std::sqrt(radiation_pattern(paths.elevation[p])) * paths.gains[p];
    if (role == LinkRole::bios_bs)
      out.noalias() += w * a_lin * a_sur.adjoint();
    else
      out.noalias() += w * a_sur * a_lin.adjoint();
  }
  return out;
}

/// Position of element m on a layer centred at the origin of its plane.
inline Eigen::Vector2d element_position(const ArrayGeometry &geo, int m) {
  const int ix = m / geo.m_y;
  const int iy = m % geo.m_y;
  return {(ix - 0.5 * (geo.m_x - 1)) * geo.element_spacing,
          (iy - 0.5 * (geo.m_y - 1)) * geo.element_spacing};
}

/// Near-field coupling between element m1 of the first layer and element m2
/// of the second layer:
///   L(m1, m2) = sqrt(2 a^2 F(t) F(r) / (pi d^2)) exp(-j 2 pi d / lambda),
/// where both pattern angles are measured from the layer normals. The layers
/// are parallel, so the departure and arrival elevations coincide.
inline CMat near_field_L(const ArrayGeometry &geo) {
  geo.validate();
  const int m = geo.m();
  CMat L(m, m);
  const double a2 = geo.element_size * geo.element_size;
  for (int m1 = 0; m1 < m; ++m1) {
    const Eigen::Vector2d p1 = element_position(geo, m1);
    for (int m2 = 0; m2 < m; ++m2) {
      const Eigen::Vector2d p2 = element_position(geo, m2);
      const double lateral2 = (p1 - p2).squaredNorm();
      const double d = std::sqrt(lateral2 + geo.layer_gap * geo.layer_gap);
      if (!(d > 0)) throw std::invalid_argument("near_field_L: coincident elements");
      const double theta = std::acos(geo.layer_gap / d);
      const double f = radiation_pattern(theta);
      const double amp = std::sqrt(2.0 * a2 * f * f / (kPi * d * d));
      L(m1, m2) = std::polar(amp, -2.0 * kPi * d / geo.wavelength);
    }
  }
  return L;
}

/// Surface grid flavour. `restricted` spans [-sqrt2/2, sqrt2/2] (matches the
/// sampled elevation range, approximately orthogonal); `full` spans [-1, 1)
/// with spacing 2/G and is exactly orthogonal when G equals the array size.
enum class SurfaceGrid { restricted, full };

struct DictionaryConfig {
  int g_bs = 8;
  int g_ue = 8;
  int g_x = 7;
  int g_y = 7;
  SurfaceGrid surface_grid = SurfaceGrid::restricted;

  static DictionaryConfig matching(const ArrayGeometry &geo,
                                   SurfaceGrid grid = SurfaceGrid::restricted) {
    return {geo.n_bs, geo.n_ue, geo.m_x, geo.m_y, grid};
  }
};

struct Dictionaries {
  CMat a_bs; // N_BS x G_BS
  CMat a_ue; // N_UE x G_UE
  CMat a_i;  // M x (G_x G_y)
};

/// Grid point i (0-based) of a uniform [-1, 1) grid with g points.
inline double full_grid_point(int i, int g) { return -1.0 + 2.0 * i / g; }

/// Grid point i (0-based) of the restricted surface grid with g points.
inline double restricted_grid_point(int i, int g) {
  if (g == 1) return 0.0;
  return -std::sqrt(2.0) / 2.0 + i * std::sqrt(2.0) / (g - 1);
}

inline double surface_grid_point(int i, int g, SurfaceGrid grid) {
  return grid == SurfaceGrid::full ? full_grid_point(i, g) : restricted_grid_point(i, g);
}

inline CMat ula_dictionary(int n, int g) {
  CMat a(n, g);
  for (int i = 0; i < g; ++i) a.col(i) = ula_response(n, full_grid_point(i, g));
  return a;
}

inline CMat kron(const CMat &a, const CMat &b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Dictionaries build_dictionaries(const DictionaryConfig &cfg, const ArrayGeometry &geo) {
  require(cfg.g_bs >= 1 && cfg.g_ue >= 1 && cfg.g_x >= 1 && cfg.g_y >= 1,
          "build_dictionaries: grid resolutions must be >= 1");
  Dictionaries d;
  d.a_bs = ula_dictionary(geo.n_bs, cfg.g_bs);
  d.a_ue = ula_dictionary(geo.n_ue, cfg.g_ue);
  CMat ax(geo.m_x, cfg.g_x), ay(geo.m_y, cfg.g_y);
  for (int i = 0; i < cfg.g_x; ++i)
    ax.col(i) = ula_response(geo.m_x, surface_grid_point(i, cfg.g_x, cfg.surface_grid));
  for (int i = 0; i < cfg.g_y; ++i)
    ay.col(i) = ula_response(geo.m_y, surface_grid_point(i, cfg.g_y, cfg.surface_grid));
  d.a_i = kron(ax, ay);
  return d;
}

/// vec(A_left^H X A_right), column-major.
inline CVec angular_transform(const CMat &x, const CMat &a_left, const CMat &a_right) {
  require(a_left.rows() == x.rows() && x.cols() == a_right.rows(),
          "angular_transform: shape mismatch");
  const CMat t = a_left.adjoint() * x * a_right;
  return Eigen::Map<const CVec>(t.data(), t.size());
}

/// Number of singular values above rel_tol * sigma_max.
inline int numerical_rank(const CMat &x, double rel_tol = 1e-10) {
  if (x.size() == 0) return 0;
  const RVec s = Eigen::JacobiSVD<CMat>(x).singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// Moves every path onto the nearest point of the given grids so the angular
/// transform with matching dictionaries is exactly sparse. Surface angles are
/// re-derived from the snapped spatial frequencies; the snapped pair must lie
/// inside the unit disc, which holds for the sampled elevation ranges.
inline PathSet snap_to_grid(const PathSet &in, int g_linear, int g_x, int g_y,
                            SurfaceGrid grid = SurfaceGrid::full) {
  auto snap = [](double v, int g, auto point) {
    int best = 0;
    double best_err = std::abs(v - point(0, g));
    for (int i = 1; i < g; ++i) {
      const double err = std::abs(v - point(i, g));
      if (err < best_err) best = i, best_err = err;
    }
    return point(best, g);
  };
  auto surface_point = [grid](int i, int g) { return surface_grid_point(i, g, grid); };

  PathSet out = in;
  for (int p = 0; p < in.size(); ++p) {
    const double c = snap(std::cos(in.linear_angle[p]), g_linear, full_grid_point);
    out.linear_angle[p] = std::acos(std::clamp(c, -1.0, 1.0));
    const UpaFrequency f = upa_frequency(in.elevation[p], in.azimuth[p]);
    const double fx = snap(f.x, g_x, surface_point);
    const double fy = snap(f.y, g_y, surface_point);
    const double s = std::min(1.0, std::hypot(fx, fy));
    const double el = std::asin(s);
    out.elevation[p] = in.elevation[p] > kPi / 2 ? kPi - el : el;
    out.azimuth[p] = (fx == 0.0 && fy == 0.0) ? 0.0 : std::atan2(-fx, -fy);
  }
  return out;
}

/// One large-timescale realization: G, the per-UE H_k, L, and the path sets
/// that generated them.
struct ChannelRealization {
  CMat g;
  std::vector<CMat> h;
  CMat l;
  PathSet g_paths;
  std::vector<PathSet> h_paths;

  int k() const { return static_cast<int>(h.size()); }
};

/// Draws G (BS on the reflection side) and H_k for k_fle reflection-side
/// users followed by k_fra refraction-side users.
inline ChannelRealization draw_channels(Rng &rng, const ArrayGeometry &geo, int k_fle, int k_fra,
                                        int paths_g, int paths_h) {
  geo.validate();
  require(k_fle >= 0 && k_fra >= 0 && k_fle + k_fra >= 1, "draw_channels: need at least one UE");
  ChannelRealization ch;
  ch.g_paths = sample_paths(rng, paths_g, Side::fle);
  ch.g = synth_channel(ch.g_paths, geo, LinkRole::bios_bs);
  for (int k = 0; k < k_fle + k_fra; ++k) {
    ch.h_paths.push_back(sample_paths(rng, paths_h, k < k_fle ? Side::fle : Side::fra));
    ch.h.push_back(synth_channel(ch.h_paths.back(), geo, LinkRole::ue_bios));
  }
  ch.l = near_field_L(geo);
  return ch;
}

/// Redraws only the user channels, keeping G and L.
inline void redraw_user_channels(Rng &rng, const ArrayGeometry &geo, ChannelRealization &ch,
                                 int k_fle, int paths_h) {
  for (int k = 0; k < ch.k(); ++k) {
    ch.h_paths[k] = sample_paths(rng, paths_h, k < k_fle ? Side::fle : Side::fra);
    ch.h[k] = synth_channel(ch.h_paths[k], geo, LinkRole::ue_bios);
  }
}

} // namespace bios
