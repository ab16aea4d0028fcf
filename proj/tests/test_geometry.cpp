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


#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace bios;
using bios::testing::toy_geometry;

TEST(Ula, ResponseEntriesMatchFormula) {
  const CVec a = ula_response(5, 0.3);
  for (int i = 0; i < 5; ++i) {
    const cd want = std::exp(cd{0, kPi * i * 0.3}) / std::sqrt(5.0);
    EXPECT_NEAR(std::abs(a(i) - want), 0.0, 1e-15);
  }
  EXPECT_NEAR(a.norm(), 1.0, 1e-14);
}

TEST(Kron, MatrixMatchesIndexDefinition) {
  Rng rng(3);
  const CMat a = complex_normal_matrix(rng, 2, 3), b = complex_normal_matrix(rng, 4, 2);
  const CMat k = kron(a, b);
  ASSERT_EQ(k.rows(), 8);
  ASSERT_EQ(k.cols(), 6);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j)
      EXPECT_EQ(k(i, j), a(i / 4, j / 2) * b(i % 4, j % 2));
}

TEST(Upa, ResponseIsKronOfAxes) {
  const UpaFrequency f = upa_frequency(0.4, 1.1);
  EXPECT_NEAR(f.x, -std::sin(0.4) * std::sin(1.1), 1e-15);
  EXPECT_NEAR(f.y, -std::sin(0.4) * std::cos(1.1), 1e-15);
  const CVec a = upa_response(3, 4, 0.4, 1.1);
  for (int ix = 0; ix < 3; ++ix)
    for (int iy = 0; iy < 4; ++iy) {
      const cd want = std::exp(cd{0, kPi * (ix * f.x + iy * f.y)}) / std::sqrt(12.0);
      EXPECT_NEAR(std::abs(a(ix * 4 + iy) - want), 0.0, 1e-15);
    }
}

TEST(Paths, SideSelectsElevationRange) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const PathSet fle = sample_paths(rng, 5, Side::fle);
    const PathSet fra = sample_paths(rng, 5, Side::fra);
    for (int p = 0; p < 5; ++p) {
      EXPECT_GE(fle.elevation[p], 0.0);
      EXPECT_LE(fle.elevation[p], kPi / 4);
      EXPECT_GE(fra.elevation[p], 3 * kPi / 4);
      EXPECT_LE(fra.elevation[p], kPi);
      EXPECT_GE(fle.linear_angle[p], 0.0);
      EXPECT_LE(fle.linear_angle[p], kPi);
    }
  }
}

TEST(Paths, GainVariancesFollowLosProfile) {
  Rng rng(5);
  double los = 0, nlos = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const PathSet p = sample_paths(rng, 2, Side::fle);
    los += std::norm(p.gains[0]);
    nlos += std::norm(p.gains[1]);
  }
  EXPECT_NEAR(los / n, 1.0, 0.05);
  EXPECT_NEAR(nlos / n, 0.1, 0.005);
}

TEST(Channel, SynthesisMatchesSumOfPaths) {
  Rng rng(2);
  const ArrayGeometry geo = toy_geometry(4, 3, 2, 3);
  const PathSet p = sample_paths(rng, 2, Side::fra);
  const CMat h = synth_channel(p, geo, LinkRole::ue_bios);
  ASSERT_EQ(h.rows(), 6);
  ASSERT_EQ(h.cols(), 3);
  CMat want = CMat::Zero(6, 3);
  for (int q = 0; q < 2; ++q) {
    const double el = p.elevation[q];
    const double pat = std::abs(std::pow(std::cos(el), 3));
    want += std::sqrt(3.0 * 6.0 / 2.0) * std::sqrt(pat) * p.gains[q] *
            upa_response(2, 3, el, p.azimuth[q]) *
            ula_response(3, std::cos(p.linear_angle[q])).adjoint();
  }
  EXPECT_LT((h - want).norm(), 1e-13 * want.norm());
}

// Low rank of synthesized channels at full scale.
TEST(Channel, RankEqualsPathCount) {
  Rng rng(101);
  const ArrayGeometry geo;
  for (int i = 0; i < 100; ++i) {
    const ChannelRealization ch = draw_channels(rng, geo, 2, 3, 5, 5);
    for (const CMat *x : {&ch.g, &ch.h[i % 5]}) {
      const RVec s = Eigen::JacobiSVD<CMat>(*x).singularValues();
      EXPECT_LT(s(5), 1e-10 * s(0));
      EXPECT_GT(s(4), 1e-10 * s(0));
    }
  }
}

TEST(Dictionary, FullGridIsUnitary) {
  const ArrayGeometry geo;
  const Dictionaries d = build_dictionaries(DictionaryConfig::matching(geo, SurfaceGrid::full), geo);
  for (const CMat *a : {&d.a_bs, &d.a_ue, &d.a_i})
    EXPECT_LT((a->adjoint() * *a - CMat::Identity(a->cols(), a->cols())).norm(), 1e-12);
}

TEST(Dictionary, RestrictedGridSpansSampledRange) {
  EXPECT_NEAR(restricted_grid_point(0, 7), -std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(restricted_grid_point(6, 7), std::sqrt(2.0) / 2, 1e-15);
  const ArrayGeometry geo;
  const Dictionaries d = build_dictionaries(DictionaryConfig::matching(geo), geo);
  EXPECT_EQ(d.a_i.rows(), 49);
  EXPECT_EQ(d.a_i.cols(), 49);
  for (Eigen::Index j = 0; j < d.a_i.cols(); ++j) EXPECT_NEAR(d.a_i.col(j).norm(), 1.0, 1e-12);
}

namespace {

// Path set with distinct on-grid angles (full grids of the array sizes).
PathSet on_grid_paths(Rng &rng, const ArrayGeometry &geo, int count, Side side, int g_lin) {
  for (;;) {
    PathSet p = snap_to_grid(sample_paths(rng, count, side), g_lin, geo.m_x, geo.m_y);
    std::set<std::pair<long, long>> surf;
    std::set<long> lin;
    for (int i = 0; i < count; ++i) {
      const UpaFrequency f = upa_frequency(p.elevation[i], p.azimuth[i]);
      surf.insert({std::lround(f.x * 1e6), std::lround(f.y * 1e6)});
      lin.insert(std::lround(std::cos(p.linear_angle[i]) * 1e6));
    }
    if (static_cast<int>(surf.size()) == count && static_cast<int>(lin.size()) == count) return p;
  }
}

int count_above(const CVec &v, double rel) {
  const double mx = v.cwiseAbs().maxCoeff();
  int n = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > rel * mx) ++n;
  return n;
}

} // namespace

// On-grid angles with dictionaries the size of the arrays give exactly P
// (resp. Q) non-zero angular coefficients.
TEST(Dictionary, OnGridChannelsAreExactlySparse) {
  Rng rng(7);
  const ArrayGeometry geo;
  const Dictionaries d = build_dictionaries(DictionaryConfig::matching(geo, SurfaceGrid::full), geo);
  for (int i = 0; i < 50; ++i) {
    const CMat g = synth_channel(on_grid_paths(rng, geo, 5, Side::fle, geo.n_bs), geo,
                                 LinkRole::bios_bs);
    const CMat h = synth_channel(on_grid_paths(rng, geo, 5, Side::fra, geo.n_ue), geo,
                                 LinkRole::ue_bios);
    EXPECT_EQ(count_above(angular_transform(g, d.a_bs, d.a_i), 1e-6), 5);
    EXPECT_EQ(count_above(angular_transform(h, d.a_i, d.a_ue), 1e-6), 5);
  }
}

TEST(NearField, MatchesElementFormula) {
  const ArrayGeometry geo = toy_geometry(2, 2, 3, 3);
  const CMat L = near_field_L(geo);
  ASSERT_EQ(L.rows(), 9);
  // Element 0 at (-s, -s), element 8 at (s, s).
  const double s = geo.element_spacing;
  const double lat = std::sqrt(8.0) * s;
  const double d = std::hypot(lat, geo.layer_gap);
  const double cos_t = geo.layer_gap / d;
  const double f = std::pow(cos_t, 3);
  const double amp = std::sqrt(2 * geo.element_size * geo.element_size * f * f / (kPi * d * d));
  const cd want = std::polar(amp, -2 * kPi * d / geo.wavelength);
  EXPECT_NEAR(std::abs(L(0, 8) - want), 0.0, 1e-15);
  EXPECT_LT((L - L.transpose()).norm(), 1e-15);
}

TEST(NearField, FullScaleNorms) {
  const CMat L = near_field_L(ArrayGeometry{});
  const RVec s = Eigen::JacobiSVD<CMat>(L).singularValues();
  EXPECT_NEAR(s(0), 1.363, 5e-3);
  EXPECT_GT(s(s.size() - 1), 0.0);
}

TEST(Channel, DrawIsDeterministicPerStream) {
  const ArrayGeometry geo;
  Rng a = spawn_stream(42, 1), b = spawn_stream(42, 1), c = spawn_stream(42, 2);
  const auto x = draw_channels(a, geo, 2, 3, 5, 5);
  const auto y = draw_channels(b, geo, 2, 3, 5, 5);
  const auto z = draw_channels(c, geo, 2, 3, 5, 5);
  EXPECT_EQ(x.g, y.g);
  EXPECT_NE(x.g, z.g);
  ASSERT_EQ(x.h.size(), 5u);
  EXPECT_EQ(x.h[4], y.h[4]);
}

TEST(Channel, RedrawKeepsLargeTimescaleChannels) {
  const ArrayGeometry geo;
  Rng rng(1);
  auto ch = draw_channels(rng, geo, 2, 3, 5, 5);
  const CMat g = ch.g, h0 = ch.h[0];
  redraw_user_channels(rng, geo, ch, 2, 5);
  EXPECT_EQ(ch.g, g);
  EXPECT_NE(ch.h[0], h0);
  EXPECT_GE(ch.h_paths[3].elevation[0], 3 * kPi / 4);
}

TEST(Geometry, RejectsInvalidSizes) {
  ArrayGeometry g;
  g.m_x = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  Rng rng(1);
  EXPECT_THROW(sample_paths(rng, 0, Side::fle), std::invalid_argument);
}
