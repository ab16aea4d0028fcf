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

#include <chrono>

using namespace bios;

namespace {

struct Instance {
  CMat g, h, l;
  CVec s, phi1, phi2;
};

Instance random_instance(Rng &rng, int n_bs, int n_ue, int m) {
  return {complex_normal_matrix(rng, n_bs, m), complex_normal_matrix(rng, m, n_ue),
          complex_normal_matrix(rng, m, m),    complex_normal_matrix(rng, n_ue, 1),
          unit_phase_vector(rng, m),           unit_phase_vector(rng, m)};
}

} // namespace

TEST(KhatriRao, ColumnwiseKronecker) {
  Rng rng(1);
  const CMat a = complex_normal_matrix(rng, 3, 4), b = complex_normal_matrix(rng, 2, 4);
  const CMat k = khatri_rao(a, b);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 6; ++i) EXPECT_LT(std::abs(k(i, j) - a(i / 2, j) * b(i % 2, j)), 1e-14);
  EXPECT_THROW(khatri_rao(a, complex_normal_matrix(rng, 2, 3)), std::invalid_argument);
}

// The per-pilot received signal equals the sensing row applied to the
// Khatri-Rao (reflection) or Kronecker (refraction) cascaded channel.
TEST(Vectorization, SignalFormsAgree) {
  Rng rng(2024);
  const int n_bs = 4, n_ue = 2, m = 6;
  const double eps = 0.37;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Instance x = random_instance(rng, n_bs, n_ue, m);
    for (Side side : {Side::fle, Side::fra}) {
      const CMat phi = effective_phase_uplink(x.phi1, x.phi2, x.l, eps, side);
      const CVec direct = x.g * phi * x.h * x.s;
      const CMat j = side == Side::fle ? cascaded_fle(x.h, x.g) : cascaded_fra(x.h, x.g);
      const CVec viaj = ls_sensing_row(x.s, x.phi1, x.phi2, x.l, eps, side, n_bs) * vec(j);
      worst = std::max(worst, (direct - viaj).norm() / direct.norm());
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(worst, 1e-12);
  EXPECT_LT(secs, 1.0);
}

TEST(EffectivePhase, UplinkAndDownlinkForms) {
  Rng rng(3);
  const Instance x = random_instance(rng, 2, 2, 5);
  const CMat up_fle = effective_phase_uplink(x.phi1, x.phi2, x.l, 0.3, Side::fle);
  EXPECT_LT((up_fle - CMat(std::sqrt(0.3) * x.phi1.asDiagonal().toDenseMatrix())).norm(), 1e-15);
  const CMat up_fra = effective_phase_uplink(x.phi1, x.phi2, x.l, 0.3, Side::fra);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      EXPECT_NEAR(std::abs(up_fra(a, b) - std::sqrt(0.7) * x.phi1(a) * x.l(a, b) * x.phi2(b)), 0,
                  1e-14);
  const CMat dn_fra = effective_phase_downlink(x.phi1, x.phi2, x.l, 0.3, Side::fra);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      EXPECT_NEAR(
          std::abs(dn_fra(a, b) - std::sqrt(0.7) * x.phi2(a) * std::conj(x.l(b, a)) * x.phi1(b)),
          0, 1e-14);
}

TEST(EffectivePhase, RejectsPowerSplitOutsideOpenInterval) {
  Rng rng(3);
  const Instance x = random_instance(rng, 2, 2, 3);
  for (double eps : {0.0, 1.0, -0.1, 1.2})
    EXPECT_THROW(effective_phase_uplink(x.phi1, x.phi2, x.l, eps, Side::fra),
                 std::invalid_argument);
}

TEST(Schedules, UnitModulusAndNormalizedPilots) {
  Rng rng(4);
  const PhaseSchedule sch = random_phase_schedule(rng, 10, 6, 3);
  for (int t = 0; t < 10; ++t)
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(std::abs(sch.phi1(t, i)), 1.0, 1e-15);
      EXPECT_NEAR(std::abs(sch.phi2(t, i)), 1.0, 1e-15);
    }
  EXPECT_EQ(sch.phi1.row(1), sch.phi1.row(0));
  EXPECT_EQ(sch.phi1.row(2), sch.phi1.row(0));
  EXPECT_NE(sch.phi1.row(3), sch.phi1.row(0));

  const PilotSchedule p = random_pilots(rng, 7, 8, 20.0);
  for (int t = 0; t < 7; ++t) EXPECT_NEAR(p.s.row(t).norm(), 1.0, 1e-14);
  EXPECT_NEAR(p.noise_variance(), 0.01, 1e-15);
}

TEST(Uplink, NoiseHasRequestedVariance) {
  Rng rng(5);
  const int n_bs = 4, n_ue = 2, m = 3, T = 20000;
  const Instance x = random_instance(rng, n_bs, n_ue, m);
  const PhaseSchedule sch = random_phase_schedule(rng, T, m);
  const PilotSchedule p = random_pilots(rng, T, n_ue, 3.0);
  const auto eff = effective_phases(sch, x.l, 0.5, Side::fra);
  const ReceivedBlock noisy = simulate_uplink(x.g, x.h, eff, p, Side::fra, 0, rng);
  const ReceivedBlock clean = noiseless_uplink(x.g, x.h, eff, p, Side::fra, 0);
  const double var = (noisy.r - clean.r).squaredNorm() / (T * n_bs);
  EXPECT_NEAR(var, p.noise_variance(), 0.02 * p.noise_variance());
}

TEST(Uplink, ShapeMismatchThrows) {
  Rng rng(6);
  const Instance x = random_instance(rng, 3, 2, 4);
  EXPECT_THROW(uplink_received(x.g, x.h, CMat::Identity(3, 3), x.s, 0.1, rng),
               std::invalid_argument);
}

TEST(Rng, SpawnedStreamsAreReproducibleAndDistinct) {
  Rng a = spawn_stream(9, 0), b = spawn_stream(9, 0), c = spawn_stream(9, 1), d = spawn_stream(10, 0);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
}
