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

using namespace bios;
using bios::testing::toy_geometry;

namespace {

DownlinkChannels small_channels(Rng &rng, int n_bs, int n_ue, int m_x, int m_y, int k_fle,
                                int k_fra) {
  const ArrayGeometry geo = toy_geometry(n_bs, n_ue, m_x, m_y);
  const ChannelRealization ch = draw_channels(rng, geo, k_fle, k_fra, 2, 2);
  return DownlinkChannels::from(ch, k_fle);
}

BeamformerState warm_state(const DownlinkChannels &ch, const BeamformingConfig &cfg, Rng &rng) {
  BeamformerState s = initial_state(ch, cfg, rng);
  update_W_Psi(effective_channels(ch, s.phi1, s.phi2, cfg), s, cfg.n_s);
  return s;
}

} // namespace

TEST(EffectiveChannel, MatchesDownlinkPhaseMatrix) {
  Rng rng(1);
  const DownlinkChannels ch = small_channels(rng, 3, 2, 2, 2, 1, 1);
  const CVec p1 = unit_phase_vector(rng, 4), p2 = unit_phase_vector(rng, 4);
  for (int k = 0; k < 2; ++k) {
    const Side side = ch.side(k);
    const CMat want = ch.h[k].adjoint() * effective_phase_downlink(p1, p2, ch.l, 0.4, side) *
                      ch.g.adjoint();
    const CMat got = effective_channel(ch.h[k], p1, p2, ch.l, ch.g, 0.4, side);
    EXPECT_LT((want - got).norm(), 1e-13 * want.norm());
  }
}

TEST(EffectiveChannel, ModesDifferOnRefractionSide) {
  Rng rng(2);
  const DownlinkChannels ch = small_channels(rng, 3, 2, 2, 2, 1, 1);
  const CVec p1 = unit_phase_vector(rng, 4), p2 = unit_phase_vector(rng, 4);
  const CMat ios = effective_channel(ch.h[1], p1, p2, ch.l, ch.g, 0.5, Side::fra, RisMode::ios);
  EXPECT_LT((ios - std::sqrt(0.5) * ch.h[1].adjoint() * p1.asDiagonal() * ch.g.adjoint()).norm(),
            1e-13);
  EXPECT_EQ(effective_channel(ch.h[1], p1, p2, ch.l, ch.g, 0.5, Side::fra, RisMode::irs).norm(),
            0.0);
  const CMat irs_fle = effective_channel(ch.h[0], p1, p2, ch.l, ch.g, 0.5, Side::fle, RisMode::irs);
  EXPECT_LT((irs_fle - ch.h[0].adjoint() * p1.asDiagonal() * ch.g.adjoint()).norm(), 1e-13);
}

// After the W/Psi update, the WMMSE objective equals K N_s minus the sum
// rate in nats.
TEST(Wmmse, OptimalWeightsGiveRateIdentity) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const DownlinkChannels ch = small_channels(rng, 4, 2, 2, 2, 1, 2);
    for (int n_s : {1, 2}) {
      BeamformingConfig cfg;
      cfg.n_s = n_s;
      cfg.noise_variance = 0.3;
      BeamformerState s = initial_state(ch, cfg, rng);
      const auto he = effective_channels(ch, s.phi1, s.phi2, cfg);
      update_W_Psi(he, s, n_s);
      const double rate_bits = sum_rate(he, s.f, n_s, cfg.noise_variance, 0, 1).sum;
      EXPECT_NEAR(wmmse_objective(he, s, n_s), ch.k() * n_s - rate_bits * std::log(2.0), 1e-9);
    }
  }
}

TEST(Wmmse, ScalarChannelRate) {
  DownlinkChannels ch;
  ch.g = CMat::Constant(1, 1, cd{0.8, 0.1});
  ch.h = {CMat::Constant(1, 1, cd{0.5, -0.3})};
  ch.l = CMat::Constant(1, 1, cd{1, 0});
  ch.k_fle = 1;
  BeamformingConfig cfg;
  cfg.eps = 0.5;
  cfg.noise_variance = 0.2;
  const CVec p = CVec::Constant(1, cd{1, 0});
  const auto he = effective_channels(ch, p, p, cfg);
  const CMat f = CMat::Constant(1, 1, cd{1, 0});
  const double gain = 0.5 * std::norm(ch.h[0](0, 0)) * std::norm(ch.g(0, 0));
  const RateReport r = sum_rate(he, f, 1, 0.2, 2500, 10000);
  EXPECT_NEAR(r.sum, 0.75 * std::log2(1.0 + gain / 0.2), 1e-12);
  EXPECT_DOUBLE_EQ(r.overhead_factor, 0.75);
  EXPECT_THROW(sum_rate(he, f, 1, 0.2, 20000, 10000), std::invalid_argument);
}

// The quadratic forms reproduce objective differences in phi_d1 and phi_d2.
TEST(Wmmse, PhaseQuadraticFormsMatchObjective) {
  Rng rng(4);
  for (RisMode mode : {RisMode::bios, RisMode::ios, RisMode::irs}) {
    const DownlinkChannels ch = small_channels(rng, 3, 2, 2, 3, 2, 2);
    BeamformingConfig cfg;
    cfg.mode = mode;
    BeamformerState s = warm_state(ch, cfg, rng);
    auto obj = [&](const CVec &p1, const CVec &p2) {
      BeamformerState t = s;
      t.phi1 = p1;
      t.phi2 = p2;
      return wmmse_objective(effective_channels(ch, p1, p2, cfg), t, cfg.n_s);
    };
    const QuadraticForm q1 = build_Xi_rho(ch, s, cfg);
    const CVec a = unit_phase_vector(rng, ch.m()), b = unit_phase_vector(rng, ch.m());
    EXPECT_NEAR(obj(a, s.phi2) - obj(b, s.phi2), quadratic_value(q1, a) - quadratic_value(q1, b),
                1e-10);
    if (mode == RisMode::bios) {
      const QuadraticForm q2 = build_Xi_rho_fra(ch, s, cfg);
      EXPECT_NEAR(obj(s.phi1, a) - obj(s.phi1, b),
                  quadratic_value(q2, a) - quadratic_value(q2, b), 1e-10);
    }
  }
}

// Closed-form coordinate update versus a 3600-point phase grid.
TEST(CoordinateDescent, MatchesPhaseGridOracle) {
  Rng rng(5);
  const int grid = 3600;
  for (int i = 0; i < 50; ++i) {
    const DownlinkChannels ch = small_channels(rng, 3, 2, 2, 2, 1, 2);
    BeamformingConfig cfg;
    BeamformerState s = warm_state(ch, cfg, rng);
    const bool second = i % 2 == 1;
    const QuadraticForm q = second ? build_Xi_rho_fra(ch, s, cfg) : build_Xi_rho(ch, s, cfg);
    CVec phi = second ? s.phi2 : s.phi1;
    const Eigen::Index m = i % ch.m();
    const cd best = cd_update_phi(phi, q.xi, q.rho, m);
    double grid_min = std::numeric_limits<double>::infinity(), grid_arg = 0;
    for (int g = 0; g < grid; ++g) {
      const double th = 2 * kPi * g / grid;
      phi(m) = std::polar(1.0, th);
      const double v = quadratic_value(q, phi);
      if (v < grid_min) grid_min = v, grid_arg = th;
    }
    phi(m) = best;
    EXPECT_LE(quadratic_value(q, phi), grid_min + 1e-12);
    double d = std::abs(std::arg(best) - grid_arg);
    d = std::min(d, 2 * kPi - d);
    EXPECT_LE(d, 2 * kPi / grid);
    EXPECT_NEAR(std::abs(best), 1.0, 1e-14);
  }
}

TEST(CoordinateDescent, SweepNeverIncreasesQuadratic) {
  Rng rng(6);
  const CMat a = complex_normal_matrix(rng, 6, 6);
  const QuadraticForm q{a * a.adjoint(), complex_normal_matrix(rng, 6, 1)};
  CVec phi = unit_phase_vector(rng, 6);
  double prev = quadratic_value(q, phi);
  for (int s = 0; s < 5; ++s) {
    cd_sweep(phi, q, 1);
    const double now = quadratic_value(q, phi);
    EXPECT_LE(now, prev + 1e-12);
    prev = now;
  }
}

TEST(Precoder, ExactSolutionIsFeasibleAndOptimal) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const CMat r = complex_normal_matrix(rng, 4, 3);
    const CMat a = r * r.adjoint();
    const CMat b = complex_normal_matrix(rng, 4, 2) * (i % 2 ? 10.0 : 0.05);
    const CMat f = detail::exact_precoder(a, b);
    EXPECT_LE(f.norm(), 1.0 + 1e-9);
    auto val = [&](const CMat &x) {
      return (x.adjoint() * a * x).trace().real() - 2 * frob_inner(b, x).real();
    };
    for (int j = 0; j < 50; ++j) {
      CMat x = complex_normal_matrix(rng, 4, 2);
      x /= std::max(1.0, x.norm() / uniform(rng, 0.0, 1.0));
      EXPECT_LE(val(f), val(x) + 1e-9);
    }
  }
}

// Objective non-increasing after every block update at full scale.
TEST(Wmmse, BlockUpdatesAreMonotone) {
  const ArrayGeometry geo;
  for (int i = 0; i < 20; ++i) {
    Rng rng = spawn_stream(8, i);
    const DownlinkChannels ch = DownlinkChannels::from(draw_channels(rng, geo, 2, 3, 5, 5), 2);
    BeamformingConfig cfg;
    cfg.noise_variance = 0.1;
    cfg.max_iterations = 30;
    const BeamformerState s = wmmse_cd_solve(ch, cfg, rng);
    for (std::size_t t = 1; t < s.trace.size(); ++t)
      EXPECT_LE(s.trace[t], s.trace[t - 1] + 1e-9 * std::max(1.0, std::abs(s.trace[t - 1])));
    EXPECT_LE(s.f.norm(), 1.0 + 1e-9);
    for (Eigen::Index m = 0; m < ch.m(); ++m) {
      EXPECT_NEAR(std::abs(s.phi1(m)), 1.0, 1e-12);
      EXPECT_NEAR(std::abs(s.phi2(m)), 1.0, 1e-12);
    }
  }
}

TEST(Wmmse, IrsServesOnlyReflectionSide) {
  Rng rng(9);
  const DownlinkChannels ch = small_channels(rng, 4, 2, 2, 2, 1, 2);
  BeamformingConfig cfg;
  cfg.mode = RisMode::irs;
  const BeamformerState s = wmmse_cd_solve(ch, cfg, rng);
  const RateReport r = sum_rate(s, ch, cfg, 0, 1);
  EXPECT_GT(r.per_ue[0], 0.0);
  EXPECT_EQ(r.per_ue[1], 0.0);
  EXPECT_EQ(r.per_ue[2], 0.0);
}

TEST(Wmmse, DeterministicForFixedStream) {
  Rng a(10), b(10);
  const DownlinkChannels ch = small_channels(a, 4, 2, 2, 2, 1, 2);
  small_channels(b, 4, 2, 2, 2, 1, 2);
  BeamformingConfig cfg;
  const BeamformerState x = wmmse_cd_solve(ch, cfg, a), y = wmmse_cd_solve(ch, cfg, b);
  EXPECT_EQ(x.f, y.f);
  EXPECT_EQ(x.trace, y.trace);
}
