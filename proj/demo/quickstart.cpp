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


// Minimal end-to-end use of the library: draw channels, estimate the
// cascaded channels over two timescales, beamform on the estimates and
// score the sum rate on the true channels.

#include "bios/bios.hpp"

#include <cstdio>

int main() {
  using namespace bios;

  SystemConfig cfg = validate_config({{"estimation.t_g", "900"}, {"estimation.t_h", "120"}});
  const ArrayGeometry &geo = cfg.geometry;
  const Dictionaries dict = build_dictionaries(cfg.resolved_dictionary(), geo);

  Rng rng = spawn_stream(cfg.run.seed, 0);
  const ChannelRealization ch =
      draw_channels(rng, geo, cfg.k_fle, cfg.k_fra, cfg.paths_g, cfg.paths_h);

  // Large timescale: G and H of one refraction-side user.
  const int kc = cfg.kc_index();
  const EstimationConfig ecfg = cfg.resolved_estimation();
  const PhaseSchedule sch = random_phase_schedule(rng, ecfg.t_g, geo.m());
  const PilotSchedule pilots = random_pilots(rng, ecfg.t_g, geo.n_ue, cfg.run.pnr_db);
  const ReceivedBlock rx = simulate_uplink(
      ch.g, ch.h[kc], effective_phases(sch, ch.l, cfg.eps, Side::fra), pilots, Side::fra, kc, rng);
  const LargeEstimate large =
      estimate_large_timescale(rx, sch, pilots, ch.l, cfg.eps, dict, ecfg, rng);
  const CMat g_hat = large.g_hat.matrix();
  std::printf("large timescale: NMSE_fra = %.4g after %d outer iterations\n",
              nmse_kron(ch.g, ch.h[kc], g_hat, large.h_hat.matrix()), large.outer_iterations);

  // Small timescale: every user's H_k given the estimated G.
  std::vector<CMat> h_hat;
  for (int k = 0; k < cfg.k(); ++k) {
    const Side side = k < cfg.k_fle ? Side::fle : Side::fra;
    const PhaseSchedule s = random_phase_schedule(rng, ecfg.t_h, geo.m());
    const PilotSchedule p = random_pilots(rng, ecfg.t_h, geo.n_ue, cfg.run.pnr_db);
    const auto eff = effective_phases(s, ch.l, cfg.eps, side);
    const ReceivedBlock r = simulate_uplink(ch.g, ch.h[k], eff, p, side, k, rng);
    h_hat.push_back(estimate_small_timescale(r, g_hat, eff, p, dict, ecfg, rng).h_hat.matrix());
  }
  std::printf("small timescale: NMSE_avg = %.4g\n", nmse_avg(ch.g, ch.h, g_hat, h_hat));

  // Downlink: optimize on the estimates, evaluate on the truth.
  const BeamformingConfig bcfg = cfg.resolved_beamforming(cfg.run.snr_db);
  const DownlinkChannels seen{g_hat, h_hat, ch.l, cfg.k_fle};
  const BeamformerState st = wmmse_cd_solve(seen, bcfg, rng);
  const double t_tot =
      static_cast<double>(total_overhead(ecfg.t_g, ecfg.t_h, cfg.tau(), cfg.k()));
  const RateReport rate =
      sum_rate(st, DownlinkChannels::from(ch, cfg.k_fle), bcfg, t_tot, cfg.upsilon_large);
  std::printf("sum rate at SNR %.0f dB: %.3f bit/s/Hz (overhead factor %.2f)\n", cfg.run.snr_db,
              rate.sum, rate.overhead_factor);
  return 0;
}
