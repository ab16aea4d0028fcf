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

// Seeded Monte Carlo orchestration: scenarios, presets, per-trial pipeline,
// deterministic merging and CSV/JSON result files.
//
// Random streams. Every trial owns a family of generators obtained from
// spawn_stream(seed, id) with
//   id = trial * 2^20 + purpose * 2^16 + sub
// where `purpose` is one of the StreamPurpose values and `sub` indexes the
// small timescale and/or user. Results therefore do not depend on thread
// count or completion order.

#pragma once

#include "bios/beamforming.hpp"
#include "bios/config.hpp"
#include "bios/estimator.hpp"
#include "bios/geometry.hpp"
#include "bios/signal.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace bios {

enum class SweepAxis { t_g, t_h, snr };

inline const char *to_string(SweepAxis a) {
  switch (a) {
  case SweepAxis::t_g: return "t_g";
  case SweepAxis::t_h: return "t_h";
  case SweepAxis::snr: return "snr";
  }
  return "unknown";
}

inline SweepAxis parse_sweep_axis(const std::string &s) {
  if (s == "t_g") return SweepAxis::t_g;
  if (s == "t_h") return SweepAxis::t_h;
  if (s == "snr") return SweepAxis::snr;
  throw ConfigError("sweep axis: expected one of t_g|t_h|snr, got '" + s + "'");
}

struct Scenario {
  std::string name;
  SystemConfig base; // trials, seed, estimator and RIS mode live in base.run / base.beamforming
  SweepAxis axis = SweepAxis::t_g;
  std::vector<double> values;
  bool small_stage = true; // estimate H_k per small timescale
  bool rate_stage = true;  // beamform and score the sum rate
  // Optional overhead search: every (T_G, T_H) pair is evaluated and, per
  // sweep value, the pair with the highest mean sum rate is kept.
  std::vector<int> grid_t_g;
  std::vector<int> grid_t_h;

  void validate() const {
    if (name.empty() || name.find_first_of(",\"\n\r") != std::string::npos)
      throw ConfigError("scenario.name: must be non-empty without commas, quotes or newlines");
    if (values.empty()) throw ConfigError("scenario.values: at least one sweep value is required");
    for (double v : values) {
      if (!std::isfinite(v)) throw ConfigError("scenario.values: values must be finite");
      if (axis != SweepAxis::snr && !(v >= 1 && v == std::floor(v)))
        throw ConfigError(std::string("scenario.values: ") + to_string(axis) +
                          " values must be positive integers");
    }
    if (grid_t_g.empty() != grid_t_h.empty())
      throw ConfigError("scenario.grid: T_G and T_H grids must both be set or both be empty");
    for (int v : grid_t_g)
      if (v < 1) throw ConfigError("scenario.grid_t_g: values must be >= 1");
    for (int v : grid_t_h)
      if (v < 1) throw ConfigError("scenario.grid_t_h: values must be >= 1");
    if (!grid_t_g.empty() && axis != SweepAxis::snr)
      throw ConfigError("scenario.grid: an overhead grid requires the snr sweep axis");
    // Re-run the field checks on the base configuration.
    validate_config(RawConfig{}, base);
  }
};

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int trial = 0;
  double sweep_value = 0.0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
  int t_g = 0;
  int t_h = 0;
  double nmse_fra = 0.0; // 0 when not estimated
  double nmse_avg = 0.0; // 0 when not estimated
  double sum_rate = 0.0; // mean over the small timescales; 0 when not evaluated
  int iterations = 0;    // large-timescale outer iterations (0 without estimation)
  double wall_ms = 0.0;  // 0 unless timing is enabled

  bool operator==(const ResultRow &) const = default;
};

inline const std::vector<std::string> &result_columns() {
  static const std::vector<std::string> cols = {
      "scenario", "seed",     "trial",    "sweep_value", "pnr_db",     "snr_db", "t_g",
      "t_h",      "nmse_fra", "nmse_avg", "sum_rate",    "iterations", "wall_ms"};
  return cols;
}

// ---------------------------------------------------------------- streams

enum class StreamPurpose : std::uint64_t {
  channels = 0,
  large_pilots = 1,
  large_init = 2,
  small_channels = 3,
  small_pilots = 4,
  small_init = 5,
  beamformer = 6,
};

inline Rng trial_stream(std::uint64_t seed, int trial, StreamPurpose purpose,
                        std::uint64_t sub = 0) {
  require(sub < (1u << 16), "trial_stream: sub-stream index out of range");
  const std::uint64_t id = (static_cast<std::uint64_t>(trial) << 20) |
                           (static_cast<std::uint64_t>(purpose) << 16) | sub;
  return spawn_stream(seed, id);
}

// --------------------------------------------------------------- pipeline

/// Settings of a single evaluation point.
struct PointSettings {
  int t_g = 0;
  int t_h = 0;
  double pnr_db = 0.0;
  double snr_db = 0.0;
};

inline PointSettings point_settings(const Scenario &sc, double value) {
  const RunConfig &run = sc.base.run;
  PointSettings p{sc.base.estimation.t_g, sc.base.estimation.t_h, run.pnr_db, run.snr_db};
  switch (sc.axis) {
  case SweepAxis::t_g: p.t_g = static_cast<int>(value); break;
  case SweepAxis::t_h: p.t_h = static_cast<int>(value); break;
  case SweepAxis::snr:
    p.snr_db = value;
    p.pnr_db = value + run.pnr_offset_db;
    break;
  }
  return p;
}

struct LargeOutcome {
  CMat g_hat;
  double nmse_fra = 0.0;
  int outer_iterations = 0;
};

/// Pilot overhead charged to the rate of one evaluation point.
inline double charged_overhead(const SystemConfig &c, const PointSettings &p) {
  switch (c.run.estimator) {
  case EstimatorKind::htt:
    return static_cast<double>(total_overhead(p.t_g, p.t_h, c.tau(), c.k()));
  case EstimatorKind::perfect:
    return c.run.count_overhead ? static_cast<double>(total_overhead(p.t_g, p.t_h, c.tau(), c.k()))
                                : 0.0;
  case EstimatorKind::ls_bound:
    return static_cast<double>(ls_overhead_bound(c.k_fle, c.k_fra, c.geometry.m(),
                                                 c.geometry.n_ue, c.tau()));
  }
  return 0.0;
}

namespace detail {

class TrialRunner {
public:
  TrialRunner(const Scenario &sc, const Dictionaries &dict, int trial)
      : sc_(sc), c_(sc.base), dict_(dict), trial_(trial), seed_(sc.base.run.seed) {
    Rng rng = trial_stream(seed_, trial_, StreamPurpose::channels);
    large_ = draw_channels(rng, c_.geometry, c_.k_fle, c_.k_fra, c_.paths_g, c_.paths_h);
    for (int j = 0; j < c_.tau(); ++j) {
      ChannelRealization ch = large_;
      Rng r = trial_stream(seed_, trial_, StreamPurpose::small_channels, j);
      redraw_user_channels(r, c_.geometry, ch, c_.k_fle, c_.paths_h);
      small_.push_back(std::move(ch));
    }
  }

  ResultRow evaluate(double sweep_value, const PointSettings &p) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row;
    row.scenario = sc_.name;
    row.seed = seed_;
    row.trial = trial_;
    row.sweep_value = sweep_value;
    row.pnr_db = p.pnr_db;
    row.snr_db = p.snr_db;
    row.t_g = p.t_g;
    row.t_h = p.t_h;

    const bool estimate = c_.run.estimator == EstimatorKind::htt;
    CMat g_hat;
    if (estimate) {
      const LargeOutcome &lo = large_estimate(p.t_g, p.pnr_db);
      row.nmse_fra = lo.nmse_fra;
      row.iterations = lo.outer_iterations;
      g_hat = lo.g_hat;
    }

    const bool small = sc_.small_stage || sc_.rate_stage;
    if (small) {
      const BeamformingConfig bcfg = c_.resolved_beamforming(p.snr_db);
      const double t_tot = std::min(charged_overhead(c_, p), c_.upsilon_large);
      double nmse_sum = 0.0, rate_sum = 0.0;
      for (int j = 0; j < c_.tau(); ++j) {
        const ChannelRealization &truth = small_[j];
        std::vector<CMat> h_hat;
        if (estimate && sc_.small_stage) {
          h_hat = small_estimates(j, g_hat, p);
          nmse_sum += nmse_avg(truth.g, truth.h, g_hat, h_hat);
        }
        if (sc_.rate_stage) {
          const DownlinkChannels actual = DownlinkChannels::from(truth, c_.k_fle);
          DownlinkChannels seen = actual;
          if (estimate) {
            if (h_hat.empty()) h_hat = small_estimates(j, g_hat, p);
            seen = DownlinkChannels{g_hat, h_hat, truth.l, c_.k_fle};
          }
          Rng rng = trial_stream(seed_, trial_, StreamPurpose::beamformer, j);
          const BeamformerState st = wmmse_cd_solve(seen, bcfg, rng);
          rate_sum += sum_rate(st, actual, bcfg, t_tot, c_.upsilon_large).sum;
        }
      }
      if (estimate && sc_.small_stage) row.nmse_avg = nmse_sum / c_.tau();
      if (sc_.rate_stage) row.sum_rate = rate_sum / c_.tau();
    }

    if (c_.run.timing)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
    return row;
  }

private:
  const LargeOutcome &large_estimate(int t_g, double pnr_db) {
    const auto key = std::make_pair(t_g, pnr_db);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const int kc = c_.kc_index();
    const ArrayGeometry &geo = c_.geometry;
    Rng rng = trial_stream(seed_, trial_, StreamPurpose::large_pilots);
    const PhaseSchedule sch = random_phase_schedule(rng, t_g, geo.m());
    const PilotSchedule pilots = random_pilots(rng, t_g, geo.n_ue, pnr_db);
    const std::vector<CMat> eff = effective_phases(sch, large_.l, c_.eps, Side::fra);
    const ReceivedBlock rx =
        simulate_uplink(large_.g, large_.h[kc], eff, pilots, Side::fra, kc, rng);

    EstimationConfig ecfg = c_.resolved_estimation();
    ecfg.t_g = t_g;
    Rng init = trial_stream(seed_, trial_, StreamPurpose::large_init);
    const LargeEstimate est =
        estimate_large_timescale(rx, sch, pilots, large_.l, c_.eps, dict_, ecfg, init);

    LargeOutcome out;
    out.g_hat = est.g_hat.matrix();
    out.nmse_fra = nmse_kron(large_.g, large_.h[kc], out.g_hat, est.h_hat.matrix());
    out.outer_iterations = est.outer_iterations;
    return cache_.emplace(key, std::move(out)).first->second;
  }

  std::vector<CMat> small_estimates(int j, const CMat &g_hat, const PointSettings &p) {
    const ChannelRealization &truth = small_[j];
    const ArrayGeometry &geo = c_.geometry;
    EstimationConfig ecfg = c_.resolved_estimation();
    ecfg.t_h = p.t_h;
    std::vector<CMat> out;
    for (int k = 0; k < c_.k(); ++k) {
      const Side side = k < c_.k_fle ? Side::fle : Side::fra;
      const std::uint64_t sub = static_cast<std::uint64_t>(j) * c_.k() + k;
      Rng rng = trial_stream(seed_, trial_, StreamPurpose::small_pilots, sub);
      const PhaseSchedule sch = random_phase_schedule(rng, p.t_h, geo.m());
      const PilotSchedule pilots = random_pilots(rng, p.t_h, geo.n_ue, p.pnr_db);
      const std::vector<CMat> eff = effective_phases(sch, truth.l, c_.eps, side);
      const ReceivedBlock rx = simulate_uplink(truth.g, truth.h[k], eff, pilots, side, k, rng);
      Rng init = trial_stream(seed_, trial_, StreamPurpose::small_init, sub);
      out.push_back(
          estimate_small_timescale(rx, g_hat, eff, pilots, dict_, ecfg, init).h_hat.matrix());
    }
    return out;
  }

  const Scenario &sc_;
  const SystemConfig &c_;
  const Dictionaries &dict_;
  int trial_;
  std::uint64_t seed_;
  ChannelRealization large_;
  std::vector<ChannelRealization> small_;
  std::map<std::pair<int, double>, LargeOutcome> cache_;
};

/// Rows of one trial, ordered by sweep value (then grid pair).
inline std::vector<ResultRow> run_trial(const Scenario &sc, const Dictionaries &dict, int trial) {
  TrialRunner runner(sc, dict, trial);
  std::vector<ResultRow> rows;
  for (double v : sc.values) {
    PointSettings p = point_settings(sc, v);
    if (sc.grid_t_g.empty()) {
      rows.push_back(runner.evaluate(v, p));
      continue;
    }
    for (int tg : sc.grid_t_g)
      for (int th : sc.grid_t_h) {
        p.t_g = tg;
        p.t_h = th;
        rows.push_back(runner.evaluate(v, p));
      }
  }
  return rows;
}

/// Keeps, per sweep value, the grid pair with the highest mean sum rate.
inline std::vector<ResultRow> select_best_overhead(const Scenario &sc,
                                                   const std::vector<ResultRow> &rows) {
  std::map<std::tuple<double, int, int>, std::pair<double, int>> acc;
  for (const auto &r : rows) {
    auto &a = acc[{r.sweep_value, r.t_g, r.t_h}];
    a.first += r.sum_rate;
    a.second += 1;
  }
  std::map<double, std::pair<int, int>> best;
  for (double v : sc.values) {
    double best_rate = -1.0;
    for (int tg : sc.grid_t_g)
      for (int th : sc.grid_t_h) {
        const auto &a = acc[{v, tg, th}];
        const double mean = a.second ? a.first / a.second : 0.0;
        if (mean > best_rate) {
          best_rate = mean;
          best[v] = {tg, th};
        }
      }
  }
  std::vector<ResultRow> out;
  for (const auto &r : rows)
    if (best[r.sweep_value] == std::make_pair(r.t_g, r.t_h)) out.push_back(r);
  return out;
}

} // namespace detail

/// Runs every trial of a scenario. Rows are ordered by (trial, sweep value)
/// regardless of thread count. `progress` is called once per finished trial.
inline std::vector<ResultRow> run_scenario(const Scenario &sc,
                                           const std::function<void(int)> &progress = {}) {
  sc.validate();
  const SystemConfig &c = sc.base;
  const Dictionaries dict = build_dictionaries(c.resolved_dictionary(), c.geometry);
  const int trials = c.run.trials;
  const int workers = std::min(resolve_threads(c.run.threads), trials);

  std::vector<std::vector<ResultRow>> per_trial(trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= trials) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure) return;
      }
      try {
        per_trial[t] = detail::run_trial(sc, dict, t);
        if (progress) {
          std::lock_guard<std::mutex> lock(mu);
          progress(t);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto &th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows;
  for (auto &v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
  if (!sc.grid_t_g.empty()) rows = detail::select_best_overhead(sc, rows);
  return rows;
}

// ---------------------------------------------------------------- presets

inline const std::vector<std::string> &preset_names() {
  static const std::vector<std::string> names = {"fig3a", "fig3b", "fig4a",
                                                 "fig4b", "fig5a", "fig5b"};
  return names;
}

namespace detail {

inline std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
  return out;
}

inline std::string db_suffix(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

} // namespace detail

/// Scenario list of a figure preset built on top of `base` (trial count,
/// seed and any other overrides carry over).
inline std::vector<Scenario> preset(const std::string &name, const SystemConfig &base) {
  std::vector<Scenario> out;
  auto make = [&](const std::string &sname, SweepAxis axis, std::vector<double> values) {
    Scenario s;
    s.name = sname;
    s.base = base;
    s.axis = axis;
    s.values = std::move(values);
    return s;
  };

  if (name == "fig3a") {
    for (double pnr : {0.0, 10.0, 20.0, 30.0}) {
      Scenario s = make("fig3a-pnr" + detail::db_suffix(pnr), SweepAxis::t_g,
                        detail::range(100, 1500, 100));
      s.base.run.pnr_db = pnr;
      s.base.run.estimator = EstimatorKind::htt;
      s.small_stage = false;
      s.rate_stage = false;
      out.push_back(std::move(s));
    }
  } else if (name == "fig3b") {
    for (double pnr : {0.0, 10.0, 20.0, 30.0}) {
      Scenario s = make("fig3b-pnr" + detail::db_suffix(pnr), SweepAxis::t_h,
                        detail::range(30, 180, 30));
      s.base.run.pnr_db = pnr;
      s.base.estimation.t_g = 900;
      s.base.run.estimator = EstimatorKind::htt;
      s.rate_stage = false;
      out.push_back(std::move(s));
    }
  } else if (name == "fig4a" || name == "fig4b") {
    const bool a = name == "fig4a";
    for (EstimatorKind e : {EstimatorKind::htt, EstimatorKind::perfect}) {
      Scenario s = make(name + "-" + to_string(e), a ? SweepAxis::t_g : SweepAxis::t_h,
                        a ? detail::range(100, 1500, 100)
                          : std::vector<double>{25, 50, 75, 100, 150, 200, 300});
      s.base.estimation.t_g = 900;
      s.base.estimation.t_h = 150;
      s.base.run.pnr_db = s.base.run.snr_db + s.base.run.pnr_offset_db;
      s.base.run.estimator = e;
      s.base.run.count_overhead = true;
      s.base.beamforming.mode = RisMode::bios;
      s.small_stage = e == EstimatorKind::htt;
      out.push_back(std::move(s));
    }
  } else if (name == "fig5a") {
    for (RisMode m : {RisMode::bios, RisMode::ios, RisMode::irs}) {
      Scenario s = make(std::string("fig5a-") + to_string(m), SweepAxis::snr,
                        detail::range(-10, 20, 5));
      s.base.run.estimator = EstimatorKind::perfect;
      s.base.run.count_overhead = false;
      s.base.beamforming.mode = m;
      s.small_stage = false;
      out.push_back(std::move(s));
    }
  } else if (name == "fig5b") {
    Scenario s = make("fig5b-bios-htt", SweepAxis::snr, detail::range(-10, 20, 5));
    s.base.run.estimator = EstimatorKind::htt;
    s.base.beamforming.mode = RisMode::bios;
    s.small_stage = false;
    for (double v : detail::range(300, 1500, 150)) s.grid_t_g.push_back(static_cast<int>(v));
    for (double v : detail::range(25, 200, 25)) s.grid_t_h.push_back(static_cast<int>(v));
    out.push_back(std::move(s));
    Scenario ls = make("fig5b-bios-ls", SweepAxis::snr, detail::range(-10, 20, 5));
    ls.base.run.estimator = EstimatorKind::ls_bound;
    ls.base.beamforming.mode = RisMode::bios;
    ls.small_stage = false;
    out.push_back(std::move(ls));
  } else {
    std::string known;
    for (const auto &n : preset_names()) known += (known.empty() ? "" : "|") + n;
    throw ConfigError("unknown preset '" + name + "' (expected " + known + ")");
  }
  for (const auto &s : out) s.validate();
  return out;
}

// ------------------------------------------------------------ aggregation

struct MeanSE {
  double mean = 0.0;
  double se = 0.0; // sample standard deviation / sqrt(n); 0 for n = 1
};

inline MeanSE mean_se(const std::vector<double> &x) {
  MeanSE r;
  if (x.empty()) return r;
  double s = 0.0;
  for (double v : x) s += v;
  r.mean = s / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return r;
}

struct SummaryRow {
  std::string scenario;
  double sweep_value = 0.0;
  int count = 0;
  MeanSE nmse_fra, nmse_avg, sum_rate;
};

/// Mean and standard error per (scenario, sweep value), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<ResultRow> &rows) {
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, std::vector<const ResultRow *>> groups;
  for (const auto &r : rows) {
    const auto key = std::make_pair(r.scenario, r.sweep_value);
    auto &g = groups[key];
    if (g.empty()) order.push_back(key);
    g.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto &key : order) {
    std::vector<double> a, b, c;
    for (const ResultRow *r : groups[key]) {
      a.push_back(r->nmse_fra);
      b.push_back(r->nmse_avg);
      c.push_back(r->sum_rate);
    }
    out.push_back({key.first, key.second, static_cast<int>(a.size()), mean_se(a), mean_se(b),
                   mean_se(c)});
  }
  return out;
}

// -------------------------------------------------------------------- I/O

enum class ResultFormat { csv, json };

inline ResultFormat parse_result_format(const std::string &s) {
  if (s == "csv") return ResultFormat::csv;
  if (s == "json") return ResultFormat::json;
  throw ConfigError("output format: expected csv|json, got '" + s + "'");
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace detail

inline std::string to_csv(const std::vector<ResultRow> &rows) {
  std::ostringstream os;
  const auto &cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  using detail::fmt_double;
  for (const auto &r : rows)
    os << r.scenario << ',' << r.seed << ',' << r.trial << ',' << fmt_double(r.sweep_value) << ','
       << fmt_double(r.pnr_db) << ',' << fmt_double(r.snr_db) << ',' << r.t_g << ',' << r.t_h
       << ',' << fmt_double(r.nmse_fra) << ',' << fmt_double(r.nmse_avg) << ','
       << fmt_double(r.sum_rate) << ',' << r.iterations << ',' << fmt_double(r.wall_ms) << "\n";
  return os.str();
}

inline std::vector<ResultRow> parse_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results csv: missing header");
  const auto header = detail::split_csv_line(line);
  if (header != result_columns()) throw std::runtime_error("results csv: unexpected header");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    const std::string where = "results csv line " + std::to_string(lineno);
    if (f.size() != result_columns().size())
      throw std::runtime_error(where + ": expected " + std::to_string(result_columns().size()) +
                               " fields, got " + std::to_string(f.size()));
    try {
      ResultRow r;
      r.scenario = f[0];
      r.seed = std::stoull(f[1]);
      r.trial = std::stoi(f[2]);
      r.sweep_value = std::stod(f[3]);
      r.pnr_db = std::stod(f[4]);
      r.snr_db = std::stod(f[5]);
      r.t_g = std::stoi(f[6]);
      r.t_h = std::stoi(f[7]);
      r.nmse_fra = std::stod(f[8]);
      r.nmse_avg = std::stod(f[9]);
      r.sum_rate = std::stod(f[10]);
      r.iterations = std::stoi(f[11]);
      r.wall_ms = std::stod(f[12]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error &e) {
      throw std::runtime_error(where + ": malformed number (" + e.what() + ")");
    }
  }
  return rows;
}

inline std::string to_json(const std::vector<ResultRow> &rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &r : rows) {
    nlohmann::ordered_json o;
    o["scenario"] = r.scenario;
    o["seed"] = r.seed;
    o["trial"] = r.trial;
    o["sweep_value"] = r.sweep_value;
    o["pnr_db"] = r.pnr_db;
    o["snr_db"] = r.snr_db;
    o["t_g"] = r.t_g;
    o["t_h"] = r.t_h;
    o["nmse_fra"] = r.nmse_fra;
    o["nmse_avg"] = r.nmse_avg;
    o["sum_rate"] = r.sum_rate;
    o["iterations"] = r.iterations;
    o["wall_ms"] = r.wall_ms;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

inline std::vector<ResultRow> parse_json(const std::string &text) {
  std::vector<ResultRow> rows;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw std::runtime_error("results json: top level must be an array");
    for (const auto &o : arr) {
      ResultRow r;
      r.scenario = o.at("scenario").get<std::string>();
      r.seed = o.at("seed").get<std::uint64_t>();
      r.trial = o.at("trial").get<int>();
      r.sweep_value = o.at("sweep_value").get<double>();
      r.pnr_db = o.at("pnr_db").get<double>();
      r.snr_db = o.at("snr_db").get<double>();
      r.t_g = o.at("t_g").get<int>();
      r.t_h = o.at("t_h").get<int>();
      r.nmse_fra = o.at("nmse_fra").get<double>();
      r.nmse_avg = o.at("nmse_avg").get<double>();
      r.sum_rate = o.at("sum_rate").get<double>();
      r.iterations = o.at("iterations").get<int>();
      r.wall_ms = o.at("wall_ms").get<double>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error(std::string("results json: ") + e.what());
  }
  return rows;
}

inline std::string format_results(const std::vector<ResultRow> &rows, ResultFormat fmt) {
  return fmt == ResultFormat::csv ? to_csv(rows) : to_json(rows);
}

inline std::vector<ResultRow> parse_results(const std::string &text, ResultFormat fmt) {
  return fmt == ResultFormat::csv ? parse_csv(text) : parse_json(text);
}

/// Writes the rows to `path`; throws on I/O failure.
inline void emit_results(const std::vector<ResultRow> &rows, ResultFormat fmt,
                         const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << format_results(rows, fmt);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<ResultRow> read_results(const std::string &path, ResultFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_results(ss.str(), fmt);
}

} // namespace bios
