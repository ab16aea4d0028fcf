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

// System configuration with a flat `section.key = value` text format.
//
// Sources are merged in increasing precedence: built-in defaults, config
// file, environment (BIOS_<SECTION>_<KEY>, upper case, e.g. BIOS_RUN_PNR_DB),
// explicit overrides (command line). Every error names the offending key.

#pragma once

#include "bios/beamforming.hpp"
#include "bios/estimator.hpp"
#include "bios/geometry.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bios {

enum class EstimatorKind { htt, perfect, ls_bound };

inline const char *to_string(EstimatorKind e) {
  switch (e) {
  case EstimatorKind::htt: return "htt";
  case EstimatorKind::perfect: return "perfect";
  case EstimatorKind::ls_bound: return "ls_bound";
  }
  return "unknown";
}

struct RunConfig {
  int trials = 20;
  std::uint64_t seed = 1;
  double pnr_db = 20.0;
  double snr_db = 10.0;
  double pnr_offset_db = 10.0; // PNR = SNR + offset on SNR sweeps
  int threads = 0;             // 0 = hardware concurrency
  bool timing = false;         // wall_ms stays 0 unless set, so outputs are reproducible
  bool count_overhead = true;  // perfect-CSI rows still pay the HTT pilot overhead
  EstimatorKind estimator = EstimatorKind::htt;
};

struct SystemConfig {
  ArrayGeometry geometry;
  int k_fle = 2;
  int k_fra = 3;
  int paths_g = 5;
  int paths_h = 5;
  double eps = 0.5;
  double upsilon_large = 10000;
  double upsilon_small = 2500;
  int k_c = 0; // 1-based; 0 selects the first refraction-side UE
  EstimationConfig estimation;
  DictionaryConfig dictionary{0, 0, 0, 0, SurfaceGrid::restricted}; // 0 = match geometry
  BeamformingConfig beamforming;
  RunConfig run;

  int k() const { return k_fle + k_fra; }
  int tau() const { return static_cast<int>(std::lround(upsilon_large / upsilon_small)); }
  /// 0-based index of the large-timescale pilot user.
  int kc_index() const { return (k_c == 0 ? k_fle + 1 : k_c) - 1; }

  DictionaryConfig resolved_dictionary() const {
    DictionaryConfig d = dictionary;
    if (d.g_bs == 0) d.g_bs = geometry.n_bs;
    if (d.g_ue == 0) d.g_ue = geometry.n_ue;
    if (d.g_x == 0) d.g_x = geometry.m_x;
    if (d.g_y == 0) d.g_y = geometry.m_y;
    return d;
  }
  EstimationConfig resolved_estimation() const {
    EstimationConfig e = estimation;
    e.tau = tau();
    e.rank_g = paths_g;
    e.rank_h = paths_h;
    return e;
  }
  BeamformingConfig resolved_beamforming(double snr_db) const {
    BeamformingConfig b = beamforming;
    b.eps = eps;
    b.noise_variance = std::pow(10.0, -snr_db / 10.0);
    return b;
  }
};

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void bad_value(const std::string &key, const char *expected,
                                   const std::string &got) {
  throw ConfigError("config field '" + key + "': expected " + expected + ", got '" + got + "'");
}

inline long long parse_int(const std::string &key, const std::string &v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception &) {
    bad_value(key, "an integer", v);
  }
  if (pos != v.size()) bad_value(key, "an integer", v);
  return out;
}

inline double parse_double(const std::string &key, const std::string &v) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception &) {
    bad_value(key, "a number", v);
  }
  if (pos != v.size() || !std::isfinite(out)) bad_value(key, "a finite number", v);
  return out;
}

inline bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, "a boolean", v);
}

template <class E>
E parse_enum(const std::string &key, const std::string &v,
             std::initializer_list<std::pair<const char *, E>> options) {
  std::string allowed;
  for (const auto &[name, value] : options) {
    if (v == name) return value;
    allowed += (allowed.empty() ? "" : "|") + std::string(name);
  }
  bad_value(key, ("one of " + allowed).c_str(), v);
}

struct FieldSpec {
  std::string key;
  std::string help;
  std::function<void(SystemConfig &, const std::string &)> set;
};

inline const std::vector<FieldSpec> &field_specs() {
  using S = SystemConfig;
  static const std::vector<FieldSpec> specs = {
      {"system.eps", "IOS_1 power split into reflection", [](S &c, const std::string &v) { c.eps = parse_double("system.eps", v); }},
      {"system.k_fle", "reflection-side users", [](S &c, const std::string &v) { c.k_fle = static_cast<int>(parse_int("system.k_fle", v)); }},
      {"system.k_fra", "refraction-side users", [](S &c, const std::string &v) { c.k_fra = static_cast<int>(parse_int("system.k_fra", v)); }},
      {"system.n_bs", "BS antennas", [](S &c, const std::string &v) { c.geometry.n_bs = static_cast<int>(parse_int("system.n_bs", v)); }},
      {"system.n_ue", "UE antennas", [](S &c, const std::string &v) { c.geometry.n_ue = static_cast<int>(parse_int("system.n_ue", v)); }},
      {"system.m_x", "surface elements along x", [](S &c, const std::string &v) { c.geometry.m_x = static_cast<int>(parse_int("system.m_x", v)); }},
      {"system.m_y", "surface elements along y", [](S &c, const std::string &v) { c.geometry.m_y = static_cast<int>(parse_int("system.m_y", v)); }},
      {"system.wavelength", "carrier wavelength [m]", [](S &c, const std::string &v) { c.geometry.wavelength = parse_double("system.wavelength", v); }},
      {"system.element_spacing", "surface element pitch [m]", [](S &c, const std::string &v) { c.geometry.element_spacing = parse_double("system.element_spacing", v); }},
      {"system.layer_gap", "distance between the two layers [m]", [](S &c, const std::string &v) { c.geometry.layer_gap = parse_double("system.layer_gap", v); }},
      {"system.element_size", "element side length a [m]", [](S &c, const std::string &v) { c.geometry.element_size = parse_double("system.element_size", v); }},
      {"system.paths_g", "paths of G (rank P)", [](S &c, const std::string &v) { c.paths_g = static_cast<int>(parse_int("system.paths_g", v)); }},
      {"system.paths_h", "paths of H_k (rank Q)", [](S &c, const std::string &v) { c.paths_h = static_cast<int>(parse_int("system.paths_h", v)); }},
      {"system.upsilon_large", "large timescale length [symbols]", [](S &c, const std::string &v) { c.upsilon_large = parse_double("system.upsilon_large", v); }},
      {"system.upsilon_small", "small timescale length [symbols]", [](S &c, const std::string &v) { c.upsilon_small = parse_double("system.upsilon_small", v); }},
      {"estimation.t_g", "large-timescale pilots", [](S &c, const std::string &v) { c.estimation.t_g = static_cast<int>(parse_int("estimation.t_g", v)); }},
      {"estimation.t_h", "small-timescale pilots per user", [](S &c, const std::string &v) { c.estimation.t_h = static_cast<int>(parse_int("estimation.t_h", v)); }},
      {"estimation.k_c", "1-based pilot user of the large timescale (0 = first fra)", [](S &c, const std::string &v) { c.k_c = static_cast<int>(parse_int("estimation.k_c", v)); }},
      {"estimation.upsilon_g", "l1 weight of G (negative = noise-scaled default)", [](S &c, const std::string &v) { c.estimation.upsilon_g = parse_double("estimation.upsilon_g", v); }},
      {"estimation.upsilon_h", "l1 weight of H (negative = noise-scaled default)", [](S &c, const std::string &v) { c.estimation.upsilon_h = parse_double("estimation.upsilon_h", v); }},
      {"estimation.upsilon_scale", "c in c*sigma^2*sqrt(log(dictionary size))", [](S &c, const std::string &v) { c.estimation.upsilon_scale = parse_double("estimation.upsilon_scale", v); }},
      {"estimation.outer_tol", "alternating loop relative-decrease tolerance", [](S &c, const std::string &v) { c.estimation.outer_tol = parse_double("estimation.outer_tol", v); }},
      {"estimation.outer_max", "alternating loop iteration cap", [](S &c, const std::string &v) { c.estimation.outer_max = static_cast<int>(parse_int("estimation.outer_max", v)); }},
      {"estimation.inner_max", "descent steps per block and outer iteration", [](S &c, const std::string &v) { c.estimation.inner_max = static_cast<int>(parse_int("estimation.inner_max", v)); }},
      {"estimation.small_max", "small-timescale descent iteration cap", [](S &c, const std::string &v) { c.estimation.small.max_iterations = static_cast<int>(parse_int("estimation.small_max", v)); }},
      {"estimation.small_tol", "small-timescale relative-decrease tolerance", [](S &c, const std::string &v) { c.estimation.small.relative_decrease_tol = parse_double("estimation.small_tol", v); }},
      {"estimation.small_init", "random|spectral", [](S &c, const std::string &v) { c.estimation.small_init = parse_enum<SmallInit>("estimation.small_init", v, {{"random", SmallInit::random}, {"spectral", SmallInit::spectral}}); }},
      {"estimation.direction", "gradient|cg", [](S &c, const std::string &v) { c.estimation.direction = parse_enum<SearchDirection>("estimation.direction", v, {{"gradient", SearchDirection::gradient}, {"cg", SearchDirection::conjugate_gradient}}); }},
      {"dictionary.g_bs", "BS grid size (0 = N_BS)", [](S &c, const std::string &v) { c.dictionary.g_bs = static_cast<int>(parse_int("dictionary.g_bs", v)); }},
      {"dictionary.g_ue", "UE grid size (0 = N_UE)", [](S &c, const std::string &v) { c.dictionary.g_ue = static_cast<int>(parse_int("dictionary.g_ue", v)); }},
      {"dictionary.g_x", "surface x grid size (0 = m_x)", [](S &c, const std::string &v) { c.dictionary.g_x = static_cast<int>(parse_int("dictionary.g_x", v)); }},
      {"dictionary.g_y", "surface y grid size (0 = m_y)", [](S &c, const std::string &v) { c.dictionary.g_y = static_cast<int>(parse_int("dictionary.g_y", v)); }},
      {"dictionary.surface_grid", "restricted|full", [](S &c, const std::string &v) { c.dictionary.surface_grid = parse_enum<SurfaceGrid>("dictionary.surface_grid", v, {{"restricted", SurfaceGrid::restricted}, {"full", SurfaceGrid::full}}); }},
      {"beamforming.mode", "bios|ios|irs", [](S &c, const std::string &v) { c.beamforming.mode = parse_enum<RisMode>("beamforming.mode", v, {{"bios", RisMode::bios}, {"ios", RisMode::ios}, {"irs", RisMode::irs}}); }},
      {"beamforming.n_s", "streams per user", [](S &c, const std::string &v) { c.beamforming.n_s = static_cast<int>(parse_int("beamforming.n_s", v)); }},
      {"beamforming.max_iterations", "outer iteration cap", [](S &c, const std::string &v) { c.beamforming.max_iterations = static_cast<int>(parse_int("beamforming.max_iterations", v)); }},
      {"beamforming.tol", "relative objective decrease tolerance", [](S &c, const std::string &v) { c.beamforming.tol = parse_double("beamforming.tol", v); }},
      {"beamforming.cd_sweeps", "coordinate sweeps per outer iteration", [](S &c, const std::string &v) { c.beamforming.cd_sweeps = static_cast<int>(parse_int("beamforming.cd_sweeps", v)); }},
      {"beamforming.precoder", "guarded|closed_form|exact", [](S &c, const std::string &v) { c.beamforming.precoder = parse_enum<PrecoderUpdate>("beamforming.precoder", v, {{"guarded", PrecoderUpdate::guarded}, {"closed_form", PrecoderUpdate::closed_form}, {"exact", PrecoderUpdate::exact}}); }},
      {"run.trials", "Monte Carlo trials", [](S &c, const std::string &v) { c.run.trials = static_cast<int>(parse_int("run.trials", v)); }},
      {"run.seed", "master seed", [](S &c, const std::string &v) { const long long s = parse_int("run.seed", v); if (s < 0) bad_value("run.seed", "a non-negative integer", v); c.run.seed = static_cast<std::uint64_t>(s); }},
      {"run.pnr_db", "uplink pilot-to-noise ratio [dB]", [](S &c, const std::string &v) { c.run.pnr_db = parse_double("run.pnr_db", v); }},
      {"run.snr_db", "downlink signal-to-noise ratio [dB]", [](S &c, const std::string &v) { c.run.snr_db = parse_double("run.snr_db", v); }},
      {"run.pnr_offset_db", "PNR - SNR on SNR sweeps [dB]", [](S &c, const std::string &v) { c.run.pnr_offset_db = parse_double("run.pnr_offset_db", v); }},
      {"run.threads", "worker threads (0 = all cores)", [](S &c, const std::string &v) { c.run.threads = static_cast<int>(parse_int("run.threads", v)); }},
      {"run.timing", "record wall-clock time per row", [](S &c, const std::string &v) { c.run.timing = parse_bool("run.timing", v); }},
      {"run.count_overhead", "charge pilot overhead to perfect-CSI rows", [](S &c, const std::string &v) { c.run.count_overhead = parse_bool("run.count_overhead", v); }},
      {"run.estimator", "htt|perfect|ls_bound", [](S &c, const std::string &v) { c.run.estimator = parse_enum<EstimatorKind>("run.estimator", v, {{"htt", EstimatorKind::htt}, {"perfect", EstimatorKind::perfect}, {"ls_bound", EstimatorKind::ls_bound}}); }},
  };
  return specs;
}

} // namespace detail

using RawConfig = std::map<std::string, std::string>;

inline std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &f : detail::field_specs()) out.emplace_back(f.key, f.help);
  return out;
}

/// Parses `key = value` lines; `#` starts a comment.
inline RawConfig parse_config_text(const std::string &text, const std::string &origin = "config") {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    raw[key] = detail::trim(line.substr(eq + 1));
  }
  return raw;
}

inline RawConfig read_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

inline std::string env_name(const std::string &key) {
  std::string out = "BIOS_";
  for (char ch : key) out += ch == '.' ? '_' : static_cast<char>(std::toupper(ch));
  return out;
}

/// Values from BIOS_* environment variables for every known key.
inline RawConfig environment_overrides() {
  RawConfig raw;
  for (const auto &f : detail::field_specs())
    if (const char *v = std::getenv(env_name(f.key).c_str())) raw[f.key] = detail::trim(v);
  return raw;
}

/// Later sources win.
inline RawConfig merge(std::initializer_list<RawConfig> sources) {
  RawConfig out;
  for (const auto &s : sources)
    for (const auto &[k, v] : s) out[k] = v;
  return out;
}

/// Applies raw values on top of `base` and checks every invariant.
inline SystemConfig validate_config(const RawConfig &raw, SystemConfig base = {}) {
  for (const auto &[key, value] : raw) {
    bool found = false;
    for (const auto &f : detail::field_specs())
      if (f.key == key) {
        f.set(base, value);
        found = true;
        break;
      }
    if (!found) throw ConfigError("unknown config field '" + key + "'");
  }

  auto check = [](bool ok, const std::string &key, const std::string &msg) {
    if (!ok) throw ConfigError("config field '" + key + "': " + msg);
  };
  const SystemConfig &c = base;
  check(c.eps > 0.0 && c.eps < 1.0, "system.eps", "must lie in (0, 1)");
  check(c.k_fle >= 0, "system.k_fle", "must be >= 0");
  check(c.k_fra >= 0, "system.k_fra", "must be >= 0");
  check(c.k() >= 1, "system.k_fra", "at least one user is required");
  check(c.geometry.n_bs >= 1, "system.n_bs", "must be >= 1");
  check(c.geometry.n_ue >= 1, "system.n_ue", "must be >= 1");
  check(c.geometry.m_x >= 1, "system.m_x", "must be >= 1");
  check(c.geometry.m_y >= 1, "system.m_y", "must be >= 1");
  check(c.geometry.wavelength > 0, "system.wavelength", "must be > 0");
  check(c.geometry.element_spacing > 0, "system.element_spacing", "must be > 0");
  check(c.geometry.layer_gap > 0, "system.layer_gap", "must be > 0");
  check(c.geometry.element_size > 0, "system.element_size", "must be > 0");
  const int m = c.geometry.m_x * c.geometry.m_y;
  check(c.paths_g >= 1 && c.paths_g <= std::min(c.geometry.n_bs, m), "system.paths_g",
        "must lie in [1, min(N_BS, M)]");
  check(c.paths_h >= 1 && c.paths_h <= std::min(c.geometry.n_ue, m), "system.paths_h",
        "must lie in [1, min(N_UE, M)]");
  check(c.upsilon_small >= 1, "system.upsilon_small", "must be >= 1");
  check(c.upsilon_large >= c.upsilon_small, "system.upsilon_large", "must be >= upsilon_small");
  const double ratio = c.upsilon_large / c.upsilon_small;
  check(std::abs(ratio - std::round(ratio)) < 1e-9, "system.upsilon_large",
        "must be an integer multiple of system.upsilon_small");
  check(c.estimation.t_g >= 1, "estimation.t_g", "must be >= 1");
  check(c.estimation.t_h >= 1, "estimation.t_h", "must be >= 1");
  check(c.estimation.upsilon_scale >= 0, "estimation.upsilon_scale", "must be >= 0");
  check(c.estimation.outer_max >= 1, "estimation.outer_max", "must be >= 1");
  check(c.estimation.inner_max >= 1, "estimation.inner_max", "must be >= 1");
  check(c.estimation.small.max_iterations >= 1, "estimation.small_max", "must be >= 1");
  check(c.estimation.outer_tol >= 0, "estimation.outer_tol", "must be >= 0");
  check(c.estimation.small.relative_decrease_tol >= 0, "estimation.small_tol", "must be >= 0");
  if (c.run.estimator == EstimatorKind::htt) {
    check(c.k_fra >= 1, "system.k_fra",
          "the two-timescale estimator needs a refraction-side user for the large timescale");
    check(c.k_c == 0 || (c.k_c > c.k_fle && c.k_c <= c.k()), "estimation.k_c",
          "must select a refraction-side user, i.e. lie in (k_fle, K]");
  }
  check(c.dictionary.g_bs >= 0, "dictionary.g_bs", "must be >= 0");
  check(c.dictionary.g_ue >= 0, "dictionary.g_ue", "must be >= 0");
  check(c.dictionary.g_x >= 0, "dictionary.g_x", "must be >= 0");
  check(c.dictionary.g_y >= 0, "dictionary.g_y", "must be >= 0");
  check(c.beamforming.n_s >= 1 && c.beamforming.n_s <= c.geometry.n_ue, "beamforming.n_s",
        "must lie in [1, N_UE]");
  check(c.beamforming.n_s * c.k() <= c.geometry.n_bs || c.beamforming.n_s == 1,
        "beamforming.n_s", "total streams exceed BS antennas");
  check(c.beamforming.max_iterations >= 1, "beamforming.max_iterations", "must be >= 1");
  check(c.beamforming.tol >= 0, "beamforming.tol", "must be >= 0");
  check(c.beamforming.cd_sweeps >= 1, "beamforming.cd_sweeps", "must be >= 1");
  check(c.run.trials >= 1, "run.trials", "must be >= 1");
  check(c.run.threads >= 0, "run.threads", "must be >= 0");
  return base;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Serializes every field back to `key = value` lines.
inline std::string dump_config(const SystemConfig &c) {
  std::ostringstream os;
  os.precision(17);
  auto grid = [](SurfaceGrid g) { return g == SurfaceGrid::full ? "full" : "restricted"; };
  auto precoder = [](PrecoderUpdate p) {
    return p == PrecoderUpdate::guarded ? "guarded"
                                        : (p == PrecoderUpdate::exact ? "exact" : "closed_form");
  };
  os << "system.eps = " << c.eps << "\n"
     << "system.k_fle = " << c.k_fle << "\n"
     << "system.k_fra = " << c.k_fra << "\n"
     << "system.n_bs = " << c.geometry.n_bs << "\n"
     << "system.n_ue = " << c.geometry.n_ue << "\n"
     << "system.m_x = " << c.geometry.m_x << "\n"
     << "system.m_y = " << c.geometry.m_y << "\n"
     << "system.wavelength = " << c.geometry.wavelength << "\n"
     << "system.element_spacing = " << c.geometry.element_spacing << "\n"
     << "system.layer_gap = " << c.geometry.layer_gap << "\n"
     << "system.element_size = " << c.geometry.element_size << "\n"
     << "system.paths_g = " << c.paths_g << "\n"
     << "system.paths_h = " << c.paths_h << "\n"
     << "system.upsilon_large = " << c.upsilon_large << "\n"
     << "system.upsilon_small = " << c.upsilon_small << "\n"
     << "# tau = " << c.tau() << " (derived)\n"
     << "estimation.t_g = " << c.estimation.t_g << "\n"
     << "estimation.t_h = " << c.estimation.t_h << "\n"
     << "estimation.k_c = " << c.k_c << "\n"
     << "estimation.upsilon_g = " << c.estimation.upsilon_g << "\n"
     << "estimation.upsilon_h = " << c.estimation.upsilon_h << "\n"
     << "estimation.upsilon_scale = " << c.estimation.upsilon_scale << "\n"
     << "estimation.outer_tol = " << c.estimation.outer_tol << "\n"
     << "estimation.outer_max = " << c.estimation.outer_max << "\n"
     << "estimation.inner_max = " << c.estimation.inner_max << "\n"
     << "estimation.small_max = " << c.estimation.small.max_iterations << "\n"
     << "estimation.small_tol = " << c.estimation.small.relative_decrease_tol << "\n"
     << "estimation.small_init = "
     << (c.estimation.small_init == SmallInit::spectral ? "spectral" : "random") << "\n"
     << "estimation.direction = "
     << (c.estimation.direction == SearchDirection::conjugate_gradient ? "cg" : "gradient")
     << "\n"
     << "dictionary.g_bs = " << c.dictionary.g_bs << "\n"
     << "dictionary.g_ue = " << c.dictionary.g_ue << "\n"
     << "dictionary.g_x = " << c.dictionary.g_x << "\n"
     << "dictionary.g_y = " << c.dictionary.g_y << "\n"
     << "dictionary.surface_grid = " << grid(c.dictionary.surface_grid) << "\n"
     << "beamforming.mode = " << to_string(c.beamforming.mode) << "\n"
     << "beamforming.n_s = " << c.beamforming.n_s << "\n"
     << "beamforming.max_iterations = " << c.beamforming.max_iterations << "\n"
     << "beamforming.tol = " << c.beamforming.tol << "\n"
     << "beamforming.cd_sweeps = " << c.beamforming.cd_sweeps << "\n"
     << "beamforming.precoder = " << precoder(c.beamforming.precoder) << "\n"
     << "run.trials = " << c.run.trials << "\n"
     << "run.seed = " << c.run.seed << "\n"
     << "run.pnr_db = " << c.run.pnr_db << "\n"
     << "run.snr_db = " << c.run.snr_db << "\n"
     << "run.pnr_offset_db = " << c.run.pnr_offset_db << "\n"
     << "run.threads = " << c.run.threads << "\n"
     << "run.timing = " << (c.run.timing ? "true" : "false") << "\n"
     << "run.count_overhead = " << (c.run.count_overhead ? "true" : "false") << "\n"
     << "run.estimator = " << to_string(c.run.estimator) << "\n";
  return os.str();
}

} // namespace bios
