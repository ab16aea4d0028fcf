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


// Command-line front end: channel generation, single-shot estimation and
// beamforming, scenario sweeps, figure presets and config validation.

#include "bios/bios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace bios;
using json = nlohmann::ordered_json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  int trials = -1;
  long long seed = -1;
  int threads = -1;
  bool timing = false;
  bool full = false;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
  cmd->add_option("-c,--config", o.config_path, "key = value config file");
  cmd->add_option("-s,--set", o.sets, "override a field, e.g. --set run.pnr_db=30")
      ->take_all();
  cmd->add_option("--trials", o.trials, "Monte Carlo trials");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_flag("--timing", o.timing, "record wall-clock time per row");
  cmd->add_flag("--full", o.full, "200 trials");
}

/// Keys not belonging to SystemConfig (sweep description) are split off.
RawConfig extract_prefix(RawConfig &raw, const std::string &prefix) {
  RawConfig out;
  for (auto it = raw.begin(); it != raw.end();) {
    if (it->first.rfind(prefix, 0) == 0) {
      out[it->first] = it->second;
      it = raw.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

RawConfig cli_overrides(const CommonOptions &o) {
  RawConfig raw;
  for (const auto &s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    raw[detail::trim(s.substr(0, eq))] = detail::trim(s.substr(eq + 1));
  }
  if (o.full) raw["run.trials"] = "200";
  if (o.trials >= 0) raw["run.trials"] = std::to_string(o.trials);
  if (o.seed >= 0) raw["run.seed"] = std::to_string(o.seed);
  if (o.threads >= 0) raw["run.threads"] = std::to_string(o.threads);
  if (o.timing) raw["run.timing"] = "true";
  return raw;
}

struct Loaded {
  SystemConfig config;
  RawConfig sweep; // sweep.* keys from the file
};

Loaded load(const CommonOptions &o) {
  RawConfig file = o.config_path.empty() ? RawConfig{} : read_config_file(o.config_path);
  Loaded out;
  out.sweep = extract_prefix(file, "sweep.");
  out.config = validate_config(merge({file, environment_overrides(), cli_overrides(o)}));
  return out;
}

json matrix_json(const CMat &m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

void write_text(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void print_summary(const std::vector<ResultRow> &rows) {
  std::fprintf(stderr, "%-22s %10s %5s %22s %22s %22s\n", "scenario", "value", "n",
               "nmse_fra (se)", "nmse_avg (se)", "sum_rate (se)");
  for (const auto &s : summarize(rows))
    std::fprintf(stderr, "%-22s %10g %5d %12.4g (%7.2g) %12.4g (%7.2g) %12.4f (%7.3f)\n",
                 s.scenario.c_str(), s.sweep_value, s.count, s.nmse_fra.mean, s.nmse_fra.se,
                 s.nmse_avg.mean, s.nmse_avg.se, s.sum_rate.mean, s.sum_rate.se);
}

std::vector<ResultRow> run_all(const std::vector<Scenario> &scenarios, bool quiet) {
  std::vector<ResultRow> rows;
  for (const auto &sc : scenarios) {
    if (!quiet)
      std::fprintf(stderr, "running %s: %zu values x %d trials\n", sc.name.c_str(),
                   sc.values.size(), sc.base.run.trials);
    auto part = run_scenario(sc, [&](int t) {
      if (!quiet) std::fprintf(stderr, "  %s trial %d done\n", sc.name.c_str(), t);
    });
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::vector<double> parse_values(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    out.push_back(detail::parse_double("sweep.values", item));
  }
  return out;
}

Scenario scenario_from_config(const Loaded &l) {
  Scenario sc;
  sc.base = l.config;
  auto get = [&](const std::string &k, const std::string &def) {
    auto it = l.sweep.find(k);
    return it == l.sweep.end() ? def : it->second;
  };
  for (const auto &[k, v] : l.sweep)
    if (k != "sweep.name" && k != "sweep.axis" && k != "sweep.values" && k != "sweep.small_stage" &&
        k != "sweep.rate_stage")
      throw ConfigError("unknown config field '" + k + "'");
  sc.name = get("sweep.name", "sweep");
  sc.axis = parse_sweep_axis(get("sweep.axis", "t_g"));
  sc.values = parse_values(get("sweep.values", ""));
  sc.small_stage = detail::parse_bool("sweep.small_stage", get("sweep.small_stage", "true"));
  sc.rate_stage = detail::parse_bool("sweep.rate_stage", get("sweep.rate_stage", "true"));
  sc.validate();
  return sc;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"BIOS multi-user MIMO simulator: two-timescale channel estimation and "
               "WMMSE-CD beamforming"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_path, json_path, format = "csv";
  bool quiet = false;

  auto *gen = app.add_subcommand("gen-channels", "draw one large-timescale channel set (JSON)");
  add_common(gen, common);
  gen->add_option("-o,--out", out_path, "output file (default stdout)");

  auto *est = app.add_subcommand("estimate", "run two-timescale estimation for one trial");
  add_common(est, common);
  int trial = 0;
  est->add_option("--trial", trial, "trial index");

  auto *bf = app.add_subcommand("beamform", "WMMSE-CD beamforming with perfect CSI, one trial");
  add_common(bf, common);
  bf->add_option("--trial", trial, "trial index");

  std::string target;
  auto add_run_opts = [&](CLI::App *cmd) {
    add_common(cmd, common);
    cmd->add_option("-o,--out", out_path, "result file (default stdout)");
    cmd->add_option("--json", json_path, "also write a JSON mirror");
    cmd->add_option("-f,--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("-q,--quiet", quiet, "no progress or summary output");
  };
  auto *sweep = app.add_subcommand("sweep", "run a preset or a config-file sweep");
  sweep->add_option("target", target, "preset name or config file")->required();
  add_run_opts(sweep);

  auto *repro = app.add_subcommand("reproduce", "run a figure preset");
  repro->add_option("figure", target, "fig3a|fig3b|fig4a|fig4b|fig5a|fig5b")
      ->required()
      ->check(CLI::IsMember(preset_names()));
  add_run_opts(repro);

  auto *val = app.add_subcommand("validate", "check a configuration and print it resolved");
  add_common(val, common);
  bool list_keys = false;
  val->add_flag("--keys", list_keys, "list every config key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) {
      if (list_keys) {
        for (const auto &[k, help] : config_keys())
          std::cout << k << "  (" << env_name(k) << ")  " << help << "\n";
        return 0;
      }
      const Loaded l = load(common);
      std::cout << dump_config(l.config);
      return 0;
    }

    if (gen->parsed()) {
      const Loaded l = load(common);
      const SystemConfig &c = l.config;
      Rng rng = trial_stream(c.run.seed, 0, StreamPurpose::channels);
      const ChannelRealization ch =
          draw_channels(rng, c.geometry, c.k_fle, c.k_fra, c.paths_g, c.paths_h);
      json j;
      j["seed"] = c.run.seed;
      j["k_fle"] = c.k_fle;
      j["g"] = matrix_json(ch.g);
      j["l"] = matrix_json(ch.l);
      j["h"] = json::array();
      for (const auto &h : ch.h) j["h"].push_back(matrix_json(h));
      write_text(out_path, j.dump(2) + "\n");
      return 0;
    }

    if (est->parsed() || bf->parsed()) {
      const Loaded l = load(common);
      Scenario sc;
      sc.name = est->parsed() ? "estimate" : "beamform";
      sc.base = l.config;
      sc.base.run.estimator = est->parsed() ? EstimatorKind::htt : EstimatorKind::perfect;
      sc.axis = SweepAxis::t_g;
      sc.values = {static_cast<double>(sc.base.estimation.t_g)};
      sc.rate_stage = bf->parsed();
      sc.validate();
      const Dictionaries dict = build_dictionaries(sc.base.resolved_dictionary(), sc.base.geometry);
      const auto rows = detail::run_trial(sc, dict, trial);
      std::cout << to_json(rows);
      return 0;
    }

    if (sweep->parsed() || repro->parsed()) {
      std::vector<Scenario> scenarios;
      const bool is_preset =
          std::find(preset_names().begin(), preset_names().end(), target) != preset_names().end();
      if (is_preset) {
        scenarios = preset(target, load(common).config);
      } else {
        CommonOptions o = common;
        o.config_path = target;
        scenarios.push_back(scenario_from_config(load(o)));
      }
      const auto rows = run_all(scenarios, quiet);
      write_text(out_path, format_results(rows, parse_result_format(format)));
      if (!json_path.empty()) emit_results(rows, ResultFormat::json, json_path);
      if (!quiet) print_summary(rows);
      return 0;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
