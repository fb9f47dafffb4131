#pragma once
// Command-line driver. Thin sequential plumbing: subcommands map 1:1 onto
// library calls, artifacts land next to the input config.
//
// Exit codes are a stable contract: 0 success, 1 usage or config error,
// 2 protocol abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrelay/netsim.hpp"
#include "qrelay/optics.hpp"
#include "qrelay/selftest.hpp"

namespace qrelay::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_abort = 2;

namespace detail {

// "scenario.json" + ".report.csv" -> "scenario.report.csv". The suffix always
// carries its own extension, so the config file itself can never be the
// target.
inline std::string artifact_path(const std::string& config_path, const std::string& suffix) {
  std::filesystem::path p(config_path);
  p.replace_extension();
  return p.string() + suffix;
}

inline bool write_file(const std::string& path, const std::string& content, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.flush();
  if (!out) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

}  // namespace detail

inline int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  netsim::SessionResult result;
  try {
    result = netsim::run_session(netsim::load_config(config_path));
  } catch (const netsim::ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }

  if (!detail::write_file(detail::artifact_path(config_path, ".report.csv"),
                          netsim::report_to_csv(result.report), err)) {
    return exit_usage;
  }
  for (const auto& [link, csv] : result.round_csv) {
    if (!detail::write_file(detail::artifact_path(config_path, ".rounds." + link + ".csv"), csv,
                            err)) {
      return exit_usage;
    }
  }
  if (!detail::write_file(detail::artifact_path(config_path, ".announcements.csv"),
                          relay::announcements_to_csv(result.node.announcements()), err)) {
    return exit_usage;
  }

  out << netsim::summary_text(result.report);
  for (const auto& link : result.report.links) {
    if (link.aborted) return exit_abort;
  }
  return exit_ok;
}

inline int cmd_sweep(const std::string& config_path, const std::string& param,
                     const std::vector<double>& values, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = netsim::load_config(config_path);
    const auto points = netsim::sweep(cfg, param, values);
    const std::string path = detail::artifact_path(config_path, ".sweep.csv");
    if (!detail::write_file(path, netsim::sweep_to_csv(param, points), err)) return exit_usage;
    out << "wrote " << path << " (" << points.size() << " points)\n";
    return exit_ok;
  } catch (const netsim::ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
}

// Numerically annotated outcome table: every pattern above 1e-12 for each of
// the 16 ordered input pairs, with its classification. Pure function of the
// visibility, rows in canonical order.
inline int cmd_bsm_table(double visibility, std::ostream& out, std::ostream& err) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    err << "error: visibility must lie in [0, 1]\n";
    return exit_usage;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "# visibility=%.6f\n", visibility);
  out << buf << "input_a,input_b,pattern,probability,classification\n";
  for (optics::PolarizationState a : optics::all_states) {
    for (optics::PolarizationState b : optics::all_states) {
      for (const auto& [pattern, p] : optics::bsm_distribution(a, b, visibility)) {
        if (p <= 1e-12) continue;
        std::snprintf(buf, sizeof buf, "%.6f", p);
        out << optics::to_string(a) << ',' << optics::to_string(b) << ',' << pattern.to_string()
            << ',' << buf << ',' << optics::to_string(optics::classify(pattern)) << '\n';
      }
    }
  }
  return exit_ok;
}

inline int cmd_selftest(std::ostream& out) {
  const auto results = selftest::run_acceptance_checks(selftest::Scale::quick());
  int failures = 0;
  int index = 0;
  for (const auto& r : results) {
    ++index;
    out << (r.pass ? "PASS" : "FAIL") << "  " << index << ". " << r.name << ": " << r.detail
        << "\n";
    failures += !r.pass;
  }
  out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? exit_ok : exit_usage;
}

// args excludes the program name. Streams are injected so tests can capture
// everything.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"discrete-round simulator for a polarization-encoded qkd relay network"};
  app.name("qrelay");
  app.require_subcommand(1);

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "run one scenario and write csv artifacts");
  run_cmd->add_option("config", run_config, "scenario json file")->required();

  std::string sweep_config;
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-run a scenario across parameter values");
  sweep_cmd->add_option("config", sweep_config, "scenario json file")->required();
  sweep_cmd->add_option("--param", sweep_param, "parameter to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  double visibility = 1.0;
  auto* table_cmd = app.add_subcommand("bsm-table", "print the two-photon outcome table");
  table_cmd->add_option("--visibility", visibility, "interference visibility in [0, 1]");

  auto* self_cmd = app.add_subcommand("selftest", "run the verification suite at reduced scale");

  std::vector<const char*> argv;
  argv.push_back("qrelay");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  if (run_cmd->parsed()) return cmd_run(run_config, out, err);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, sweep_param, sweep_values, out, err);
  if (table_cmd->parsed()) return cmd_bsm_table(visibility, out, err);
  if (self_cmd->parsed()) return cmd_selftest(out);
  return exit_usage;
}

}  // namespace qrelay::cli
