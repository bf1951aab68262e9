// Command-line driver: argument parsing, config files and output files.
#pragma once

#include "squeeze_lab/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace squeeze::cli {

using experiments::CommandResult;
using experiments::ExperimentConfig;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"linear", "wirtinger", "squeeze", "rho", "frobenius", "estimate"};
  return names;
}

inline ExperimentConfig defaults_for(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  if (command == "wirtinger") {
    c.tol = 1e-10;
  } else if (command == "squeeze") {
    c.k = 1;
    c.trials = 100000;
  } else if (command == "rho") {
    c.trials = 100;
    c.tol = 1e-8;
  } else if (command == "frobenius") {
    c.tol = 1e-5;
  } else if (command == "estimate") {
    c.dim = 4;
    c.k = 1;
    c.trials = 20;
    c.tol = 0.03;
  }
  return c;
}

inline CommandResult dispatch(const ExperimentConfig& c) {
  if (c.command == "linear") return experiments::cmd_linear(c);
  if (c.command == "wirtinger") return experiments::cmd_wirtinger(c);
  if (c.command == "squeeze") return experiments::cmd_squeeze(c);
  if (c.command == "rho") return experiments::cmd_rho(c);
  if (c.command == "frobenius") return experiments::cmd_frobenius(c);
  if (c.command == "estimate") return experiments::cmd_estimate(c);
  throw experiments::UsageError("unknown command " + c.command);
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value lines become "--key value" arguments; boolean keys become bare flags.
inline std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "no-timestamp" || key == "unitary") {
      if (value == "true" || value == "1") args.push_back("--" + key);
      else if (value != "false" && value != "0") {
        throw CLI::ValidationError(path + ":" + std::to_string(lineno) + ": " + key + " must be true or false");
      }
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

// Splices the contents of --config files in front of the remaining flags so
// that flags given on the command line win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> from_file, rest;
  std::size_t command_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (command_pos == args.size() &&
        std::find(command_names().begin(), command_names().end(), a) != command_names().end()) {
      command_pos = i;
    }
    if (a == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file");
      const auto extra = config_file_args(args[++i]);
      from_file.insert(from_file.end(), extra.begin(), extra.end());
    } else if (a.rfind("--config=", 0) == 0) {
      const auto extra = config_file_args(a.substr(9));
      from_file.insert(from_file.end(), extra.begin(), extra.end());
    } else {
      rest.push_back(a);
    }
  }
  if (from_file.empty()) return rest;
  auto pos = std::find(rest.begin(), rest.end(), command_pos < args.size() ? args[command_pos] : std::string());
  if (pos == rest.end()) throw CLI::ArgumentMismatch("--config needs a subcommand");
  rest.insert(pos + 1, from_file.begin(), from_file.end());
  return rest;
}

inline void add_options(CLI::App& sub, ExperimentConfig& c) {
  sub.add_option("--dim", c.dim, "phase-space dimension 2n")->capture_default_str();
  sub.add_option("--k", c.k, "half the target dimension")->capture_default_str();
  sub.add_option("--radius", c.radius, "ball radius R")->capture_default_str();
  sub.add_option("--eps", c.eps, "slab half-width")->capture_default_str();
  sub.add_option("--seed", c.seed, "root seed")->capture_default_str();
  sub.add_option("--trials", c.trials, "trials, samples or grid points")->capture_default_str();
  sub.add_option("--cells", c.cells, "grid cells per axis (0 = default)")->capture_default_str();
  sub.add_option("--samples", c.samples, "Monte Carlo samples per estimate")->capture_default_str();
  sub.add_option("--tol", c.tol, "tolerance")->capture_default_str();
  sub.add_option("--out", c.out, "output directory");
  sub.add_option("--format", c.format, "csv or json")->capture_default_str();
  sub.add_flag("--no-timestamp", c.no_timestamp, "omit timestamps from plots");
  sub.add_option("--scale", c.scale, "generator scale for random symplectic matrices")->capture_default_str();
  sub.add_option("--config", "key=value file; command-line flags take precedence");
  if (c.command == "linear") sub.add_flag("--unitary", c.unitary, "sample unitary matrices");
  if (c.command == "squeeze") {
    sub.add_option("--scale-radius", c.scale_radius, "radius for the scaling check")->capture_default_str();
  }
  if (c.command == "estimate") {
    sub.add_option("--map", c.map, "identity, linear, guth, generating or rho")->capture_default_str();
    sub.add_option("--mode", c.mode, "single or calibrate")->capture_default_str();
  }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw experiments::UsageError("cannot write " + path.string());
  f << content;
  if (!f) throw experiments::UsageError("failed writing " + path.string());
}

inline std::string render_table(const report::Table& table, const std::string& format) {
  std::ostringstream os;
  if (format == "json") os << table.to_json().dump(2) << '\n';
  else table.write_csv(os);
  return os.str();
}

}  // namespace detail

/// Parses argv, runs one command and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments on symplectic maps and projected volumes", "squeeze_lab"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::map<std::string, ExperimentConfig> configs;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help = {
      {"linear", "projected volumes of ellipsoids under random symplectic matrices"},
      {"wirtinger", "|Omega^k| against the 2k-volume of random tuples"},
      {"squeeze", "checks on the bump-function shear in R^4"},
      {"rho", "2-Jacobian and image area of the radial twist"},
      {"frobenius", "non-integrability of the maximal expanding plane field"},
      {"estimate", "grid volume estimates of projected images"},
  };
  for (const auto& name : command_names()) {
    configs[name] = defaults_for(name);
    subs[name] = app.add_subcommand(name, help.at(name));
    detail::add_options(*subs[name], configs[name]);
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = detail::expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return experiments::kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return experiments::kExitOk;
    }
    err << "squeeze_lab: " << e.what() << '\n';
    return experiments::kExitUsage;
  }

  std::string chosen;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) chosen = name;
  }
  const ExperimentConfig& config = configs.at(chosen);

  CommandResult result;
  try {
    result = dispatch(config);
  } catch (const experiments::UsageError& e) {
    err << "squeeze_lab: " << e.what() << '\n';
    return experiments::kExitUsage;
  } catch (const PreconditionError& e) {
    err << "squeeze_lab: " << e.what() << '\n';
    return experiments::kExitUsage;
  } catch (const DimensionError& e) {
    err << "squeeze_lab: " << e.what() << '\n';
    return experiments::kExitUsage;
  } catch (const std::exception& e) {
    err << "squeeze_lab: numerical failure: " << e.what() << '\n';
    return experiments::kExitInternal;
  }

  report::Json summary;
  summary["command"] = chosen;
  summary["status"] = result.exit_code == experiments::kExitOk ? "pass" : "violation";
  summary["config"] = config.to_json();
  summary["results"] = result.summary;
  summary["witness_seeds"] = result.witnesses;

  try {
    if (!config.out.empty()) {
      const std::filesystem::path dir(config.out);
      std::filesystem::create_directories(dir);
      detail::write_file(dir / (chosen + "." + config.format), detail::render_table(result.table, config.format));
      for (const auto& a : result.artifacts) detail::write_file(dir / a.filename, a.content);
      detail::write_file(dir / (chosen + "_summary.json"), summary.dump(2) + "\n");
      out << summary.dump(2) << '\n';
    } else {
      out << detail::render_table(result.table, config.format);
    }
  } catch (const std::exception& e) {
    err << "squeeze_lab: " << e.what() << '\n';
    return experiments::kExitUsage;
  }

  if (!result.witnesses.empty()) {
    err << "squeeze_lab: " << chosen << ": " << result.witnesses.size() << " violation(s); witnesses:";
    for (const auto& w : result.witnesses) err << ' ' << w;
    err << '\n';
  }
  return result.exit_code;
}

}  // namespace squeeze::cli
