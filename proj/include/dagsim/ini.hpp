#pragma once

#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dagsim/error.hpp"
#include "dagsim/harness.hpp"

namespace dagsim {

/// Experiment settings from an INI file:
///
///   [experiment]
///   name = exp1_duel
///   seed = 42
///   runs = 10
///   scale = 10
///
///   [sim]
///   lambda = 20
///   injection = 30:120
///
/// Keys of [sim] and [params] become experiment parameters. Returns the
/// experiment name ("" when absent).
inline std::string load_ini(const std::string& path, ExperimentOptions& opt) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::Io, "cannot read config '" + path + "': " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::string name;
  for (const auto& [section, body] : tree) {
    if (section == "experiment") {
      for (const auto& [key, node] : body) {
        const std::string value = node.get_value<std::string>();
        if (key == "name") name = value;
        else if (key == "seed") opt.seed = parse_unsigned(value, "seed");
        else if (key == "runs") opt.runs = static_cast<std::uint32_t>(parse_unsigned(value, "runs"));
        else if (key == "scale") opt.scale = parse_double(value, "scale");
        else opt.params.set(key, value);
      }
    } else if (section == "sim" || section == "params") {
      for (const auto& [key, node] : body) opt.params.set(key, node.get_value<std::string>());
    } else {
      throw Error(Errc::InvalidConfig, "unknown config section [" + section + "] in '" + path + "'");
    }
  }
  return name;
}

}  // namespace dagsim
