#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hibler/fixpoint.hpp"
#include "hibler/thermoforcing.hpp"
#include "hibler/timemarch.hpp"

namespace hibler {

enum class RunMode {
  simulate_periodic,
  validate_shooting,
  check_assumptions,
  diagnose_operator,
  estimate_constants,
};

RunMode parse_mode(const std::string& name);
std::string to_string(RunMode mode);

struct RunConfig {
  RunMode mode = RunMode::simulate_periodic;
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;  // raw "section.key=value"
};

struct GridSpec {
  int nx = 16;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;
};

/// Everything a run needs, fully resolved. `resolved` holds every known key
/// in canonical order with its final textual value (defaults, file, overrides).
struct ParsedConfig {
  RunConfig run;
  GridSpec grid_spec;
  GridPtr grid;
  PhysParams physics;
  ForcingSpec forcing;
  FixpointConfig fixpoint;
  IvpConfig ivp;
  ShootingConfig shooting;
  double h_star = 1.0;
  double a_star = 1.0;
  int n_pairs = 4;   // random pairs for contraction and Lipschitz probes
  int restarts = 5;  // random restarts for the uniqueness check
  std::vector<std::pair<std::string, std::string>> resolved;

  State v_star() const { return State::equilibrium(grid, h_star, a_star); }
};

/// Parses INI text (`[section]`, `key = value`, `#` comments). Unknown keys,
/// malformed lines and bad values raise ErrorKind::config with the line number.
ParsedConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {},
                               const std::filesystem::path& base_dir = {});

/// Reads the file (missing file is ErrorKind::io) and parses it.
ParsedConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Every recognised key with its default, as "section.key".
std::vector<std::pair<std::string, std::string>> default_config_values();

}  // namespace hibler
