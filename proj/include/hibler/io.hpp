#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hibler/errors.hpp"
#include "hibler/fixpoint.hpp"
#include "hibler/grid.hpp"
#include "hibler/periodic_linear.hpp"
#include "hibler/thermoforcing.hpp"

namespace hibler {

using Json = nlohmann::ordered_json;

/// `x,y,u1,u2,h,a`, rows ordered by y then x, 17 significant digits.
void write_state_csv(const std::filesystem::path& path, const State& s);
State read_state_csv(const std::filesystem::path& path, GridPtr grid);

/// One CSV per snapshot plus `index.csv` with columns `k,t,file`.
void write_trajectory(const std::filesystem::path& dir, const PeriodicTrajectory& traj,
                      const std::string& prefix = "snapshot");

/// Rows are collocation indices 0..n_t-1. A row holds either one value per
/// lattice node or a single amplitude multiplying `profile`. A non-numeric
/// first line is treated as a header.
PeriodicSignal read_forcing_csv(const std::filesystem::path& path, const Grid2D& g, int n_t, double T,
                                Profile profile);

Json to_json(const ConvergenceLog& log);
Json to_json(const AssumptionReport& report);
Json error_json(const std::exception& e);

void write_json(const std::filesystem::path& path, const Json& j);

/// "%.17g"
std::string format_double(double x);

}  // namespace hibler
