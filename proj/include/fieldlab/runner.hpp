#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fieldlab/shooter.hpp"
#include "fieldlab/transfer.hpp"
#include "json.hpp"

namespace fieldlab {

enum class Task { Check, Solve, Envelope, Transfer, Sweep, Verify };

Task parse_task(const std::string& name);
std::string to_string(Task t);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitInvariant = 4 };

struct RunConfig {
    Task task = Task::Solve;
    int dimension = 3;
    nlohmann::json f;
    nlohmann::json M = {{"family", "constant"}, {"m0", 1.0}};
    std::vector<double> q_grid;
    int n_max = 3;
    ShootingOptions shooting;
    TransferOptions transfer;
    std::optional<double> p0;
    std::optional<double> envelope_max;
    std::size_t envelope_points = 10001;
    std::filesystem::path cache_dir = ".fieldlab-cache";
    std::filesystem::path out_dir = ".";
};

/// Sets a dotted path ("options.n_max=5") in the document. The value is read
/// as JSON when it parses, as a plain string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Document layout:
///   {"dimension", "f", "M", "q_grid" (array, or {"from","to","count","spacing"}),
///    "options": {"n_max", "abs_tol", "rel_tol", "max_step", "bisection_tol",
///                "p0", "envelope_points", "envelope_max", "t_min", "t_max", "t_floor", "panels"},
///    "cache_dir", "out_dir"}
/// Throws ConfigError on anything malformed, e.g. N < 2 or a q grid that is
/// not strictly increasing.
RunConfig parse_config(const nlohmann::json& doc, Task task);

/// Runs one task, writes artifacts under out_dir and a short log to `log`.
/// Returns an ExitCode; exceptions are mapped, never propagated.
int run(const RunConfig& config, std::ostream& log);

/// Solution family for the configured f and N, served from the profile
/// cache when every member is present there.
SolutionFamily cached_family(const RunConfig& config, std::ostream& log);

} // namespace fieldlab
