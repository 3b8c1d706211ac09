#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mprd::cli {

/// Process exit codes. Config problems, I/O problems, and solver failures
/// are distinguishable by code.
enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config_error = 2,
    exit_io_error = 3,
    exit_solver_error = 4,
};

/// Name of the environment variable that overrides the default output
/// directory when --out is not given.
inline constexpr const char* kOutDirEnvVar = "MPRD_OUT_DIR";

struct CommandOptions {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint32_t> seed;                 // overrides prbs.seed
    std::optional<std::vector<double>> amplitudes;     // overrides sweep list
    std::optional<std::vector<std::size_t>> positions; // overrides sweep list
    unsigned threads = 1;
};

std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag_value,
                                      const char* default_dir);

/// Runs one trial, writes manifest.json, trial.json and spectra.csv into the
/// output directory, and prints the reconstruction error.
int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Runs the amplitude x position sweep from the config (or the overrides),
/// writes the full report, and prints per-amplitude mean errors and the
/// maximum error reduction.
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Regenerates the sweep CSV tables from a directory of prior per-trial JSON
/// records without re-simulation. Corrupt or older-schema records are
/// skipped with a warning; fails only when nothing could be read.
int cmd_report(const std::filesystem::path& records_dir,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
               std::ostream& err);

}  // namespace mprd::cli
