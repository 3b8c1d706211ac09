#pragma once

#include "mprd/experiments.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprd {

inline constexpr int kSchemaVersion = 1;
const char* tool_version();

/// Raised for unreadable or unparseable files and missing paths.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent configuration content. The message
/// names the offending field (and tone index where applicable).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSection {
    std::vector<double> amplitude_ratios;
    std::vector<std::size_t> positions;
};

struct ExperimentConfig {
    TrialConfig trial;
    SweepSection sweep;
};

/// Parses a config file (JSON with // and /* */ comments permitted), applies
/// defaults for absent fields, and validates. Throws IoError for a missing
/// or unreadable path and ConfigError for bad content.
ExperimentConfig load_config(const std::filesystem::path& path);

/// The fully resolved config as canonical JSON text (sorted keys, explicit
/// defaults). Persisted outputs embed this, never the raw input file.
std::string resolved_config_json(const ExperimentConfig& config);
std::string resolved_trial_json(const TrialConfig& trial);

/// FNV-1a 64-bit fingerprint of the resolved trial JSON, as fixed-width hex.
std::string config_fingerprint(const TrialConfig& trial);

/// Serialized single-trial record (schema-versioned, resolved config embedded).
std::string trial_record_json(const TrialRecord& record, const TrialConfig& config);

}  // namespace mprd
