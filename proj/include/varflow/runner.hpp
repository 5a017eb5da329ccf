#pragma once

// Run configuration and the dispatcher behind the CLI: four commands (gac,
// beltrami, chanvese, gradcheck), JSON configs with flag overrides, synthetic
// seeded fixtures when no input image is given, and a manifest with artifact
// checksums. Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdint>
#include <string>

#include <json.hpp>

namespace varflow {

struct RunConfig {
    std::string command;  // gac | beltrami | chanvese | gradcheck
    nlohmann::json params;

    std::string input() const { return params.value("input", std::string{}); }
    std::string output_dir() const { return params.value("output_dir", std::string{"out"}); }
    std::uint64_t seed() const { return params.value("seed", std::uint64_t{1}); }
};

/// Defaults for a command, merged under any user-supplied config.
nlohmann::json default_config(const std::string& command);

/// Load a JSON config file and merge it over the command defaults.
RunConfig load_config(const std::string& command, const std::string& config_path);

/// Apply one "dotted.key=value" override (values parsed as JSON when possible,
/// else taken as strings).
void apply_override(RunConfig& config, const std::string& assignment);

/// Raised on invalid configuration; mapped to exit code 2 before any output
/// is produced.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validate, execute, write artifacts plus manifest.json into output_dir.
/// Returns the process exit code and prints a one-line machine-readable
/// reason for nonzero codes on stderr.
int run(const RunConfig& config);

}  // namespace varflow
