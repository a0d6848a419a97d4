#pragma once

#include "soliton_forge/io.hpp"

#include <stdexcept>
#include <string>

namespace soliton_forge::cli {

using json = io::json;

/// Bad flags, bad config files and unreadable inputs. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks keys, types and ranges and fills defaults. Unknown keys are rejected.
json normalize(const std::string& command, const json& raw);

/// Runs a normalized config, writes its files under config["out"] and returns the report
/// (also written as report.json).
json run(const std::string& command, const json& config);

/// Re-verifies stored data. `path` is an output directory or one of its files.
json check(const std::string& path);

/// 0 when report["pass"], else 1.
int exit_code(const json& report);

} // namespace soliton_forge::cli
