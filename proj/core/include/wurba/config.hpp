#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wurba/scenario.hpp"

namespace wurba {

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Applies one `key = value` setting. Throws ConfigError naming the key on
/// an unknown key or a malformed value.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Parses flat `key = value` text; `#` starts a comment. Omitted keys keep
/// their value in `base`. The result is validated.
ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {});

/// Every key with its current value, in a stable order. Feeding the output
/// back through parse_config reproduces the configuration.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& config);
std::vector<std::string> config_keys();

/// Comma-separated list helpers shared with the command line.
std::vector<double> parse_sigma_list(std::string_view text);
std::vector<MethodKind> parse_method_list(std::string_view text);

}  // namespace wurba
