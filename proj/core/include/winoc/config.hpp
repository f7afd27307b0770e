#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "winoc/experiment.hpp"

namespace winoc {

/// One settable key, named `section.key`.
struct ConfigKeyInfo {
  std::string name;
  std::string description;
};

/// Every recognised key, in echo order.
std::vector<ConfigKeyInfo> config_keys();

/// Sets one key from its text form. Throws ConfigError for an unknown key or
/// a value of the wrong type.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Applies `key=value`.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// INI text with `[section]` headers and `key = value` lines; '#' and ';'
/// start comments (mid-line when preceded by whitespace). Overrides are
/// applied after the file, then the result is validated.
ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
/// Reads `path` (which must exist) or starts from defaults when empty.
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::string>& overrides = {});

/// Every key with its effective value; parse_config_text of the result
/// reproduces `cfg`.
std::string effective_config(const ExperimentConfig& cfg);

/// Hex FNV-1a of the effective config.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace winoc
