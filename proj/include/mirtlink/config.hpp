#pragma once

#include <filesystem>
#include <string>

#include "mirtlink/simulation.hpp"

namespace mirtlink {

// Study configuration text format: `key = value` pairs under [section]
// headers, '#' comments, with a mandatory top-level `schema_version = 1`.
// Unknown sections or keys are errors; every parse error carries the line
// number.  Bank CSV paths are resolved against `base_dir`.
StudyConfig parse_study_config(const std::string& text,
                               const std::filesystem::path& base_dir);

StudyConfig load_study_config(const std::filesystem::path& file);

// Canonical text for a config (banks referenced by the given paths); parsing
// it back yields the same configuration.
std::string study_config_to_text(const StudyConfig& config,
                                 const std::string& base_bank_path,
                                 const std::string& new_bank_path);

}  // namespace mirtlink
