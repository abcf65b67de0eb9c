#include "mirtlink/config.hpp"

#include <sstream>
#include <stdexcept>

#include "mirtlink/io.hpp"

namespace mirtlink {

namespace {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(value);
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

}  // namespace

StudyConfig parse_study_config(const std::string& text,
                               const std::filesystem::path& base_dir) {
  StudyConfig config;
  // Only what the file provides survives for list-valued keys.
  bool saw_schema = false;
  bool saw_base_bank = false, saw_new_bank = false;
  std::filesystem::path base_bank, new_bank;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "study" && section != "calibration" && section != "new_group")
        fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for key '" + key + "'");

    try {
      if (section.empty()) {
        if (key == "schema_version") {
          if (parse_long(value, "schema_version") != 1)
            fail(line_no, "unsupported schema_version '" + value + "'");
          saw_schema = true;
        } else {
          fail(line_no, "unknown top-level key '" + key + "'");
        }
      } else if (section == "study") {
        if (key == "rho_levels") {
          config.rho_levels.clear();
          for (const std::string& part : split_list(value))
            config.rho_levels.push_back(parse_double(part, "rho_levels"));
        } else if (key == "anchor_scenarios") {
          config.anchor_scenarios.clear();
          for (const std::string& part : split_list(value))
            config.anchor_scenarios.push_back(anchor_scenario_from_string(part));
        } else if (key == "analysis_models") {
          config.analysis_models.clear();
          for (const std::string& part : split_list(value))
            config.analysis_models.push_back(model_family_from_string(part));
        } else if (key == "n_examinees") {
          config.n_examinees = static_cast<int>(parse_long(value, "n_examinees"));
        } else if (key == "n_replications") {
          config.n_replications = static_cast<int>(parse_long(value, "n_replications"));
        } else if (key == "base_seed") {
          config.base_seed = static_cast<std::uint64_t>(parse_long(value, "base_seed"));
        } else if (key == "base_bank") {
          base_bank = base_dir / value;
          saw_base_bank = true;
        } else if (key == "new_bank") {
          new_bank = base_dir / value;
          saw_new_bank = true;
        } else {
          fail(line_no, "unknown key '" + key + "' in section [study]");
        }
      } else if (section == "calibration") {
        if (key == "mode") {
          config.calibration.mode = calibration_mode_from_string(value);
        } else if (key == "chain_length") {
          config.calibration.chain_length =
              static_cast<int>(parse_long(value, "chain_length"));
        } else if (key == "burn_in") {
          config.calibration.burn_in = static_cast<int>(parse_long(value, "burn_in"));
        } else if (key == "item_proposal_scale") {
          config.calibration.item_proposal_scale = parse_double(value, key);
        } else if (key == "theta_proposal_scale") {
          config.calibration.theta_proposal_scale = parse_double(value, key);
        } else if (key == "rho_proposal_scale") {
          config.calibration.rho_proposal_scale = parse_double(value, key);
        } else if (key == "noise_sigma") {
          config.calibration.noise_sigma = parse_double(value, key);
        } else {
          fail(line_no, "unknown key '" + key + "' in section [calibration]");
        }
      } else {  // new_group
        config.nonequivalent_groups = true;
        if (key == "mean") {
          config.new_group_mean.clear();
          for (const std::string& part : split_list(value))
            config.new_group_mean.push_back(parse_double(part, "new_group mean"));
        } else if (key == "cov") {
          const auto parts = split_list(value);
          if (parts.size() != 4)
            fail(line_no, "new_group cov needs 4 comma-separated entries (row-major 2x2)");
          config.new_group_cov = Matrix(2, 2);
          for (int k = 0; k < 4; ++k)
            config.new_group_cov.v[k] = parse_double(parts[k], "new_group cov");
        } else {
          fail(line_no, "unknown key '" + key + "' in section [new_group]");
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(line_no, e.what());
    }
  }

  if (!saw_schema) throw ConfigError("config: missing schema_version");
  if (!saw_base_bank || !saw_new_bank)
    throw ConfigError("config: [study] must set base_bank and new_bank");
  config.base_form = read_bank_csv(base_bank);
  config.base_form.name = "base";
  config.new_form = read_bank_csv(new_bank);
  config.new_form.name = "new";
  validate_config(config);
  return config;
}

StudyConfig load_study_config(const std::filesystem::path& file) {
  return parse_study_config(read_text_file(file), file.parent_path());
}

std::string study_config_to_text(const StudyConfig& config,
                                 const std::string& base_bank_path,
                                 const std::string& new_bank_path) {
  std::string out = "schema_version = 1\n\n[study]\n";
  out += "rho_levels = ";
  for (std::size_t i = 0; i < config.rho_levels.size(); ++i)
    out += (i ? ", " : "") + format_double(config.rho_levels[i]);
  out += "\nanchor_scenarios = ";
  for (std::size_t i = 0; i < config.anchor_scenarios.size(); ++i)
    out += (i ? ", " : "") + to_string(config.anchor_scenarios[i]);
  out += "\nanalysis_models = ";
  for (std::size_t i = 0; i < config.analysis_models.size(); ++i)
    out += (i ? ", " : "") + to_string(config.analysis_models[i]);
  out += "\nn_examinees = " + std::to_string(config.n_examinees);
  out += "\nn_replications = " + std::to_string(config.n_replications);
  out += "\nbase_seed = " + std::to_string(config.base_seed);
  out += "\nbase_bank = " + base_bank_path;
  out += "\nnew_bank = " + new_bank_path;
  out += "\n\n[calibration]\n";
  out += "mode = " + to_string(config.calibration.mode);
  out += "\nchain_length = " + std::to_string(config.calibration.chain_length);
  out += "\nburn_in = " + std::to_string(config.calibration.burn_in);
  out += "\nitem_proposal_scale = " + format_double(config.calibration.item_proposal_scale);
  out += "\ntheta_proposal_scale = " +
         format_double(config.calibration.theta_proposal_scale);
  out += "\nrho_proposal_scale = " + format_double(config.calibration.rho_proposal_scale);
  out += "\nnoise_sigma = " + format_double(config.calibration.noise_sigma);
  out += "\n";
  if (config.nonequivalent_groups) {
    out += "\n[new_group]\nmean = ";
    for (std::size_t i = 0; i < config.new_group_mean.size(); ++i)
      out += (i ? ", " : "") + format_double(config.new_group_mean[i]);
    out += "\ncov = ";
    for (int k = 0; k < 4; ++k)
      out += (k ? ", " : "") + format_double(config.new_group_cov.v[k]);
    out += "\n";
  }
  return out;
}

}  // namespace mirtlink
