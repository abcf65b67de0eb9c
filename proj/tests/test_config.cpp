#include <doctest.h>

#include <filesystem>

#include "mirtlink/config.hpp"
#include "mirtlink/io.hpp"
#include "mirtlink/simulation.hpp"

using namespace mirtlink;
namespace fs = std::filesystem;

namespace {

struct TempBankDir {
  fs::path dir;
  TempBankDir() {
    dir = fs::temp_directory_path() / "mirtlink_cfg_test";
    fs::create_directories(dir);
    const auto [base, fresh] = default_item_bank(5);
    write_bank_csv(dir / "base.csv", base);
    write_bank_csv(dir / "new.csv", fresh);
  }
  ~TempBankDir() { fs::remove_all(dir); }
};

const char* kMinimal =
    "schema_version = 1\n"
    "[study]\n"
    "base_bank = base.csv\n"
    "new_bank = new.csv\n";

}  // namespace

TEST_CASE("minimal config fills in the defaults") {
  TempBankDir t;
  const StudyConfig cfg = parse_study_config(kMinimal, t.dir);
  CHECK(cfg.rho_levels == std::vector<double>{0.5, 0.8, 1.0});
  CHECK(cfg.anchor_scenarios.size() == 2);
  CHECK(cfg.analysis_models.size() == 3);
  CHECK(cfg.n_examinees == 3000);
  CHECK(cfg.n_replications == 20);
  CHECK(cfg.base_seed == 1);
  CHECK(cfg.calibration.mode == CalibrationMode::MCMC);
  CHECK(cfg.base_form.name == "base");
  CHECK(cfg.new_form.name == "new");
  CHECK(!cfg.nonequivalent_groups);
}

TEST_CASE("full config round trips through the canonical emitter") {
  TempBankDir t;
  const std::string text =
      "schema_version = 1\n"
      "# comment line\n"
      "[study]\n"
      "rho_levels = 0.5, 1.0\n"
      "anchor_scenarios = mc-only\n"
      "analysis_models = uirt, bifactor\n"
      "n_examinees = 500\n"
      "n_replications = 4\n"
      "base_seed = 99\n"
      "base_bank = base.csv\n"
      "new_bank = new.csv\n"
      "[calibration]\n"
      "mode = oracle\n"
      "noise_sigma = 0.05\n"
      "chain_length = 800\n"
      "burn_in = 200\n"
      "[new_group]\n"
      "mean = 0.1, 0.3\n"
      "cov = 1, 0.4, 0.4, 1\n";
  const StudyConfig cfg = parse_study_config(text, t.dir);
  CHECK(cfg.rho_levels == std::vector<double>{0.5, 1.0});
  CHECK(cfg.anchor_scenarios == std::vector<AnchorScenario>{AnchorScenario::MCOnly});
  CHECK(cfg.analysis_models ==
        std::vector<ModelFamily>{ModelFamily::UIRT, ModelFamily::Bifactor});
  CHECK(cfg.n_examinees == 500);
  CHECK(cfg.calibration.mode == CalibrationMode::OracleNoise);
  CHECK(cfg.calibration.noise_sigma == 0.05);
  CHECK(cfg.nonequivalent_groups);
  CHECK(cfg.new_group_mean == std::vector<double>{0.1, 0.3});
  CHECK(cfg.new_group_cov(0, 1) == 0.4);

  const std::string canon = study_config_to_text(cfg, "base.csv", "new.csv");
  const StudyConfig back = parse_study_config(canon, t.dir);
  CHECK(back.rho_levels == cfg.rho_levels);
  CHECK(back.analysis_models == cfg.analysis_models);
  CHECK(back.n_examinees == cfg.n_examinees);
  CHECK(back.base_seed == cfg.base_seed);
  CHECK(back.calibration.noise_sigma == cfg.calibration.noise_sigma);
  CHECK(back.new_group_mean == cfg.new_group_mean);
  CHECK(study_config_to_text(back, "base.csv", "new.csv") == canon);
}

TEST_CASE("errors carry line numbers") {
  TempBankDir t;
  // Unknown key in [study] on line 3.
  CHECK_THROWS_WITH_AS(
      parse_study_config("schema_version = 1\n[study]\nbogus = 3\n", t.dir),
      doctest::Contains("line 3"), std::invalid_argument);
  // Unknown section on line 2.
  CHECK_THROWS_WITH_AS(parse_study_config("schema_version = 1\n[nope]\n", t.dir),
                       doctest::Contains("line 2"), std::invalid_argument);
  // Missing schema_version.
  CHECK_THROWS_AS(parse_study_config("[study]\nbase_bank = base.csv\n", t.dir),
                  std::invalid_argument);
  // Wrong schema_version value.
  CHECK_THROWS_AS(parse_study_config("schema_version = 2\n", t.dir),
                  std::invalid_argument);
  // Unsupported rho level.
  const std::string bad_rho = std::string(kMinimal) + "rho_levels = 0.6\n";
  CHECK_THROWS_AS(parse_study_config(bad_rho, t.dir), std::invalid_argument);
  // Key before any section.
  CHECK_THROWS_WITH_AS(parse_study_config("schema_version = 1\nn_examinees = 5\n", t.dir),
                       doctest::Contains("line 2"), std::invalid_argument);
}

TEST_CASE("bank paths resolve against the config directory") {
  TempBankDir t;
  const fs::path file = t.dir / "study.cfg";
  write_text_file(file, kMinimal);
  const StudyConfig cfg = load_study_config(file);
  CHECK(cfg.base_form.items.size() == 48);
  CHECK(cfg.new_form.items.size() == 48);
}

TEST_CASE("missing bank file is reported") {
  TempBankDir t;
  const std::string text =
      "schema_version = 1\n[study]\nbase_bank = nothere.csv\nnew_bank = new.csv\n";
  CHECK_THROWS(parse_study_config(text, t.dir));
}
