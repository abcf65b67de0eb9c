#include <doctest.h>

#include <string>
#include <vector>

#include "mirtlink/io.hpp"
#include "mirtlink/report_json.hpp"
#include "mirtlink/simulation.hpp"

using namespace mirtlink;

namespace {

StudyReport small_report() {
  StudyConfig cfg;
  const auto [base, fresh] = default_item_bank(11);
  cfg.base_form = base;
  cfg.new_form = fresh;
  cfg.rho_levels = {0.5, 1.0};
  cfg.analysis_models = {ModelFamily::UIRT};
  cfg.n_examinees = 60;
  cfg.n_replications = 2;
  cfg.base_seed = 404;
  cfg.calibration.mode = CalibrationMode::OracleNoise;
  cfg.calibration.noise_sigma = 0.02;
  return run_study(cfg, 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

TEST_CASE("study report round-trips through JSON byte-identically") {
  const StudyReport report = small_report();
  REQUIRE(report.outcomes.size() == 8);  // 2 rho x 2 scenarios x 1 model x 2 reps

  const std::string text = study_report_to_json(report);
  CHECK(text.front() == '{');
  CHECK(text.back() == '\n');
  CHECK(text.find("\"schema_version\": 1") != std::string::npos);

  const StudyReport parsed = study_report_from_json(text);
  CHECK(study_report_to_json(parsed) == text);

  // Field-level spot checks on the parsed copy.
  CHECK(parsed.outcomes.size() == report.outcomes.size());
  CHECK(parsed.config.base_seed == 404);
  CHECK(parsed.config.n_examinees == 60);
  CHECK(parsed.config.rho_levels == report.config.rho_levels);
  CHECK(parsed.config.calibration.mode == CalibrationMode::OracleNoise);
  CHECK(parsed.config.calibration.noise_sigma == 0.02);
  CHECK(bank_to_csv(parsed.config.base_form) == bank_to_csv(report.config.base_form));
  CHECK(bank_to_csv(parsed.config.new_form) == bank_to_csv(report.config.new_form));
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    CAPTURE(i);
    const ReplicationOutcome& a = report.outcomes[i];
    const ReplicationOutcome& b = parsed.outcomes[i];
    CHECK(b.rho == a.rho);
    CHECK(b.scenario == a.scenario);
    CHECK(b.model == a.model);
    CHECK(b.replication == a.replication);
    CHECK(b.data_seed == a.data_seed);
    CHECK(b.calib_seed_base == a.calib_seed_base);
    CHECK(b.calib_seed_new == a.calib_seed_new);
    CHECK(b.linking.transform.A.v == a.linking.transform.A.v);
    CHECK(b.linking.transform.B == a.linking.transform.B);
    CHECK(b.linking.loss == a.linking.loss);
    CHECK(b.linking.iterations == a.linking.iterations);
    CHECK(b.linking.converged == a.linking.converged);
    CHECK(b.loss_trace == a.loss_trace);
    CHECK(b.warnings == a.warnings);
    CHECK(b.anchors_base.size() == a.anchors_base.size());
    CHECK(b.anchors_new_transformed.size() == a.anchors_new_transformed.size());
    CHECK(b.anchors_truth.size() == a.anchors_truth.size());
  }
}

TEST_CASE("malformed JSON is rejected") {
  CHECK_THROWS_AS(study_report_from_json("{"), std::exception);
  CHECK_THROWS_AS(study_report_from_json("[]"), std::exception);
}

TEST_CASE("manifest lists the study seeds once per study unit") {
  const StudyReport report = small_report();
  const std::string manifest = study_manifest(report);
  const std::vector<std::string> lines = split_lines(manifest);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "format_version 1");

  int seed_lines = 0;
  bool saw_base_seed = false, saw_base_digest = false, saw_new_digest = false,
       saw_outcomes = false;
  for (const std::string& line : lines) {
    if (line.rfind("seed ", 0) == 0) {
      ++seed_lines;
      CHECK(line.find("model=UIRT") != std::string::npos);
      CHECK(line.find("data=") != std::string::npos);
      CHECK(line.find("calib_base=") != std::string::npos);
      CHECK(line.find("calib_new=") != std::string::npos);
    }
    if (line == "base_seed 404") saw_base_seed = true;
    if (line.rfind("bank_base_digest ", 0) == 0) saw_base_digest = true;
    if (line.rfind("bank_new_digest ", 0) == 0) saw_new_digest = true;
    if (line == "outcomes 8") saw_outcomes = true;
  }
  // A study unit is (rho, model, replication); the two anchor scenarios reuse
  // the same unit, so 2 rho x 1 model x 2 reps = 4 entries.
  CHECK(seed_lines == 4);
  CHECK(saw_base_seed);
  CHECK(saw_base_digest);
  CHECK(saw_new_digest);
  CHECK(saw_outcomes);

  CHECK(study_manifest(report) == manifest);
}
