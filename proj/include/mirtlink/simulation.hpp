#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mirtlink/calibration.hpp"
#include "mirtlink/items.hpp"
#include "mirtlink/linking.hpp"
#include "mirtlink/responses.hpp"
#include "mirtlink/small_linalg.hpp"
#include "mirtlink/transform.hpp"

namespace mirtlink {

enum class AnchorScenario { MCOnly, MCCR };

std::string to_string(AnchorScenario s);
AnchorScenario anchor_scenario_from_string(const std::string& s);

struct StudyConfig {
  std::vector<double> rho_levels{0.5, 0.8, 1.0};
  std::vector<AnchorScenario> anchor_scenarios{AnchorScenario::MCOnly,
                                               AnchorScenario::MCCR};
  std::vector<ModelFamily> analysis_models{ModelFamily::UIRT,
                                           ModelFamily::SimpleStructure,
                                           ModelFamily::Bifactor};
  int n_examinees = 3000;
  int n_replications = 20;
  std::uint64_t base_seed = 1;
  TestForm base_form;
  TestForm new_form;
  CalibrationSpec calibration;
  // Optional nonequivalent new group; default keeps both groups identical.
  bool nonequivalent_groups = false;
  std::vector<double> new_group_mean;
  Matrix new_group_cov;
};

// Normalizes level/scenario/model lists (sorted, deduplicated) and checks the
// bank, anchor designations and counts.  Throws std::invalid_argument.
void validate_config(StudyConfig& config);

struct GeneratedDataset {
  Matrix thetas;  // n x 2
  ResponseMatrix responses;
  double rho_used = 0.0;
  std::uint64_t seed_used = 0;
};

// One linked (condition, replication) outcome.  Anchor item lists are aligned
// by position across the three views.
struct ReplicationOutcome {
  double rho = 0.0;
  AnchorScenario scenario = AnchorScenario::MCCR;
  ModelFamily model = ModelFamily::UIRT;
  int replication = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t calib_seed_base = 0;
  std::uint64_t calib_seed_new = 0;
  LinkingResult linking;
  std::vector<Item> anchors_base;             // base-form calibration estimates
  std::vector<Item> anchors_new_transformed;  // new-form estimates after transform
  std::vector<Item> anchors_truth;            // generating truth mapped to the model
  Population population_new_transformed;      // simple structure only
  std::vector<double> loss_trace;             // recorded for replication 0 only
  std::vector<std::string> warnings;
};

struct StudyReport {
  int schema_version = 1;
  StudyConfig config;  // forms echoed with full parameters
  std::vector<ReplicationOutcome> outcomes;
};

// Bivariate standard normal draws with correlation rho; rho = 1 makes the
// second column exactly equal to the first.
Matrix sample_thetas(int n, double rho, std::uint64_t seed);
Matrix sample_thetas_general(int n, const Population& pop, std::uint64_t seed);

// Simple-structure response generation: MC items read theta dim 0, CR items
// dim 1.
ResponseMatrix generate_responses(const TestForm& form, const Matrix& thetas,
                                  std::uint64_t seed);

GeneratedDataset make_dataset(const TestForm& form, int n, double rho,
                              std::uint64_t seed);

// Item ids qualifying as anchors under the scenario, in form order.
std::vector<std::string> build_anchor_set(const TestForm& form, AnchorScenario scenario);

// Synthetic two-form bank: per form 40 MC (3PL) + 8 CR (GPC, K=5) items of
// which 12 MC + 4 CR are shared anchors with identical parameters.
std::pair<TestForm, TestForm> default_item_bank(std::uint64_t seed);

// Full replicated pipeline; outcomes are canonically ordered by
// (rho, scenario, model, replication) regardless of `jobs`.
StudyReport run_study(const StudyConfig& config, int jobs = 1);

}  // namespace mirtlink
