#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "mirtlink/evaluation.hpp"
#include "oracle_reference.hpp"
#include "support.hpp"

using namespace mirtlink;

TEST_CASE("rmsd frozen value and pinned evaluation order") {
  const std::vector<double> est{0.1, 0.3};
  const std::vector<double> ref{0.0, 0.0};
  CHECK(rmsd(est, ref) == doctest::Approx(std::sqrt(0.05)).epsilon(1e-15));
  CHECK(rmsd(est, ref) == 0.22360679774997896);

  const std::vector<double> empty;
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(rmsd(empty, empty), std::invalid_argument);
  CHECK_THROWS_AS(rmsd(est, one), std::invalid_argument);
}

TEST_CASE("rmsd and armsd match the brute-force reimplementation bitwise") {
  RandomStream rng(91);
  for (int r = 0; r < 1000; ++r) {
    const int n = 1 + static_cast<int>(rng.uniform() * 12);
    std::vector<double> est(n), ref(n);
    for (int i = 0; i < n; ++i) {
      est[i] = rng.normal(0.0, 2.0);
      ref[i] = rng.normal(0.0, 2.0);
    }
    CHECK(rmsd(est, ref) == oracle::rmsd_pinned(est, ref));
  }

  std::vector<std::pair<std::vector<double>, std::vector<double>>> reps;
  for (int rep = 0; rep < 7; ++rep) {
    std::vector<double> est(5), ref(5);
    for (int i = 0; i < 5; ++i) {
      est[i] = rng.normal();
      ref[i] = rng.normal();
    }
    reps.emplace_back(est, ref);
  }
  CHECK(armsd(reps) == oracle::armsd_pinned(reps));
}

namespace {

Item mc_uirt(const std::string& id, double a, double d, double c) {
  DichotomousItem it;
  it.id = id;
  it.family = ModelFamily::UIRT;
  it.a = {a};
  it.d = d;
  it.c = c;
  return it;
}

Item cr_uirt(const std::string& id, double a, std::vector<double> deltas) {
  PolytomousItem it;
  it.id = id;
  it.format = ItemFormat::CR;
  it.family = ModelFamily::UIRT;
  it.a = {a};
  it.deltas = std::move(deltas);
  return it;
}

}  // namespace

TEST_CASE("append_class_pairs: UIRT views") {
  const std::vector<Item> est{mc_uirt("m1", 1.5, -0.6, 0.2),
                              cr_uirt("c1", 2.0, {1.0, 3.0})};
  const std::vector<Item> ref{mc_uirt("m1", 1.0, 0.5, 0.25),
                              cr_uirt("c1", 1.0, {0.5, 1.5})};

  std::vector<double> e, r;
  append_class_pairs(ParamClass::MCa, ModelFamily::UIRT, est, ref, e, r);
  CHECK(e == std::vector<double>{1.5});
  CHECK(r == std::vector<double>{1.0});

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::MCb, ModelFamily::UIRT, est, ref, e, r);
  // b = -d/a
  CHECK(e[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(-0.5).epsilon(1e-12));

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::MCc, ModelFamily::UIRT, est, ref, e, r);
  CHECK(e == std::vector<double>{0.2});
  CHECK(r == std::vector<double>{0.25});

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::CRa, ModelFamily::UIRT, est, ref, e, r);
  CHECK(e == std::vector<double>{2.0});

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::CRb, ModelFamily::UIRT, est, ref, e, r);
  // Threshold location on the theta scale: mean(delta / a).
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::CRstep, ModelFamily::UIRT, est, ref, e, r);
  // Deviations from the location: est (0.5, 1.5) - 1.0, ref (0.5, 1.5) - 1.0.
  REQUIRE(e.size() == 2);
  CHECK(e[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("append_class_pairs: MIRT views pool slope entries and use d directly") {
  RandomStream rng(92);
  const Item est_mc =
      support::random_item(rng, ModelFamily::SimpleStructure, ItemFormat::MC, "m1");
  const Item est_cr =
      support::random_item(rng, ModelFamily::SimpleStructure, ItemFormat::CR, "c1");
  // References share the estimates' structure, with shifted parameters.
  Item ref_mc = est_mc;
  std::get<DichotomousItem>(ref_mc).d += 0.4;
  Item ref_cr = est_cr;
  for (double& delta : std::get<PolytomousItem>(ref_cr).deltas) delta -= 0.2;
  const std::vector<Item> est{est_mc, est_cr};
  const std::vector<Item> ref{ref_mc, ref_cr};

  std::vector<double> e, r;
  append_class_pairs(ParamClass::MCa, ModelFamily::SimpleStructure, est, ref, e, r);
  CHECK(e == item_slopes(est_mc));  // both dimensions, including the structural zero

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::MCb, ModelFamily::SimpleStructure, est, ref, e, r);
  CHECK(e == std::vector<double>{std::get<DichotomousItem>(est_mc).d});

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::CRb, ModelFamily::SimpleStructure, est, ref, e, r);
  CHECK(e.empty());  // CR-b is a UIRT-only view

  e.clear();
  r.clear();
  append_class_pairs(ParamClass::CRstep, ModelFamily::SimpleStructure, est, ref, e, r);
  CHECK(e == std::get<PolytomousItem>(est_cr).deltas);

  std::vector<Item> renamed = ref;
  std::get<DichotomousItem>(renamed[0]).id = "zz";
  e.clear();
  r.clear();
  CHECK_THROWS_AS(
      append_class_pairs(ParamClass::MCa, ModelFamily::SimpleStructure, est, renamed, e, r),
      std::invalid_argument);
}

namespace {

StudyReport tiny_report() {
  StudyReport report;
  report.config.rho_levels = {0.5};
  report.config.anchor_scenarios = {AnchorScenario::MCCR};
  report.config.analysis_models = {ModelFamily::UIRT};
  report.config.n_replications = 2;
  for (int rep = 0; rep < 2; ++rep) {
    ReplicationOutcome o;
    o.rho = 0.5;
    o.scenario = AnchorScenario::MCCR;
    o.model = ModelFamily::UIRT;
    o.replication = rep;
    o.linking.transform = Transform::identity(1);
    o.linking.transform.A(0, 0) = 1.0 + 0.1 * rep;
    o.linking.transform.B[0] = 0.05 * rep;
    o.anchors_base = {mc_uirt("m1", 1.0, 0.0, 0.2), cr_uirt("c1", 1.2, {0.3, 0.9})};
    o.anchors_new_transformed = {mc_uirt("m1", 1.0 + 0.1 * (rep + 1), 0.1, 0.2),
                                 cr_uirt("c1", 1.2, {0.4, 1.0})};
    o.anchors_truth = o.anchors_base;
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

}  // namespace

TEST_CASE("compute_armsd groups by condition and averages over replications") {
  const StudyReport report = tiny_report();
  const ArmsdTable table = compute_armsd(report);
  REQUIRE(table.has(0.5, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::MCa));
  // MC-a diffs: rep0 |1.1-1.0|, rep1 |1.2-1.0| -> mean(0.1, 0.2).
  CHECK(table.at(0.5, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::MCa) ==
        doctest::Approx(0.15).epsilon(1e-12));
  // CR-step deviations are centered, so both reps have the same rmsd here.
  CHECK(table.has(0.5, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::CRstep));
  CHECK(!table.has(0.8, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::MCa));
  CHECK_THROWS_AS(
      table.at(0.8, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::MCa),
      std::out_of_range);

  // Truth-referenced tables exist for UIRT.
  const ArmsdTable truth = compute_armsd(report, /*truth_referenced=*/true);
  CHECK(truth.has(0.5, AnchorScenario::MCCR, ModelFamily::UIRT, ParamClass::MCa));

  // ... but bifactor conditions are skipped there.
  StudyReport bif = report;
  for (ReplicationOutcome& o : bif.outcomes) o.model = ModelFamily::Bifactor;
  const ArmsdTable none = compute_armsd(bif, true);
  CHECK(none.cells.empty());
}

TEST_CASE("summarize_constants averages transform entries") {
  const StudyReport report = tiny_report();
  const ConstantsSummary s = summarize_constants(report);
  const auto key = std::make_tuple(0.5, static_cast<int>(AnchorScenario::MCCR),
                                   static_cast<int>(ModelFamily::UIRT));
  REQUIRE(s.cells.count(key) == 1);
  const std::vector<double>& entries = s.cells.at(key);
  REQUIRE(entries.size() == 2);  // A(1x1) then B(1)
  CHECK(entries[0] == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(entries[1] == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("population_recovery is defined for simple structure only") {
  const StudyReport report = tiny_report();
  CHECK_THROWS_AS(population_recovery(report, ModelFamily::UIRT), std::invalid_argument);
  CHECK_THROWS_AS(population_recovery(report, ModelFamily::SimpleStructure),
                  std::invalid_argument);  // no SS outcomes in this report

  StudyReport ss = report;
  for (ReplicationOutcome& o : ss.outcomes) {
    o.model = ModelFamily::SimpleStructure;
    o.population_new_transformed = Population::standard(2);
    o.population_new_transformed.mean = {0.0, 0.1 * (o.replication + 1)};
  }
  const PopulationRecovery rec = population_recovery(ss, ModelFamily::SimpleStructure);
  const auto key = std::make_pair(0.5, static_cast<int>(AnchorScenario::MCCR));
  REQUIRE(rec.cells.count(key) == 1);
  CHECK(rec.cells.at(key).mean[1] == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("write_report_tables emits display and raw files for present models") {
  const StudyReport report = tiny_report();
  const auto dir =
      std::filesystem::temp_directory_path() / "mirtlink_eval_tables_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  const std::vector<std::string> written = write_report_tables(report, dir);
  REQUIRE(!written.empty());
  for (const std::string& name : written) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(dir / name));
    CHECK(std::filesystem::file_size(dir / name) > 0);
  }
  const auto has = [&](const std::string& name) {
    return std::find(written.begin(), written.end(), name) != written.end();
  };
  CHECK(has("constants_uirt.csv"));
  CHECK(has("constants_uirt_raw.csv"));
  CHECK(has("armsd_uirt.csv"));
  CHECK(has("armsd_uirt_raw.csv"));
  CHECK(has("armsd_classes_raw.csv"));
  CHECK(!has("constants_bifactor.csv"));  // no bifactor outcomes in the report
  std::filesystem::remove_all(dir);
}
