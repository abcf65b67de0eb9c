#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mirtlink/simulation.hpp"

namespace mirtlink {

// Parameter classes pooled for the ARMSD summaries.  Under UIRT analysis the
// MC-b class compares b = -d/a and the CR-b / CR-step classes compare the
// threshold location / deviations on the theta scale; under the MIRT models
// MC-b compares d, CR-step compares the deltas directly and CR-b is absent.
enum class ParamClass { MCa, MCb, MCc, CRa, CRb, CRstep };

std::string to_string(ParamClass cls);

// sqrt(mean of squared differences) with a pinned evaluation order:
//   sum = 0; for i ascending: diff = estimates[i] - references[i];
//   sum += diff * diff;  return sqrt(sum / n)
// Any reimplementation following this order reproduces the result bitwise.
double rmsd(std::span<const double> estimates, std::span<const double> references);

// Mean over replications of the per-replication rmsd.
double armsd(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& replications);

// Append the aligned (estimate, reference) values of one class; items are
// matched by list position.
void append_class_pairs(ParamClass cls, ModelFamily model, std::span<const Item> estimates,
                        std::span<const Item> references, std::vector<double>& est_out,
                        std::vector<double>& ref_out);

// (rho, scenario, model, class) -> ARMSD.  Keys use the enum integer values;
// map ordering makes every traversal deterministic.
struct ArmsdTable {
  std::map<std::tuple<double, int, int, int>, double> cells;

  bool has(double rho, AnchorScenario s, ModelFamily m, ParamClass c) const;
  double at(double rho, AnchorScenario s, ModelFamily m, ParamClass c) const;
};

// truth_referenced compares against the generating parameters instead of the
// base-form calibration; it is computed for UIRT and simple structure only.
ArmsdTable compute_armsd(const StudyReport& report, bool truth_referenced = false);

// (rho, scenario, model) -> mean transform entries [A row-major..., B...].
struct ConstantsSummary {
  std::map<std::tuple<double, int, int>, std::vector<double>> cells;
};

ConstantsSummary summarize_constants(const StudyReport& report);

// (rho, scenario) -> mean transformed new-group population.
struct PopulationRecovery {
  std::map<std::pair<double, int>, Population> cells;
};

PopulationRecovery population_recovery(const StudyReport& report, ModelFamily model);

// Emit the summary CSV files (2-decimal display + full-precision *_raw
// siblings) into dir.  Returns the written file names.
std::vector<std::string> write_report_tables(const StudyReport& report,
                                             const std::filesystem::path& dir);

}  // namespace mirtlink
