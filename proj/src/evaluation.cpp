#include "mirtlink/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "mirtlink/io.hpp"

namespace mirtlink {

std::string to_string(ParamClass cls) {
  switch (cls) {
    case ParamClass::MCa: return "MC-a";
    case ParamClass::MCb: return "MC-b";
    case ParamClass::MCc: return "MC-c";
    case ParamClass::CRa: return "CR-a";
    case ParamClass::CRb: return "CR-b";
    case ParamClass::CRstep: return "CR-step";
  }
  return "?";
}

double rmsd(std::span<const double> estimates, std::span<const double> references) {
  if (estimates.size() != references.size())
    throw std::invalid_argument("rmsd: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("rmsd: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double diff = estimates[i] - references[i];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

double armsd(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& replications) {
  if (replications.empty()) throw std::invalid_argument("armsd: no replications");
  double total = 0.0;
  for (const auto& [est, ref] : replications) total += rmsd(est, ref);
  return total / static_cast<double>(replications.size());
}

namespace {

// Threshold location and deviations of a polytomous item on the theta scale
// (UIRT view): location = mean(delta_v / a), steps = delta_v / a - location.
double uirt_cr_location(const PolytomousItem& item) {
  double loc = 0.0;
  for (double delta : item.deltas) loc += delta / item.a[0];
  return loc / static_cast<double>(item.deltas.size());
}

}  // namespace

void append_class_pairs(ParamClass cls, ModelFamily model, std::span<const Item> estimates,
                        std::span<const Item> references, std::vector<double>& est_out,
                        std::vector<double>& ref_out) {
  if (estimates.size() != references.size())
    throw std::invalid_argument("append_class_pairs: item list length mismatch");
  const bool uirt = model == ModelFamily::UIRT;
  const int dim = family_dim(model);
  for (std::size_t idx = 0; idx < estimates.size(); ++idx) {
    const Item& est = estimates[idx];
    const Item& ref = references[idx];
    if (item_id(est) != item_id(ref))
      throw std::invalid_argument("append_class_pairs: item id mismatch at position " +
                                  std::to_string(idx));
    if (is_dichotomous(est) != is_dichotomous(ref))
      throw std::invalid_argument("append_class_pairs: item type mismatch for " +
                                  item_id(est));
    const bool mc = item_format(est) == ItemFormat::MC;
    switch (cls) {
      case ParamClass::MCa:
        if (!mc) break;
        if (uirt) {
          est_out.push_back(item_slopes(est)[0]);
          ref_out.push_back(item_slopes(ref)[0]);
        } else {
          for (int k = 0; k < dim; ++k) {
            est_out.push_back(item_slopes(est)[k]);
            ref_out.push_back(item_slopes(ref)[k]);
          }
        }
        break;
      case ParamClass::MCb: {
        if (!mc) break;
        const auto& de = std::get<DichotomousItem>(est);
        const auto& dr = std::get<DichotomousItem>(ref);
        if (uirt) {
          est_out.push_back(-de.d / de.a[0]);
          ref_out.push_back(-dr.d / dr.a[0]);
        } else {
          est_out.push_back(de.d);
          ref_out.push_back(dr.d);
        }
        break;
      }
      case ParamClass::MCc: {
        if (!mc) break;
        est_out.push_back(std::get<DichotomousItem>(est).c);
        ref_out.push_back(std::get<DichotomousItem>(ref).c);
        break;
      }
      case ParamClass::CRa:
        if (mc) break;
        if (uirt) {
          est_out.push_back(item_slopes(est)[0]);
          ref_out.push_back(item_slopes(ref)[0]);
        } else {
          for (int k = 0; k < dim; ++k) {
            est_out.push_back(item_slopes(est)[k]);
            ref_out.push_back(item_slopes(ref)[k]);
          }
        }
        break;
      case ParamClass::CRb: {
        if (mc || !uirt) break;
        est_out.push_back(uirt_cr_location(std::get<PolytomousItem>(est)));
        ref_out.push_back(uirt_cr_location(std::get<PolytomousItem>(ref)));
        break;
      }
      case ParamClass::CRstep: {
        if (mc) break;
        const auto& pe = std::get<PolytomousItem>(est);
        const auto& pr = std::get<PolytomousItem>(ref);
        if (pe.deltas.size() != pr.deltas.size())
          throw std::invalid_argument("append_class_pairs: category mismatch for " +
                                      item_id(est));
        if (uirt) {
          const double le = uirt_cr_location(pe);
          const double lr = uirt_cr_location(pr);
          for (std::size_t v = 0; v < pe.deltas.size(); ++v) {
            est_out.push_back(pe.deltas[v] / pe.a[0] - le);
            ref_out.push_back(pr.deltas[v] / pr.a[0] - lr);
          }
        } else {
          for (std::size_t v = 0; v < pe.deltas.size(); ++v) {
            est_out.push_back(pe.deltas[v]);
            ref_out.push_back(pr.deltas[v]);
          }
        }
        break;
      }
    }
  }
}

bool ArmsdTable::has(double rho, AnchorScenario s, ModelFamily m, ParamClass c) const {
  return cells.count({rho, static_cast<int>(s), static_cast<int>(m),
                      static_cast<int>(c)}) > 0;
}

double ArmsdTable::at(double rho, AnchorScenario s, ModelFamily m, ParamClass c) const {
  const auto it = cells.find(
      {rho, static_cast<int>(s), static_cast<int>(m), static_cast<int>(c)});
  if (it == cells.end())
    throw std::out_of_range("armsd table: missing cell " + to_string(c) + " rho=" +
                            format_double(rho));
  return it->second;
}

namespace {

constexpr ParamClass kAllClasses[] = {ParamClass::MCa,  ParamClass::MCb,
                                      ParamClass::MCc,  ParamClass::CRa,
                                      ParamClass::CRb,  ParamClass::CRstep};

using CondKey = std::tuple<double, int, int>;  // rho, scenario, model

std::map<CondKey, std::vector<const ReplicationOutcome*>> group_by_condition(
    const StudyReport& report) {
  std::map<CondKey, std::vector<const ReplicationOutcome*>> groups;
  for (const ReplicationOutcome& out : report.outcomes)
    groups[{out.rho, static_cast<int>(out.scenario), static_cast<int>(out.model)}]
        .push_back(&out);
  return groups;
}

}  // namespace

ArmsdTable compute_armsd(const StudyReport& report, bool truth_referenced) {
  ArmsdTable table;
  for (const auto& [key, outs] : group_by_condition(report)) {
    const ModelFamily model = static_cast<ModelFamily>(std::get<2>(key));
    if (truth_referenced && model == ModelFamily::Bifactor)
      continue;  // generating truth has no bifactor representation
    for (ParamClass cls : kAllClasses) {
      std::vector<std::pair<std::vector<double>, std::vector<double>>> reps;
      for (const ReplicationOutcome* out : outs) {
        std::vector<double> est, ref;
        append_class_pairs(cls, model, out->anchors_new_transformed,
                           truth_referenced ? out->anchors_truth : out->anchors_base, est,
                           ref);
        if (!est.empty()) reps.emplace_back(std::move(est), std::move(ref));
      }
      if (reps.empty()) continue;
      table.cells[{std::get<0>(key), std::get<1>(key), std::get<2>(key),
                   static_cast<int>(cls)}] = armsd(reps);
    }
  }
  return table;
}

ConstantsSummary summarize_constants(const StudyReport& report) {
  ConstantsSummary summary;
  for (const auto& [key, outs] : group_by_condition(report)) {
    const int dim = family_dim(static_cast<ModelFamily>(std::get<2>(key)));
    const int n_entries = dim * dim + dim;
    std::vector<double> mean(n_entries, 0.0);
    for (const ReplicationOutcome* out : outs) {
      if (out->linking.transform.dim() != dim)
        throw std::invalid_argument("summarize_constants: mixed dimensionality");
      for (int k = 0; k < dim * dim; ++k) mean[k] += out->linking.transform.A.v[k];
      for (int k = 0; k < dim; ++k) mean[dim * dim + k] += out->linking.transform.B[k];
    }
    for (double& v : mean) v /= static_cast<double>(outs.size());
    summary.cells[key] = std::move(mean);
  }
  return summary;
}

PopulationRecovery population_recovery(const StudyReport& report, ModelFamily model) {
  if (model != ModelFamily::SimpleStructure)
    throw std::invalid_argument(
        "population recovery is reported for the simple-structure analysis only");
  PopulationRecovery recovery;
  std::map<std::pair<double, int>, int> counts;
  for (const ReplicationOutcome& out : report.outcomes) {
    if (out.model != ModelFamily::SimpleStructure) continue;
    const std::pair<double, int> key{out.rho, static_cast<int>(out.scenario)};
    auto [it, fresh] = recovery.cells.try_emplace(key, Population::standard(2));
    if (fresh) {
      it->second.mean.assign(2, 0.0);
      it->second.cov = Matrix(2, 2);
    }
    for (int k = 0; k < 2; ++k)
      it->second.mean[k] += out.population_new_transformed.mean[k];
    for (int k = 0; k < 4; ++k)
      it->second.cov.v[k] += out.population_new_transformed.cov.v[k];
    counts[key]++;
  }
  if (recovery.cells.empty())
    throw std::invalid_argument("population recovery: no simple-structure results");
  for (auto& [key, pop] : recovery.cells) {
    const double n = counts[key];
    for (double& v : pop.mean) v /= n;
    for (double& v : pop.cov.v) v /= n;
  }
  return recovery;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

namespace {

std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

struct TableFiles {
  std::string display;
  std::string raw;
};

void write_pair(const std::filesystem::path& dir, const std::string& stem,
                const std::string& display, const std::string& raw,
                std::vector<std::string>& written) {
  write_text_file(dir / (stem + ".csv"), display);
  write_text_file(dir / (stem + "_raw.csv"), raw);
  written.push_back(stem + ".csv");
  written.push_back(stem + "_raw.csv");
}

bool model_present(const StudyReport& report, ModelFamily m) {
  for (const auto& out : report.outcomes)
    if (out.model == m) return true;
  return false;
}

std::string scenario_label(AnchorScenario s) {
  return s == AnchorScenario::MCOnly ? "MC-only" : "MC-CR";
}

// Fine-grained ARMSD for one displayed column: per-entry slope or threshold
// pools, matching the per-parameter layout of the MIRT summary tables.
struct FinePool {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> reps;

  void add(const ReplicationOutcome& out,
           const std::function<void(const Item&, const Item&, std::vector<double>&,
                                    std::vector<double>&)>& extract) {
    std::vector<double> est, ref;
    for (std::size_t i = 0; i < out.anchors_new_transformed.size(); ++i)
      extract(out.anchors_new_transformed[i], out.anchors_base[i], est, ref);
    if (!est.empty()) reps.emplace_back(std::move(est), std::move(ref));
  }
  bool empty() const { return reps.empty(); }
  double value() const { return armsd(reps); }
};

}  // namespace

std::vector<std::string> write_report_tables(const StudyReport& report,
                                             const std::filesystem::path& dir) {
  std::vector<std::string> written;
  const auto groups = group_by_condition(report);
  const auto& rhos = report.config.rho_levels;
  const auto& scenarios = report.config.anchor_scenarios;
  const ArmsdTable classes = compute_armsd(report, false);
  const ArmsdTable truthref = compute_armsd(report, true);
  const ConstantsSummary constants = summarize_constants(report);

  // Scaling-constant summaries, one file per analysis model.
  const struct {
    ModelFamily model;
    const char* stem;
  } kConstantFiles[] = {
      {ModelFamily::UIRT, "constants_uirt"},
      {ModelFamily::Bifactor, "constants_bifactor"},
      {ModelFamily::SimpleStructure, "constants_simple_structure"},
  };
  for (const auto& [model, stem] : kConstantFiles) {
    if (!model_present(report, model)) continue;
    const int dim = family_dim(model);
    std::string header = "scenario,rho";
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        header += ",a" + std::to_string(r + 1) + std::to_string(c + 1);
    for (int k = 0; k < dim; ++k) header += ",b" + std::to_string(k + 1);
    std::string display = header + "\n", raw = header + "\n";
    for (AnchorScenario s : scenarios)
      for (double rho : rhos) {
        const auto it = constants.cells.find(
            {rho, static_cast<int>(s), static_cast<int>(model)});
        if (it == constants.cells.end()) continue;
        std::string prefix = scenario_label(s) + "," + format_double(rho);
        display += prefix;
        raw += prefix;
        for (double v : it->second) {
          display += "," + fixed2(v);
          raw += "," + format_double(v);
        }
        display += "\n";
        raw += "\n";
      }
    write_pair(dir, stem, display, raw, written);
  }

  // UIRT anchor ARMSD table: class/scenario rows, one column per rho.
  if (model_present(report, ModelFamily::UIRT)) {
    std::string header = "class,scenario";
    for (double rho : rhos) header += ",rho=" + format_double(rho);
    std::string display = header + "\n", raw = header + "\n";
    for (ParamClass cls : kAllClasses)
      for (AnchorScenario s : scenarios) {
        bool any = false;
        for (double rho : rhos)
          if (classes.has(rho, s, ModelFamily::UIRT, cls)) any = true;
        if (!any) continue;
        std::string row_d = to_string(cls) + "," + scenario_label(s);
        std::string row_r = row_d;
        for (double rho : rhos) {
          row_d += ",";
          row_r += ",";
          if (classes.has(rho, s, ModelFamily::UIRT, cls)) {
            const double v = classes.at(rho, s, ModelFamily::UIRT, cls);
            row_d += fixed2(v);
            row_r += format_double(v);
          }
        }
        display += row_d + "\n";
        raw += row_r + "\n";
      }
    write_pair(dir, "armsd_uirt", display, raw, written);
  }

  // MIRT transformed-parameter ARMSD tables: rho rows, per-parameter columns.
  const struct {
    ModelFamily model;
    const char* stem;
  } kMirtArmsdFiles[] = {
      {ModelFamily::Bifactor, "armsd_bifactor"},
      {ModelFamily::SimpleStructure, "armsd_simple_structure"},
  };
  for (const auto& [model, stem] : kMirtArmsdFiles) {
    if (!model_present(report, model)) continue;
    // Displayed slope entries: the structurally loaded dimensions per format.
    std::vector<int> mc_dims, cr_dims;
    if (model == ModelFamily::SimpleStructure) {
      mc_dims = {0};
      cr_dims = {1};
    } else {
      mc_dims = {0, 1};
      cr_dims = {0, 2};
    }
    int n_steps = 0;
    for (const auto& out : report.outcomes)
      if (out.model == model)
        for (const Item& it : out.anchors_base)
          if (!is_dichotomous(it))
            n_steps = std::max(n_steps,
                               static_cast<int>(std::get<PolytomousItem>(it).deltas.size()));
    std::string header = "scenario,rho";
    for (std::size_t k = 0; k < mc_dims.size(); ++k)
      header += ",MC-a" + std::to_string(k + 1);
    header += ",MC-d";
    for (std::size_t k = 0; k < cr_dims.size(); ++k)
      header += ",CR-a" + std::to_string(k + 1);
    for (int v = 0; v < n_steps; ++v) header += ",CR-t" + std::to_string(v + 1);
    std::string display = header + "\n", raw = header + "\n";
    for (AnchorScenario s : scenarios)
      for (double rho : rhos) {
        const auto git =
            groups.find({rho, static_cast<int>(s), static_cast<int>(model)});
        if (git == groups.end()) continue;
        std::string row_d = scenario_label(s) + "," + format_double(rho);
        std::string row_r = row_d;
        auto emit = [&](const FinePool& pool) {
          row_d += ",";
          row_r += ",";
          if (!pool.empty()) {
            const double v = pool.value();
            row_d += fixed2(v);
            row_r += format_double(v);
          }
        };
        for (int k : mc_dims) {
          FinePool pool;
          for (const ReplicationOutcome* out : git->second)
            pool.add(*out, [&](const Item& e, const Item& r, std::vector<double>& ev,
                               std::vector<double>& rv) {
              if (item_format(e) != ItemFormat::MC) return;
              ev.push_back(item_slopes(e)[k]);
              rv.push_back(item_slopes(r)[k]);
            });
          emit(pool);
        }
        {
          FinePool pool;
          for (const ReplicationOutcome* out : git->second)
            pool.add(*out, [&](const Item& e, const Item& r, std::vector<double>& ev,
                               std::vector<double>& rv) {
              if (item_format(e) != ItemFormat::MC) return;
              ev.push_back(std::get<DichotomousItem>(e).d);
              rv.push_back(std::get<DichotomousItem>(r).d);
            });
          emit(pool);
        }
        for (int k : cr_dims) {
          FinePool pool;
          for (const ReplicationOutcome* out : git->second)
            pool.add(*out, [&](const Item& e, const Item& r, std::vector<double>& ev,
                               std::vector<double>& rv) {
              if (item_format(e) != ItemFormat::CR) return;
              ev.push_back(item_slopes(e)[k]);
              rv.push_back(item_slopes(r)[k]);
            });
          emit(pool);
        }
        for (int v = 0; v < n_steps; ++v) {
          FinePool pool;
          for (const ReplicationOutcome* out : git->second)
            pool.add(*out, [&](const Item& e, const Item& r, std::vector<double>& ev,
                               std::vector<double>& rv) {
              if (item_format(e) != ItemFormat::CR) return;
              const auto& pe = std::get<PolytomousItem>(e);
              const auto& pr = std::get<PolytomousItem>(r);
              if (v >= static_cast<int>(pe.deltas.size())) return;
              ev.push_back(pe.deltas[v]);
              rv.push_back(pr.deltas[v]);
            });
          emit(pool);
        }
        display += row_d + "\n";
        raw += row_r + "\n";
      }
    write_pair(dir, stem, display, raw, written);
  }

  // Population recovery under simple structure.
  if (model_present(report, ModelFamily::SimpleStructure)) {
    const PopulationRecovery recovery =
        population_recovery(report, ModelFamily::SimpleStructure);
    const std::string header = "scenario,rho,mean1,mean2,cov11,cov12,cov21,cov22";
    std::string display = header + "\n", raw = header + "\n";
    for (AnchorScenario s : scenarios)
      for (double rho : rhos) {
        const auto it = recovery.cells.find({rho, static_cast<int>(s)});
        if (it == recovery.cells.end()) continue;
        std::string row_d = scenario_label(s) + "," + format_double(rho);
        std::string row_r = row_d;
        const Population& pop = it->second;
        const double values[] = {pop.mean[0],   pop.mean[1],   pop.cov(0, 0),
                                 pop.cov(0, 1), pop.cov(1, 0), pop.cov(1, 1)};
        for (double v : values) {
          row_d += "," + fixed2(v);
          row_r += "," + format_double(v);
        }
        display += row_d + "\n";
        raw += row_r + "\n";
      }
    write_pair(dir, "population_recovery", display, raw, written);
  }

  // Raw class table plus the truth-referenced variant.
  {
    const std::string header = "model,scenario,rho,class,armsd";
    std::string raw = header + "\n", truth_raw = header + "\n",
                truth_disp = header + "\n";
    const auto dump = [&](const ArmsdTable& table, std::string* disp, std::string* rawout) {
      for (const auto& [key, value] : table.cells) {
        const auto [rho, s, m, c] = key;
        const std::string prefix =
            to_string(static_cast<ModelFamily>(m)) + "," +
            scenario_label(static_cast<AnchorScenario>(s)) + "," + format_double(rho) +
            "," + to_string(static_cast<ParamClass>(c)) + ",";
        if (disp) *disp += prefix + fixed2(value) + "\n";
        if (rawout) *rawout += prefix + format_double(value) + "\n";
      }
    };
    dump(classes, nullptr, &raw);
    write_text_file(dir / "armsd_classes_raw.csv", raw);
    written.push_back("armsd_classes_raw.csv");
    if (!truthref.cells.empty()) {
      dump(truthref, &truth_disp, &truth_raw);
      write_pair(dir, "armsd_truth_referenced", truth_disp, truth_raw, written);
    }
  }
  return written;
}

}  // namespace mirtlink
