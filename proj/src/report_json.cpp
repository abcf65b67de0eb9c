#include "mirtlink/report_json.hpp"

#include <set>

#include <json.hpp>

#include "mirtlink/io.hpp"
#include "mirtlink/rng.hpp"

namespace mirtlink {

namespace {

using json = nlohmann::ordered_json;

json item_to_json(const Item& it) {
  json j;
  j["id"] = item_id(it);
  j["format"] = to_string(item_format(it));
  j["family"] = to_string(item_family(it));
  j["a"] = item_slopes(it);
  if (const auto* di = std::get_if<DichotomousItem>(&it)) {
    j["d"] = di->d;
    j["c"] = di->c;
  } else {
    j["deltas"] = std::get<PolytomousItem>(it).deltas;
  }
  j["anchor"] = item_anchor(it);
  return j;
}

Item item_from_json(const json& j) {
  const ItemFormat format = item_format_from_string(j.at("format").get<std::string>());
  const ModelFamily family = model_family_from_string(j.at("family").get<std::string>());
  if (j.contains("deltas")) {
    PolytomousItem it;
    it.id = j.at("id").get<std::string>();
    it.format = format;
    it.family = family;
    it.a = j.at("a").get<std::vector<double>>();
    it.deltas = j.at("deltas").get<std::vector<double>>();
    it.anchor = j.at("anchor").get<bool>();
    return it;
  }
  DichotomousItem it;
  it.id = j.at("id").get<std::string>();
  it.format = format;
  it.family = family;
  it.a = j.at("a").get<std::vector<double>>();
  it.d = j.at("d").get<double>();
  it.c = j.at("c").get<double>();
  it.anchor = j.at("anchor").get<bool>();
  return it;
}

json items_to_json(const std::vector<Item>& items) {
  json arr = json::array();
  for (const Item& it : items) arr.push_back(item_to_json(it));
  return arr;
}

std::vector<Item> items_from_json(const json& arr) {
  std::vector<Item> out;
  for (const json& j : arr) out.push_back(item_from_json(j));
  return out;
}

json form_to_json(const TestForm& form) {
  json j;
  j["name"] = form.name;
  j["items"] = items_to_json(form.items);
  return j;
}

TestForm form_from_json(const json& j) {
  TestForm form;
  form.name = j.at("name").get<std::string>();
  form.items = items_from_json(j.at("items"));
  return form;
}

json population_to_json(const Population& pop) {
  if (pop.dim() == 0) return nullptr;
  json j;
  j["mean"] = pop.mean;
  j["cov"] = pop.cov.v;
  return j;
}

Population population_from_json(const json& j) {
  Population pop;
  if (j.is_null()) return pop;
  pop.mean = j.at("mean").get<std::vector<double>>();
  const int d = pop.dim();
  pop.cov = Matrix(d, d);
  pop.cov.v = j.at("cov").get<std::vector<double>>();
  return pop;
}

json transform_to_json(const Transform& t) {
  json j;
  j["D"] = t.dim();
  j["A"] = t.A.v;
  j["B"] = t.B;
  return j;
}

Transform transform_from_json(const json& j) {
  Transform t;
  const int d = j.at("D").get<int>();
  t.A = Matrix(d, d);
  t.A.v = j.at("A").get<std::vector<double>>();
  t.B = j.at("B").get<std::vector<double>>();
  return t;
}

}  // namespace

std::string study_report_to_json(const StudyReport& report) {
  json j;
  j["schema_version"] = report.schema_version;
  json cfg;
  cfg["rho_levels"] = report.config.rho_levels;
  {
    json arr = json::array();
    for (AnchorScenario s : report.config.anchor_scenarios) arr.push_back(to_string(s));
    cfg["anchor_scenarios"] = arr;
  }
  {
    json arr = json::array();
    for (ModelFamily m : report.config.analysis_models) arr.push_back(to_string(m));
    cfg["analysis_models"] = arr;
  }
  cfg["n_examinees"] = report.config.n_examinees;
  cfg["n_replications"] = report.config.n_replications;
  cfg["base_seed"] = report.config.base_seed;
  json cal;
  cal["mode"] = to_string(report.config.calibration.mode);
  cal["chain_length"] = report.config.calibration.chain_length;
  cal["burn_in"] = report.config.calibration.burn_in;
  cal["item_proposal_scale"] = report.config.calibration.item_proposal_scale;
  cal["theta_proposal_scale"] = report.config.calibration.theta_proposal_scale;
  cal["rho_proposal_scale"] = report.config.calibration.rho_proposal_scale;
  cal["noise_sigma"] = report.config.calibration.noise_sigma;
  cfg["calibration"] = cal;
  cfg["base_form"] = form_to_json(report.config.base_form);
  cfg["new_form"] = form_to_json(report.config.new_form);
  cfg["nonequivalent_groups"] = report.config.nonequivalent_groups;
  if (report.config.nonequivalent_groups) {
    cfg["new_group_mean"] = report.config.new_group_mean;
    cfg["new_group_cov"] = report.config.new_group_cov.v;
  }
  j["config"] = cfg;

  json outcomes = json::array();
  for (const ReplicationOutcome& out : report.outcomes) {
    json o;
    o["rho"] = out.rho;
    o["scenario"] = to_string(out.scenario);
    o["model"] = to_string(out.model);
    o["replication"] = out.replication;
    o["data_seed"] = out.data_seed;
    o["calib_seed_base"] = out.calib_seed_base;
    o["calib_seed_new"] = out.calib_seed_new;
    json link;
    link["transform"] = transform_to_json(out.linking.transform);
    link["loss"] = out.linking.loss;
    link["iterations"] = out.linking.iterations;
    link["converged"] = out.linking.converged;
    link["condition_warning"] = out.linking.condition_warning;
    o["linking"] = link;
    o["anchors_base"] = items_to_json(out.anchors_base);
    o["anchors_new_transformed"] = items_to_json(out.anchors_new_transformed);
    o["anchors_truth"] = items_to_json(out.anchors_truth);
    o["population_new_transformed"] = population_to_json(out.population_new_transformed);
    o["loss_trace"] = out.loss_trace;
    o["warnings"] = out.warnings;
    outcomes.push_back(std::move(o));
  }
  j["outcomes"] = outcomes;
  return j.dump(1) + "\n";
}

StudyReport study_report_from_json(const std::string& text) {
  const json j = json::parse(text);
  StudyReport report;
  report.schema_version = j.at("schema_version").get<int>();
  const json& cfg = j.at("config");
  report.config.rho_levels = cfg.at("rho_levels").get<std::vector<double>>();
  report.config.anchor_scenarios.clear();
  for (const json& s : cfg.at("anchor_scenarios"))
    report.config.anchor_scenarios.push_back(
        anchor_scenario_from_string(s.get<std::string>()));
  report.config.analysis_models.clear();
  for (const json& m : cfg.at("analysis_models"))
    report.config.analysis_models.push_back(model_family_from_string(m.get<std::string>()));
  report.config.n_examinees = cfg.at("n_examinees").get<int>();
  report.config.n_replications = cfg.at("n_replications").get<int>();
  report.config.base_seed = cfg.at("base_seed").get<std::uint64_t>();
  const json& cal = cfg.at("calibration");
  report.config.calibration.mode =
      calibration_mode_from_string(cal.at("mode").get<std::string>());
  report.config.calibration.chain_length = cal.at("chain_length").get<int>();
  report.config.calibration.burn_in = cal.at("burn_in").get<int>();
  report.config.calibration.item_proposal_scale =
      cal.at("item_proposal_scale").get<double>();
  report.config.calibration.theta_proposal_scale =
      cal.at("theta_proposal_scale").get<double>();
  report.config.calibration.rho_proposal_scale =
      cal.at("rho_proposal_scale").get<double>();
  report.config.calibration.noise_sigma = cal.at("noise_sigma").get<double>();
  report.config.base_form = form_from_json(cfg.at("base_form"));
  report.config.new_form = form_from_json(cfg.at("new_form"));
  report.config.nonequivalent_groups = cfg.at("nonequivalent_groups").get<bool>();
  if (report.config.nonequivalent_groups) {
    report.config.new_group_mean = cfg.at("new_group_mean").get<std::vector<double>>();
    report.config.new_group_cov = Matrix(2, 2);
    report.config.new_group_cov.v = cfg.at("new_group_cov").get<std::vector<double>>();
  }
  for (const json& o : j.at("outcomes")) {
    ReplicationOutcome out;
    out.rho = o.at("rho").get<double>();
    out.scenario = anchor_scenario_from_string(o.at("scenario").get<std::string>());
    out.model = model_family_from_string(o.at("model").get<std::string>());
    out.replication = o.at("replication").get<int>();
    out.data_seed = o.at("data_seed").get<std::uint64_t>();
    out.calib_seed_base = o.at("calib_seed_base").get<std::uint64_t>();
    out.calib_seed_new = o.at("calib_seed_new").get<std::uint64_t>();
    const json& link = o.at("linking");
    out.linking.transform = transform_from_json(link.at("transform"));
    out.linking.loss = link.at("loss").get<double>();
    out.linking.iterations = link.at("iterations").get<int>();
    out.linking.converged = link.at("converged").get<bool>();
    out.linking.condition_warning = link.at("condition_warning").get<bool>();
    out.anchors_base = items_from_json(o.at("anchors_base"));
    out.anchors_new_transformed = items_from_json(o.at("anchors_new_transformed"));
    out.anchors_truth = items_from_json(o.at("anchors_truth"));
    out.population_new_transformed =
        population_from_json(o.at("population_new_transformed"));
    out.loss_trace = o.at("loss_trace").get<std::vector<double>>();
    out.warnings = o.at("warnings").get<std::vector<std::string>>();
    report.outcomes.push_back(std::move(out));
  }
  return report;
}

std::string study_manifest(const StudyReport& report) {
  std::string out = "format_version 1\n";
  out += "base_seed " + std::to_string(report.config.base_seed) + "\n";
  out += "bank_base_digest " +
         std::to_string(fnv1a64(bank_to_csv(report.config.base_form))) + "\n";
  out += "bank_new_digest " +
         std::to_string(fnv1a64(bank_to_csv(report.config.new_form))) + "\n";
  out += "n_examinees " + std::to_string(report.config.n_examinees) + "\n";
  out += "n_replications " + std::to_string(report.config.n_replications) + "\n";
  out += "calibration_mode " + to_string(report.config.calibration.mode) + "\n";
  out += "outcomes " + std::to_string(report.outcomes.size()) + "\n";
  std::set<std::tuple<double, int, int>> seen;
  for (const ReplicationOutcome& o : report.outcomes) {
    if (!seen.insert({o.rho, static_cast<int>(o.model), o.replication}).second) continue;
    out += "seed rho=" + format_double(o.rho) + " model=" + to_string(o.model) +
           " rep=" + std::to_string(o.replication) +
           " data=" + std::to_string(o.data_seed) +
           " calib_base=" + std::to_string(o.calib_seed_base) +
           " calib_new=" + std::to_string(o.calib_seed_new) + "\n";
  }
  return out;
}

}  // namespace mirtlink
