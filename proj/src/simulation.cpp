#include "mirtlink/simulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>
#include <type_traits>

#include "mirtlink/parallel.hpp"
#include "mirtlink/response_model.hpp"
#include "mirtlink/rng.hpp"

namespace mirtlink {

std::string to_string(AnchorScenario s) {
  return s == AnchorScenario::MCOnly ? "MCOnly" : "MCCR";
}

AnchorScenario anchor_scenario_from_string(const std::string& s) {
  if (s == "MCOnly" || s == "mc-only") return AnchorScenario::MCOnly;
  if (s == "MCCR" || s == "mc-cr") return AnchorScenario::MCCR;
  throw std::invalid_argument("unknown anchor scenario: '" + s + "'");
}

namespace {

constexpr double kRhoChoices[] = {0.5, 0.8, 1.0};

std::uint64_t rho_bits(double rho) { return std::bit_cast<std::uint64_t>(rho); }

const char* model_tag(ModelFamily m) {
  switch (m) {
    case ModelFamily::UIRT: return "uirt";
    case ModelFamily::SimpleStructure: return "simple";
    case ModelFamily::Bifactor: return "bifactor";
  }
  return "";
}

void check_anchor_pairing(const TestForm& base, const TestForm& next) {
  for (const Item& it : base.items) {
    if (!item_anchor(it)) continue;
    const Item* other = find_item(next, item_id(it));
    if (!other || !item_anchor(*other))
      throw std::invalid_argument("anchor item '" + item_id(it) +
                                  "' is not designated in form '" + next.name + "'");
    if (item_format(*other) != item_format(it) ||
        n_categories(*other) != n_categories(it))
      throw std::invalid_argument("anchor item '" + item_id(it) +
                                  "' differs in structure between forms");
    const bool same_params = std::visit(
        [](const auto& lhs, const auto& rhs) -> bool {
          using L = std::decay_t<decltype(lhs)>;
          using R = std::decay_t<decltype(rhs)>;
          if constexpr (!std::is_same_v<L, R>) {
            return false;
          } else if constexpr (std::is_same_v<L, DichotomousItem>) {
            return lhs.a == rhs.a && lhs.d == rhs.d && lhs.c == rhs.c;
          } else {
            return lhs.a == rhs.a && lhs.deltas == rhs.deltas;
          }
        },
        it, *other);
    if (!same_params)
      throw std::invalid_argument("anchor item '" + item_id(it) +
                                  "' differs in parameters between forms");
  }
}

}  // namespace

void validate_config(StudyConfig& config) {
  if (config.n_examinees < 1) throw std::invalid_argument("config: n_examinees < 1");
  if (config.n_replications < 1) throw std::invalid_argument("config: n_replications < 1");
  if (config.rho_levels.empty()) throw std::invalid_argument("config: no rho levels");
  for (double& rho : config.rho_levels) {
    bool ok = false;
    for (double choice : kRhoChoices)
      if (std::abs(rho - choice) < 1e-9) {
        rho = choice;
        ok = true;
      }
    if (!ok)
      throw std::invalid_argument("config: rho level must be one of 0.5, 0.8, 1.0");
  }
  std::sort(config.rho_levels.begin(), config.rho_levels.end());
  config.rho_levels.erase(
      std::unique(config.rho_levels.begin(), config.rho_levels.end()),
      config.rho_levels.end());
  auto dedupe = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  if (config.anchor_scenarios.empty()) throw std::invalid_argument("config: no scenarios");
  dedupe(config.anchor_scenarios);
  if (config.analysis_models.empty())
    throw std::invalid_argument("config: no analysis models");
  dedupe(config.analysis_models);
  validate_form(config.base_form);
  validate_form(config.new_form);
  if (form_dim(config.base_form) != 2 || form_dim(config.new_form) != 2 ||
      item_family(config.base_form.items[0]) != ModelFamily::SimpleStructure)
    throw std::invalid_argument(
        "config: generating forms must be two-dimensional simple structure");
  check_anchor_pairing(config.base_form, config.new_form);
  check_anchor_pairing(config.new_form, config.base_form);
  for (AnchorScenario s : config.anchor_scenarios)
    (void)build_anchor_set(config.base_form, s);  // throws when empty
  validate_spec(config.calibration);
  if (config.nonequivalent_groups) {
    Population pop{config.new_group_mean, config.new_group_cov};
    if (pop.dim() != 2)
      throw std::invalid_argument("config: new-group population must be 2-dimensional");
    validate_population(pop);
  }
}

Matrix sample_thetas(int n, double rho, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_thetas: n < 1");
  if (!(std::abs(rho) <= 1.0))
    throw std::invalid_argument("sample_thetas: |rho| must be <= 1");
  RandomStream stream(derive_seed(seed, "thetas"));
  Matrix out(n, 2);
  const double tail = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    const double z1 = stream.normal();
    const double z2 = stream.normal();
    out(i, 0) = z1;
    out(i, 1) = rho * z1 + tail * z2;
  }
  return out;
}

Matrix sample_thetas_general(int n, const Population& pop, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_thetas: n < 1");
  validate_population(pop);
  const Matrix chol = cholesky(pop.cov);
  const int d = pop.dim();
  RandomStream stream(derive_seed(seed, "thetas"));
  Matrix out(n, d);
  std::vector<double> z(d);
  for (int i = 0; i < n; ++i) {
    for (double& v : z) v = stream.normal();
    for (int r = 0; r < d; ++r) {
      double x = pop.mean[r];
      for (int c = 0; c <= r; ++c) x += chol(r, c) * z[c];
      out(i, r) = x;
    }
  }
  return out;
}

ResponseMatrix generate_responses(const TestForm& form, const Matrix& thetas,
                                  std::uint64_t seed) {
  validate_form(form);
  if (item_family(form.items[0]) != ModelFamily::SimpleStructure)
    throw std::invalid_argument("generate_responses: form must be simple structure");
  if (thetas.cols != 2)
    throw std::invalid_argument("generate_responses: thetas must have 2 columns");
  const int n = thetas.rows;
  const int j_count = static_cast<int>(form.items.size());
  std::vector<std::string> ids;
  ids.reserve(j_count);
  for (const Item& it : form.items) ids.push_back(item_id(it));
  ResponseMatrix m = ResponseMatrix::empty(std::move(ids), n);
  RandomStream stream(derive_seed(seed, "responses"));
  std::vector<double> probs(16);
  for (int i = 0; i < n; ++i) {
    const ThetaVector theta{thetas(i, 0), thetas(i, 1)};
    for (int j = 0; j < j_count; ++j) {
      const Item& it = form.items[j];
      if (const auto* di = std::get_if<DichotomousItem>(&it)) {
        const double p = prob_dichotomous(*di, theta);
        m(i, j) = stream.uniform() < p ? 1 : 0;
      } else {
        const auto& pi = std::get<PolytomousItem>(it);
        const int K = n_categories(it);
        prob_polytomous_into(pi, theta, std::span<double>(probs.data(), K));
        const double u = stream.uniform();
        double cum = 0.0;
        int score = K - 1;
        for (int k = 0; k < K; ++k) {
          cum += probs[k];
          if (u < cum) {
            score = k;
            break;
          }
        }
        m(i, j) = static_cast<std::int16_t>(score);
      }
    }
  }
  return m;
}

GeneratedDataset make_dataset(const TestForm& form, int n, double rho,
                              std::uint64_t seed) {
  GeneratedDataset out;
  out.rho_used = rho;
  out.seed_used = seed;
  out.thetas = sample_thetas(n, rho, derive_seed(seed, "dataset-thetas"));
  out.responses = generate_responses(form, out.thetas, derive_seed(seed, "dataset-resp"));
  return out;
}

std::vector<std::string> build_anchor_set(const TestForm& form, AnchorScenario scenario) {
  std::vector<std::string> ids;
  for (const Item& it : form.items) {
    if (!item_anchor(it)) continue;
    if (scenario == AnchorScenario::MCOnly && item_format(it) != ItemFormat::MC) continue;
    ids.push_back(item_id(it));
  }
  if (ids.empty()) {
    if (scenario == AnchorScenario::MCOnly)
      throw std::invalid_argument("MC-only scenario requires MC anchor items in form '" +
                                  form.name + "'");
    throw std::invalid_argument("form '" + form.name + "' has no designated anchor items");
  }
  return ids;
}

namespace {

struct BankRecipe {
  int mc_anchor = 12, mc_unique = 28;
  int cr_anchor = 4, cr_unique = 4;
  int cr_categories = 5;
  double ln_a_sd = 0.3;
};

DichotomousItem draw_mc(const std::string& id, bool anchor, RandomStream& stream,
                        const BankRecipe& recipe) {
  DichotomousItem it;
  it.id = id;
  it.format = ItemFormat::MC;
  it.family = ModelFamily::SimpleStructure;
  const double a = std::exp(recipe.ln_a_sd * stream.normal());
  const double b = stream.normal();
  it.a = {a, 0.0};
  it.d = -a * b;
  it.c = stream.beta(5.0, 17.0);
  it.anchor = anchor;
  return it;
}

PolytomousItem draw_cr(const std::string& id, bool anchor, RandomStream& stream,
                       const BankRecipe& recipe) {
  PolytomousItem it;
  it.id = id;
  it.format = ItemFormat::CR;
  it.family = ModelFamily::SimpleStructure;
  const double a = std::exp(recipe.ln_a_sd * stream.normal());
  it.a = {0.0, a};
  std::vector<double> t(recipe.cr_categories - 1);
  for (double& v : t) v = stream.normal();
  std::sort(t.begin(), t.end());
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  it.deltas.reserve(t.size());
  for (double v : t) it.deltas.push_back(a * (v - mean));
  it.anchor = anchor;
  return it;
}

std::string padded(const std::string& prefix, int index) {
  std::string num = std::to_string(index);
  if (num.size() < 2) num.insert(num.begin(), '0');
  return prefix + num;
}

}  // namespace

std::pair<TestForm, TestForm> default_item_bank(std::uint64_t seed) {
  const BankRecipe recipe;
  RandomStream stream(derive_seed(seed, "bank"));
  std::vector<Item> mc_anchors, cr_anchors;
  for (int i = 1; i <= recipe.mc_anchor; ++i)
    mc_anchors.push_back(draw_mc(padded("amc", i), true, stream, recipe));
  for (int i = 1; i <= recipe.cr_anchor; ++i)
    cr_anchors.push_back(draw_cr(padded("acr", i), true, stream, recipe));

  const auto build_form = [&](const std::string& name, char prefix) {
    TestForm form;
    form.name = name;
    for (const Item& it : mc_anchors) form.items.push_back(it);
    for (int i = 1; i <= recipe.mc_unique; ++i)
      form.items.push_back(draw_mc(padded(std::string(1, prefix) + "mc", i), false,
                                   stream, recipe));
    for (const Item& it : cr_anchors) form.items.push_back(it);
    for (int i = 1; i <= recipe.cr_unique; ++i)
      form.items.push_back(draw_cr(padded(std::string(1, prefix) + "cr", i), false,
                                   stream, recipe));
    validate_form(form);
    return form;
  };
  TestForm base = build_form("base", 'b');
  TestForm next = build_form("new", 'n');
  return {std::move(base), std::move(next)};
}

namespace {

std::vector<Item> pick_anchor_items(const std::vector<Item>& items,
                                    const std::vector<std::string>& ids) {
  std::vector<Item> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto hit = std::find_if(items.begin(), items.end(),
                            [&](const Item& it) { return item_id(it) == id; });
    if (hit == items.end())
      throw std::invalid_argument("anchor id '" + id + "' missing from calibration");
    out.push_back(*hit);
  }
  return out;
}

TestForm analysis_skeleton(const TestForm& truth, ModelFamily family) {
  TestForm out;
  out.name = truth.name;
  out.items.reserve(truth.items.size());
  for (const Item& it : truth.items) out.items.push_back(map_item_to_family(it, family));
  return out;
}

struct UnitResult {
  std::vector<ReplicationOutcome> outcomes;  // one per scenario, config order
  std::string error;                         // nonempty on failure
};

}  // namespace

StudyReport run_study(const StudyConfig& input_config, int jobs) {
  StudyConfig config = input_config;
  validate_config(config);
  if (jobs < 1) jobs = 1;

  const int n_rho = static_cast<int>(config.rho_levels.size());
  const int n_models = static_cast<int>(config.analysis_models.size());
  const int n_reps = config.n_replications;
  const int n_units = n_rho * n_models * n_reps;
  std::vector<UnitResult> units(n_units);

  const Population generating_pop_base = Population::standard(2);

  set_threads(jobs);
  MIRTLINK_PRAGMA_OMP(parallel for schedule(dynamic) num_threads(jobs))
  for (int unit = 0; unit < n_units; ++unit) {
    const int rep = unit % n_reps;
    const int mi = (unit / n_reps) % n_models;
    const int ri = unit / (n_reps * n_models);
    const double rho = config.rho_levels[ri];
    const ModelFamily model = config.analysis_models[mi];
    UnitResult& slot = units[unit];
    try {
      // Datasets are a function of (rho, replication) only, so every analysis
      // model sees the same data and conditions stay individually
      // reproducible.
      Population gen_pop = generating_pop_base;
      gen_pop.cov(0, 1) = rho;
      gen_pop.cov(1, 0) = rho;
      const std::uint64_t data_seed =
          derive_seed(config.base_seed, "data", rho_bits(rho), rep);
      const Matrix theta_base =
          sample_thetas(config.n_examinees, rho, derive_seed(data_seed, "theta-base"));
      Matrix theta_new;
      if (config.nonequivalent_groups) {
        Population new_pop{config.new_group_mean, config.new_group_cov};
        theta_new = sample_thetas_general(config.n_examinees, new_pop,
                                          derive_seed(data_seed, "theta-new"));
      } else {
        theta_new =
            sample_thetas(config.n_examinees, rho, derive_seed(data_seed, "theta-new"));
      }
      const ResponseMatrix resp_base = generate_responses(
          config.base_form, theta_base, derive_seed(data_seed, "resp-base"));
      const ResponseMatrix resp_new = generate_responses(
          config.new_form, theta_new, derive_seed(data_seed, "resp-new"));

      const std::uint64_t calib_seed_base = derive_seed(
          config.base_seed, std::string("calib-base-") + model_tag(model), rho_bits(rho),
          rep);
      const std::uint64_t calib_seed_new = derive_seed(
          config.base_seed, std::string("calib-new-") + model_tag(model), rho_bits(rho),
          rep);

      CalibrationSpec spec = config.calibration;
      spec.model_family = model;
      CalibrationResult calib_base, calib_new;
      if (spec.mode == CalibrationMode::OracleNoise) {
        spec.seed = calib_seed_base;
        calib_base = calibrate_oracle(config.base_form.items, gen_pop, spec);
        spec.seed = calib_seed_new;
        calib_new = calibrate_oracle(config.new_form.items, gen_pop, spec);
      } else {
        const TestForm skel_base = analysis_skeleton(config.base_form, model);
        const TestForm skel_new = analysis_skeleton(config.new_form, model);
        spec.seed = calib_seed_base;
        calib_base = calibrate_mcmc(resp_base, skel_base, spec);
        spec.seed = calib_seed_new;
        calib_new = calibrate_mcmc(resp_new, skel_new, spec);
      }

      const QuadratureGrid grid = default_linking_grid(family_dim(model));
      for (AnchorScenario scenario : config.anchor_scenarios) {
        ReplicationOutcome out;
        out.rho = rho;
        out.scenario = scenario;
        out.model = model;
        out.replication = rep;
        out.data_seed = data_seed;
        out.calib_seed_base = calib_seed_base;
        out.calib_seed_new = calib_seed_new;
        const auto ids = build_anchor_set(config.base_form, scenario);
        const std::vector<Item> base_anchors = pick_anchor_items(calib_base.items, ids);
        const std::vector<Item> new_anchors = pick_anchor_items(calib_new.items, ids);
        LinkingOptions opts;
        opts.capture_trace = rep == 0;
        out.linking = estimate_transform(base_anchors, new_anchors, grid, opts);
        out.loss_trace = std::move(out.linking.loss_trace);
        out.linking.loss_trace.clear();
        out.anchors_base = base_anchors;
        out.anchors_new_transformed =
            transform_items(out.linking.transform, new_anchors);
        std::vector<Item> truth;
        for (const Item& it : pick_anchor_items(config.base_form.items, ids))
          truth.push_back(map_item_to_family(it, model));
        out.anchors_truth = std::move(truth);
        if (model == ModelFamily::SimpleStructure)
          out.population_new_transformed =
              transform_population(out.linking.transform, calib_new.population);
        for (const std::string& w : calib_base.warnings)
          out.warnings.push_back("base: " + w);
        for (const std::string& w : calib_new.warnings)
          out.warnings.push_back("new: " + w);
        slot.outcomes.push_back(std::move(out));
      }
    } catch (const std::exception& e) {
      slot.error = std::string(e.what());
    }
  }

  for (int unit = 0; unit < n_units; ++unit) {
    if (units[unit].error.empty()) continue;
    const int rep = unit % n_reps;
    const int mi = (unit / n_reps) % n_models;
    const int ri = unit / (n_reps * n_models);
    throw std::runtime_error(
        "study unit failed (rho=" + std::to_string(config.rho_levels[ri]) +
        ", model=" + to_string(config.analysis_models[mi]) +
        ", replication=" + std::to_string(rep) + "): " + units[unit].error);
  }

  StudyReport report;
  report.config = config;
  const int n_scen = static_cast<int>(config.anchor_scenarios.size());
  report.outcomes.reserve(static_cast<std::size_t>(n_units) * n_scen);
  for (int ri = 0; ri < n_rho; ++ri)
    for (int si = 0; si < n_scen; ++si)
      for (int mi = 0; mi < n_models; ++mi)
        for (int rep = 0; rep < n_reps; ++rep) {
          const int unit = (ri * n_models + mi) * n_reps + rep;
          report.outcomes.push_back(units[unit].outcomes[si]);
        }
  return report;
}

}  // namespace mirtlink
