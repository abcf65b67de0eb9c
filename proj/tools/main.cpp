#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirtlink/config.hpp"
#include "mirtlink/evaluation.hpp"
#include "mirtlink/io.hpp"
#include "mirtlink/linking.hpp"
#include "mirtlink/report_json.hpp"
#include "mirtlink/response_model.hpp"
#include "mirtlink/rng.hpp"
#include "mirtlink/simulation.hpp"
#include "mirtlink/svg.hpp"

namespace fs = std::filesystem;
using namespace mirtlink;

namespace {

// Unwritable output directories are a usage error (exit code 2), not an IO
// failure, so probe before doing any work.
void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream f(probe, std::ios::binary);
    if (!f) throw std::invalid_argument("output directory not writable: " + dir.string());
    f << "x";
    if (!f) throw std::invalid_argument("output directory not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string digest_line(const fs::path& file) {
  return file.filename().string() + " " + std::to_string(fnv1a64(read_text_file(file)));
}

std::vector<Item> pick_items(const TestForm& form, const std::vector<std::string>& ids) {
  std::vector<Item> out;
  for (const std::string& id : ids) {
    bool found = false;
    for (const Item& it : form.items)
      if (item_id(it) == id) {
        out.push_back(it);
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("anchor id '" + id + "' missing from form '" +
                                  form.name + "'");
  }
  return out;
}

// --only rho=0.5,scenario=MCOnly,model=uirt — prunes the condition lists.
void apply_only_filter(StudyConfig& config, const std::string& filter) {
  std::stringstream ss(filter);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--only: expected key=value, got '" + part + "'");
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "rho") {
      const double want = parse_double(value, "--only rho");
      std::vector<double> keep;
      for (double r : config.rho_levels)
        if (std::abs(r - want) < 1e-9) keep.push_back(r);
      if (keep.empty())
        throw std::invalid_argument("--only: rho=" + value + " not in config");
      config.rho_levels = keep;
    } else if (key == "scenario") {
      const AnchorScenario want = anchor_scenario_from_string(value);
      std::vector<AnchorScenario> keep;
      for (AnchorScenario s : config.anchor_scenarios)
        if (s == want) keep.push_back(s);
      if (keep.empty())
        throw std::invalid_argument("--only: scenario=" + value + " not in config");
      config.anchor_scenarios = keep;
    } else if (key == "model") {
      const ModelFamily want = model_family_from_string(value);
      std::vector<ModelFamily> keep;
      for (ModelFamily m : config.analysis_models)
        if (m == want) keep.push_back(m);
      if (keep.empty())
        throw std::invalid_argument("--only: model=" + value + " not in config");
      config.analysis_models = keep;
    } else {
      throw std::invalid_argument("--only: unknown key '" + key + "'");
    }
  }
}

std::string condition_tag(const ReplicationOutcome& o) {
  return "rho" + format_double(o.rho) + "_" + to_string(o.scenario) + "_" +
         to_string(o.model);
}

void write_plots(const StudyReport& report, const fs::path& dir,
                 std::vector<std::string>& written) {
  fs::create_directories(dir);
  for (const ReplicationOutcome& o : report.outcomes) {
    if (o.replication != 0) continue;
    const std::string tag = condition_tag(o);
    const int dim = static_cast<int>(item_slopes(o.anchors_base.front()).size());

    SvgSeries base, linked;
    base.label = "base anchors";
    base.color = "#1f77b4";
    linked.label = "new anchors (transformed)";
    linked.color = "#d62728";
    const int npts = 161;
    for (int i = 0; i < npts; ++i) {
      const double t = -4.0 + 8.0 * i / (npts - 1);
      const ThetaVector theta(dim, t);
      base.x.push_back(t);
      base.y.push_back(trf(o.anchors_base, theta));
      linked.x.push_back(t);
      linked.y.push_back(trf(o.anchors_new_transformed, theta));
    }
    SvgChartOptions trf_opts;
    trf_opts.title = "TRF overlay " + tag;
    trf_opts.x_label = dim == 1 ? "theta" : "theta (diagonal slice)";
    trf_opts.y_label = "expected score";
    const std::string trf_name = "trf_" + tag + ".svg";
    write_text_file(dir / trf_name, render_line_chart({base, linked}, trf_opts));
    written.push_back(trf_name);

    if (!o.loss_trace.empty()) {
      SvgSeries trace;
      trace.label = "loss";
      trace.color = "#2ca02c";
      for (std::size_t i = 0; i < o.loss_trace.size(); ++i) {
        trace.x.push_back(static_cast<double>(i));
        trace.y.push_back(o.loss_trace[i]);
      }
      SvgChartOptions loss_opts;
      loss_opts.title = "Linking loss " + tag;
      loss_opts.x_label = "iteration";
      loss_opts.y_label = "loss";
      loss_opts.log_y = true;
      const std::string loss_name = "loss_" + tag + ".svg";
      write_text_file(dir / loss_name, render_line_chart({trace}, loss_opts));
      written.push_back(loss_name);
    }
  }
}

void emit_study_outputs(const StudyReport& report, const fs::path& out, bool plots,
                        bool verbose) {
  ensure_writable(out);
  std::vector<std::string> written = write_report_tables(report, out);
  write_text_file(out / "study_raw.json", study_report_to_json(report));
  written.push_back("study_raw.json");
  std::string manifest = study_manifest(report);
  manifest += "raw_digest " +
              std::to_string(fnv1a64(study_report_to_json(report))) + "\n";
  write_text_file(out / "manifest.txt", manifest);
  written.push_back("manifest.txt");
  if (plots) {
    std::vector<std::string> plot_files;
    write_plots(report, out / "plots", plot_files);
    for (const std::string& p : plot_files) written.push_back("plots/" + p);
  }
  std::cout << "conditions: "
            << report.config.rho_levels.size() * report.config.anchor_scenarios.size() *
                   report.config.analysis_models.size()
            << ", outcomes: " << report.outcomes.size() << "\n";
  if (verbose)
    for (const std::string& name : written) std::cout << "wrote " << (out / name).string() << "\n";
  else
    std::cout << "wrote " << written.size() << " files to " << out.string() << "\n";
  int warning_count = 0;
  for (const ReplicationOutcome& o : report.outcomes)
    warning_count += static_cast<int>(o.warnings.size());
  if (warning_count > 0) std::cout << "warnings recorded: " << warning_count << "\n";
}

int run_bank(std::uint64_t seed, bool seed_given, const fs::path& out) {
  ensure_writable(out);
  if (!seed_given) seed = entropy_seed();
  const auto [base, fresh] = default_item_bank(seed);
  write_bank_csv(out / "bank_base.csv", base);
  write_bank_csv(out / "bank_new.csv", fresh);
  std::string manifest = "format_version 1\ncommand bank\nseed " + std::to_string(seed) +
                         "\n" + digest_line(out / "bank_base.csv") + "\n" +
                         digest_line(out / "bank_new.csv") + "\n";
  write_text_file(out / "manifest.txt", manifest);
  std::cout << "seed " << seed << "\nwrote " << (out / "bank_base.csv").string() << "\n"
            << "wrote " << (out / "bank_new.csv").string() << "\n";
  return 0;
}

int run_generate(const fs::path& bank, int n, double rho, std::uint64_t seed,
                 bool seed_given, const fs::path& out) {
  ensure_writable(out);
  if (!seed_given) seed = entropy_seed();
  const TestForm form = read_bank_csv(bank);
  const GeneratedDataset ds = make_dataset(form, n, rho, seed);
  write_responses_csv(out / "responses.csv", ds.responses);
  std::string thetas = "theta1,theta2\n";
  for (int i = 0; i < ds.thetas.rows; ++i)
    thetas += format_double(ds.thetas(i, 0)) + "," + format_double(ds.thetas(i, 1)) + "\n";
  write_text_file(out / "thetas.csv", thetas);
  std::string manifest = "format_version 1\ncommand generate\nseed " +
                         std::to_string(seed) + "\nrho " + format_double(rho) + "\nn " +
                         std::to_string(n) + "\nbank_digest " +
                         std::to_string(fnv1a64(read_text_file(bank))) + "\n" +
                         digest_line(out / "responses.csv") + "\n";
  write_text_file(out / "manifest.txt", manifest);
  std::cout << "seed " << seed << "\nwrote " << (out / "responses.csv").string() << "\n";
  return 0;
}

int run_calibrate(const fs::path& bank, const fs::path& responses_path,
                  const std::string& model_s, const std::string& mode_s, int chain_length,
                  int burn_in, double noise_sigma, double rho, std::uint64_t seed,
                  bool seed_given, const fs::path& out, bool verbose) {
  ensure_writable(out);
  if (!seed_given) seed = entropy_seed();
  const TestForm truth = read_bank_csv(bank);
  CalibrationSpec spec;
  spec.mode = calibration_mode_from_string(mode_s);
  spec.model_family = model_family_from_string(model_s);
  spec.chain_length = chain_length;
  spec.burn_in = burn_in;
  spec.noise_sigma = noise_sigma;
  spec.seed = seed;

  CalibrationResult result;
  if (spec.mode == CalibrationMode::OracleNoise) {
    Population pop = Population::standard(2);
    pop.cov(0, 1) = pop.cov(1, 0) = rho;
    result = calibrate_oracle(truth.items, pop, spec);
  } else {
    const ResponseMatrix data = read_responses_csv(responses_path);
    TestForm skeleton;
    skeleton.name = truth.name;
    for (const Item& it : truth.items)
      skeleton.items.push_back(map_item_to_family(it, spec.model_family));
    result = calibrate_mcmc(data, skeleton, spec);
  }

  TestForm calibrated;
  calibrated.name = truth.name;
  calibrated.items = result.items;
  write_text_file(out / "calibration.csv",
                  calibration_to_csv(calibrated, result.population));
  std::string manifest = "format_version 1\ncommand calibrate\nseed " +
                         std::to_string(result.seed_used) + "\nmode " + mode_s +
                         "\nmodel " + to_string(spec.model_family) + "\n" +
                         digest_line(out / "calibration.csv") + "\n";
  for (const std::string& w : result.warnings) manifest += "warning " + w + "\n";
  write_text_file(out / "manifest.txt", manifest);
  std::cout << "seed " << result.seed_used << "\nwrote "
            << (out / "calibration.csv").string() << "\n";
  if (verbose)
    for (const auto& [block, rate] : result.acceptance_rates)
      std::cout << "acceptance " << block << " " << format_double(rate) << "\n";
  for (const std::string& w : result.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int run_link(const fs::path& base_path, const fs::path& new_path,
             const std::string& scenario_s, const fs::path& out) {
  ensure_writable(out);
  const TestForm base = read_bank_csv(base_path);
  const TestForm fresh = read_bank_csv(new_path);
  const AnchorScenario scenario = anchor_scenario_from_string(scenario_s);
  const std::vector<std::string> ids = build_anchor_set(base, scenario);
  const std::vector<Item> anchors_base = pick_items(base, ids);
  const std::vector<Item> anchors_new = pick_items(fresh, ids);
  const int dim = static_cast<int>(item_slopes(anchors_base.front()).size());
  const QuadratureGrid grid = default_linking_grid(dim);
  const LinkingResult result = estimate_transform(anchors_base, anchors_new, grid);
  const std::string record = serialize_linking_result(result);
  std::cout << record;
  write_text_file(out / "linking_result.txt", record);
  std::string manifest = "format_version 1\ncommand link\nscenario " +
                         to_string(scenario) + "\nanchors " + std::to_string(ids.size()) +
                         "\nbase_digest " +
                         std::to_string(fnv1a64(read_text_file(base_path))) +
                         "\nnew_digest " +
                         std::to_string(fnv1a64(read_text_file(new_path))) + "\n" +
                         digest_line(out / "linking_result.txt") + "\n";
  write_text_file(out / "manifest.txt", manifest);
  return 0;
}

int run_study_cmd(const fs::path& config_path, const fs::path& out, int jobs,
                  std::uint64_t seed, bool seed_given, const std::string& only,
                  bool plots, bool verbose) {
  StudyConfig config = load_study_config(config_path);
  if (seed_given) config.base_seed = seed;
  if (!only.empty()) apply_only_filter(config, only);
  ensure_writable(out);
  const StudyReport report = run_study(config, jobs);
  emit_study_outputs(report, out, plots, verbose);
  return 0;
}

int run_report_cmd(const fs::path& raw_path, const fs::path& out, bool plots,
                   bool verbose) {
  const StudyReport report = study_report_from_json(read_text_file(raw_path));
  emit_study_outputs(report, out, plots, verbose);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-format IRT calibration and Stocking-Lord linking toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "chatty output");

  std::uint64_t seed = 0;
  fs::path out = ".";

  CLI::App* bank = app.add_subcommand("bank", "write a synthetic two-form item bank");
  CLI::Option* bank_seed = bank->add_option("--seed", seed, "bank seed");
  bank->add_option("--out", out, "output directory");

  CLI::App* generate = app.add_subcommand("generate", "simulate responses from a bank");
  fs::path gen_bank;
  int gen_n = 1000;
  double gen_rho = 1.0;
  generate->add_option("--bank", gen_bank, "bank CSV")->required();
  generate->add_option("--n", gen_n, "number of examinees");
  generate->add_option("--rho", gen_rho, "format-factor correlation");
  CLI::Option* gen_seed = generate->add_option("--seed", seed, "data seed");
  generate->add_option("--out", out, "output directory");

  CLI::App* calibrate = app.add_subcommand("calibrate", "estimate item parameters");
  fs::path cal_bank, cal_responses;
  std::string cal_model = "uirt", cal_mode = "mcmc";
  int cal_chain = 2000, cal_burn = 1000;
  double cal_sigma = 0.05, cal_rho = 1.0;
  calibrate->add_option("--bank", cal_bank, "bank CSV (skeleton / truth)")->required();
  calibrate->add_option("--responses", cal_responses, "responses CSV (mcmc mode)");
  calibrate->add_option("--model", cal_model, "uirt | simple-structure | bifactor");
  calibrate->add_option("--mode", cal_mode, "mcmc | oracle");
  calibrate->add_option("--chain-length", cal_chain, "MCMC chain length");
  calibrate->add_option("--burn-in", cal_burn, "MCMC burn-in");
  calibrate->add_option("--noise-sigma", cal_sigma, "oracle noise sd");
  calibrate->add_option("--rho", cal_rho, "generating correlation (oracle mode)");
  CLI::Option* cal_seed = calibrate->add_option("--seed", seed, "calibration seed");
  calibrate->add_option("--out", out, "output directory");

  CLI::App* link = app.add_subcommand("link", "Stocking-Lord linking of two banks");
  fs::path link_base, link_new;
  std::string link_scenario = "mc-cr";
  link->add_option("--base", link_base, "base-form bank CSV")->required();
  link->add_option("--new", link_new, "new-form bank CSV")->required();
  link->add_option("--scenario", link_scenario, "mc-only | mc-cr");
  link->add_option("--out", out, "output directory");

  CLI::App* study = app.add_subcommand("study", "run a replicated linking study");
  fs::path study_config;
  int jobs = 1;
  std::string only;
  bool plots = false;
  study->add_option("--config", study_config, "study config file")->required();
  study->add_option("--out", out, "output directory");
  study->add_option("--jobs", jobs, "worker threads");
  CLI::Option* study_seed = study->add_option("--seed", seed, "override base seed");
  study->add_option("--only", only, "condition filter, e.g. rho=0.5,scenario=MCOnly");
  study->add_flag("--plots", plots, "emit SVG plots");

  CLI::App* report_cmd = app.add_subcommand("report", "re-emit tables from a raw report");
  fs::path raw_path;
  report_cmd->add_option("--raw", raw_path, "study_raw.json from a previous run")
      ->required();
  report_cmd->add_option("--out", out, "output directory");
  report_cmd->add_flag("--plots", plots, "emit SVG plots");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bank->parsed()) return run_bank(seed, !bank_seed->empty(), out);
    if (generate->parsed())
      return run_generate(gen_bank, gen_n, gen_rho, seed, !gen_seed->empty(), out);
    if (calibrate->parsed())
      return run_calibrate(cal_bank, cal_responses, cal_model, cal_mode, cal_chain,
                           cal_burn, cal_sigma, cal_rho, seed, !cal_seed->empty(), out,
                           verbose);
    if (link->parsed()) return run_link(link_base, link_new, link_scenario, out);
    if (study->parsed())
      return run_study_cmd(study_config, out, jobs, seed, !study_seed->empty(), only,
                           plots, verbose);
    if (report_cmd->parsed()) return run_report_cmd(raw_path, out, plots, verbose);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
