/*
 * Copyright 2026 the gpcmtest authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gpcm/csv.hpp"
#include "gpcm/report.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

int default_threads() {
  if (const char* env = std::getenv("GPCM_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

void write_json(const gpcm::Json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gpcm::ValidationError("cannot write output file " + path);
  out << text;
}

struct CommonOpts {
  std::string input;
  int k = 1;
  std::uint64_t seed = 1;
  int starts = 20;
  double epsilon = 1e-6;
  int max_iter = 1000;
  double min_weight = -1.0;
  bool hard_init = false;
  int threads = default_threads();
  std::string output;

  gpcm::FitConfig config() const {
    gpcm::FitConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iter = max_iter;
    cfg.min_weight = min_weight;
    cfg.starts = starts;
    cfg.hard_init = hard_init;
    cfg.seed = seed;
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_input) {
  if (with_input)
    cmd->add_option("-i,--input", o.input, "CSV file of observations")->required();
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--starts", o.starts, "random EM initializations per model");
  cmd->add_option("--epsilon", o.epsilon, "EM stopping threshold");
  cmd->add_option("--max-iter", o.max_iter, "EM iteration cap");
  cmd->add_option("--min-weight", o.min_weight, "component soft-count floor (default p+1)");
  cmd->add_flag("--hard-init", o.hard_init, "use one-hot random starts");
  cmd->add_option("--threads", o.threads, "worker threads for replicate-level parallelism");
  cmd->add_option("-o,--output", o.output, "write the JSON report here instead of stdout");
}

gpcm::TestMethod parse_method(const std::string& name) {
  if (name == "chi2") return gpcm::TestMethod::Chi2;
  if (name == "bootstrap") return gpcm::TestMethod::Bootstrap;
  throw gpcm::ValidationError("unknown method '" + name + "' (expected chi2 or bootstrap)");
}

int run(int argc, char** argv) {
  CLI::App app{"eigen-decomposed Gaussian mixture fitting, testing and selection"};
  app.require_subcommand(1);

  CommonOpts fit_o;
  std::string fit_model;
  CLI::App* cmd_fit = app.add_subcommand("fit", "fit one model by EM");
  add_common(cmd_fit, fit_o, true);
  cmd_fit->add_option("-k,--k", fit_o.k, "number of components")->required();
  cmd_fit->add_option("-m,--model", fit_model, "model code (EEE..VVV)")->required();

  CommonOpts ct_o;
  std::string ct_method = "chi2";
  double ct_alpha = 0.05;
  int ct_R = 999;
  CLI::App* cmd_ct = app.add_subcommand("closed-test", "closed LR testing over the family");
  add_common(cmd_ct, ct_o, true);
  cmd_ct->add_option("-k,--k", ct_o.k, "number of components")->required();
  cmd_ct->add_option("--method", ct_method, "chi2 or bootstrap");
  cmd_ct->add_option("--alpha", ct_alpha, "test level");
  cmd_ct->add_option("-R,--replicates", ct_R, "bootstrap replicates");

  CommonOpts ic_o;
  CLI::App* cmd_ic = app.add_subcommand("ic", "information criteria for all models");
  add_common(cmd_ic, ic_o, true);
  cmd_ic->add_option("-k,--k", ic_o.k, "number of components")->required();

  CommonOpts sim_o;
  std::string sim_model = "EEE";
  std::string sim_method = "chi2";
  int sim_n = 100;
  double sim_overlap = 0.05;
  int sim_reps = 100;
  int sim_R = 99;
  std::string sim_pvalues_out;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "p-value null-distribution experiment");
  add_common(cmd_sim, sim_o, false);
  cmd_sim->add_option("-m,--model", sim_model, "generating null model");
  cmd_sim->add_option("-n,--n", sim_n, "observations per dataset");
  cmd_sim->add_option("--overlap", sim_overlap, "Bhattacharyya overlap target in (0,1)");
  cmd_sim->add_option("--reps", sim_reps, "number of simulated datasets");
  cmd_sim->add_option("--method", sim_method, "chi2 or bootstrap");
  cmd_sim->add_option("-R,--replicates", sim_R, "bootstrap replicates per dataset");
  cmd_sim->add_option("--pvalues-out", sim_pvalues_out, "also write sorted p-values as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (cmd_fit->parsed()) {
    const gpcm::Dataset ds = gpcm::load_csv(fit_o.input);
    const gpcm::DataMatrix data = ds.data();
    if (data.n() < fit_o.k)
      throw gpcm::ValidationError("need at least k rows: n=" + std::to_string(data.n()) +
                                  ", k=" + std::to_string(fit_o.k));
    const gpcm::ModelId model = gpcm::ModelId::parse(fit_model);
    const gpcm::FitResult fit =
        gpcm::fit_multistart(data, model, fit_o.k, fit_o.config());
    write_json(gpcm::fit_report(fit, ds.labels), fit_o.output);
    return 0;
  }

  if (cmd_ct->parsed()) {
    const gpcm::Dataset ds = gpcm::load_csv(ct_o.input);
    const gpcm::DataMatrix data = ds.data();
    if (data.n() < ct_o.k)
      throw gpcm::ValidationError("need at least k rows: n=" + std::to_string(data.n()) +
                                  ", k=" + std::to_string(ct_o.k));
    const gpcm::TestMethod method = parse_method(ct_method);
    const gpcm::ClosedTestReport report = gpcm::closed_test(
        data, ct_o.k, method, ct_alpha, ct_R, ct_o.config(), ct_o.seed, ct_o.threads);
    (ct_o.output.empty() ? std::cerr : std::cout) << gpcm::closed_test_table(report);
    write_json(gpcm::closed_test_report(report), ct_o.output);
    return 0;
  }

  if (cmd_ic->parsed()) {
    const gpcm::Dataset ds = gpcm::load_csv(ic_o.input);
    const gpcm::DataMatrix data = ds.data();
    if (data.n() < ic_o.k)
      throw gpcm::ValidationError("need at least k rows: n=" + std::to_string(data.n()) +
                                  ", k=" + std::to_string(ic_o.k));
    const std::vector<gpcm::FitResult> fits =
        gpcm::fit_hierarchy(data, ic_o.k, ic_o.config());
    write_json(gpcm::ic_report(gpcm::make_ic_table(fits), data.n()), ic_o.output);
    return 0;
  }

  const gpcm::ModelId model = gpcm::ModelId::parse(sim_model);
  const gpcm::TestMethod method = parse_method(sim_method);
  const gpcm::SdfResult result =
      gpcm::pvalue_sdf_experiment(model, sim_n, sim_overlap, sim_reps, method, sim_R,
                                  sim_o.config(), sim_o.seed, sim_o.threads);
  if (!sim_pvalues_out.empty()) {
    std::ofstream out(sim_pvalues_out, std::ios::binary);
    if (!out) throw gpcm::ValidationError("cannot write " + sim_pvalues_out);
    out << "p\n";
    for (const double p : result.pvalues) out << gpcm::Json(p).dump() << "\n";
  }
  write_json(gpcm::sdf_report(result, model, sim_n, sim_overlap, sim_reps, method, sim_R,
                              sim_o.seed),
             sim_o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gpcm::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const gpcm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
