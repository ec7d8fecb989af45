// Command-line front end: `ddr estimate` integrates a nonprobability CSV with
// a reference probability CSV and prints all six mean estimates; `ddr
// simulate` runs the Monte Carlo replication study and writes a report.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddr/csv.hpp"
#include "ddr/harness.hpp"

namespace {

ddr::Architecture make_arch(ddr::Index input_dim, const std::vector<ddr::Index>& hidden) {
  return ddr::Architecture::dense(input_dim, hidden);
}

int run_estimate(const std::string& nonprob_path, const std::string& prob_path,
                 const std::string& outcome_col, const std::string& weight_col,
                 const std::vector<std::string>& features, const std::vector<ddr::Index>& hidden,
                 std::uint64_t seed, double eps_n, bool rescale, const ddr::TrainConfig& base_cfg) {
  auto a_raw = ddr::load_nonprob_csv(nonprob_path, outcome_col);
  auto b_raw = ddr::load_prob_csv(prob_path, weight_col);
  auto [a, b] = ddr::align_covariates(a_raw, b_raw);
  if (rescale) std::tie(a, b) = ddr::rescale_minmax(a, b);

  std::optional<std::vector<std::string>> subset;
  if (!features.empty()) subset = features;
  const ddr::OutcomeModel outcome = ddr::ols_fit(a, subset);

  const ddr::LogisticTheta theta = ddr::fit_logistic_pl(a, b);
  const ddr::ScoreSet param_scores = ddr::make_scores(theta, a, eps_n);

  ddr::TrainConfig cfg = base_cfg;
  cfg.seed = seed;
  const ddr::ScoreSet dnn_scores =
      ddr::fit_dnn_scores(a, b, make_arch(a.x.cols(), hidden), cfg, eps_n);

  ddr::EstimateReport report;
  report.estimates["naive"] = ddr::estimate_naive(a);
  report.estimates["reg"] = ddr::estimate_reg(b, outcome);
  report.estimates["ipw"] = ddr::estimate_ipw(a, param_scores);
  report.estimates["dr"] = ddr::estimate_dr(a, b, param_scores, outcome);
  report.estimates["dipw"] = ddr::estimate_dipw(a, dnn_scores);
  report.estimates["ddr"] = ddr::estimate_ddr(a, b, dnn_scores, outcome);
  for (const auto& [name, value] : report.estimates)
    if (!std::isfinite(value))
      throw ddr::TrainingError("estimator '" + name + "' produced a non-finite value");

  report.diagnostics["n_A"] = static_cast<double>(a.size());
  report.diagnostics["n_B"] = static_cast<double>(b.size());
  report.diagnostics["N_hat_B"] = b.d.sum();
  report.diagnostics["N_hat_A_dnn"] = dnn_scores.pi_hat.cwiseInverse().sum();
  report.diagnostics["N_hat_A_param"] = param_scores.pi_hat.cwiseInverse().sum();
  for (const auto& [k, v] : dnn_scores.diagnostics) report.diagnostics["dnn_" + k] = v;
  for (const auto& [k, v] : param_scores.diagnostics) report.diagnostics["param_" + k] = v;

  std::cout << ddr::format_estimate_report(report);
  return 0;
}

int run_simulate(ddr::HarnessConfig cfg, const std::string& out_path, const std::string& format,
                 bool with_archive) {
  const ddr::SimCell cell = ddr::run_simulation(cfg);
  ddr::MetricsTable table;
  table.cells.push_back(cell);
  table.config["N"] = std::to_string(cfg.sim.N);
  table.config["n_A"] = std::to_string(cfg.sim.n_A);
  table.config["n_B"] = std::to_string(cfg.sim.n_B);
  table.config["B"] = std::to_string(cfg.sim.B);
  table.config["rho"] = ddr::format_double(cfg.sim.rho);
  table.config["scenario"] = ddr::to_string(cfg.sim.scenario);
  table.config["seed"] = std::to_string(cfg.sim.seed);
  table.config["eps_n"] = ddr::format_double(cfg.eps_n);
  table.config["gamma"] = ddr::format_double(cfg.train.adam.gamma);
  table.config["max_epochs"] = std::to_string(cfg.train.max_epochs);
  std::string widths;
  for (auto w : cfg.arch.widths) widths += (widths.empty() ? "" : "x") + std::to_string(w);
  table.config["arch"] = widths;
  table.config["redraw_population"] = cfg.sim.redraw_population ? "true" : "false";

  ddr::emit_report(table, ddr::parse_report_format(format), out_path, with_archive);
  std::cout << ddr::format_report_text(table);
  std::cout << "report written to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep doubly robust estimation for integrated probability and "
               "nonprobability survey samples"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the population mean from two CSV samples");
  std::string nonprob_path, prob_path, outcome_col, weight_col;
  std::vector<std::string> features;
  std::vector<ddr::Index> hidden = {64, 64};
  std::uint64_t seed = 0;
  double eps_n = 1e-3;
  bool rescale = false;
  est->add_option("--nonprob", nonprob_path, "Nonprobability sample CSV")->required();
  est->add_option("--prob", prob_path, "Probability sample CSV")->required();
  est->add_option("--outcome", outcome_col, "Outcome column in the nonprobability CSV")->required();
  est->add_option("--weight", weight_col, "Design-weight column in the probability CSV")->required();
  est->add_option("--features", features, "Outcome-model covariate subset")->delimiter(',');
  est->add_option("--arch", hidden, "Hidden layer widths")->delimiter(',');
  est->add_option("--seed", seed, "Random seed");
  est->add_option("--eps", eps_n, "Score truncation level");
  est->add_flag("--rescale", rescale, "Min-max rescale covariates to [0,1]");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo replication study");
  ddr::HarnessConfig hc;
  std::string scenario = "TF";
  std::string out_path = "report.txt";
  std::string format = "text";
  std::vector<ddr::Index> sim_hidden = {64, 64};
  bool with_archive = false;
  bool fixed_population = false;
  sim->add_option("--rho", hc.sim.rho, "Target correlation in (0,1)");
  sim->add_option("--scenario", scenario, "TF or FF");
  sim->add_option("--B", hc.sim.B, "Replication count");
  sim->add_option("--nA", hc.sim.n_A, "Target nonprobability sample size");
  sim->add_option("--nB", hc.sim.n_B, "Probability sample size");
  sim->add_option("--N", hc.sim.N, "Population size");
  sim->add_option("--seed", hc.sim.seed, "Master seed");
  sim->add_option("--out", out_path, "Report output path");
  sim->add_option("--format", format, "Report format: text, csv, or json");
  sim->add_option("--workers", hc.workers, "Worker threads");
  sim->add_option("--eps", hc.eps_n, "Score truncation level");
  sim->add_option("--arch", sim_hidden, "Hidden layer widths")->delimiter(',');
  sim->add_option("--gamma", hc.train.adam.gamma, "ADAM learning rate");
  sim->add_option("--max-epochs", hc.train.max_epochs, "Epoch budget");
  sim->add_option("--patience", hc.train.patience, "Early-stopping patience");
  sim->add_option("--val-fraction", hc.train.val_fraction, "Validation holdout fraction");
  sim->add_option("--stop-threshold", hc.train.stop_threshold, "Parameter-change stop threshold");
  double clip_d = 0.0;
  auto* clip_opt = sim->add_option("--clip-d", clip_d, "Clamp |g| to this bound");
  sim->add_flag("--archive", with_archive, "Also write per-replication estimates");
  sim->add_flag("--fixed-population", fixed_population,
                "Reuse one population across replications instead of redrawing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (est->parsed()) {
      ddr::TrainConfig base_cfg;
      return run_estimate(nonprob_path, prob_path, outcome_col, weight_col, features, hidden, seed,
                          eps_n, rescale, base_cfg);
    }
    hc.sim.scenario = ddr::parse_scenario(scenario);
    hc.sim.redraw_population = !fixed_population;
    hc.arch = ddr::Architecture::dense(4, sim_hidden);
    if (clip_opt->count() > 0) hc.train.clip_d = clip_d;
    return run_simulate(hc, out_path, format, with_archive);
  } catch (const ddr::SchemaError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddr::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddr::DomainError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddr::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ddr::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
