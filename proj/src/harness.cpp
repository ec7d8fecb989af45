#include "ddr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ddr/csv.hpp"

namespace ddr {

double percent_rb(const Vector& estimates, const Vector& mu_y_per_rep) {
  if (estimates.size() != mu_y_per_rep.size() || estimates.size() < 1)
    throw DomainError("percent_rb: need B >= 1 matching estimates and true means");
  if ((mu_y_per_rep.array() == 0.0).any()) throw DomainError("percent_rb: mu_y must be nonzero");
  return 100.0 * ((estimates - mu_y_per_rep).array() / mu_y_per_rep.array()).mean();
}

double mse(const Vector& estimates, const Vector& mu_y_per_rep) {
  if (estimates.size() != mu_y_per_rep.size() || estimates.size() < 1)
    throw DomainError("mse: need B >= 1 matching estimates and true means");
  return (estimates - mu_y_per_rep).array().square().mean();
}

namespace {

RepRecord run_replication(const HarnessConfig& cfg, int b, const FinitePopulation* shared_pop) {
  RepRecord rec;
  rec.rep = b;
  const std::uint64_t rep_seed = derive_seed(cfg.sim.seed, static_cast<std::uint64_t>(b));
  try {
    FinitePopulation local_pop;
    const FinitePopulation* pop = shared_pop;
    if (pop == nullptr) {
      local_pop = gen_population(cfg.sim, derive_seed(rep_seed, 0));
      pop = &local_pop;
    }
    rec.mu_y = pop->mu_y;

    DrawA draw_a = draw_sample_A(*pop, derive_seed(rep_seed, 1));
    const NonprobSample& a = draw_a.sample;
    const ProbSample b_sample = draw_sample_B(*pop, cfg.sim.n_B, derive_seed(rep_seed, 2));

    const ModelRecipe recipe = misspecify(cfg.sim.scenario);
    const OutcomeModel outcome = ols_fit(a, recipe.outcome_features);

    const LogisticTheta theta = fit_logistic_pl(a, b_sample);
    const ScoreSet param_scores = make_scores(theta, a, cfg.eps_n);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = derive_seed(rep_seed, 3);
    const ScoreSet dnn_scores = fit_dnn_scores(a, b_sample, cfg.arch, train_cfg, cfg.eps_n);

    rec.estimates[0] = estimate_naive(a);
    rec.estimates[1] = estimate_reg(b_sample, outcome);
    rec.estimates[2] = estimate_ipw(a, param_scores);
    rec.estimates[3] = estimate_dr(a, b_sample, param_scores, outcome);
    rec.estimates[4] = estimate_dipw(a, dnn_scores);
    rec.estimates[5] = estimate_ddr(a, b_sample, dnn_scores, outcome);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

SimCell run_simulation(const HarnessConfig& cfg) {
  cfg.sim.validate();
  const int B = cfg.sim.B;

  FinitePopulation shared_pop;
  const FinitePopulation* shared = nullptr;
  if (!cfg.sim.redraw_population) {
    shared_pop = gen_population(cfg.sim, derive_seed(cfg.sim.seed, 0xF1DE));
    shared = &shared_pop;
  }

  std::vector<RepRecord> records(static_cast<std::size_t>(B));
  const int workers = std::max(1, std::min(cfg.workers, B));
  if (workers == 1) {
    for (int b = 0; b < B; ++b) records[static_cast<std::size_t>(b)] = run_replication(cfg, b, shared);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int b = w; b < B; b += workers)
          records[static_cast<std::size_t>(b)] = run_replication(cfg, b, shared);
      });
    }
    for (auto& t : pool) t.join();
  }

  SimCell cell;
  cell.scenario = cfg.sim.scenario;
  cell.rho = cfg.sim.rho;
  cell.B = B;
  cell.archive = std::move(records);
  for (const auto& rec : cell.archive)
    if (rec.failed) ++cell.failed;
  if (cell.failed * 20 > B)
    throw ConvergenceError("more than 5% of replications failed (" + std::to_string(cell.failed) +
                           " of " + std::to_string(B) + ")");

  const Index ok = B - cell.failed;
  Vector mu(ok);
  Index row = 0;
  for (const auto& rec : cell.archive)
    if (!rec.failed) mu(row++) = rec.mu_y;
  for (std::size_t e = 0; e < kEstimatorNames.size(); ++e) {
    Vector est(ok);
    row = 0;
    for (const auto& rec : cell.archive)
      if (!rec.failed) est(row++) = rec.estimates[e];
    cell.metrics[kEstimatorNames[e]] = {percent_rb(est, mu), mse(est, mu)};
  }
  return cell;
}

ReportFormat parse_report_format(const std::string& token) {
  if (token == "text") return ReportFormat::text;
  if (token == "csv") return ReportFormat::csv;
  if (token == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + token + "'");
}

namespace {

std::vector<double> distinct_rhos(const MetricsTable& table) {
  std::vector<double> rhos;
  for (const auto& cell : table.cells)
    if (std::find(rhos.begin(), rhos.end(), cell.rho) == rhos.end()) rhos.push_back(cell.rho);
  std::sort(rhos.begin(), rhos.end());
  return rhos;
}

const SimCell* find_cell(const MetricsTable& table, Scenario s, double rho) {
  for (const auto& cell : table.cells)
    if (cell.scenario == s && cell.rho == rho) return &cell;
  return nullptr;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string format_report_text(const MetricsTable& table) {
  std::ostringstream out;
  out << "Simulated %RB and MSE of the estimators";
  if (auto it = table.config.find("n_A"); it != table.config.end())
    out << " (n_A = " << it->second << ", n_B = " << table.config.at("n_B") << ")";
  out << "\n\n";
  const auto rhos = distinct_rhos(table);
  out << "Models  Estimator";
  for (double rho : rhos) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "   rho=%-4.2f %%RB      MSE", rho);
    out << buf;
  }
  out << '\n';
  for (Scenario s : {Scenario::TF, Scenario::FF}) {
    bool any = false;
    for (const auto& cell : table.cells) any = any || cell.scenario == s;
    if (!any) continue;
    for (const auto* name : kEstimatorNames) {
      char row[64];
      std::snprintf(row, sizeof(row), "%-8s%-9s", to_string(s).c_str(), name);
      out << row;
      for (double rho : rhos) {
        const SimCell* cell = find_cell(table, s, rho);
        if (cell == nullptr || !cell->metrics.count(name)) {
          out << std::string(24, ' ');
          continue;
        }
        const auto& m = cell->metrics.at(name);
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %12s %8s", fixed2(m.percent_rb).c_str(),
                      fixed2(m.mse).c_str());
        out << buf;
      }
      out << '\n';
    }
  }
  bool any_failed = false;
  for (const auto& cell : table.cells) any_failed = any_failed || cell.failed > 0;
  if (any_failed) {
    out << "\nFailed replications:";
    for (const auto& cell : table.cells)
      out << " " << to_string(cell.scenario) << "/" << fixed2(cell.rho) << ": " << cell.failed
          << " of " << cell.B << ";";
    out << '\n';
  }
  return out.str();
}

std::string format_report_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "scenario,rho,estimator,percent_rb,mse,B,failed\n";
  for (const auto& cell : table.cells)
    for (const auto* name : kEstimatorNames) {
      if (!cell.metrics.count(name)) continue;
      const auto& m = cell.metrics.at(name);
      out << to_string(cell.scenario) << ',' << format_double(cell.rho) << ',' << name << ','
          << format_double(m.percent_rb) << ',' << format_double(m.mse) << ',' << cell.B << ','
          << cell.failed << '\n';
    }
  return out.str();
}

std::string format_report_json(const MetricsTable& table) {
  nlohmann::json doc;
  doc["config"] = table.config;
  auto& cells = doc["cells"] = nlohmann::json::array();
  for (const auto& cell : table.cells) {
    nlohmann::json c;
    c["scenario"] = to_string(cell.scenario);
    c["rho"] = cell.rho;
    c["B"] = cell.B;
    c["failed"] = cell.failed;
    for (const auto* name : kEstimatorNames)
      if (cell.metrics.count(name)) {
        const auto& m = cell.metrics.at(name);
        c["metrics"][name] = {{"percent_rb", m.percent_rb}, {"mse", m.mse}};
      }
    cells.push_back(std::move(c));
  }
  return doc.dump(2) + "\n";
}

std::string format_archive_csv(const MetricsTable& table) {
  std::ostringstream out;
  out << "scenario,rho,rep,failed,mu_y";
  for (const auto* name : kEstimatorNames) out << ',' << name;
  out << '\n';
  for (const auto& cell : table.cells)
    for (const auto& rec : cell.archive) {
      out << to_string(cell.scenario) << ',' << format_double(cell.rho) << ',' << rec.rep << ','
          << (rec.failed ? 1 : 0) << ',' << format_double(rec.mu_y);
      for (double est : rec.estimates) out << ',' << format_double(est);
      out << '\n';
    }
  return out.str();
}

void emit_report(const MetricsTable& table, ReportFormat format, const std::string& path,
                 bool with_archive) {
  std::string body;
  switch (format) {
    case ReportFormat::text: body = format_report_text(table); break;
    case ReportFormat::csv: body = format_report_csv(table); break;
    case ReportFormat::json: body = format_report_json(table); break;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report to '" + path + "'");
  out << body;
  if (!out) throw IoError("write failed for '" + path + "'");
  if (with_archive) {
    const std::string archive_path = path + ".archive.csv";
    std::ofstream arch(archive_path);
    if (!arch) throw IoError("cannot write archive to '" + archive_path + "'");
    arch << format_archive_csv(table);
    if (!arch) throw IoError("write failed for '" + archive_path + "'");
  }
}

MetricsTable parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "scenario,rho,estimator,percent_rb,mse,B,failed")
    throw ParseError("unexpected report header in '" + path + "'");
  MetricsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string scenario, rho_s, name, rb_s, mse_s, b_s, failed_s;
    std::getline(ss, scenario, ',');
    std::getline(ss, rho_s, ',');
    std::getline(ss, name, ',');
    std::getline(ss, rb_s, ',');
    std::getline(ss, mse_s, ',');
    std::getline(ss, b_s, ',');
    std::getline(ss, failed_s, ',');
    const Scenario s = parse_scenario(scenario);
    const double rho = std::stod(rho_s);
    SimCell* cell = nullptr;
    for (auto& c : table.cells)
      if (c.scenario == s && c.rho == rho) cell = &c;
    if (cell == nullptr) {
      table.cells.push_back({});
      cell = &table.cells.back();
      cell->scenario = s;
      cell->rho = rho;
      cell->B = std::stoi(b_s);
      cell->failed = std::stoi(failed_s);
    }
    cell->metrics[name] = {std::stod(rb_s), std::stod(mse_s)};
  }
  return table;
}

MetricsTable parse_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path + "'");
  nlohmann::json doc;
  in >> doc;
  MetricsTable table;
  if (doc.contains("config"))
    table.config = doc["config"].get<std::map<std::string, std::string>>();
  for (const auto& c : doc.at("cells")) {
    SimCell cell;
    cell.scenario = parse_scenario(c.at("scenario").get<std::string>());
    cell.rho = c.at("rho").get<double>();
    cell.B = c.at("B").get<int>();
    cell.failed = c.at("failed").get<int>();
    if (c.contains("metrics"))
      for (const auto& [name, m] : c["metrics"].items())
        cell.metrics[name] = {m.at("percent_rb").get<double>(), m.at("mse").get<double>()};
    table.cells.push_back(std::move(cell));
  }
  return table;
}

std::string format_estimate_report(const EstimateReport& report) {
  std::ostringstream out;
  out << "estimates:\n";
  for (const auto* name : kEstimatorNames)
    if (auto it = report.estimates.find(name); it != report.estimates.end())
      out << "  " << name << " = " << format_double(it->second) << '\n';
  for (const auto& [name, value] : report.estimates)
    if (std::find_if(kEstimatorNames.begin(), kEstimatorNames.end(),
                     [&](const char* n) { return name == n; }) == kEstimatorNames.end())
      out << "  " << name << " = " << format_double(value) << '\n';
  if (!report.diagnostics.empty()) {
    out << "diagnostics:\n";
    for (const auto& [name, value] : report.diagnostics)
      out << "  " << name << " = " << format_double(value) << '\n';
  }
  return out.str();
}

}  // namespace ddr
