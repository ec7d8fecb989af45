#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ddr/estimators.hpp"
#include "ddr/nnet.hpp"
#include "ddr/simgen.hpp"

namespace ddr {

inline constexpr std::array<const char*, 6> kEstimatorNames = {"naive", "reg",  "ipw",
                                                               "dr",    "dipw", "ddr"};

// %RB = 100/B * sum_b (est_b - mu_y_b)/mu_y_b, each replication scored
// against its own true mean.
double percent_rb(const Vector& estimates, const Vector& mu_y_per_rep);

// MSE = 1/B * sum_b (est_b - mu_y_b)^2.
double mse(const Vector& estimates, const Vector& mu_y_per_rep);

struct EstimatorMetrics {
  double percent_rb = 0.0;
  double mse = 0.0;
};

struct RepRecord {
  int rep = 0;
  double mu_y = 0.0;
  std::array<double, 6> estimates{};
  bool failed = false;
  std::string error;
};

// One (scenario, rho) block of the results table.
struct SimCell {
  Scenario scenario = Scenario::TF;
  double rho = 0.0;
  int B = 0;
  int failed = 0;
  std::map<std::string, EstimatorMetrics> metrics;
  std::vector<RepRecord> archive;
};

struct MetricsTable {
  std::vector<SimCell> cells;
  std::map<std::string, std::string> config;  // provenance echo for reports
};

struct HarnessConfig {
  SimConfig sim;
  Architecture arch = Architecture::dense(4, {64, 64});
  TrainConfig train;
  double eps_n = 1e-3;
  int workers = 1;
};

// Runs B replications of the full pipeline (population, samples, OLS,
// parametric and deep-network scores, all six estimators) and aggregates
// %RB / MSE. Results are identical for any worker count: replication b only
// ever sees seed streams derived from (master seed, b).
SimCell run_simulation(const HarnessConfig& cfg);

enum class ReportFormat { text, csv, json };

ReportFormat parse_report_format(const std::string& token);

std::string format_report_text(const MetricsTable& table);
std::string format_report_csv(const MetricsTable& table);
std::string format_report_json(const MetricsTable& table);
std::string format_archive_csv(const MetricsTable& table);

// Writes the table in the requested format; with_archive additionally writes
// the per-replication estimates next to `path` with suffix ".archive.csv".
void emit_report(const MetricsTable& table, ReportFormat format, const std::string& path,
                 bool with_archive = false);

// Inverses of the csv/json report writers, used for round-trip checks and
// external tooling.
MetricsTable parse_report_csv(const std::string& path);
MetricsTable parse_report_json(const std::string& path);

std::string format_estimate_report(const EstimateReport& report);

}  // namespace ddr
