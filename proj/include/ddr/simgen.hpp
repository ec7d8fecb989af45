#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddr/data.hpp"

namespace ddr {

enum class Scenario { TF, FF };

Scenario parse_scenario(std::string_view token);
std::string to_string(Scenario s);

struct SimConfig {
  Index N = 20000;
  Index n_A = 500;
  Index n_B = 1000;
  double rho = 0.5;
  Scenario scenario = Scenario::TF;
  int B = 500;
  std::uint64_t seed = 0;
  bool redraw_population = true;
  std::optional<double> sigma_override;  // forces the noise scale, testing hook

  void validate() const;
};

// Population draw plus the generator internals the tests need.
struct PopulationDraw {
  FinitePopulation pop;
  Matrix z;       // raw draws z_1..z_4, before the covariate recursion
  Vector eps;     // N(0,1) outcome noise
  double sigma = 0.0;
  double theta0 = 0.0;
};

// Covariates x1..x4 via the cascading recursion, outcome y = 2 + sum(x) +
// sigma*eps with sigma calibrated to the target correlation, and true
// selection probabilities from the nonlinear logit with theta0 calibrated so
// the probabilities sum to n_A.
PopulationDraw gen_population_detail(const SimConfig& cfg, std::uint64_t seed);
FinitePopulation gen_population(const SimConfig& cfg, std::uint64_t seed);

// sigma = sd(linear_pred) * sqrt(1/rho^2 - 1), population (1/N) sd.
double calibrate_sigma(const Vector& linear_pred, double rho);

// The nonlinear selection logit excluding the intercept theta0:
// 0.05*x1*x2 + 0.1*x2^2 + 0.05*x3*x4 + 0.08*sin(0.3*x3) + 0.05*ln(1+x2+x4).
Vector selection_logits(const CovariateMatrix& x);

// Bisection for theta0 with sum_i sigma(theta0 + logit_i) = n_A, bracket
// [-40, 40], tolerance 1e-6 * n_A.
double calibrate_theta0(const Vector& logits, double n_A);

struct DrawA {
  NonprobSample sample;
  int resampled = 0;  // times an empty Poisson draw forced a new seed stream
};

// Poisson sampling: independent Bernoulli(pi_i) per unit.
DrawA draw_sample_A(const FinitePopulation& pop, std::uint64_t seed);

// Simple random sampling without replacement, constant weights N/n_B.
ProbSample draw_sample_B(const FinitePopulation& pop, Index n_B, std::uint64_t seed);

// Which covariates the outcome model uses per scenario. The parametric
// propensity baseline is linear-logistic in all four either way, and the
// deep-network scores always see all four.
struct ModelRecipe {
  Scenario scenario;
  std::vector<std::string> outcome_features;
};

ModelRecipe misspecify(Scenario scenario);

void write_population_csv(const FinitePopulation& pop, const std::string& path);

}  // namespace ddr
