#include "ddr/simgen.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "ddr/csv.hpp"
#include "ddr/scores.hpp"

namespace ddr {

Scenario parse_scenario(std::string_view token) {
  if (token == "TF" || token == "tf") return Scenario::TF;
  if (token == "FF" || token == "ff") return Scenario::FF;
  throw ConfigError("unknown scenario '" + std::string(token) + "', expected TF or FF");
}

std::string to_string(Scenario s) { return s == Scenario::TF ? "TF" : "FF"; }

void SimConfig::validate() const {
  if (N < 2) throw ConfigError("population size N must be >= 2");
  if (n_A <= 0 || n_A >= N) throw ConfigError("need 0 < n_A < N");
  if (n_B <= 0 || n_B > N) throw ConfigError("need 0 < n_B <= N");
  if (!(rho > 0.0) || !(rho < 1.0)) throw ConfigError("rho must lie in (0,1)");
  if (B < 1) throw ConfigError("replication count B must be >= 1");
}

double calibrate_sigma(const Vector& linear_pred, double rho) {
  if (!(rho > 0.0) || !(rho < 1.0)) throw DomainError("rho must lie in (0,1)");
  const double mean = linear_pred.mean();
  const double var = (linear_pred.array() - mean).square().mean();
  if (!(var > 0.0)) throw DomainError("linear predictor has zero variance");
  return std::sqrt(var) * std::sqrt(1.0 / (rho * rho) - 1.0);
}

Vector selection_logits(const CovariateMatrix& x) {
  if (x.cols() != 4) throw DomainError("selection_logits expects the 4-covariate design");
  const auto x1 = x.values.col(0).array();
  const auto x2 = x.values.col(1).array();
  const auto x3 = x.values.col(2).array();
  const auto x4 = x.values.col(3).array();
  return (0.05 * x1 * x2 + 0.1 * x2.square() + 0.05 * x3 * x4 + 0.08 * (0.3 * x3).sin() +
          0.05 * (1.0 + x2 + x4).log())
      .matrix();
}

double calibrate_theta0(const Vector& logits, double n_A) {
  const auto total = static_cast<double>(logits.size());
  if (!(n_A > 0.0) || !(n_A < total)) throw DomainError("need 0 < n_A < N");
  auto h = [&](double t0) {
    double s = 0.0;
    for (Index i = 0; i < logits.size(); ++i) s += sigmoid(t0 + logits(i));
    return s - n_A;
  };
  double lo = -40.0, hi = 40.0;
  double h_lo = h(lo), h_hi = h(hi);
  if (!(h_lo < 0.0) || !(h_hi > 0.0))
    throw DomainError("theta0 bracket [-40, 40] does not enclose the root");
  const double tol = 1e-6 * n_A;
  // h is strictly increasing in theta0, so plain bisection suffices.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double h_mid = h(mid);
    if (std::abs(h_mid) <= tol) return mid;
    if (h_mid < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

PopulationDraw gen_population_detail(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Index n = cfg.N;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution z1(0.5);
  std::uniform_real_distribution<double> z2(0.0, 2.0);
  std::exponential_distribution<double> z3(1.0);
  std::chi_squared_distribution<double> z4(4.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PopulationDraw draw;
  draw.z.resize(n, 4);
  draw.eps.resize(n);
  for (Index i = 0; i < n; ++i) draw.z(i, 0) = z1(rng) ? 1.0 : 0.0;
  for (Index i = 0; i < n; ++i) draw.z(i, 1) = z2(rng);
  for (Index i = 0; i < n; ++i) draw.z(i, 2) = z3(rng);
  for (Index i = 0; i < n; ++i) draw.z(i, 3) = z4(rng);
  for (Index i = 0; i < n; ++i) draw.eps(i) = gauss(rng);

  CovariateMatrix x;
  x.column_names = {"x1", "x2", "x3", "x4"};
  x.values.resize(n, 4);
  x.values.col(0) = draw.z.col(0);
  x.values.col(1) = draw.z.col(1) + 0.3 * x.values.col(0);
  x.values.col(2) = draw.z.col(2) + 0.2 * (x.values.col(0) + x.values.col(1));
  x.values.col(3) = draw.z.col(3) + 0.1 * (x.values.col(0) + x.values.col(1) + x.values.col(2));
  // Re-derive the stored z from x so the recursion inverts bit-exactly; this
  // shifts each stored z by at most one rounding step from the raw draw.
  draw.z.col(1) = x.values.col(1) - 0.3 * x.values.col(0);
  draw.z.col(2) = x.values.col(2) - 0.2 * (x.values.col(0) + x.values.col(1));
  draw.z.col(3) = x.values.col(3) - 0.1 * (x.values.col(0) + x.values.col(1) + x.values.col(2));

  const Vector linear_pred = x.values.rowwise().sum();
  draw.sigma = cfg.sigma_override ? *cfg.sigma_override : calibrate_sigma(linear_pred, cfg.rho);

  FinitePopulation pop;
  pop.y = (2.0 + linear_pred.array() + draw.sigma * draw.eps.array()).matrix();
  const Vector logits = selection_logits(x);
  draw.theta0 = calibrate_theta0(logits, static_cast<double>(cfg.n_A));
  pop.pi_a.resize(n);
  for (Index i = 0; i < n; ++i) pop.pi_a(i) = sigmoid(draw.theta0 + logits(i));
  pop.x = std::move(x);
  pop.mu_y = pop.y.mean();
  draw.pop = std::move(pop);
  validate(draw.pop);
  return draw;
}

FinitePopulation gen_population(const SimConfig& cfg, std::uint64_t seed) {
  return gen_population_detail(cfg, seed).pop;
}

DrawA draw_sample_A(const FinitePopulation& pop, std::uint64_t seed) {
  DrawA out;
  std::uint64_t stream = seed;
  for (;;) {
    std::mt19937_64 rng(stream);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Index> keep;
    for (Index i = 0; i < pop.size(); ++i)
      if (unif(rng) < pop.pi_a(i)) keep.push_back(i);
    if (!keep.empty()) {
      NonprobSample a;
      a.x.column_names = pop.x.column_names;
      a.x.values.resize(static_cast<Index>(keep.size()), pop.x.cols());
      a.y.resize(static_cast<Index>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) {
        a.x.values.row(static_cast<Index>(i)) = pop.x.values.row(keep[i]);
        a.y(static_cast<Index>(i)) = pop.y(keep[i]);
      }
      out.sample = std::move(a);
      return out;
    }
    ++out.resampled;
    stream = derive_seed(stream, 0xA5);
  }
}

ProbSample draw_sample_B(const FinitePopulation& pop, Index n_B, std::uint64_t seed) {
  if (n_B <= 0 || n_B > pop.size()) throw DomainError("need 0 < n_B <= N");
  std::mt19937_64 rng(seed);
  // Selection sampling: scan the frame once, keeping each unit with
  // probability (still needed)/(still available).
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(n_B));
  Index needed = n_B;
  for (Index i = 0; i < pop.size() && needed > 0; ++i) {
    const Index available = pop.size() - i;
    std::uniform_int_distribution<Index> pick(0, available - 1);
    if (pick(rng) < needed) {
      keep.push_back(i);
      --needed;
    }
  }
  ProbSample b;
  b.x.column_names = pop.x.column_names;
  b.x.values.resize(n_B, pop.x.cols());
  b.d = Vector::Constant(n_B, static_cast<double>(pop.size()) / static_cast<double>(n_B));
  for (std::size_t i = 0; i < keep.size(); ++i)
    b.x.values.row(static_cast<Index>(i)) = pop.x.values.row(keep[i]);
  return b;
}

ModelRecipe misspecify(Scenario scenario) {
  ModelRecipe recipe;
  recipe.scenario = scenario;
  recipe.outcome_features = {"x1", "x2", "x3"};
  if (scenario == Scenario::TF) recipe.outcome_features.push_back("x4");
  return recipe;
}

void write_population_csv(const FinitePopulation& pop, const std::string& path) {
  std::vector<std::string> header = pop.x.column_names;
  header.push_back("y");
  header.push_back("pi_a");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Index i = 0; i < pop.size(); ++i) {
    for (Index j = 0; j < pop.x.cols(); ++j) out << (j ? "," : "") << format_double(pop.x.values(i, j));
    out << ',' << format_double(pop.y(i)) << ',' << format_double(pop.pi_a(i)) << '\n';
  }
}

}  // namespace ddr
