#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ddr/types.hpp"

namespace ddr {

// Unit-by-covariate matrix with named columns. Rows are units, columns are
// the r covariates.
struct CovariateMatrix {
  Matrix values;
  std::vector<std::string> column_names;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

// Nonprobability sample S_A: covariates and outcomes, no weights.
struct NonprobSample {
  CovariateMatrix x;
  Vector y;

  Index size() const { return y.size(); }
};

// Reference probability sample S_B: covariates and design weights d_i = 1/pi_i,
// no outcomes.
struct ProbSample {
  CovariateMatrix x;
  Vector d;

  Index size() const { return d.size(); }
};

// Full finite population, available in simulation only. pi_a holds the true
// selection probabilities used to draw S_A.
struct FinitePopulation {
  CovariateMatrix x;
  Vector y;
  Vector pi_a;
  double mu_y = 0.0;

  Index size() const { return y.size(); }
};

struct EstimateReport {
  std::map<std::string, double> estimates;
  std::map<std::string, double> diagnostics;
};

void validate(const CovariateMatrix& x);
void validate(const NonprobSample& a);
void validate(const ProbSample& b);
void validate(const FinitePopulation& pop);

// Restricts both samples to the common covariate names, in the order they
// appear in `a`. Throws SchemaError if the name sets are disjoint.
std::pair<NonprobSample, ProbSample> align_covariates(const NonprobSample& a,
                                                      const ProbSample& b);

// Optional min-max rescaling of each covariate to [0,1], with ranges computed
// over the union of both samples. Constant columns map to 0.
std::pair<NonprobSample, ProbSample> rescale_minmax(const NonprobSample& a,
                                                    const ProbSample& b);

}  // namespace ddr
