#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddr/data.hpp"
#include "ddr/scores.hpp"

namespace ddr {

// Linear outcome model m(x) = beta^T (1, x[features]). predict() takes the
// full covariate vector and selects the fitted subset itself.
struct OutcomeModel {
  Vector beta;
  std::vector<Index> features;

  double predict(const Vector& x) const;
  Vector predict_rows(const Matrix& x) const;
};

// Exact least squares on S_A via column-pivoted QR. feature_subset (by
// column name) supports deliberately misspecified fits.
OutcomeModel ols_fit(const NonprobSample& a,
                     const std::optional<std::vector<std::string>>& feature_subset = {});

// Unadjusted sample mean of y over S_A.
double estimate_naive(const NonprobSample& a);

// Hajek-weighted mean of model predictions over S_B.
double estimate_reg(const ProbSample& b, const OutcomeModel& m);

// Hajek inverse-score weighting over S_A.
double estimate_ipw(const NonprobSample& a, const ScoreSet& scores);

// Augmented two-term form: inverse-score-weighted residuals on S_A plus the
// design-weighted model mean on S_B, each Hajek-normalized.
double estimate_dr(const NonprobSample& a, const ProbSample& b, const ScoreSet& scores,
                   const OutcomeModel& m);

// DIPW/DDR share the IPW/DR arithmetic; the distinction is the score
// provider (deep-network fit instead of the parametric working model).
double estimate_dipw(const NonprobSample& a, const ScoreSet& dnn_scores);
double estimate_ddr(const NonprobSample& a, const ProbSample& b, const ScoreSet& dnn_scores,
                    const OutcomeModel& m);

}  // namespace ddr
