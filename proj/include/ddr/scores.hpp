#pragma once

#include <functional>
#include <map>
#include <string>

#include "ddr/data.hpp"
#include "ddr/nnet.hpp"

namespace ddr {

// Numerically stable logistic link; exact for |z| up to the overflow range.
double sigmoid(double z);

// log(1 + e^z) evaluated as z + log1p(e^{-z}) for positive z.
double softplus(double z);

// Pseudo-log-likelihood: sum_{S_A} g_i - sum_{S_B} d_j log(1 + e^{g_j}).
// The S_B term is a Horvitz-Thompson estimate of the population total.
double pseudo_log_lik(const Vector& g_A, const Vector& g_B, const Vector& d_B);

// Elementwise min{1 - eps, max(eps, pi)}.
Vector truncate_scores(const Vector& pi, double eps_n);

// Estimated selection scores for the S_A units plus the fitted logit
// function. pi_hat is truncated to [eps_n, 1 - eps_n].
struct ScoreSet {
  Vector pi_hat;
  std::function<double(const Vector&)> g_hat;
  double eps_n = 0.0;
  std::map<std::string, double> diagnostics;
};

// Parametric working model coefficients, intercept first.
struct LogisticTheta {
  Vector theta;
};

struct PseudoLossGrad {
  double loss = 0.0;  // -pseudo_log_lik
  GradSet grads;
};

// Gradient of the negated pseudo-log-likelihood w.r.t. all network
// parameters: coefficient -1 per S_A unit and +d_j * sigma(g_j) per S_B unit.
PseudoLossGrad pseudo_loss_gradients(const Network& net, const Matrix& x_A, const Matrix& x_B,
                                     const Vector& d_B);

// Newton-Raphson with step halving on the pseudo-likelihood under a linear
// logit with intercept. Converges when ||U||_inf < 1e-8, at most 100
// iterations.
LogisticTheta fit_logistic_pl(const NonprobSample& a, const ProbSample& b);

ScoreSet make_scores(const LogisticTheta& theta, const NonprobSample& a, double eps_n = 1e-3);

// Deep-network score fit: standardizes covariates on the design-weighted
// union of both samples, trains on the negated pseudo-log-likelihood with a
// stratified validation holdout, then evaluates and truncates on S_A.
ScoreSet fit_dnn_scores(const NonprobSample& a, const ProbSample& b, const Architecture& arch,
                        const TrainConfig& cfg, double eps_n = 1e-3);

}  // namespace ddr
