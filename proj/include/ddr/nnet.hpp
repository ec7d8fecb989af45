#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddr/types.hpp"

namespace ddr {

// Layer-width vector (p_0, ..., p_{K+1}) of a (K+1)-layer dense ReLU network
// with scalar linear output, so p_{K+1} == 1 and K = widths.size() - 2.
struct Architecture {
  std::vector<Index> widths;

  Index depth() const { return static_cast<Index>(widths.size()) - 2; }
  Index input_dim() const { return widths.front(); }

  static Architecture dense(Index input, const std::vector<Index>& hidden);

  void validate() const;
  // Heuristic width/depth scaling check against the combined sample size n:
  // K <= 2 ln n, min hidden width >= n^{d/(2+d)} with d = input_dim(), and
  // max hidden width <= n. Asymptotic constants are unknowable, so this is a
  // coarse guard, disabled by default.
  void check_scaling(Index n) const;
};

// Dense feedforward ReLU network, weights[k] is p_{k+1} x p_k. output_clip,
// when set, clamps the scalar output to [-D, D].
struct Network {
  Architecture arch;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::optional<double> output_clip;

  Index num_params() const;
};

// Parameter-shaped container used for gradients and ADAM moments.
struct GradSet {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static GradSet zeros_like(const Network& net);
  double squared_norm() const;
};

struct AdamParams {
  double gamma = 1e-3;
  double r1 = 0.9;
  double r2 = 0.999;
  double eps0 = 1e-8;
};

struct AdamState {
  GradSet m;
  GradSet v;
  long t = 0;
  AdamParams params;

  AdamState(const Network& net, const AdamParams& p);
};

struct TrainConfig {
  int max_epochs = 2000;
  int patience = 20;
  double val_fraction = 0.2;
  double stop_threshold = 1e-6;  // on the parameter-change L2 norm
  std::uint64_t seed = 0;
  std::optional<double> clip_d;
  AdamParams adam;
  bool validate_scaling = false;
};

// Batched forward pass cache: acts[0] is the input batch, acts[k] for k >= 1
// the post-ReLU activations, raw_out the pre-clip network output.
struct ForwardCache {
  std::vector<Matrix> acts;
  Vector raw_out;
};

struct LossGrad {
  double loss = 0.0;
  GradSet grads;
};

// Loss callbacks consumed by train(). The provider owns the data and any
// train/validation split; train() only drives the optimizer.
struct TrainProblem {
  std::function<LossGrad(const Network&)> train_loss_grad;
  std::function<double(const Network&)> val_loss;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;
  int epochs_run = 0;
  std::string stop_reason;
};

struct TrainResult {
  Network net;
  TrainHistory history;
};

// Zero biases, weights uniform on +-sqrt(6/(p_k + p_{k+1})). Deterministic
// given the seed.
Network xavier_init(const Architecture& arch, std::uint64_t seed);

double forward(const Network& net, const Vector& x);
Vector forward_batch(const Network& net, const Matrix& X, ForwardCache* cache = nullptr);

// Gradients of sum_j coeffs[j] * g(x_j) w.r.t. every weight and bias, ReLU
// subgradient 0 at exactly 0.
GradSet backward(const Network& net, const ForwardCache& cache, const Vector& coeffs);

void adam_step(AdamState& state, Network& net, const GradSet& grads);

// Full-batch ADAM with early stopping on the validation loss; returns the
// parameters from the best validation epoch.
TrainResult train(Network net, const TrainProblem& problem, const TrainConfig& cfg);

// Per-feature affine standardization fitted on weighted data; prediction-side
// callers apply() raw covariates before forward().
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& X, const Vector& weights);
  Matrix apply(const Matrix& X) const;
  Vector apply(const Vector& x) const;
};

// JSON document: width vector, then row-major weight matrices and biases,
// layer by layer.
void save_network_json(const Network& net, const std::string& path);
Network load_network_json(const std::string& path);

}  // namespace ddr
