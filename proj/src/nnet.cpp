#include "ddr/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace ddr {

Architecture Architecture::dense(Index input, const std::vector<Index>& hidden) {
  Architecture arch;
  arch.widths.push_back(input);
  arch.widths.insert(arch.widths.end(), hidden.begin(), hidden.end());
  arch.widths.push_back(1);
  arch.validate();
  return arch;
}

void Architecture::validate() const {
  if (widths.size() < 2) throw ConfigError("architecture needs at least (p_0, p_{K+1})");
  if (widths.back() != 1) throw ConfigError("output width must be 1");
  for (Index w : widths)
    if (w < 1) throw ConfigError("layer widths must be >= 1");
}

void Architecture::check_scaling(Index n) const {
  validate();
  if (n < 2) throw ConfigError("scaling check needs n >= 2");
  const double logn = std::log(static_cast<double>(n));
  if (static_cast<double>(depth()) > 2.0 * logn)
    throw ConfigError("depth K exceeds 2 log n");
  const double d = static_cast<double>(input_dim());
  const double min_width = std::pow(static_cast<double>(n), d / (2.0 + d));
  for (std::size_t k = 1; k + 1 < widths.size(); ++k) {
    if (static_cast<double>(widths[k]) < min_width)
      throw ConfigError("hidden width " + std::to_string(widths[k]) +
                        " below scaling heuristic n^{d/(2+d)} = " + std::to_string(min_width));
    if (widths[k] > n) throw ConfigError("hidden width exceeds n");
  }
}

Index Network::num_params() const {
  Index n = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    n += weights[k].size() + biases[k].size();
  return n;
}

GradSet GradSet::zeros_like(const Network& net) {
  GradSet g;
  g.weights.reserve(net.weights.size());
  g.biases.reserve(net.biases.size());
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    g.weights.push_back(Matrix::Zero(net.weights[k].rows(), net.weights[k].cols()));
    g.biases.push_back(Vector::Zero(net.biases[k].size()));
  }
  return g;
}

double GradSet::squared_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    s += weights[k].squaredNorm() + biases[k].squaredNorm();
  return s;
}

AdamState::AdamState(const Network& net, const AdamParams& p)
    : m(GradSet::zeros_like(net)), v(GradSet::zeros_like(net)), params(p) {}

Network xavier_init(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Network net;
  net.arch = arch;
  std::mt19937_64 rng(seed);
  const Index layers = static_cast<Index>(arch.widths.size()) - 1;
  for (Index k = 0; k < layers; ++k) {
    const Index fan_in = arch.widths[k];
    const Index fan_out = arch.widths[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (Index i = 0; i < fan_out; ++i)
      for (Index j = 0; j < fan_in; ++j) w(i, j) = unif(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

double forward(const Network& net, const Vector& x) {
  if (x.size() != net.arch.input_dim())
    throw DomainError("forward: input has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(net.arch.input_dim()));
  Vector a = x;
  const std::size_t layers = net.weights.size();
  for (std::size_t k = 0; k + 1 < layers; ++k)
    a = ((net.weights[k] * a + net.biases[k]).array().max(0.0)).matrix();
  double g = (net.weights[layers - 1] * a + net.biases[layers - 1])(0);
  if (net.output_clip) g = std::clamp(g, -*net.output_clip, *net.output_clip);
  return g;
}

Vector forward_batch(const Network& net, const Matrix& X, ForwardCache* cache) {
  if (X.cols() != net.arch.input_dim())
    throw DomainError("forward_batch: input has " + std::to_string(X.cols()) +
                      " columns, expected " + std::to_string(net.arch.input_dim()));
  const std::size_t layers = net.weights.size();
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(X);
  }
  Matrix a = X;
  for (std::size_t k = 0; k + 1 < layers; ++k) {
    a = ((a * net.weights[k].transpose()).rowwise() + net.biases[k].transpose())
            .array()
            .max(0.0)
            .matrix();
    if (cache) cache->acts.push_back(a);
  }
  Vector g = a * net.weights[layers - 1].transpose().col(0);
  g.array() += net.biases[layers - 1](0);
  if (cache) cache->raw_out = g;
  if (net.output_clip) {
    const double d = *net.output_clip;
    g = g.array().min(d).max(-d).matrix();
  }
  return g;
}

GradSet backward(const Network& net, const ForwardCache& cache, const Vector& coeffs) {
  const std::size_t layers = net.weights.size();
  GradSet grads = GradSet::zeros_like(net);
  Matrix delta = coeffs;
  if (net.output_clip) {
    const double d = *net.output_clip;
    delta.col(0) =
        (cache.raw_out.array().abs() <= d).select(delta.col(0), Vector::Zero(delta.rows()));
  }
  for (std::size_t k = layers; k-- > 0;) {
    grads.weights[k] = delta.transpose() * cache.acts[k];
    grads.biases[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      // ReLU subgradient: 1 where the activation is strictly positive.
      delta = ((delta * net.weights[k]).array() * (cache.acts[k].array() > 0.0).cast<double>())
                  .matrix();
    }
  }
  return grads;
}

void adam_step(AdamState& state, Network& net, const GradSet& grads) {
  const auto& p = state.params;
  const long t1 = state.t + 1;
  const double mc = 1.0 - std::pow(p.r1, static_cast<double>(t1));
  const double vc = 1.0 - std::pow(p.r2, static_cast<double>(t1));
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    state.m.weights[k] = p.r1 * state.m.weights[k] + (1.0 - p.r1) * grads.weights[k];
    state.v.weights[k] =
        (p.r2 * state.v.weights[k].array() + (1.0 - p.r2) * grads.weights[k].array().square())
            .matrix();
    net.weights[k].array() -= p.gamma * (state.m.weights[k].array() / mc) /
                              ((state.v.weights[k].array() / vc).sqrt() + p.eps0);

    state.m.biases[k] = p.r1 * state.m.biases[k] + (1.0 - p.r1) * grads.biases[k];
    state.v.biases[k] =
        (p.r2 * state.v.biases[k].array() + (1.0 - p.r2) * grads.biases[k].array().square())
            .matrix();
    net.biases[k].array() -= p.gamma * (state.m.biases[k].array() / mc) /
                             ((state.v.biases[k].array() / vc).sqrt() + p.eps0);
  }
  state.t = t1;
}

namespace {

double param_delta_sq(const Network& a, const Network& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    s += (a.weights[k] - b.weights[k]).squaredNorm();
    s += (a.biases[k] - b.biases[k]).squaredNorm();
  }
  return s;
}

}  // namespace

TrainResult train(Network net, const TrainProblem& problem, const TrainConfig& cfg) {
  if (cfg.max_epochs < 1 || cfg.patience < 1)
    throw ConfigError("max_epochs and patience must be >= 1");
  net.output_clip = cfg.clip_d;
  AdamState state(net, cfg.adam);

  TrainHistory history;
  Network best = net;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    LossGrad lg = problem.train_loss_grad(net);
    if (!std::isfinite(lg.loss))
      throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));

    Network prev = net;
    adam_step(state, net, lg.grads);
    const double delta = std::sqrt(param_delta_sq(net, prev));

    const double vloss = problem.val_loss(net);
    if (!std::isfinite(vloss))
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));

    history.train_loss.push_back(lg.loss);
    history.val_loss.push_back(vloss);
    history.epochs_run = epoch;

    if (vloss < best_val) {
      best_val = vloss;
      best = net;
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (since_best >= cfg.patience) {
      history.stop_reason = "patience";
      break;
    }
    if (delta <= cfg.stop_threshold) {
      history.stop_reason = "param_delta";
      break;
    }
  }
  if (history.stop_reason.empty()) history.stop_reason = "max_epochs";
  return {std::move(best), std::move(history)};
}

Standardizer Standardizer::fit(const Matrix& X, const Vector& weights) {
  if (weights.size() != X.rows()) throw DomainError("standardizer weight length mismatch");
  const double wsum = weights.sum();
  if (!(wsum > 0.0)) throw DomainError("standardizer needs positive total weight");
  Standardizer s;
  s.mean = (X.transpose() * weights) / wsum;
  Matrix centered = X.rowwise() - s.mean.transpose();
  Vector var = (centered.array().square().matrix().transpose() * weights) / wsum;
  s.scale = var.array().sqrt().matrix();
  // Constant features pass through unscaled.
  for (Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale(j) > 0.0)) s.scale(j) = 1.0;
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  return ((X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array())
      .matrix();
}

Vector Standardizer::apply(const Vector& x) const {
  return ((x - mean).array() / scale.array()).matrix();
}

void save_network_json(const Network& net, const std::string& path) {
  nlohmann::json doc;
  doc["widths"] = net.arch.widths;
  if (net.output_clip) doc["output_clip"] = *net.output_clip;
  auto& layers = doc["layers"] = nlohmann::json::array();
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    std::vector<double> w(net.weights[k].size());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), net.weights[k].rows(), net.weights[k].cols()) = net.weights[k];
    std::vector<double> b(net.biases[k].data(), net.biases[k].data() + net.biases[k].size());
    layers.push_back({{"W", w}, {"v", b}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

Network load_network_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json doc;
  in >> doc;
  Network net;
  net.arch.widths = doc.at("widths").get<std::vector<Index>>();
  net.arch.validate();
  if (doc.contains("output_clip")) net.output_clip = doc["output_clip"].get<double>();
  const auto& layers = doc.at("layers");
  if (layers.size() + 1 != net.arch.widths.size())
    throw ParseError("layer count does not match width vector in '" + path + "'");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Index rows = net.arch.widths[k + 1];
    const Index cols = net.arch.widths[k];
    auto w = layers[k].at("W").get<std::vector<double>>();
    auto b = layers[k].at("v").get<std::vector<double>>();
    if (static_cast<Index>(w.size()) != rows * cols || static_cast<Index>(b.size()) != rows)
      throw ParseError("parameter shape mismatch in '" + path + "'");
    Matrix W(rows, cols);
    W = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), rows, cols);
    net.weights.push_back(std::move(W));
    net.biases.push_back(Eigen::Map<Vector>(b.data(), rows));
  }
  return net;
}

}  // namespace ddr
