#include "ddr/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ddr {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double pseudo_log_lik(const Vector& g_A, const Vector& g_B, const Vector& d_B) {
  if (g_B.size() != d_B.size()) throw DomainError("pseudo_log_lik: weight length mismatch");
  double ll = g_A.sum();
  for (Index j = 0; j < g_B.size(); ++j) ll -= d_B(j) * softplus(g_B(j));
  return ll;
}

Vector truncate_scores(const Vector& pi, double eps_n) {
  if (!(eps_n > 0.0) || !(eps_n < 0.5)) throw DomainError("truncation level must be in (0, 0.5)");
  return pi.array().max(eps_n).min(1.0 - eps_n).matrix();
}

PseudoLossGrad pseudo_loss_gradients(const Network& net, const Matrix& x_A, const Matrix& x_B,
                                     const Vector& d_B) {
  const Index n_a = x_A.rows();
  const Index n_b = x_B.rows();
  PseudoLossGrad out;
  if (n_a + n_b == 0) {
    out.grads = GradSet::zeros_like(net);
    return out;
  }
  Matrix stacked(n_a + n_b, net.arch.input_dim());
  if (n_a > 0) stacked.topRows(n_a) = x_A;
  if (n_b > 0) stacked.bottomRows(n_b) = x_B;

  ForwardCache cache;
  Vector g = forward_batch(net, stacked, &cache);

  double loss = -g.head(n_a).sum();
  Vector coeffs(n_a + n_b);
  coeffs.head(n_a).setConstant(-1.0);
  for (Index j = 0; j < n_b; ++j) {
    const double gj = g(n_a + j);
    loss += d_B(j) * softplus(gj);
    coeffs(n_a + j) = d_B(j) * sigmoid(gj);
  }
  out.loss = loss;
  out.grads = backward(net, cache, coeffs);
  return out;
}

namespace {

Matrix with_intercept(const Matrix& x) {
  Matrix z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

}  // namespace

LogisticTheta fit_logistic_pl(const NonprobSample& a, const ProbSample& b) {
  if (a.x.cols() != b.x.cols()) throw SchemaError("fit_logistic_pl: covariate widths differ");
  const Matrix z_a = with_intercept(a.x.values);
  const Matrix z_b = with_intercept(b.x.values);
  const Index p = z_a.cols();

  {
    Matrix combined(z_a.rows() + z_b.rows(), p);
    combined.topRows(z_a.rows()) = z_a;
    combined.bottomRows(z_b.rows()) = z_b;
    Eigen::ColPivHouseholderQR<Matrix> qr(combined);
    if (qr.rank() < p) throw RankError("combined design matrix is rank deficient");
  }

  const Vector sum_a = z_a.colwise().sum().transpose();
  Vector theta = Vector::Zero(p);

  auto loglik = [&](const Vector& th) {
    const Vector ga = z_a * th;
    const Vector gb = z_b * th;
    return pseudo_log_lik(ga, gb, b.d);
  };

  double ll = loglik(theta);
  for (int iter = 0; iter < 100; ++iter) {
    const Vector gb = z_b * theta;
    Vector sig(gb.size());
    for (Index j = 0; j < gb.size(); ++j) sig(j) = sigmoid(gb(j));

    const Vector score = sum_a - z_b.transpose() * (b.d.array() * sig.array()).matrix();
    if (score.lpNorm<Eigen::Infinity>() < 1e-8) return {theta};

    const Vector w = (b.d.array() * sig.array() * (1.0 - sig.array())).matrix();
    const Matrix hess = z_b.transpose() * w.asDiagonal() * z_b;
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw RankError("singular Hessian in logistic pseudo-likelihood fit");
    const Vector step = ldlt.solve(score);
    if (!step.allFinite()) throw RankError("singular Hessian in logistic pseudo-likelihood fit");

    // Step halving keeps each Newton update ascent-valid. Near the optimum
    // the true per-step gain drops below the rounding noise of evaluating
    // the likelihood, so accept within that noise band or the quadratic
    // end-game steps get rejected and theta stalls.
    const double noise = 1e-9 * (1.0 + std::abs(ll));
    double scale = 1.0;
    Vector cand;
    double cand_ll = 0.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      cand = theta + scale * step;
      cand_ll = loglik(cand);
      if (std::isfinite(cand_ll) && cand_ll >= ll - noise) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      // No ascent even at a tiny step: accept only if already near-stationary.
      if (score.lpNorm<Eigen::Infinity>() < 1e-6) return {theta};
      throw ConvergenceError("logistic pseudo-likelihood step halving failed, ||U||_inf = " +
                             std::to_string(score.lpNorm<Eigen::Infinity>()));
    }
    theta = cand;
    ll = cand_ll;
  }

  const Vector gb = z_b * theta;
  Vector sig(gb.size());
  for (Index j = 0; j < gb.size(); ++j) sig(j) = sigmoid(gb(j));
  const Vector score = sum_a - z_b.transpose() * (b.d.array() * sig.array()).matrix();
  if (score.lpNorm<Eigen::Infinity>() < 1e-8) return {theta};
  throw ConvergenceError("logistic pseudo-likelihood did not converge in 100 iterations, "
                         "||U||_inf = " +
                         std::to_string(score.lpNorm<Eigen::Infinity>()));
}

ScoreSet make_scores(const LogisticTheta& theta, const NonprobSample& a, double eps_n) {
  const Index p = theta.theta.size();
  if (p != a.x.cols() + 1) throw SchemaError("make_scores: theta length mismatch");
  Vector th = theta.theta;
  ScoreSet s;
  s.eps_n = eps_n;
  s.g_hat = [th](const Vector& x) {
    if (x.size() + 1 != th.size()) throw DomainError("score input width mismatch");
    return th(0) + th.tail(th.size() - 1).dot(x);
  };
  Vector pi_raw(a.size());
  for (Index i = 0; i < a.size(); ++i) pi_raw(i) = sigmoid(s.g_hat(a.x.values.row(i).transpose()));
  s.diagnostics["pi_min_raw"] = pi_raw.minCoeff();
  s.diagnostics["pi_max_raw"] = pi_raw.maxCoeff();
  s.pi_hat = truncate_scores(pi_raw, eps_n);
  s.diagnostics["pi_min"] = s.pi_hat.minCoeff();
  s.diagnostics["pi_max"] = s.pi_hat.maxCoeff();
  return s;
}

namespace {

// Deterministic holdout of round(frac * n) indices (at least one when
// frac > 0 and n >= 2), drawn by shuffling 0..n-1.
std::pair<std::vector<Index>, std::vector<Index>> holdout_split(Index n, double frac,
                                                                std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  Index n_val = static_cast<Index>(std::floor(frac * static_cast<double>(n)));
  if (frac > 0.0 && n >= 2) n_val = std::max<Index>(n_val, 1);
  n_val = std::clamp<Index>(n_val, 0, std::max<Index>(n - 1, 0));
  std::vector<Index> val(idx.begin(), idx.begin() + n_val);
  std::vector<Index> tr(idx.begin() + n_val, idx.end());
  return {std::move(tr), std::move(val)};
}

Matrix take_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

Vector take(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

ScoreSet fit_dnn_scores(const NonprobSample& a, const ProbSample& b, const Architecture& arch,
                        const TrainConfig& cfg, double eps_n) {
  if (a.x.cols() != b.x.cols()) throw SchemaError("fit_dnn_scores: covariate widths differ");
  if (arch.input_dim() != a.x.cols())
    throw ConfigError("architecture input width does not match covariate count");
  if (!(cfg.val_fraction >= 0.0) || !(cfg.val_fraction <= 0.5))
    throw ConfigError("val_fraction must lie in [0, 0.5]");
  if (cfg.validate_scaling) arch.check_scaling(a.size() + b.size());

  // Standardize on the weighted union: unit weight for S_A rows, design
  // weight for S_B rows.
  Matrix all_x(a.size() + b.size(), a.x.cols());
  all_x.topRows(a.size()) = a.x.values;
  all_x.bottomRows(b.size()) = b.x.values;
  Vector union_w(a.size() + b.size());
  union_w.head(a.size()).setOnes();
  union_w.tail(b.size()) = b.d;
  const Standardizer stdzr = Standardizer::fit(all_x, union_w);

  const Matrix xa = stdzr.apply(a.x.values);
  const Matrix xb = stdzr.apply(b.x.values);

  // Stratified holdout: val_fraction of S_A rows and of S_B rows.
  auto [tr_a, val_a] = holdout_split(a.size(), cfg.val_fraction, derive_seed(cfg.seed, 101));
  auto [tr_b, val_b] = holdout_split(b.size(), cfg.val_fraction, derive_seed(cfg.seed, 102));

  const Matrix xa_tr = take_rows(xa, tr_a);
  const Matrix xb_tr = take_rows(xb, tr_b);
  const Vector d_tr = take(b.d, tr_b);
  const Matrix xa_val = take_rows(xa, val_a);
  const Matrix xb_val = take_rows(xb, val_b);
  const Vector d_val = take(b.d, val_b);
  const bool has_val = xa_val.rows() + xb_val.rows() > 0;

  TrainProblem problem;
  problem.train_loss_grad = [&](const Network& net) {
    auto pg = pseudo_loss_gradients(net, xa_tr, xb_tr, d_tr);
    return LossGrad{pg.loss, std::move(pg.grads)};
  };
  problem.val_loss = [&](const Network& net) {
    if (!has_val) return pseudo_loss_gradients(net, xa_tr, xb_tr, d_tr).loss;
    const Vector ga = xa_val.rows() ? forward_batch(net, xa_val) : Vector(0);
    const Vector gb = xb_val.rows() ? forward_batch(net, xb_val) : Vector(0);
    return -pseudo_log_lik(ga, gb, d_val);
  };

  Network init = xavier_init(arch, derive_seed(cfg.seed, 1));
  TrainResult result = train(std::move(init), problem, cfg);

  ScoreSet s;
  s.eps_n = eps_n;
  Network net = std::move(result.net);
  s.g_hat = [net, stdzr](const Vector& x) { return forward(net, stdzr.apply(x)); };

  Vector pi_raw(a.size());
  for (Index i = 0; i < a.size(); ++i) pi_raw(i) = sigmoid(s.g_hat(a.x.values.row(i).transpose()));
  s.diagnostics["pi_min_raw"] = pi_raw.minCoeff();
  s.diagnostics["pi_max_raw"] = pi_raw.maxCoeff();
  s.pi_hat = truncate_scores(pi_raw, eps_n);
  s.diagnostics["pi_min"] = s.pi_hat.minCoeff();
  s.diagnostics["pi_max"] = s.pi_hat.maxCoeff();
  s.diagnostics["epochs"] = result.history.epochs_run;
  s.diagnostics["best_epoch"] = result.history.best_epoch;
  s.diagnostics["final_train_loss"] = result.history.train_loss.back();
  s.diagnostics["best_val_loss"] =
      result.history.val_loss[static_cast<std::size_t>(result.history.best_epoch) - 1];
  return s;
}

}  // namespace ddr
