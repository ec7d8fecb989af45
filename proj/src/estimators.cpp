#include "ddr/estimators.hpp"

#include <algorithm>

namespace ddr {

double OutcomeModel::predict(const Vector& x) const {
  double v = beta(0);
  for (std::size_t j = 0; j < features.size(); ++j) v += beta(static_cast<Index>(j) + 1) * x(features[j]);
  return v;
}

Vector OutcomeModel::predict_rows(const Matrix& x) const {
  Vector out = Vector::Constant(x.rows(), beta(0));
  for (std::size_t j = 0; j < features.size(); ++j)
    out += beta(static_cast<Index>(j) + 1) * x.col(features[j]);
  return out;
}

OutcomeModel ols_fit(const NonprobSample& a,
                     const std::optional<std::vector<std::string>>& feature_subset) {
  std::vector<Index> features;
  if (feature_subset) {
    for (const auto& name : *feature_subset) {
      auto it = std::find(a.x.column_names.begin(), a.x.column_names.end(), name);
      if (it == a.x.column_names.end())
        throw SchemaError("ols_fit: unknown feature '" + name + "'");
      features.push_back(it - a.x.column_names.begin());
    }
  } else {
    features.resize(static_cast<std::size_t>(a.x.cols()));
    for (Index j = 0; j < a.x.cols(); ++j) features[static_cast<std::size_t>(j)] = j;
  }

  const Index p = static_cast<Index>(features.size()) + 1;
  Matrix z(a.size(), p);
  z.col(0).setOnes();
  for (std::size_t j = 0; j < features.size(); ++j)
    z.col(static_cast<Index>(j) + 1) = a.x.values.col(features[j]);

  Eigen::ColPivHouseholderQR<Matrix> qr(z);
  if (qr.rank() < p) throw RankError("ols_fit: design matrix is rank deficient");
  OutcomeModel m;
  m.beta = qr.solve(a.y);
  m.features = std::move(features);
  return m;
}

double estimate_naive(const NonprobSample& a) {
  if (a.size() < 1) throw DomainError("estimate_naive: empty sample");
  return a.y.mean();
}

double estimate_reg(const ProbSample& b, const OutcomeModel& m) {
  const Vector pred = m.predict_rows(b.x.values);
  return b.d.dot(pred) / b.d.sum();
}

double estimate_ipw(const NonprobSample& a, const ScoreSet& scores) {
  if (scores.pi_hat.size() != a.size()) throw DomainError("estimate_ipw: score length mismatch");
  const Vector w = scores.pi_hat.cwiseInverse();
  return w.dot(a.y) / w.sum();
}

double estimate_dr(const NonprobSample& a, const ProbSample& b, const ScoreSet& scores,
                   const OutcomeModel& m) {
  if (scores.pi_hat.size() != a.size()) throw DomainError("estimate_dr: score length mismatch");
  const Vector w = scores.pi_hat.cwiseInverse();
  const Vector resid = a.y - m.predict_rows(a.x.values);
  const double term_a = w.dot(resid) / w.sum();
  const double term_b = b.d.dot(m.predict_rows(b.x.values)) / b.d.sum();
  return term_a + term_b;
}

double estimate_dipw(const NonprobSample& a, const ScoreSet& dnn_scores) {
  return estimate_ipw(a, dnn_scores);
}

double estimate_ddr(const NonprobSample& a, const ProbSample& b, const ScoreSet& dnn_scores,
                    const OutcomeModel& m) {
  return estimate_dr(a, b, dnn_scores, m);
}

}  // namespace ddr
