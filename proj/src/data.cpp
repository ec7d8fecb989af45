#include "ddr/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ddr {

void validate(const CovariateMatrix& x) {
  if (x.values.cols() < 1) throw SchemaError("covariate matrix needs r >= 1 columns");
  if (static_cast<Index>(x.column_names.size()) != x.values.cols())
    throw SchemaError("covariate column names do not match matrix width");
  if (!x.values.allFinite()) throw DomainError("covariate matrix contains non-finite values");
  std::set<std::string> names(x.column_names.begin(), x.column_names.end());
  if (static_cast<Index>(names.size()) != x.values.cols())
    throw SchemaError("duplicate covariate column names");
}

void validate(const NonprobSample& a) {
  validate(a.x);
  if (a.y.size() != a.x.rows()) throw SchemaError("outcome length does not match covariate rows");
  if (a.size() < 2) throw DomainError("nonprobability sample needs n_A >= 2");
  if (!a.y.allFinite()) throw DomainError("outcome vector contains non-finite values");
}

void validate(const ProbSample& b) {
  validate(b.x);
  if (b.d.size() != b.x.rows()) throw SchemaError("weight length does not match covariate rows");
  if (!b.d.allFinite() || (b.d.array() <= 0.0).any())
    throw DomainError("design weights must be positive and finite");
}

void validate(const FinitePopulation& pop) {
  validate(pop.x);
  if (pop.y.size() != pop.x.rows() || pop.pi_a.size() != pop.x.rows())
    throw SchemaError("population vectors do not match covariate rows");
  if ((pop.pi_a.array() <= 0.0).any() || (pop.pi_a.array() >= 1.0).any())
    throw DomainError("true selection probabilities must lie in (0,1)");
  if (pop.mu_y != pop.y.mean()) throw DomainError("mu_y does not equal mean(y)");
}

namespace {

CovariateMatrix select_columns(const CovariateMatrix& x, const std::vector<std::string>& names) {
  CovariateMatrix out;
  out.column_names = names;
  out.values.resize(x.rows(), static_cast<Index>(names.size()));
  for (Index j = 0; j < static_cast<Index>(names.size()); ++j) {
    auto it = std::find(x.column_names.begin(), x.column_names.end(), names[j]);
    out.values.col(j) = x.values.col(it - x.column_names.begin());
  }
  return out;
}

}  // namespace

std::pair<NonprobSample, ProbSample> align_covariates(const NonprobSample& a,
                                                      const ProbSample& b) {
  std::vector<std::string> common;
  for (const auto& name : a.x.column_names) {
    if (std::find(b.x.column_names.begin(), b.x.column_names.end(), name) !=
        b.x.column_names.end())
      common.push_back(name);
  }
  if (common.empty()) throw SchemaError("samples share no covariate columns");
  NonprobSample a2{select_columns(a.x, common), a.y};
  ProbSample b2{select_columns(b.x, common), b.d};
  return {std::move(a2), std::move(b2)};
}

std::pair<NonprobSample, ProbSample> rescale_minmax(const NonprobSample& a,
                                                    const ProbSample& b) {
  if (a.x.column_names != b.x.column_names)
    throw SchemaError("rescale_minmax requires aligned covariates");
  NonprobSample a2 = a;
  ProbSample b2 = b;
  for (Index j = 0; j < a.x.cols(); ++j) {
    const double lo = std::min(a.x.values.col(j).minCoeff(), b.x.values.col(j).minCoeff());
    const double hi = std::max(a.x.values.col(j).maxCoeff(), b.x.values.col(j).maxCoeff());
    const double span = hi - lo;
    if (span > 0.0) {
      a2.x.values.col(j) = (a.x.values.col(j).array() - lo) / span;
      b2.x.values.col(j) = (b.x.values.col(j).array() - lo) / span;
    } else {
      a2.x.values.col(j).setZero();
      b2.x.values.col(j).setZero();
    }
  }
  return {std::move(a2), std::move(b2)};
}

}  // namespace ddr
