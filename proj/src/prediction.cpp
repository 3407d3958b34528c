#include "csid/prediction.hpp"

#include <cmath>
#include <string>

#include "csid/errors.hpp"

namespace csid {
namespace {

Vector apply_output(const FactorModel& model, const Vector& row) {
  if (!model.has_output_factor()) return Vector::Constant(1, row.sum());
  return model.output_factor() * row;
}

using Wide = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Marginalized rows mix signs, so the sums are carried in extended precision.
Vector apply_output_wide(const FactorModel& model, const Wide& row) {
  if (!model.has_output_factor()) return Vector::Constant(1, static_cast<double>(row.sum()));
  return (model.output_factor().cast<long double>() * row).cast<double>();
}

}  // namespace

Vector predict(const FactorModel& model, const CellIndex& idx) {
  return apply_output(model, khatri_rao_row(model, idx));
}

Vector predict_partial(const FactorModel& model, const PartialIndex& idx,
                       const MarginalSet& marginals) {
  if (idx.size() != model.order())
    throw DimensionError("index has " + std::to_string(idx.size()) +
                         " modes, model has " + std::to_string(model.order()));
  if (idx.complete()) return predict(model, idx.to_cell());
  Wide row = Wide::Ones(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t n = 0; n < model.order(); ++n) {
    const Matrix& a = model.factor(n);
    if (idx[n]) {
      if (*idx[n] >= static_cast<std::size_t>(a.rows()))
        throw BoundsError(n, *idx[n], static_cast<std::size_t>(a.rows()));
      row.array() *= a.row(*idx[n]).transpose().cast<long double>().array();
      continue;
    }
    if (n >= marginals.size())
      throw ConfigError("no marginal for missing mode " + std::to_string(n));
    const Vector& p = marginals[n];
    if (p.size() != a.rows())
      throw DimensionError("marginal for mode " + std::to_string(n) +
                           " has length " + std::to_string(p.size()));
    row.array() *= (a.transpose().cast<long double>() * p.cast<long double>()).array();
  }
  return apply_output_wide(model, row);
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw DimensionError("rmse given " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(targets.size()) +
                         " targets");
  if (predictions.empty()) throw DataError("rmse of an empty list");
  double sse = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(predictions.size()));
}

}  // namespace csid
