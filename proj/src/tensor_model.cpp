#include "csid/tensor_model.hpp"

#include <string>

#include "csid/errors.hpp"

namespace csid {

CellIndex CellIndex::from_one_based(std::span<const value_type> one_based) {
  std::vector<value_type> idx;
  idx.reserve(one_based.size());
  for (std::size_t n = 0; n < one_based.size(); ++n) {
    if (one_based[n] == 0) throw BoundsError(n, 0, 0);
    idx.push_back(one_based[n] - 1);
  }
  return CellIndex(std::move(idx));
}

FactorModel::FactorModel(std::vector<Matrix> factors,
                         std::optional<Matrix> output_factor)
    : factors_(std::move(factors)), output_(std::move(output_factor)) {
  if (factors_.empty()) throw DimensionError("factor model needs at least one mode");
  rank_ = static_cast<std::size_t>(factors_.front().cols());
  if (rank_ == 0) throw DimensionError("factor model rank must be positive");
  for (std::size_t n = 0; n < factors_.size(); ++n) {
    const Matrix& a = factors_[n];
    if (static_cast<std::size_t>(a.cols()) != rank_)
      throw DimensionError("factor " + std::to_string(n) + " has " +
                           std::to_string(a.cols()) + " columns, expected " +
                           std::to_string(rank_));
    if (a.rows() == 0)
      throw DimensionError("factor " + std::to_string(n) + " has no rows");
    if (!a.allFinite())
      throw NumericError("factor " + std::to_string(n) +
                         " has non-finite entries");
  }
  if (output_) {
    if (static_cast<std::size_t>(output_->cols()) != rank_ || output_->rows() == 0)
      throw DimensionError("output factor must be K x " + std::to_string(rank_));
    if (!output_->allFinite())
      throw NumericError("output factor has non-finite entries");
  }
}

std::size_t FactorModel::extent(std::size_t mode) const {
  return static_cast<std::size_t>(factor(mode).rows());
}

std::vector<std::size_t> FactorModel::shape() const {
  std::vector<std::size_t> s;
  s.reserve(factors_.size());
  for (const auto& a : factors_) s.push_back(static_cast<std::size_t>(a.rows()));
  return s;
}

const Matrix& FactorModel::factor(std::size_t mode) const {
  if (mode >= factors_.size())
    throw DimensionError("mode " + std::to_string(mode) + " out of range for order " +
                         std::to_string(factors_.size()));
  return factors_[mode];
}

const Matrix& FactorModel::output_factor() const {
  if (!output_) throw ConfigError("model has no output factor");
  return *output_;
}

FactorModel FactorModel::stacked() const {
  std::vector<Matrix> all = factors_;
  if (output_) all.push_back(*output_);
  return FactorModel(std::move(all));
}

void FactorModel::check_index(const CellIndex& idx,
                              std::optional<std::size_t> skip_mode) const {
  if (idx.size() != factors_.size())
    throw DimensionError("index has " + std::to_string(idx.size()) +
                         " modes, model has " + std::to_string(factors_.size()));
  for (std::size_t n = 0; n < factors_.size(); ++n) {
    if (skip_mode && *skip_mode == n) continue;
    const auto extent = static_cast<std::size_t>(factors_[n].rows());
    if (idx[n] >= extent) throw BoundsError(n, idx[n], extent);
  }
}

double eval_cell(const FactorModel& model, const CellIndex& idx) {
  if (model.has_output_factor())
    throw DimensionError("eval_cell needs a single-output model; use predict");
  return khatri_rao_row(model, idx).sum();
}

Vector khatri_rao_row(const FactorModel& model, const CellIndex& idx,
                      std::size_t skip_mode) {
  if (skip_mode >= model.order())
    throw DimensionError("skip mode " + std::to_string(skip_mode) +
                         " out of range");
  model.check_index(idx, skip_mode);
  Vector row = Vector::Ones(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t n = 0; n < model.order(); ++n) {
    if (n == skip_mode) continue;
    row.array() *= model.factor(n).row(idx[n]).transpose().array();
  }
  return row;
}

Vector khatri_rao_row(const FactorModel& model, const CellIndex& idx) {
  model.check_index(idx);
  Vector row = Vector::Ones(static_cast<Eigen::Index>(model.rank()));
  for (std::size_t n = 0; n < model.order(); ++n)
    row.array() *= model.factor(n).row(idx[n]).transpose().array();
  return row;
}

FactorModel mode_vector_product(const FactorModel& model, std::size_t mode,
                                const Vector& u) {
  const Matrix& a = model.factor(mode);
  if (u.size() != a.rows())
    throw DimensionError("vector of length " + std::to_string(u.size()) +
                         " does not match extent " + std::to_string(a.rows()) +
                         " of mode " + std::to_string(mode));
  std::vector<Matrix> factors = model.factors();
  factors[mode] = u.transpose() * a;
  std::optional<Matrix> v;
  if (model.has_output_factor()) v = model.output_factor();
  return FactorModel(std::move(factors), std::move(v));
}

}  // namespace csid
