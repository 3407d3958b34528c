#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace csid {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Multi-index (i_1, ..., i_N) into the discretized input grid.
///
/// Stored 0-based. Files and user-facing text use 1-based indices; the
/// conversion happens once when data is ingested (see from_one_based).
class CellIndex {
 public:
  using value_type = std::uint32_t;

  CellIndex() = default;
  explicit CellIndex(std::vector<value_type> zero_based)
      : idx_(std::move(zero_based)) {}
  CellIndex(std::initializer_list<value_type> zero_based) : idx_(zero_based) {}

  static CellIndex from_one_based(std::span<const value_type> one_based);
  static CellIndex from_one_based(std::initializer_list<value_type> one_based) {
    return from_one_based(std::span<const value_type>(one_based.begin(),
                                                      one_based.size()));
  }

  std::size_t size() const noexcept { return idx_.size(); }
  value_type operator[](std::size_t mode) const { return idx_[mode]; }
  value_type& operator[](std::size_t mode) { return idx_[mode]; }
  std::span<const value_type> values() const noexcept { return idx_; }

  auto operator<=>(const CellIndex&) const = default;

 private:
  std::vector<value_type> idx_;
};

/// CPD factors A_1..A_N (each I_n x F) plus an optional output factor V
/// (K x F) for vector-valued responses. Immutable after construction.
class FactorModel {
 public:
  explicit FactorModel(std::vector<Matrix> factors,
                       std::optional<Matrix> output_factor = std::nullopt);

  std::size_t order() const noexcept { return factors_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t extent(std::size_t mode) const;
  std::vector<std::size_t> shape() const;

  const Matrix& factor(std::size_t mode) const;
  const std::vector<Matrix>& factors() const noexcept { return factors_; }

  bool has_output_factor() const noexcept { return output_.has_value(); }
  const Matrix& output_factor() const;
  /// Number of response components: K with an output factor, else 1.
  std::size_t outputs() const noexcept {
    return output_ ? static_cast<std::size_t>(output_->rows()) : 1;
  }

  /// The (N+1)-way model with V appended as an ordinary last mode.
  FactorModel stacked() const;

  /// Throws BoundsError naming the first offending mode. Components for
  /// `skip_mode` are not checked.
  void check_index(const CellIndex& idx,
                   std::optional<std::size_t> skip_mode = std::nullopt) const;

 private:
  std::vector<Matrix> factors_;
  std::optional<Matrix> output_;
  std::size_t rank_ = 0;
};

/// X(i_1..i_N) = sum_f prod_n A_n(i_n, f). Requires a single-output model.
double eval_cell(const FactorModel& model, const CellIndex& idx);

/// Hadamard product of the rows A_n(i_n, :) over all n != skip_mode, i.e.
/// one row of the Khatri-Rao product of the other factors.
Vector khatri_rao_row(const FactorModel& model, const CellIndex& idx,
                      std::size_t skip_mode);

/// Hadamard product of the rows A_n(i_n, :) over every input mode.
Vector khatri_rao_row(const FactorModel& model, const CellIndex& idx);

/// n-mode product with a vector: A_mode becomes the single row u^T A_mode.
FactorModel mode_vector_product(const FactorModel& model, std::size_t mode,
                                const Vector& u);

}  // namespace csid
