#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csid/partial_index.hpp"
#include "csid/tensor_model.hpp"

namespace csid {

/// One training pair: a grid cell and its (possibly vector) response.
struct Sample {
  CellIndex index;
  std::vector<double> response;

  Sample() = default;
  Sample(CellIndex idx, double y) : index(std::move(idx)), response{y} {}
  Sample(CellIndex idx, std::vector<double> y)
      : index(std::move(idx)), response(std::move(y)) {}
};

/// Weight tensor W (sample multiplicity per cell) and mean-response tensor
/// Y, stored as COO entries sorted by cell index.
class SparseObservationTensor {
 public:
  SparseObservationTensor(std::vector<std::size_t> shape, std::size_t outputs,
                          std::vector<CellIndex> cells,
                          std::vector<std::uint64_t> weights, Matrix means);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t outputs() const noexcept { return outputs_; }
  std::size_t nnz() const noexcept { return cells_.size(); }
  /// Total weight M: the number of samples aggregated.
  std::uint64_t sample_count() const noexcept { return sample_count_; }

  const CellIndex& cell(std::size_t e) const { return cells_[e]; }
  std::uint64_t weight(std::size_t e) const { return weights_[e]; }
  /// Mean response of entry e; row e of an nnz x K matrix.
  auto mean(std::size_t e) const { return means_.row(static_cast<Eigen::Index>(e)); }
  double mean_scalar(std::size_t e) const { return means_(static_cast<Eigen::Index>(e), 0); }
  const Matrix& means() const noexcept { return means_; }
  const std::vector<CellIndex>& cells() const noexcept { return cells_; }

 private:
  std::vector<std::size_t> shape_;
  std::size_t outputs_;
  std::vector<CellIndex> cells_;
  std::vector<std::uint64_t> weights_;
  Matrix means_;
  std::uint64_t sample_count_ = 0;
};

/// Groups samples by cell: weight = multiplicity, response = component-wise
/// mean. All responses must share one length.
SparseObservationTensor aggregate(std::span<const Sample> samples,
                                  std::vector<std::size_t> shape);

/// Per-mode empirical PMFs p_n; the rank-one joint PMF is their product.
class MarginalSet {
 public:
  MarginalSet() = default;
  explicit MarginalSet(std::vector<Vector> pmfs);

  std::size_t size() const noexcept { return pmfs_.size(); }
  const Vector& operator[](std::size_t mode) const;
  const std::vector<Vector>& pmfs() const noexcept { return pmfs_; }

 private:
  std::vector<Vector> pmfs_;
};

/// p_n(i) = (count of mode-n value i + smoothing) / (observed count + I_n *
/// smoothing). Missing entries are skipped per mode.
MarginalSet fit_marginals(std::span<const PartialIndex> samples,
                          const std::vector<std::size_t>& shape,
                          double smoothing = 0.0);
MarginalSet fit_marginals(std::span<const CellIndex> samples,
                          const std::vector<std::size_t>& shape,
                          double smoothing = 0.0);

}  // namespace csid
