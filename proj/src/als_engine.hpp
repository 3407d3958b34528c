#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csid/observations.hpp"
#include "csid/solver.hpp"
#include "csid/tensor_model.hpp"

namespace csid::detail {

// Flattened completion problem over `modes` factor matrices. Multi-output
// data is expanded to (N+1)-way entries (cell, j) carrying the cell weight.
struct Problem {
  std::vector<std::size_t> extents;
  std::vector<double> ridge;
  std::vector<double> smoothness;
  std::vector<SmoothnessOperator> operators;
  // Frozen modes are never updated and carry no penalty (the degenerate
  // K = 1 output factor).
  std::vector<bool> frozen;
  std::vector<std::uint32_t> index;  // nnz x modes, row-major
  std::vector<double> weight;
  std::vector<double> response;
  double data_scale = 1.0;
  // groups[k][i]: entries whose mode-k index is i.
  std::vector<std::vector<std::vector<std::uint32_t>>> groups;

  std::size_t modes() const noexcept { return extents.size(); }
  std::size_t nnz() const noexcept { return weight.size(); }
};

// `with_output` adds the output mode (extent K, or a frozen extent-1 mode
// when K == 1). Without it, data must be single-output.
Problem build_problem(const SparseObservationTensor& data,
                      const SolverConfig& cfg, const std::vector<bool>& eligible,
                      std::size_t order, bool with_output);

// Factors are held row-major so the rows gathered per entry are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class AlsEngine {
 public:
  AlsEngine(const Problem& problem, std::vector<Matrix> factors);

  double objective() const;
  double data_term() const;
  RowSolution solve_row(std::size_t mode, std::size_t row) const;
  // Returns the number of minimum-norm fallbacks taken.
  std::size_t sweep();

  std::vector<Matrix> factors() const;
  bool finite() const;

 private:
  const Problem& problem_;
  std::vector<RowMatrix> factors_;
  std::size_t rank_;
};

}  // namespace csid::detail
