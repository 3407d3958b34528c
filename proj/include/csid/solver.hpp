#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csid/observations.hpp"
#include "csid/tensor_model.hpp"

namespace csid {

enum class DifferenceKind { first, second };

/// Difference operator T_n penalizing variation between adjacent rows of an
/// ordinal mode's factor. First differences are (I-1) x I with stencil
/// [1, -1]; second differences are (I-2) x I with stencil [-1, 2, -1].
class SmoothnessOperator {
 public:
  SmoothnessOperator(DifferenceKind kind, std::size_t extent);

  DifferenceKind kind() const noexcept { return kind_; }
  std::size_t extent() const noexcept { return extent_; }
  std::span<const double> stencil() const noexcept { return stencil_; }
  /// Number of rows of T (0 when the mode is too short for the stencil).
  std::size_t rows() const noexcept;

  Matrix dense() const;
  /// ||T A||_F^2 without materializing T.
  double penalty(const Matrix& factor) const;

 private:
  DifferenceKind kind_;
  std::size_t extent_;
  std::vector<double> stencil_;
};

struct SolverConfig {
  std::size_t rank = 10;
  double ridge = 1e-3;
  /// Empty: no smoothing. One value: shared across all eligible modes.
  /// Otherwise one value per input mode.
  std::vector<double> smoothness;
  /// Smoothness on the output factor V of multi-output models.
  double output_smoothness = 0.0;
  DifferenceKind difference = DifferenceKind::first;
  std::size_t max_sweeps = 500;
  double rel_tol = 1e-6;
  std::size_t restarts = 1;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  /// Scale the data term by 1/M.
  bool normalize_by_samples = true;

  /// Per-mode mu for an order-N model; modes with eligible[n] == false get 0.
  /// An empty `eligible` marks every mode eligible.
  std::vector<double> mode_smoothness(std::size_t order,
                                      const std::vector<bool>& eligible = {}) const;
  void validate() const;
};

/// Regularized weighted least-squares cost:
///   (1/M) sum_cells W (Y - X)^2 + rho sum_n ||A_n||^2 + sum_n mu_n ||T_n A_n||^2
/// For multi-output models the output factor V is one more mode with
/// ridge rho and smoothness cfg.output_smoothness.
double objective(const FactorModel& model, const SparseObservationTensor& data,
                 const SolverConfig& cfg, const std::vector<bool>& eligible = {});

/// The data term alone (including the 1/M factor when enabled).
double data_term(const FactorModel& model, const SparseObservationTensor& data,
                 const SolverConfig& cfg);

struct RowSolution {
  Vector row;
  /// Set when the normal equations were singular and a minimum-norm solution
  /// was used instead (only possible with rho = mu = 0).
  bool min_norm_fallback = false;
};

/// Exact minimizer of the cost over row `row` of factor `mode`, all other
/// parameters fixed. `mode == model.order()` addresses the output factor.
RowSolution row_update(std::size_t mode, std::size_t row,
                       const SparseObservationTensor& data,
                       const FactorModel& model, const SolverConfig& cfg,
                       const std::vector<bool>& eligible = {});

/// One Gauss-Seidel pass: modes in order (output factor last), rows
/// ascending, each row replaced by its exact block minimizer.
FactorModel sweep(const FactorModel& model, const SparseObservationTensor& data,
                  const SolverConfig& cfg, const std::vector<bool>& eligible = {});

struct FitReport {
  /// Objective at initialization followed by one entry per sweep, for the
  /// returned restart.
  std::vector<double> objective_trace;
  std::size_t sweeps = 0;
  bool converged = false;
  std::size_t best_restart = 0;
  /// Final objective of every restart (NaN for a diverged restart).
  std::vector<double> restart_objectives;
  std::size_t min_norm_fallbacks = 0;

  double final_objective() const { return objective_trace.back(); }
};

struct FitResult {
  FactorModel model;
  FitReport report;
};

/// Alternating least squares over cfg.restarts random initializations; the
/// restart with the lowest final objective wins. `data` must be
/// single-output.
FitResult fit(const SparseObservationTensor& data, const SolverConfig& cfg,
              const std::vector<bool>& eligible = {});

/// Vector-valued responses via the (N+1)-way stacked model with output
/// factor V (K x F). With K = 1 the stacked model degenerates to the
/// single-output fit: V is a frozen row of ones, never updated and never
/// penalized, so the objective trace equals that of fit() for the same seed.
FitResult fit_multi_output(const SparseObservationTensor& data,
                           const SolverConfig& cfg,
                           const std::vector<bool>& eligible = {});

}  // namespace csid
