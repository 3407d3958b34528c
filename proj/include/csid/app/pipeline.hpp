#pragma once

// End-to-end workflows on tabular data: training under a schema, prediction
// with automatic routing of incomplete rows, evaluation and model selection.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csid/observations.hpp"
#include "csid/schema.hpp"
#include "csid/solver.hpp"
#include "csid/table.hpp"

namespace csid::app {

/// Everything needed to predict: fitted schema, factors, marginals for the
/// missing-input path, and how the model was obtained.
struct ModelArtifact {
  FeatureSchema schema;
  FactorModel model;
  MarginalSet marginals;
  SolverConfig config;
  FitReport report;
};

struct TrainOptions {
  SolverConfig solver;
  std::size_t alphabet = 25;
  double marginal_smoothing = 0.0;
  /// Worker threads for grid search; 0 uses the hardware concurrency.
  /// Results do not depend on this value.
  std::size_t threads = 0;
};

/// Fits quantizers and label maps on `train`, aggregates its complete rows
/// and runs the solver (multi-output when the schema has several responses).
/// Marginals come from every row, including incomplete ones.
ModelArtifact train_model(const Table& train, const SchemaDeclaration& decl,
                          const TrainOptions& options);

/// rows x K predictions; rows with missing or unseen inputs use the
/// conditional-expectation path.
Matrix predict_table(const ModelArtifact& artifact, const Table& rows);

struct Evaluation {
  double rmse = 0.0;
  /// Response values compared (rows with a missing response are skipped).
  std::size_t count = 0;
};

/// Pooled RMSE over every present response of every row.
Evaluation evaluate_table(const ModelArtifact& artifact, const Table& rows);

struct Grid {
  std::vector<std::size_t> ranks{2, 5, 10, 20, 40};
  std::vector<double> ridges{1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> smoothness{0.0, 1e-3, 1e-2, 1e-1, 1.0};

  std::size_t size() const noexcept {
    return ranks.size() * ridges.size() * smoothness.size();
  }
};

struct GridCell {
  std::size_t rank = 0;
  double ridge = 0.0;
  double smoothness = 0.0;
  /// Mean validation RMSE over folds (and repeats).
  double rmse = 0.0;
};

struct CvResult {
  /// One entry per grid point, rank-major then ridge then smoothness.
  std::vector<GridCell> cells;
  std::size_t best = 0;

  const GridCell& best_cell() const { return cells.at(best); }
};

/// k-fold cross-validation of every grid point, averaged over `repeats`
/// fold assignments. Schemas are refitted on each training fold. The lowest
/// mean RMSE wins; ties go to the earlier grid point.
CvResult cross_validate(const Table& data, const SchemaDeclaration& decl,
                        const TrainOptions& base, const Grid& grid,
                        std::size_t folds, std::size_t repeats, std::uint64_t seed);

/// Applies `base` with one grid point's rank, ridge and smoothness.
TrainOptions with_cell(const TrainOptions& base, const GridCell& cell);

struct HoldoutRun {
  CvResult cv;
  double test_rmse = 0.0;
};

struct HoldoutResult {
  std::vector<HoldoutRun> runs;
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
};

/// Repeated random train/test splits: each repeat tunes on its training part
/// by cross-validation, refits the best cell and scores the test part.
/// `mask_fraction` > 0 hides that share of predictor fields in every row
/// before splitting.
HoldoutResult monte_carlo_holdout(const Table& data, const SchemaDeclaration& decl,
                                  const TrainOptions& base, const Grid& grid,
                                  std::size_t folds, std::size_t repeats,
                                  double train_fraction, std::uint64_t seed,
                                  double mask_fraction = 0.0);

/// Replaces a uniformly chosen `fraction` of the predictor fields with "NA".
Table mask_predictors(const Table& data, const SchemaDeclaration& decl,
                      double fraction, std::uint64_t seed);

}  // namespace csid::app
