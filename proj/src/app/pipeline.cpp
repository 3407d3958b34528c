#include "csid/app/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "csid/errors.hpp"
#include "csid/prediction.hpp"
#include "csid/splits.hpp"

namespace csid::app {
namespace {

// A training set reduced to what the solver needs.
struct Prepared {
  FeatureSchema schema;
  SparseObservationTensor data;
  MarginalSet marginals;
};

Prepared prepare(const Table& train, const SchemaDeclaration& decl,
                 const TrainOptions& options) {
  FeatureSchema schema = fit_schema(train, decl, options.alphabet);
  const EncodedRows rows = encode_rows(train, schema, true);
  const std::vector<Sample> samples = complete_samples(rows);
  if (samples.empty())
    throw DataError("no training row has every predictor and response present");
  SparseObservationTensor data = aggregate(samples, schema.shape());
  MarginalSet marginals = fit_marginals(rows.inputs, schema.shape(), options.marginal_smoothing);
  return {std::move(schema), std::move(data), std::move(marginals)};
}

FitResult solve(const Prepared& p, const SolverConfig& cfg) {
  const auto eligible = p.schema.eligibility();
  return p.data.outputs() > 1 ? fit_multi_output(p.data, cfg, eligible)
                              : fit(p.data, cfg, eligible);
}

Matrix predict_encoded(const FactorModel& model, const MarginalSet& marginals,
                       const EncodedRows& rows) {
  const auto K = static_cast<Eigen::Index>(model.outputs());
  Matrix out(static_cast<Eigen::Index>(rows.inputs.size()), K);
  for (std::size_t r = 0; r < rows.inputs.size(); ++r) {
    const PartialIndex& idx = rows.inputs[r];
    out.row(static_cast<Eigen::Index>(r)) =
        (idx.complete() ? predict(model, idx.to_cell()) : predict_partial(model, idx, marginals))
            .transpose();
  }
  return out;
}

Evaluation score(const Matrix& predictions, const Matrix& targets) {
  std::vector<double> p, t;
  for (Eigen::Index r = 0; r < targets.rows(); ++r)
    for (Eigen::Index j = 0; j < targets.cols(); ++j)
      if (std::isfinite(targets(r, j))) {
        p.push_back(predictions(r, j));
        t.push_back(targets(r, j));
      }
  if (t.empty()) throw DataError("no response values to evaluate against");
  return {rmse(p, t), t.size()};
}

// Runs task(i) for i in [0, n) on up to `threads` workers. The first
// exception by index is rethrown after all workers finish.
template <class Task>
void parallel_for(std::size_t n, std::size_t threads, Task task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

ModelArtifact train_model(const Table& train, const SchemaDeclaration& decl,
                          const TrainOptions& options) {
  Prepared p = prepare(train, decl, options);
  FitResult r = solve(p, options.solver);
  return {std::move(p.schema), std::move(r.model), std::move(p.marginals), options.solver,
          std::move(r.report)};
}

Matrix predict_table(const ModelArtifact& artifact, const Table& rows) {
  return predict_encoded(artifact.model, artifact.marginals,
                         encode_rows(rows, artifact.schema, false));
}

Evaluation evaluate_table(const ModelArtifact& artifact, const Table& rows) {
  const EncodedRows enc = encode_rows(rows, artifact.schema, true);
  return score(predict_encoded(artifact.model, artifact.marginals, enc), enc.responses);
}

TrainOptions with_cell(const TrainOptions& base, const GridCell& cell) {
  TrainOptions o = base;
  o.solver.rank = cell.rank;
  o.solver.ridge = cell.ridge;
  o.solver.smoothness = {cell.smoothness};
  return o;
}

CvResult cross_validate(const Table& data, const SchemaDeclaration& decl,
                        const TrainOptions& base, const Grid& grid,
                        std::size_t folds, std::size_t repeats, std::uint64_t seed) {
  if (grid.size() == 0) throw ConfigError("hyperparameter grid is empty");
  if (repeats == 0) throw ConfigError("at least one repeat is required");
  CvResult result;
  for (std::size_t rank : grid.ranks)
    for (double ridge : grid.ridges)
      for (double mu : grid.smoothness) result.cells.push_back({rank, ridge, mu, 0.0});

  std::size_t runs = 0;
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    for (const Split& fold : kfold(data.size(), folds, seed + rep)) {
      const Prepared p = prepare(data.subset(fold.train), decl, base);
      const Table validation = data.subset(fold.test);
      const EncodedRows enc = encode_rows(validation, p.schema, true);
      std::vector<double> fold_rmse(result.cells.size());
      parallel_for(result.cells.size(), base.threads, [&](std::size_t c) {
        const FitResult r = solve(p, with_cell(base, result.cells[c]).solver);
        fold_rmse[c] = score(predict_encoded(r.model, p.marginals, enc), enc.responses).rmse;
      });
      for (std::size_t c = 0; c < result.cells.size(); ++c) result.cells[c].rmse += fold_rmse[c];
      ++runs;
    }
  }
  for (GridCell& cell : result.cells) cell.rmse /= static_cast<double>(runs);
  for (std::size_t c = 1; c < result.cells.size(); ++c)
    if (result.cells[c].rmse < result.cells[result.best].rmse) result.best = c;
  return result;
}

Table mask_predictors(const Table& data, const SchemaDeclaration& decl, double fraction,
                      std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw ConfigError("mask fraction must lie in [0, 1)");
  std::vector<std::size_t> columns;
  for (const auto& p : decl.predictors) columns.push_back(data.column(p.name));
  std::vector<std::pair<std::size_t, std::size_t>> fields;
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t c : columns) fields.emplace_back(r, c);
  std::mt19937_64 rng(seed);
  for (std::size_t i = fields.size(); i > 1; --i)
    std::swap(fields[i - 1], fields[static_cast<std::size_t>(rng() % i)]);
  const auto hidden = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(fields.size())));
  Table out = data;
  for (std::size_t i = 0; i < hidden; ++i) out.rows[fields[i].first][fields[i].second] = "NA";
  return out;
}

HoldoutResult monte_carlo_holdout(const Table& data, const SchemaDeclaration& decl,
                                  const TrainOptions& base, const Grid& grid,
                                  std::size_t folds, std::size_t repeats,
                                  double train_fraction, std::uint64_t seed,
                                  double mask_fraction) {
  if (repeats == 0) throw ConfigError("at least one repeat is required");
  HoldoutResult result;
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    const std::uint64_t run_seed = seed + rep;
    const Table source =
        mask_fraction > 0.0 ? mask_predictors(data, decl, mask_fraction, run_seed) : data;
    const Split split = train_test_split(source.size(), train_fraction, run_seed);
    const Table train = source.subset(split.train);
    const Table test = source.subset(split.test);
    HoldoutRun run;
    run.cv = cross_validate(train, decl, base, grid, folds, 1, run_seed);
    const ModelArtifact model = train_model(train, decl, with_cell(base, run.cv.best_cell()));
    run.test_rmse = evaluate_table(model, test).rmse;
    result.runs.push_back(std::move(run));
  }
  double sum = 0.0;
  for (const auto& r : result.runs) sum += r.test_rmse;
  result.mean_rmse = sum / static_cast<double>(repeats);
  double ss = 0.0;
  for (const auto& r : result.runs) ss += std::pow(r.test_rmse - result.mean_rmse, 2);
  result.std_rmse = repeats > 1 ? std::sqrt(ss / static_cast<double>(repeats - 1)) : 0.0;
  return result;
}

}  // namespace csid::app
