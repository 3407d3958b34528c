#include "csid/solver.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "als_engine.hpp"
#include "csid/errors.hpp"

namespace csid {
namespace {

std::vector<Matrix> engine_factors(const FactorModel& model) {
  std::vector<Matrix> all = model.factors();
  if (model.has_output_factor()) all.push_back(model.output_factor());
  return all;
}

FactorModel rebuild(const std::vector<Matrix>& factors, std::size_t order,
                    bool with_output) {
  std::vector<Matrix> inputs(factors.begin(),
                             factors.begin() + static_cast<std::ptrdiff_t>(order));
  if (!with_output) return FactorModel(std::move(inputs));
  return FactorModel(std::move(inputs), factors[order]);
}

void check_model_matches(const FactorModel& model,
                         const SparseObservationTensor& data) {
  if (model.shape() != data.shape())
    throw DimensionError("model shape does not match the data shape");
  if (model.outputs() != data.outputs())
    throw DimensionError("model has " + std::to_string(model.outputs()) +
                         " outputs, data has " + std::to_string(data.outputs()));
}

// Weighted spread of the responses, used to size the initial factors.
double response_scale(const detail::Problem& p) {
  double wsum = 0.0, mean = 0.0;
  for (std::size_t e = 0; e < p.nnz(); ++e) {
    wsum += p.weight[e];
    mean += p.weight[e] * p.response[e];
  }
  mean /= wsum;
  double var = 0.0, sq = 0.0;
  for (std::size_t e = 0; e < p.nnz(); ++e) {
    const double d = p.response[e] - mean;
    var += p.weight[e] * d * d;
    sq += p.weight[e] * p.response[e] * p.response[e];
  }
  const double sd = std::sqrt(var / wsum);
  if (sd > 0.0) return sd;
  const double rms = std::sqrt(sq / wsum);
  return rms > 0.0 ? rms : 1.0;
}

std::vector<Matrix> random_factors(const detail::Problem& p, std::size_t rank,
                                   double init_scale, std::uint64_t seed,
                                   std::size_t restart) {
  std::size_t free_modes = 0;
  for (bool f : p.frozen) free_modes += f ? 0 : 1;
  const double s =
      init_scale * std::pow(response_scale(p) / static_cast<double>(rank),
                            1.0 / static_cast<double>(free_modes));
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uniform(-s, s);
  std::vector<Matrix> factors;
  for (std::size_t k = 0; k < p.modes(); ++k) {
    const auto rows = static_cast<Eigen::Index>(p.extents[k]);
    const auto cols = static_cast<Eigen::Index>(rank);
    if (p.frozen[k]) {
      factors.push_back(Matrix::Ones(rows, cols));
      continue;
    }
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index f = 0; f < cols; ++f) a(i, f) = uniform(rng);
    factors.push_back(std::move(a));
  }
  return factors;
}

FitResult run_fit(const SparseObservationTensor& data, const SolverConfig& cfg,
                  const std::vector<bool>& eligible, bool with_output) {
  const detail::Problem problem =
      detail::build_problem(data, cfg, eligible, data.order(), with_output);

  std::optional<FitResult> best;
  std::vector<double> finals;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    detail::AlsEngine engine(
        problem, random_factors(problem, cfg.rank, cfg.init_scale, cfg.seed, r));
    FitReport report;
    report.objective_trace.push_back(engine.objective());
    bool diverged = !std::isfinite(report.objective_trace.back());
    while (!diverged && report.sweeps < cfg.max_sweeps) {
      report.min_norm_fallbacks += engine.sweep();
      ++report.sweeps;
      const double prev = report.objective_trace.back();
      const double cur = engine.objective();
      report.objective_trace.push_back(cur);
      if (!std::isfinite(cur) || !engine.finite()) {
        diverged = true;
        break;
      }
      const double denom = std::max(std::abs(prev), std::numeric_limits<double>::min());
      if (std::abs(prev - cur) / denom < cfg.rel_tol) {
        report.converged = true;
        break;
      }
    }
    if (diverged) {
      finals.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    finals.push_back(report.final_objective());
    if (!best || report.final_objective() < best->report.final_objective()) {
      report.best_restart = r;
      best.emplace(FitResult{rebuild(engine.factors(), data.order(), with_output),
                             std::move(report)});
    }
  }
  if (!best) throw NumericError("every restart diverged to non-finite values");
  best->report.restart_objectives = std::move(finals);
  return std::move(*best);
}

}  // namespace

SmoothnessOperator::SmoothnessOperator(DifferenceKind kind, std::size_t extent)
    : kind_(kind), extent_(extent) {
  if (kind == DifferenceKind::first)
    stencil_ = {1.0, -1.0};
  else
    stencil_ = {-1.0, 2.0, -1.0};
}

std::size_t SmoothnessOperator::rows() const noexcept {
  return extent_ >= stencil_.size() ? extent_ - stencil_.size() + 1 : 0;
}

Matrix SmoothnessOperator::dense() const {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(rows()),
                          static_cast<Eigen::Index>(extent_));
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t s = 0; s < stencil_.size(); ++s)
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r + s)) = stencil_[s];
  return t;
}

double SmoothnessOperator::penalty(const Matrix& factor) const {
  if (static_cast<std::size_t>(factor.rows()) != extent_)
    throw DimensionError("factor has " + std::to_string(factor.rows()) +
                         " rows, operator expects " + std::to_string(extent_));
  double total = 0.0;
  Eigen::RowVectorXd diff(factor.cols());
  for (std::size_t r = 0; r < rows(); ++r) {
    diff.setZero();
    for (std::size_t s = 0; s < stencil_.size(); ++s)
      diff.noalias() += stencil_[s] * factor.row(static_cast<Eigen::Index>(r + s));
    total += diff.squaredNorm();
  }
  return total;
}

std::vector<double> SolverConfig::mode_smoothness(
    std::size_t order, const std::vector<bool>& eligible) const {
  if (!eligible.empty() && eligible.size() != order)
    throw DimensionError("eligibility mask has " + std::to_string(eligible.size()) +
                         " entries for " + std::to_string(order) + " modes");
  std::vector<double> mu(order, 0.0);
  if (smoothness.size() == 1) {
    mu.assign(order, smoothness.front());
  } else if (!smoothness.empty()) {
    if (smoothness.size() != order)
      throw ConfigError("smoothness has " + std::to_string(smoothness.size()) +
                        " values for " + std::to_string(order) + " modes");
    mu = smoothness;
  }
  for (std::size_t n = 0; n < order; ++n)
    if (!eligible.empty() && !eligible[n]) mu[n] = 0.0;
  return mu;
}

void SolverConfig::validate() const {
  if (rank == 0) throw ConfigError("rank must be positive");
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw ConfigError("ridge must be a finite non-negative number");
  for (double mu : smoothness)
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw ConfigError("smoothness must be finite and non-negative");
  if (!(output_smoothness >= 0.0))
    throw ConfigError("output smoothness must be non-negative");
  if (restarts == 0) throw ConfigError("at least one restart is required");
  if (!(init_scale > 0.0)) throw ConfigError("init scale must be positive");
  if (!(rel_tol >= 0.0)) throw ConfigError("tolerance must be non-negative");
}

double objective(const FactorModel& model, const SparseObservationTensor& data,
                 const SolverConfig& cfg, const std::vector<bool>& eligible) {
  check_model_matches(model, data);
  const bool with_output = model.has_output_factor();
  const detail::Problem p =
      detail::build_problem(data, cfg, eligible, model.order(), with_output);
  const detail::AlsEngine engine(p, engine_factors(model));
  const double value = engine.objective();
  if (!std::isfinite(value)) throw NumericError("objective is not finite");
  return value;
}

double data_term(const FactorModel& model, const SparseObservationTensor& data,
                 const SolverConfig& cfg) {
  check_model_matches(model, data);
  const bool with_output = model.has_output_factor();
  const detail::Problem p =
      detail::build_problem(data, cfg, {}, model.order(), with_output);
  return detail::AlsEngine(p, engine_factors(model)).data_term();
}

RowSolution row_update(std::size_t mode, std::size_t row,
                       const SparseObservationTensor& data,
                       const FactorModel& model, const SolverConfig& cfg,
                       const std::vector<bool>& eligible) {
  check_model_matches(model, data);
  const bool with_output = model.has_output_factor();
  const detail::Problem p =
      detail::build_problem(data, cfg, eligible, model.order(), with_output);
  return detail::AlsEngine(p, engine_factors(model)).solve_row(mode, row);
}

FactorModel sweep(const FactorModel& model, const SparseObservationTensor& data,
                  const SolverConfig& cfg, const std::vector<bool>& eligible) {
  check_model_matches(model, data);
  const bool with_output = model.has_output_factor();
  const detail::Problem p =
      detail::build_problem(data, cfg, eligible, model.order(), with_output);
  detail::AlsEngine engine(p, engine_factors(model));
  engine.sweep();
  return rebuild(engine.factors(), model.order(), with_output);
}

FitResult fit(const SparseObservationTensor& data, const SolverConfig& cfg,
              const std::vector<bool>& eligible) {
  return run_fit(data, cfg, eligible, false);
}

FitResult fit_multi_output(const SparseObservationTensor& data,
                           const SolverConfig& cfg,
                           const std::vector<bool>& eligible) {
  return run_fit(data, cfg, eligible, true);
}

}  // namespace csid
