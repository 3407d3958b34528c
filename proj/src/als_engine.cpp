#include "als_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csid/errors.hpp"

namespace csid::detail {

Problem build_problem(const SparseObservationTensor& data,
                      const SolverConfig& cfg, const std::vector<bool>& eligible,
                      std::size_t order, bool with_output) {
  cfg.validate();
  if (data.order() != order)
    throw DimensionError("data has " + std::to_string(data.order()) +
                         " modes, model has " + std::to_string(order));
  if (!with_output && data.outputs() != 1)
    throw DimensionError("single-output fit given " +
                         std::to_string(data.outputs()) + " responses");
  if (data.nnz() == 0) throw DataError("no observations to fit");

  const std::size_t outputs = data.outputs();
  Problem p;
  p.extents = data.shape();
  p.smoothness = cfg.mode_smoothness(order, eligible);
  p.ridge.assign(order, cfg.ridge);
  p.frozen.assign(order, false);
  if (with_output) {
    p.extents.push_back(outputs);
    const bool degenerate = outputs == 1;
    p.ridge.push_back(degenerate ? 0.0 : cfg.ridge);
    p.smoothness.push_back(degenerate ? 0.0 : cfg.output_smoothness);
    p.frozen.push_back(degenerate);
  }
  for (std::size_t k = 0; k < p.modes(); ++k)
    p.operators.emplace_back(cfg.difference, p.extents[k]);

  const std::size_t modes = p.modes();
  const std::size_t reps = with_output ? outputs : 1;
  p.index.reserve(data.nnz() * reps * modes);
  p.weight.reserve(data.nnz() * reps);
  p.response.reserve(data.nnz() * reps);
  for (std::size_t e = 0; e < data.nnz(); ++e) {
    const auto cell = data.cell(e).values();
    for (std::size_t j = 0; j < reps; ++j) {
      p.index.insert(p.index.end(), cell.begin(), cell.end());
      if (with_output) p.index.push_back(static_cast<std::uint32_t>(j));
      p.weight.push_back(static_cast<double>(data.weight(e)));
      p.response.push_back(data.means()(static_cast<Eigen::Index>(e),
                                        static_cast<Eigen::Index>(j)));
    }
  }
  p.data_scale = cfg.normalize_by_samples
                     ? 1.0 / static_cast<double>(data.sample_count())
                     : 1.0;

  p.groups.resize(modes);
  for (std::size_t k = 0; k < modes; ++k) p.groups[k].resize(p.extents[k]);
  for (std::size_t e = 0; e < p.nnz(); ++e)
    for (std::size_t k = 0; k < modes; ++k)
      p.groups[k][p.index[e * modes + k]].push_back(static_cast<std::uint32_t>(e));
  return p;
}

AlsEngine::AlsEngine(const Problem& problem, std::vector<Matrix> factors)
    : problem_(problem), factors_(factors.begin(), factors.end()) {
  if (factors_.size() != problem_.modes())
    throw DimensionError("engine given " + std::to_string(factors_.size()) +
                         " factors for " + std::to_string(problem_.modes()) +
                         " modes");
  rank_ = static_cast<std::size_t>(factors_.front().cols());
  for (std::size_t k = 0; k < factors_.size(); ++k)
    if (static_cast<std::size_t>(factors_[k].rows()) != problem_.extents[k] ||
        static_cast<std::size_t>(factors_[k].cols()) != rank_)
      throw DimensionError("factor " + std::to_string(k) +
                           " does not match the data shape");
}

std::vector<Matrix> AlsEngine::factors() const {
  return std::vector<Matrix>(factors_.begin(), factors_.end());
}

bool AlsEngine::finite() const {
  for (const RowMatrix& a : factors_)
    if (!a.allFinite()) return false;
  return true;
}

double AlsEngine::data_term() const {
  const std::size_t modes = problem_.modes();
  const auto F = static_cast<Eigen::Index>(rank_);
  Vector q(F);
  double sse = 0.0;
  for (std::size_t e = 0; e < problem_.nnz(); ++e) {
    q.setOnes();
    const std::uint32_t* idx = &problem_.index[e * modes];
    for (std::size_t n = 0; n < modes; ++n)
      q.array() *= factors_[n].row(idx[n]).transpose().array();
    const double r = problem_.response[e] - q.sum();
    sse += problem_.weight[e] * r * r;
  }
  return problem_.data_scale * sse;
}

double AlsEngine::objective() const {
  double value = data_term();
  for (std::size_t k = 0; k < problem_.modes(); ++k) {
    if (problem_.frozen[k]) continue;
    value += problem_.ridge[k] * factors_[k].squaredNorm();
    if (problem_.smoothness[k] != 0.0)
      value += problem_.smoothness[k] * problem_.operators[k].penalty(Matrix(factors_[k]));
  }
  return value;
}

RowSolution AlsEngine::solve_row(std::size_t mode, std::size_t row) const {
  if (mode >= problem_.modes())
    throw DimensionError("mode " + std::to_string(mode) + " out of range");
  if (row >= problem_.extents[mode])
    throw BoundsError(mode, row, problem_.extents[mode]);
  const RowMatrix& a = factors_[mode];
  if (problem_.frozen[mode]) return {a.row(static_cast<Eigen::Index>(row)).transpose(), false};

  const std::size_t modes = problem_.modes();
  const auto F = static_cast<Eigen::Index>(rank_);
  // Rows of the Khatri-Rao block for this row, scaled by sqrt(weight).
  const auto& entries = problem_.groups[mode][row];
  const auto count = static_cast<Eigen::Index>(entries.size());
  RowMatrix q(count, F);
  Vector y(count);
  for (Eigen::Index m = 0; m < count; ++m) {
    const std::size_t e = entries[static_cast<std::size_t>(m)];
    const std::uint32_t* idx = &problem_.index[e * modes];
    const double root = std::sqrt(problem_.weight[e]);
    auto qm = q.row(m);
    qm.setConstant(root);
    for (std::size_t n = 0; n < modes; ++n)
      if (n != mode) qm.array() *= factors_[n].row(idx[n]).array();
    y(m) = root * problem_.response[e];
  }
  Matrix gram = Matrix::Zero(F, F);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(q.transpose());
  Vector rhs = q.transpose() * y;
  gram *= problem_.data_scale;
  rhs *= problem_.data_scale;

  // Penalty rows of T that touch `row`: T(r, r + t) = stencil[t].
  double diagonal = problem_.ridge[mode];
  const double mu = problem_.smoothness[mode];
  const SmoothnessOperator& op = problem_.operators[mode];
  if (mu != 0.0 && op.rows() > 0) {
    const auto stencil = op.stencil();
    const std::size_t width = stencil.size();
    const std::size_t first = row + 1 >= width ? row + 1 - width : 0;
    const std::size_t last = std::min(row, op.rows() - 1);
    for (std::size_t r = first; r <= last; ++r) {
      const double c = stencil[row - r];
      diagonal += mu * c * c;
      for (std::size_t t = 0; t < width; ++t) {
        if (r + t == row) continue;
        rhs.noalias() -= (mu * c * stencil[t]) *
                         a.row(static_cast<Eigen::Index>(r + t)).transpose();
      }
    }
  }

  RowSolution out;
  if (diagonal > 0.0) {
    gram.diagonal().array() += diagonal;
    Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
    if (llt.info() == Eigen::Success) {
      out.row = llt.solve(rhs);
      return out;
    }
  }
  Matrix full = gram.selfadjointView<Eigen::Lower>();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(full);
  if (cod.rank() < F) {
    out.min_norm_fallback = true;
    out.row = cod.solve(rhs);
  } else {
    out.row = full.llt().solve(rhs);
  }
  return out;
}

std::size_t AlsEngine::sweep() {
  std::size_t fallbacks = 0;
  for (std::size_t k = 0; k < problem_.modes(); ++k) {
    if (problem_.frozen[k]) continue;
    for (std::size_t i = 0; i < problem_.extents[k]; ++i) {
      RowSolution s = solve_row(k, i);
      if (s.min_norm_fallback) ++fallbacks;
      factors_[k].row(static_cast<Eigen::Index>(i)) = s.row.transpose();
    }
  }
  return fallbacks;
}

}  // namespace csid::detail
