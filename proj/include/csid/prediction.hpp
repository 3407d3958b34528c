#pragma once

#include <span>

#include "csid/observations.hpp"
#include "csid/partial_index.hpp"
#include "csid/tensor_model.hpp"

namespace csid {

/// Model response at a fully observed cell: a length-1 vector for
/// single-output models, (A_1(i_1,:) * ... * A_N(i_N,:)) V^T otherwise.
Vector predict(const FactorModel& model, const CellIndex& idx);

/// Conditional expectation over the missing modes under the rank-one joint
/// PMF built from `marginals`:
///   sum_f prod_{n observed} A_n(i_n, f) * prod_{n missing} p_n^T A_n(:, f)
/// Under the independence model the observed values do not reweight the
/// missing ones, so the unconditional marginals are used directly.
Vector predict_partial(const FactorModel& model, const PartialIndex& idx,
                       const MarginalSet& marginals);

/// Root mean squared error; vector responses are pooled into one list.
double rmse(std::span<const double> predictions, std::span<const double> targets);

}  // namespace csid
