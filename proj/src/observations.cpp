#include "csid/observations.hpp"

#include <cmath>
#include <map>
#include <string>

#include "csid/errors.hpp"

namespace csid {

PartialIndex::PartialIndex(const CellIndex& full) {
  entries_.reserve(full.size());
  for (std::size_t n = 0; n < full.size(); ++n) entries_.emplace_back(full[n]);
}

bool PartialIndex::complete() const noexcept {
  for (const auto& e : entries_)
    if (!e) return false;
  return true;
}

std::vector<std::size_t> PartialIndex::observed_modes() const {
  std::vector<std::size_t> modes;
  for (std::size_t n = 0; n < entries_.size(); ++n)
    if (entries_[n]) modes.push_back(n);
  return modes;
}

std::vector<std::size_t> PartialIndex::missing_modes() const {
  std::vector<std::size_t> modes;
  for (std::size_t n = 0; n < entries_.size(); ++n)
    if (!entries_[n]) modes.push_back(n);
  return modes;
}

CellIndex PartialIndex::to_cell() const {
  std::vector<CellIndex::value_type> idx;
  idx.reserve(entries_.size());
  for (std::size_t n = 0; n < entries_.size(); ++n) {
    if (!entries_[n]) throw DataError("mode " + std::to_string(n) + " is missing");
    idx.push_back(*entries_[n]);
  }
  return CellIndex(std::move(idx));
}

SparseObservationTensor::SparseObservationTensor(
    std::vector<std::size_t> shape, std::size_t outputs,
    std::vector<CellIndex> cells, std::vector<std::uint64_t> weights,
    Matrix means)
    : shape_(std::move(shape)),
      outputs_(outputs),
      cells_(std::move(cells)),
      weights_(std::move(weights)),
      means_(std::move(means)) {
  if (outputs_ == 0) throw DimensionError("observations need at least one output");
  if (weights_.size() != cells_.size() ||
      static_cast<std::size_t>(means_.rows()) != cells_.size() ||
      static_cast<std::size_t>(means_.cols()) != outputs_)
    throw DimensionError("observation arrays disagree in length");
  if (!means_.allFinite()) throw NumericError("non-finite mean response");
  for (std::size_t e = 0; e < cells_.size(); ++e) {
    const CellIndex& c = cells_[e];
    if (c.size() != shape_.size())
      throw DimensionError("cell has " + std::to_string(c.size()) +
                           " modes, tensor has " + std::to_string(shape_.size()));
    for (std::size_t n = 0; n < c.size(); ++n)
      if (c[n] >= shape_[n]) throw BoundsError(n, c[n], shape_[n]);
    if (weights_[e] == 0) throw DataError("observation weights must be positive");
    sample_count_ += weights_[e];
  }
}

SparseObservationTensor aggregate(std::span<const Sample> samples,
                                  std::vector<std::size_t> shape) {
  struct Accumulator {
    std::uint64_t count = 0;
    std::vector<double> sum;
  };
  const std::size_t outputs = samples.empty() ? 1 : samples.front().response.size();
  std::map<CellIndex, Accumulator> cells;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const Sample& s = samples[m];
    if (s.response.size() != outputs)
      throw DimensionError("sample " + std::to_string(m) + " has " +
                           std::to_string(s.response.size()) +
                           " responses, expected " + std::to_string(outputs));
    if (s.index.size() != shape.size())
      throw DimensionError("sample " + std::to_string(m) + " has " +
                           std::to_string(s.index.size()) + " modes");
    for (std::size_t n = 0; n < shape.size(); ++n)
      if (s.index[n] >= shape[n]) throw BoundsError(n, s.index[n], shape[n]);
    Accumulator& acc = cells[s.index];
    if (acc.sum.empty()) acc.sum.assign(outputs, 0.0);
    ++acc.count;
    for (std::size_t j = 0; j < outputs; ++j) acc.sum[j] += s.response[j];
  }

  std::vector<CellIndex> idx;
  std::vector<std::uint64_t> weights;
  Matrix means(static_cast<Eigen::Index>(cells.size()),
               static_cast<Eigen::Index>(outputs));
  idx.reserve(cells.size());
  weights.reserve(cells.size());
  Eigen::Index e = 0;
  for (auto& [cell, acc] : cells) {
    idx.push_back(cell);
    weights.push_back(acc.count);
    for (std::size_t j = 0; j < outputs; ++j)
      means(e, static_cast<Eigen::Index>(j)) = acc.sum[j] / static_cast<double>(acc.count);
    ++e;
  }
  return SparseObservationTensor(std::move(shape), outputs, std::move(idx),
                                 std::move(weights), std::move(means));
}

MarginalSet::MarginalSet(std::vector<Vector> pmfs) : pmfs_(std::move(pmfs)) {
  for (std::size_t n = 0; n < pmfs_.size(); ++n) {
    const Vector& p = pmfs_[n];
    if (p.size() == 0 || !p.allFinite() || (p.array() < 0.0).any() ||
        std::abs(p.sum() - 1.0) > 1e-12)
      throw DataError("marginal " + std::to_string(n) + " is not a PMF");
  }
}

const Vector& MarginalSet::operator[](std::size_t mode) const {
  if (mode >= pmfs_.size())
    throw ConfigError("no marginal for mode " + std::to_string(mode));
  return pmfs_[mode];
}

MarginalSet fit_marginals(std::span<const PartialIndex> samples,
                          const std::vector<std::size_t>& shape,
                          double smoothing) {
  if (samples.empty()) throw DataError("cannot fit marginals to an empty sample");
  if (smoothing < 0.0) throw ConfigError("marginal smoothing must be non-negative");
  std::vector<Vector> counts;
  for (std::size_t extent : shape)
    counts.push_back(Vector::Zero(static_cast<Eigen::Index>(extent)));
  for (const PartialIndex& s : samples) {
    if (s.size() != shape.size())
      throw DimensionError("sample has " + std::to_string(s.size()) + " modes");
    for (std::size_t n = 0; n < shape.size(); ++n) {
      if (!s[n]) continue;
      if (*s[n] >= shape[n]) throw BoundsError(n, *s[n], shape[n]);
      counts[n](*s[n]) += 1.0;
    }
  }
  for (std::size_t n = 0; n < shape.size(); ++n) {
    counts[n].array() += smoothing;
    const double total = counts[n].sum();
    if (total <= 0.0)
      throw DataError("mode " + std::to_string(n) + " has no observed values");
    counts[n] /= total;
  }
  return MarginalSet(std::move(counts));
}

MarginalSet fit_marginals(std::span<const CellIndex> samples,
                          const std::vector<std::size_t>& shape,
                          double smoothing) {
  std::vector<PartialIndex> partial;
  partial.reserve(samples.size());
  for (const CellIndex& c : samples) partial.emplace_back(c);
  return fit_marginals(std::span<const PartialIndex>(partial), shape, smoothing);
}

}  // namespace csid
