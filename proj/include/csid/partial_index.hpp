#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <vector>

#include "csid/tensor_model.hpp"

namespace csid {

/// Per-mode index where any subset of modes may be unobserved.
class PartialIndex {
 public:
  using Entry = std::optional<CellIndex::value_type>;

  PartialIndex() = default;
  explicit PartialIndex(std::vector<Entry> entries) : entries_(std::move(entries)) {}
  PartialIndex(std::initializer_list<Entry> entries) : entries_(entries) {}
  explicit PartialIndex(const CellIndex& full);

  std::size_t size() const noexcept { return entries_.size(); }
  const Entry& operator[](std::size_t mode) const { return entries_[mode]; }
  Entry& operator[](std::size_t mode) { return entries_[mode]; }

  bool complete() const noexcept;
  std::vector<std::size_t> observed_modes() const;
  std::vector<std::size_t> missing_modes() const;

  /// Throws DataError if any mode is missing.
  CellIndex to_cell() const;

 private:
  std::vector<Entry> entries_;
};

}  // namespace csid
