#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace csid {

/// Row positions of one partition of a dataset.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random train/test partition with round(n * train_fraction) training rows.
/// Both halves come back sorted; the partition depends only on (n, seed).
Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed);

/// k folds of near-equal size (sizes differ by at most one). Fold f's
/// `test` list is its validation set; `train` is the union of the others.
std::vector<Split> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace csid
