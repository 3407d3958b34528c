#include "csid/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "csid/errors.hpp"

namespace csid {
namespace {

std::vector<double> midpoints(const std::vector<double>& levels) {
  std::vector<double> b;
  b.reserve(levels.size() ? levels.size() - 1 : 0);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    b.push_back(0.5 * (levels[i] + levels[i + 1]));
  return b;
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) ==
         v.end();
}

// Minimum within-cell squared error partition of the distinct sorted values
// (with multiplicities) into `count` contiguous runs, by dynamic programming
// with divide-and-conquer over the monotone split points. Returns the run
// means, which are strictly increasing.
std::vector<double> optimal_run_means(const std::vector<double>& sorted,
                                      const std::vector<double>& distinct,
                                      std::size_t count) {
  const std::size_t D = distinct.size();
  double centre = 0.0;
  for (double v : sorted) centre += v;
  centre /= static_cast<double>(sorted.size());

  // Prefix sums over distinct values of count, sum and sum of squares.
  std::vector<double> c(D + 1, 0.0), s1(D + 1, 0.0), s2(D + 1, 0.0);
  std::size_t k = 0;
  for (std::size_t d = 0; d < D; ++d) {
    double n = 0.0;
    while (k < sorted.size() && sorted[k] == distinct[d]) {
      ++n;
      ++k;
    }
    const double x = distinct[d] - centre;
    c[d + 1] = c[d] + n;
    s1[d + 1] = s1[d] + n * x;
    s2[d + 1] = s2[d] + n * x * x;
  }
  // Squared error of the run [i, j).
  auto cost = [&](std::size_t i, std::size_t j) {
    const double n = c[j] - c[i];
    const double t = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - t * t / n);
  };

  const double inf = std::numeric_limits<double>::infinity();
  // best[j]: cost of the first j distinct values split into the current
  // number of runs; start[r][j]: first value of the last run.
  std::vector<double> best(D + 1, inf), next(D + 1, inf);
  std::vector<std::vector<std::size_t>> start(count, std::vector<std::size_t>(D + 1, 0));
  for (std::size_t j = 1; j <= D; ++j) best[j] = cost(0, j);

  for (std::size_t r = 1; r < count; ++r) {
    std::fill(next.begin(), next.end(), inf);
    std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)> solve =
        [&](std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) {
          if (lo > hi) return;
          const std::size_t mid = lo + (hi - lo) / 2;
          std::size_t arg = opt_lo;
          for (std::size_t i = opt_lo; i <= std::min(opt_hi, mid - 1); ++i) {
            const double v = best[i] + cost(i, mid);
            if (v < next[mid]) {
              next[mid] = v;
              arg = i;
            }
          }
          start[r][mid] = arg;
          if (mid > lo) solve(lo, mid - 1, opt_lo, arg);
          solve(mid + 1, hi, arg, opt_hi);
        };
    solve(r + 1, D, r, D - 1);
    std::swap(best, next);
  }

  std::vector<double> means(count);
  std::size_t end = D;
  for (std::size_t r = count; r-- > 0;) {
    const std::size_t begin = r == 0 ? 0 : start[r][end];
    means[r] = centre + (s1[end] - s1[begin]) / (c[end] - c[begin]);
    end = begin;
  }
  return means;
}

// Cells are contiguous ranges of the sorted sample; cut j is one past the
// last value assigned to cell j (values equal to a boundary go lower).
std::vector<std::size_t> partition(const std::vector<double>& sorted,
                                   const std::vector<double>& boundaries) {
  std::vector<std::size_t> cuts;
  cuts.reserve(boundaries.size() + 1);
  for (double b : boundaries)
    cuts.push_back(static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), b) - sorted.begin()));
  cuts.push_back(sorted.size());
  return cuts;
}

double partition_distortion(const std::vector<double>& sorted,
                            const std::vector<std::size_t>& cuts,
                            const std::vector<double>& levels) {
  double sse = 0.0;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    for (std::size_t k = begin; k < cuts[j]; ++k) {
      const double d = sorted[k] - levels[j];
      sse += d * d;
    }
    begin = cuts[j];
  }
  return sse / static_cast<double>(sorted.size());
}

}  // namespace

Quantizer::Quantizer(std::vector<double> levels)
    : Quantizer(levels, midpoints(levels)) {}

Quantizer::Quantizer(std::vector<double> levels, std::vector<double> boundaries)
    : levels_(std::move(levels)), boundaries_(std::move(boundaries)) {
  if (levels_.empty()) throw DataError("quantizer needs at least one level");
  if (boundaries_.size() + 1 != levels_.size())
    throw DimensionError("quantizer with " + std::to_string(levels_.size()) +
                         " levels needs " + std::to_string(levels_.size() - 1) +
                         " boundaries");
  for (double v : levels_)
    if (!std::isfinite(v)) throw NumericError("non-finite quantizer level");
  if (!strictly_increasing(levels_))
    throw DataError("quantizer levels must be strictly increasing");
  for (std::size_t i = 0; i < boundaries_.size(); ++i)
    if (!(boundaries_[i] >= levels_[i] && boundaries_[i] <= levels_[i + 1]))
      throw DataError("quantizer boundary " + std::to_string(i) +
                      " lies outside its levels");
}

std::uint32_t Quantizer::encode(double x) const {
  return static_cast<std::uint32_t>(
      std::lower_bound(boundaries_.begin(), boundaries_.end(), x) -
      boundaries_.begin());
}

double Quantizer::decode(std::uint32_t cell) const {
  if (cell >= levels_.size()) throw BoundsError(0, cell, levels_.size());
  return levels_[cell];
}

LloydMaxFit lloyd_max_fit(std::span<const double> values,
                          std::size_t levels_count, std::size_t max_iters,
                          double tol) {
  if (values.empty()) throw DataError("cannot fit a quantizer to no values");
  if (levels_count < 1) throw DataError("quantizer needs at least one level");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v)) throw NumericError("non-finite value in quantizer sample");
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < levels_count)
    throw DegenerateCodebookError(distinct.size(), levels_count);

  std::vector<double> levels = optimal_run_means(sorted, distinct, levels_count);

  LloydMaxFit fit{Quantizer(levels), {}, 0};
  std::vector<std::size_t> previous_cuts;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const std::vector<double> boundaries = midpoints(levels);
    const std::vector<std::size_t> cuts = partition(sorted, boundaries);

    std::vector<double> next(levels_count);
    std::size_t begin = 0;
    for (std::size_t j = 0; j < levels_count; ++j) {
      const std::size_t end = cuts[j];
      if (end > begin) {
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k) sum += sorted[k];
        next[j] = sum / static_cast<double>(end - begin);
      } else if (levels_count == 1) {
        next[j] = levels[j];
      } else if (j == 0) {
        next[j] = 0.5 * (levels[0] + boundaries[0]);
      } else if (j + 1 == levels_count) {
        next[j] = 0.5 * (boundaries[j - 1] + levels[j]);
      } else {
        // Empty cell: re-seed inside its boundary interval.
        next[j] = 0.5 * (boundaries[j - 1] + boundaries[j]);
      }
      begin = end;
    }
    levels = std::move(next);
    const double distortion = partition_distortion(sorted, cuts, levels);
    const double prev = fit.distortion_trace.empty()
                            ? std::numeric_limits<double>::infinity()
                            : fit.distortion_trace.back();
    fit.distortion_trace.push_back(distortion);
    fit.iterations = iter + 1;
    if (cuts == previous_cuts) break;
    if (std::isfinite(prev) && prev - distortion <= tol * prev) break;
    previous_cuts = cuts;
  }

  fit.quantizer = Quantizer(levels);
  double sse = 0.0;
  for (double v : sorted) {
    const double d = v - fit.quantizer.decode(fit.quantizer.encode(v));
    sse += d * d;
  }
  const double final_distortion = sse / static_cast<double>(sorted.size());
  if (fit.distortion_trace.empty() || final_distortion != fit.distortion_trace.back())
    fit.distortion_trace.push_back(final_distortion);
  return fit;
}

Quantizer exact_codebook(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot build a codebook from no values");
  std::vector<double> distinct(values.begin(), values.end());
  for (double v : distinct)
    if (!std::isfinite(v)) throw NumericError("non-finite value in codebook sample");
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return Quantizer(std::move(distinct));
}

}  // namespace csid
