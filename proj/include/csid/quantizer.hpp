#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace csid {

/// Scalar quantizer: sorted reconstruction levels and the decision
/// boundaries between them. A value equal to a boundary falls in the lower
/// cell; values outside the outer boundaries clamp to the end cells.
class Quantizer {
 public:
  /// Boundaries at the midpoints of adjacent levels.
  explicit Quantizer(std::vector<double> levels);
  Quantizer(std::vector<double> levels, std::vector<double> boundaries);

  std::size_t alphabet_size() const noexcept { return levels_.size(); }
  const std::vector<double>& levels() const noexcept { return levels_; }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }

  /// 0-based cell of x.
  std::uint32_t encode(double x) const;
  double decode(std::uint32_t cell) const;

 private:
  std::vector<double> levels_;
  std::vector<double> boundaries_;
};

struct LloydMaxFit {
  Quantizer quantizer;
  /// Mean squared quantization error after each iteration. The last entry
  /// equals the error of decode(encode(x)) over the fitted values.
  std::vector<double> distortion_trace;
  std::size_t iterations = 0;

  double distortion() const { return distortion_trace.back(); }
};

/// Lloyd's algorithm on an empirical sample. Levels start at the means of
/// the minimum-distortion split of the sorted sample into contiguous runs;
/// iteration alternates nearest-level partition and centroid updates until
/// the partition is stable, the relative distortion improvement drops below
/// `tol`, or `max_iters` is reached.
///
/// Throws DegenerateCodebookError when the sample has fewer distinct values
/// than `levels_count`.
LloydMaxFit lloyd_max_fit(std::span<const double> values,
                          std::size_t levels_count,
                          std::size_t max_iters = 200, double tol = 1e-12);

/// Codebook with one level per distinct value (zero distortion).
Quantizer exact_codebook(std::span<const double> values);

inline std::uint32_t quantize(const Quantizer& q, double x) { return q.encode(x); }

}  // namespace csid
