#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <numeric>
#include <random>
#include <stdexcept>

namespace csid::oracle {
namespace {

// X(i_1..i_N[, j]) = sum_f prod_n A_n(i_n, f) [* V(j, f)].
template <class Real = double>
Real cell_value(const FactorModel& model, std::span<const std::size_t> idx,
                std::ptrdiff_t output = -1) {
  Real total = 0.0;
  for (std::size_t f = 0; f < model.rank(); ++f) {
    Real term = 1.0;
    for (std::size_t n = 0; n < model.order(); ++n)
      term *= model.factor(n)(static_cast<Eigen::Index>(idx[n]),
                              static_cast<Eigen::Index>(f));
    if (output >= 0)
      term *= model.output_factor()(output, static_cast<Eigen::Index>(f));
    total += term;
  }
  return total;
}

std::vector<std::size_t> to_sizes(const CellIndex& c) {
  return std::vector<std::size_t>(c.values().begin(), c.values().end());
}

// ||T A||_F^2 with T written out entry by entry.
double dense_smoothness(const Matrix& a, DifferenceKind kind) {
  const std::size_t I = static_cast<std::size_t>(a.rows());
  const std::size_t F = static_cast<std::size_t>(a.cols());
  std::vector<std::vector<double>> T;
  if (kind == DifferenceKind::first) {
    for (std::size_t i = 0; i + 1 < I; ++i) {
      std::vector<double> row(I, 0.0);
      row[i] = 1.0;
      row[i + 1] = -1.0;
      T.push_back(row);
    }
  } else {
    for (std::size_t i = 0; i + 2 < I; ++i) {
      std::vector<double> row(I, 0.0);
      row[i] = -1.0;
      row[i + 1] = 2.0;
      row[i + 2] = -1.0;
      T.push_back(row);
    }
  }
  double total = 0.0;
  for (const auto& row : T)
    for (std::size_t f = 0; f < F; ++f) {
      double v = 0.0;
      for (std::size_t i = 0; i < I; ++i)
        v += row[i] * a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      total += v * v;
    }
  return total;
}

double frobenius2(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return s;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  std::size_t cells = 1;
  for (std::size_t s : shape_) {
    if (s == 0 || cells > kMaxCells / s)
      throw std::length_error("dense tensor exceeds the oracle size guard");
    cells *= s;
  }
  values_.assign(cells, 0.0);
}

std::size_t DenseTensor::offset(std::span<const std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw std::out_of_range("index order mismatch");
  std::size_t off = 0;
  for (std::size_t n = 0; n < shape_.size(); ++n) {
    if (idx[n] >= shape_[n]) throw std::out_of_range("index out of range");
    off = off * shape_[n] + idx[n];
  }
  return off;
}

double& DenseTensor::at(std::span<const std::size_t> idx) { return values_[offset(idx)]; }
double DenseTensor::at(std::span<const std::size_t> idx) const { return values_[offset(idx)]; }

void DenseTensor::for_each_cell(
    const std::function<void(const std::vector<std::size_t>&)>& fn) const {
  std::vector<std::size_t> idx(shape_.size(), 0);
  for (std::size_t c = 0; c < values_.size(); ++c) {
    fn(idx);
    for (std::size_t n = shape_.size(); n-- > 0;) {
      if (++idx[n] < shape_[n]) break;
      idx[n] = 0;
    }
  }
}

DenseTensor materialize(const FactorModel& model) {
  if (model.has_output_factor())
    throw std::invalid_argument("materialize expects a single-output model");
  DenseTensor t(model.shape());
  t.for_each_cell([&](const std::vector<std::size_t>& idx) {
    t.at(idx) = cell_value(model, idx);
  });
  return t;
}

DenseTensor slice(const DenseTensor& t, std::size_t mode, std::size_t j) {
  std::vector<std::size_t> shape = t.shape();
  shape.at(mode) = 1;
  DenseTensor out(shape);
  out.for_each_cell([&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> src = idx;
    src[mode] = j;
    out.at(idx) = t.at(src);
  });
  return out;
}

double brute_objective(const FactorModel& model, std::span<const Sample> raw,
                       const SolverConfig& cfg, const std::vector<bool>& eligible) {
  const double M = static_cast<double>(raw.size());
  double data = 0.0;
  for (const Sample& s : raw) {
    const auto idx = to_sizes(s.index);
    if (model.has_output_factor()) {
      for (std::size_t j = 0; j < s.response.size(); ++j) {
        const double r = s.response[j] - cell_value(model, idx, static_cast<std::ptrdiff_t>(j));
        data += r * r;
      }
    } else {
      const double r = s.response.at(0) - cell_value(model, idx);
      data += r * r;
    }
  }
  double value = cfg.normalize_by_samples ? data / M : data;

  const std::size_t N = model.order();
  for (std::size_t n = 0; n < N; ++n) {
    double mu = 0.0;
    if (cfg.smoothness.size() == 1) mu = cfg.smoothness[0];
    else if (cfg.smoothness.size() == N) mu = cfg.smoothness[n];
    if (!eligible.empty() && !eligible[n]) mu = 0.0;
    value += cfg.ridge * frobenius2(model.factor(n));
    value += mu * dense_smoothness(model.factor(n), cfg.difference);
  }
  if (model.has_output_factor() && model.outputs() > 1) {
    value += cfg.ridge * frobenius2(model.output_factor());
    value += cfg.output_smoothness *
             dense_smoothness(model.output_factor(), cfg.difference);
  }
  return value;
}

Vector brute_conditional_expectation(const FactorModel& model,
                                     const PartialIndex& idx,
                                     const MarginalSet& marginals) {
  const std::vector<std::size_t> missing = idx.missing_modes();
  std::size_t combos = 1;
  for (std::size_t n : missing) {
    combos *= model.extent(n);
    if (combos > kMaxCells)
      throw std::length_error("enumeration exceeds the oracle size guard");
  }
  const std::size_t K = model.outputs();
  // Extended precision keeps the reference well below the tolerance under test.
  std::vector<long double> total(K, 0.0L);
  std::vector<std::size_t> full(model.order(), 0);
  for (std::size_t n = 0; n < model.order(); ++n)
    if (idx[n]) full[n] = *idx[n];
  std::vector<std::size_t> counter(missing.size(), 0);
  for (std::size_t c = 0; c < combos; ++c) {
    long double prob = 1.0L;
    for (std::size_t m = 0; m < missing.size(); ++m) {
      full[missing[m]] = counter[m];
      prob *= marginals[missing[m]](static_cast<Eigen::Index>(counter[m]));
    }
    for (std::size_t j = 0; j < K; ++j)
      total[j] += prob * cell_value<long double>(model, full,
                            model.has_output_factor() ? static_cast<std::ptrdiff_t>(j) : -1);
    for (std::size_t m = missing.size(); m-- > 0;) {
      if (++counter[m] < model.extent(missing[m])) break;
      counter[m] = 0;
    }
  }
  Vector out(static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) out(static_cast<Eigen::Index>(j)) = static_cast<double>(total[j]);
  return out;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    Vector plus = x, minus = x;
    plus(i) += step;
    minus(i) -= step;
    g(i) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return g;
}

Planted synth(const std::vector<std::size_t>& shape, std::size_t rank,
              std::uint64_t seed, double noise_sd, double observed_fraction,
              std::size_t outputs) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> factors;
  for (std::size_t extent : shape) {
    Matrix a(static_cast<Eigen::Index>(extent), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index f = 0; f < a.cols(); ++f) a(i, f) = normal(rng);
    factors.push_back(std::move(a));
  }
  std::optional<Matrix> v;
  if (outputs > 1) {
    Matrix out(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index f = 0; f < out.cols(); ++f) out(i, f) = normal(rng);
    v = std::move(out);
  }
  FactorModel model(std::move(factors), std::move(v));

  DenseTensor grid(shape);
  std::vector<std::vector<std::size_t>> cells;
  grid.for_each_cell([&](const std::vector<std::size_t>& idx) { cells.push_back(idx); });
  const auto keep = static_cast<std::size_t>(
      std::llround(observed_fraction * static_cast<double>(cells.size())));
  for (std::size_t i = cells.size(); i > 1; --i)
    std::swap(cells[i - 1], cells[static_cast<std::size_t>(rng() % i)]);
  cells.resize(keep);
  std::sort(cells.begin(), cells.end());

  std::normal_distribution<double> noise(0.0, noise_sd > 0.0 ? noise_sd : 1.0);
  std::vector<Sample> samples;
  for (const auto& idx : cells) {
    std::vector<CellIndex::value_type> c(idx.begin(), idx.end());
    std::vector<double> y;
    if (outputs > 1) {
      for (std::size_t j = 0; j < outputs; ++j)
        y.push_back(cell_value(model, idx, static_cast<std::ptrdiff_t>(j)));
    } else {
      y.push_back(cell_value(model, idx));
    }
    if (noise_sd > 0.0)
      for (double& val : y) val += noise(rng);
    samples.emplace_back(CellIndex(std::move(c)), std::move(y));
  }
  return {std::move(model), std::move(samples)};
}

FactorModel sign_product_model(std::size_t order) {
  std::vector<Matrix> factors;
  for (std::size_t n = 0; n < order; ++n) {
    Matrix a(2, 1);
    a << -1.0, 1.0;
    factors.push_back(a);
  }
  return FactorModel(std::move(factors));
}

FactorModel sign_sum_model(std::size_t order) {
  std::vector<Matrix> factors;
  const auto F = static_cast<Eigen::Index>(order);
  for (std::size_t n = 0; n < order; ++n) {
    Matrix a = Matrix::Ones(2, F);
    a(0, static_cast<Eigen::Index>(n)) = -1.0;
    factors.push_back(a);
  }
  return FactorModel(std::move(factors));
}

double brute_two_level_distortion(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t cut = 1; cut < n; ++cut) {
    if (v[cut] == v[cut - 1]) continue;
    double sse = 0.0;
    for (auto [lo, hi] : {std::pair{std::size_t{0}, cut}, std::pair{cut, n}}) {
      double mean = 0.0;
      for (std::size_t i = lo; i < hi; ++i) mean += v[i];
      mean /= static_cast<double>(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) sse += (v[i] - mean) * (v[i] - mean);
    }
    best = std::min(best, sse / static_cast<double>(n));
  }
  if (!std::isfinite(best)) throw std::invalid_argument("need two distinct values");
  return best;
}

std::vector<Sample> all_cells(const FactorModel& model) {
  std::vector<Sample> samples;
  DenseTensor grid(model.shape());
  grid.for_each_cell([&](const std::vector<std::size_t>& idx) {
    std::vector<CellIndex::value_type> c(idx.begin(), idx.end());
    samples.emplace_back(CellIndex(std::move(c)), cell_value(model, idx));
  });
  return samples;
}

}  // namespace csid::oracle
