#pragma once

// Dense matrix storage, a deterministic RNG, and the scalar primitives
// (activations, losses, dropout masks) shared by every model in the library.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace linkpred {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose raw 64-bit output sequence is fixed
/// by the C++ standard. All conversions (doubles, bounded integers,
/// shuffles) are implemented here explicitly instead of going through
/// std::uniform_*_distribution, so identical seeds produce identical draws
/// on every platform and standard library.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Row-major dense matrix of doubles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }

  bool same_shape(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("multiply: shape mismatch");
  DenseMatrix c(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + k * b.cols;
      double* crow = c.data.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
  return t;
}

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const DenseMatrix& m) { return all_finite(std::span<const double>(m.data)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Branch-stable logistic function: exponentiates a negative magnitude only,
/// so any finite input maps into [0, 1] without overflow.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Subgradient at the kink is fixed to 0.
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// Predictions are clamped into [kPredictionClamp, 1 - kPredictionClamp]
/// before any logarithm.
inline constexpr double kPredictionClamp = 1e-12;

inline double clamp_prediction(double p) {
  return std::min(1.0 - kPredictionClamp, std::max(kPredictionClamp, p));
}

/// Binary cross entropy -t*log(p) - (1-t)*log(1-p) on a clamped prediction.
inline double cross_entropy(double target, double pred) {
  const double p = clamp_prediction(pred);
  return -target * std::log(p) - (1.0 - target) * std::log(1.0 - p);
}

/// Entrywise iid Bernoulli keep mask: 1 with probability keep_prob.
inline std::vector<std::uint8_t> bernoulli_mask(std::size_t dim,
                                                double keep_prob,
                                                RngState& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw std::invalid_argument("bernoulli_mask: keep_prob must be in (0,1]");
  std::vector<std::uint8_t> mask(dim);
  for (std::size_t i = 0; i < dim; ++i)
    mask[i] = rng.next_double() < keep_prob ? 1 : 0;
  return mask;
}

}  // namespace linkpred
