#pragma once

// Exact-versus-surrogate analysis of dropout objectives at keep probability
// 1/2. The exact objectives average the cross-entropy reconstruction loss
// over every dropout mask by enumeration; the surrogates are the closed-form
// second-order expansions around the mean mask: base loss at half-scaled
// weights plus 1/8 of an adaptive quadratic penalty.
//
// Layout note: weight arguments use the classic shapes, w1 is K x N
// (column i = latent vector of node i) and w2 is N x K (row j = output
// weights of node j). For the input-dropout case the single matrix w is
// N x N, row j scoring output j from the raw neighborhood row.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkpred/numerics.hpp"

namespace linkpred {

namespace detail {

// Pairwise reduction. Besides better rounding behaviour, summing 2^m
// identical values pairwise is exact (every addition doubles), which makes
// the exact objective bit-identical to the surrogate when all weights are 0.
inline double pairwise_sum(std::vector<double>& buf) {
  std::size_t n = buf.size();
  if (n == 0) return 0.0;
  while (n > 1) {
    std::size_t w = 0;
    std::size_t r = 0;
    for (; r + 1 < n; r += 2) buf[w++] = buf[r] + buf[r + 1];
    if (r < n) buf[w++] = buf[r];
    n = w;
  }
  return buf[0];
}

inline void check_binary(const DenseMatrix& a, const char* who) {
  for (double v : a.data)
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument(std::string(who) + ": matrix must be 0/1");
}

}  // namespace detail

inline constexpr int kMaxEnumerationBits = 20;

/// Exact expected loss of the factor model under iid Bernoulli(1/2) dropout
/// on the K hidden units, one shared mask per column i:
///   sum_i E_mask sum_j ce(a_ij, sigmoid(w2_j . (mask * w1_col_i))).
/// Enumerates all 2^K masks; refuses K > 20.
inline double exact_mf_dropout_objective(const DenseMatrix& w1,
                                         const DenseMatrix& w2,
                                         const DenseMatrix& a) {
  const std::size_t k = w1.rows, n = w1.cols;
  if (w2.rows != n || w2.cols != k)
    throw std::invalid_argument("exact_mf: w2 must be N x K");
  if (a.rows != n || a.cols != n)
    throw std::invalid_argument("exact_mf: a must be N x N");
  if (k > static_cast<std::size_t>(kMaxEnumerationBits))
    throw std::invalid_argument("exact_mf: K > 20 is not enumerable");
  detail::check_binary(a, "exact_mf");

  const std::size_t num_masks = std::size_t{1} << k;
  const double weight = 1.0 / static_cast<double>(num_masks);
  std::vector<double> per_mask(num_masks);
  std::vector<double> masked(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t mask = 0; mask < num_masks; ++mask) {
      for (std::size_t t = 0; t < k; ++t)
        masked[t] = (mask >> t) & 1 ? w1(t, i) : 0.0;
      double row_loss = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double z = 0.0;
        for (std::size_t t = 0; t < k; ++t) z += w2(j, t) * masked[t];
        row_loss += cross_entropy(a(i, j), sigmoid(z));
      }
      per_mask[mask] = row_loss;
    }
    total += detail::pairwise_sum(per_mask) * weight;
  }
  return total;
}

/// Diagnostics of a quadratic dropout surrogate. The invariant
/// surrogate_value == base_loss + penalty / 8 holds by construction;
/// `lambda` carries the adaptive curvature weights (one row per column i of
/// w1 for the factor case; one row per output j for the input case).
struct TaylorDiagnostics {
  double surrogate_value = 0.0;
  double base_loss = 0.0;
  double penalty = 0.0;  // unweighted quadratic term
  DenseMatrix lambda;
};

/// Second-order surrogate of exact_mf_dropout_objective:
///   base    = sum_ij ce(a_ij, g_ij),  g_ij = sigmoid(w2_j . w1_col_i / 2)
///   penalty = sum_i sum_t lambda_i[t] * w1(t,i)^2,
///             lambda_i[t] = sum_j w2(j,t)^2 * g_ij (1 - g_ij)
///   value   = base + penalty / 8.
inline TaylorDiagnostics taylor_mf_objective(const DenseMatrix& w1,
                                             const DenseMatrix& w2,
                                             const DenseMatrix& a) {
  const std::size_t k = w1.rows, n = w1.cols;
  if (w2.rows != n || w2.cols != k)
    throw std::invalid_argument("taylor_mf: w2 must be N x K");
  if (a.rows != n || a.cols != n)
    throw std::invalid_argument("taylor_mf: a must be N x N");
  detail::check_binary(a, "taylor_mf");

  TaylorDiagnostics diag;
  diag.lambda = DenseMatrix(n, k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double z = 0.0;
      for (std::size_t t = 0; t < k; ++t) z += w2(j, t) * w1(t, i);
      const double g = sigmoid(0.5 * z);
      row_loss += cross_entropy(a(i, j), g);
      const double curv = g * (1.0 - g);
      for (std::size_t t = 0; t < k; ++t)
        diag.lambda(i, t) += w2(j, t) * w2(j, t) * curv;
    }
    diag.base_loss += row_loss;
    for (std::size_t t = 0; t < k; ++t)
      diag.penalty += diag.lambda(i, t) * w1(t, i) * w1(t, i);
  }
  diag.surrogate_value = diag.base_loss + diag.penalty / 8.0;
  return diag;
}

/// Exact expected loss of the one-layer reconstruction model under iid
/// Bernoulli(1/2) dropout on the input coordinates, one mask per row i:
///   sum_i E_mask sum_j ce(a_ij, sigmoid(w_j . (mask * a_row_i))).
/// Masking a zero coordinate is a no-op, so enumeration runs over the 2^d
/// subsets of each row's support; refuses rows with more than 20 nonzeros.
inline double exact_ae_input_dropout_objective(const DenseMatrix& w,
                                               const DenseMatrix& a) {
  const std::size_t n = w.rows;
  if (w.cols != n) throw std::invalid_argument("exact_ae: w must be N x N");
  if (a.rows != n || a.cols != n)
    throw std::invalid_argument("exact_ae: a must be N x N");
  detail::check_binary(a, "exact_ae");

  double total = 0.0;
  std::vector<std::size_t> support;
  std::vector<double> per_mask;
  for (std::size_t i = 0; i < n; ++i) {
    support.clear();
    for (std::size_t m = 0; m < n; ++m)
      if (a(i, m) != 0.0) support.push_back(m);
    if (support.size() > static_cast<std::size_t>(kMaxEnumerationBits))
      throw std::invalid_argument("exact_ae: row support > 20 is not enumerable");

    const std::size_t num_masks = std::size_t{1} << support.size();
    per_mask.resize(num_masks);
    for (std::size_t mask = 0; mask < num_masks; ++mask) {
      double row_loss = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double z = 0.0;
        for (std::size_t t = 0; t < support.size(); ++t)
          if ((mask >> t) & 1) z += w(j, support[t]);
        row_loss += cross_entropy(a(i, j), sigmoid(z));
      }
      per_mask[mask] = row_loss;
    }
    total += detail::pairwise_sum(per_mask) / static_cast<double>(num_masks);
  }
  return total;
}

/// Second-order surrogate of exact_ae_input_dropout_objective:
///   base    = sum_ij ce(a_ij, g_ij),  g_ij = sigmoid(w_j . a_row_i / 2)
///   penalty = sum_j sum_m w(j,m)^2 * lambda_j[m],
///             lambda_j[m] = sum_i g_ij (1 - g_ij) * a(i,m)^2
///   value   = base + penalty / 8.
inline TaylorDiagnostics taylor_ae_input_objective(const DenseMatrix& w,
                                                   const DenseMatrix& a) {
  const std::size_t n = w.rows;
  if (w.cols != n) throw std::invalid_argument("taylor_ae: w must be N x N");
  if (a.rows != n || a.cols != n)
    throw std::invalid_argument("taylor_ae: a must be N x N");
  detail::check_binary(a, "taylor_ae");

  TaylorDiagnostics diag;
  diag.lambda = DenseMatrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row_loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double z = 0.0;
      for (std::size_t m = 0; m < n; ++m) z += w(j, m) * a(i, m);
      const double g = sigmoid(0.5 * z);
      row_loss += cross_entropy(a(i, j), g);
      const double curv = g * (1.0 - g);
      for (std::size_t m = 0; m < n; ++m)
        diag.lambda(j, m) += curv * a(i, m) * a(i, m);
    }
    diag.base_loss += row_loss;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = 0; m < n; ++m)
      diag.penalty += w(j, m) * w(j, m) * diag.lambda(j, m);
  diag.surrogate_value = diag.base_loss + diag.penalty / 8.0;
  return diag;
}

enum class AnalysisCase { MfHidden, AeInput };

inline const char* to_string(AnalysisCase c) {
  return c == AnalysisCase::MfHidden ? "mf-hidden" : "ae-input";
}

struct GapRow {
  double scale = 0.0;
  double exact = 0.0;
  double surrogate = 0.0;
  double gap = 0.0;  // |exact - surrogate|
};

/// Evaluates exact objective and surrogate at scaled weights (s * w1, s * w2)
/// for each requested scale. The adjacency stays fixed.
inline std::vector<GapRow> mf_dropout_gap_report(const DenseMatrix& w1,
                                                 const DenseMatrix& w2,
                                                 const DenseMatrix& a,
                                                 std::span<const double> scales) {
  std::vector<GapRow> rows;
  rows.reserve(scales.size());
  for (double s : scales) {
    DenseMatrix w1s = w1, w2s = w2;
    for (double& v : w1s.data) v *= s;
    for (double& v : w2s.data) v *= s;
    GapRow row;
    row.scale = s;
    row.exact = exact_mf_dropout_objective(w1s, w2s, a);
    row.surrogate = taylor_mf_objective(w1s, w2s, a).surrogate_value;
    row.gap = std::abs(row.exact - row.surrogate);
    rows.push_back(row);
  }
  return rows;
}

/// Same report for the input-dropout case at scaled weights s * w.
inline std::vector<GapRow> ae_input_dropout_gap_report(
    const DenseMatrix& w, const DenseMatrix& a, std::span<const double> scales) {
  std::vector<GapRow> rows;
  rows.reserve(scales.size());
  for (double s : scales) {
    DenseMatrix ws = w;
    for (double& v : ws.data) v *= s;
    GapRow row;
    row.scale = s;
    row.exact = exact_ae_input_dropout_objective(ws, a);
    row.surrogate = taylor_ae_input_objective(ws, a).surrogate_value;
    row.gap = std::abs(row.exact - row.surrogate);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace linkpred
