#ifndef SEMGRAPH_EXACT_MATRIX_HPP
#define SEMGRAPH_EXACT_MATRIX_HPP

#include <vector>

#include "semgraph/rational.hpp"
#include "semgraph/rational_function.hpp"
#include "semgraph/util.hpp"

namespace semgraph {

// ---------------------------------------------------------------------------
// Matrices over the rationals (already-evaluated entries)
// ---------------------------------------------------------------------------

using QMatrix = std::vector<std::vector<Rational>>;

inline QMatrix q_zeros(int r, int c) { return QMatrix(r, std::vector<Rational>(c, rat(0))); }

inline QMatrix q_identity(int n) {
  QMatrix m = q_zeros(n, n);
  for (int i = 0; i < n; ++i) m[i][i] = rat(1);
  return m;
}

inline QMatrix q_mul(const QMatrix& a, const QMatrix& b) {
  int r = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
  QMatrix out = q_zeros(r, c);
  for (int i = 0; i < r; ++i)
    for (int l = 0; l < k; ++l) {
      if (is_zero(a[i][l])) continue;
      for (int j = 0; j < c; ++j) out[i][j] += a[i][l] * b[l][j];
    }
  return out;
}

inline QMatrix q_transpose(const QMatrix& a) {
  int r = a.size(), c = a.empty() ? 0 : a[0].size();
  QMatrix out = q_zeros(c, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j][i] = a[i][j];
  return out;
}

inline QMatrix q_submatrix(const QMatrix& a, const NodeSet& rows, const NodeSet& cols) {
  QMatrix out;
  out.reserve(rows.size());
  for (int r : rows) {
    std::vector<Rational> row;
    row.reserve(cols.size());
    for (int c : cols) row.push_back(a[r][c]);
    out.push_back(std::move(row));
  }
  return out;
}

//! Exact rank by Gaussian elimination over Q; no tolerance anywhere.
inline int q_rank(QMatrix m) {
  int rows = m.size(), cols = rows ? m[0].size() : 0;
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int r = rank; r < rows; ++r)
      if (!is_zero(m[r][col])) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    for (int r = rank + 1; r < rows; ++r) {
      if (is_zero(m[r][col])) continue;
      Rational f = m[r][col] / m[rank][col];
      for (int c = col; c < cols; ++c) m[r][c] -= f * m[rank][c];
    }
    ++rank;
  }
  return rank;
}

inline Rational q_det(QMatrix m) {
  int n = m.size();
  Rational det = rat(1);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (!is_zero(m[r][col])) {
        pivot = r;
        break;
      }
    if (pivot < 0) return rat(0);
    if (pivot != col) {
      std::swap(m[col], m[pivot]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < n; ++r) {
      if (is_zero(m[r][col])) continue;
      Rational f = m[r][col] / m[col][col];
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

//! Gauss-Jordan inverse; nullopt when singular.
inline std::optional<QMatrix> q_inverse(QMatrix m) {
  int n = m.size();
  QMatrix inv = q_identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (!is_zero(m[r][col])) {
        pivot = r;
        break;
      }
    if (pivot < 0) return std::nullopt;
    std::swap(m[col], m[pivot]);
    std::swap(inv[col], inv[pivot]);
    Rational p = m[col][col];
    for (int c = 0; c < n; ++c) {
      m[col][c] /= p;
      inv[col][c] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || is_zero(m[r][col])) continue;
      Rational f = m[r][col];
      for (int c = 0; c < n; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Symbolic matrices (RationalFunction entries; Polynomial is the degenerate
// case with an empty denominator)
// ---------------------------------------------------------------------------

//! Rectangular symbolic matrix with node index maps for rows and columns.
struct ExactMatrix {
  std::vector<std::vector<RationalFunction>> entries;
  NodeSet row_nodes;  // optional provenance; may be empty
  NodeSet col_nodes;

  int rows() const { return static_cast<int>(entries.size()); }
  int cols() const { return entries.empty() ? 0 : static_cast<int>(entries[0].size()); }
  RationalFunction& at(int r, int c) { return entries[r][c]; }
  const RationalFunction& at(int r, int c) const { return entries[r][c]; }
};

inline ExactMatrix exact_zeros(int r, int c) {
  ExactMatrix m;
  m.entries.assign(r, std::vector<RationalFunction>(c));
  return m;
}

inline ExactMatrix exact_identity(int n) {
  ExactMatrix m = exact_zeros(n, n);
  for (int i = 0; i < n; ++i) m.entries[i][i] = RationalFunction::constant(rat(1));
  return m;
}

inline ExactMatrix exact_mul(const ExactMatrix& a, const ExactMatrix& b) {
  int r = a.rows(), k = a.cols(), c = b.cols();
  ExactMatrix out = exact_zeros(r, c);
  for (int i = 0; i < r; ++i)
    for (int l = 0; l < k; ++l) {
      if (a.entries[i][l].is_zero()) continue;
      for (int j = 0; j < c; ++j) {
        if (b.entries[l][j].is_zero()) continue;
        out.entries[i][j] += a.entries[i][l] * b.entries[l][j];
      }
    }
  return out;
}

inline ExactMatrix exact_transpose(const ExactMatrix& a) {
  ExactMatrix out = exact_zeros(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.entries[j][i] = a.entries[i][j];
  out.row_nodes = a.col_nodes;
  out.col_nodes = a.row_nodes;
  return out;
}

constexpr int kDefaultSymbolicGuard = 8;

namespace detail {

inline void check_square_guarded(const ExactMatrix& m, int guard, const char* what) {
  if (m.rows() != m.cols()) throw std::runtime_error(std::string(what) + ": matrix not square");
  if (m.rows() > guard)
    throw SizeGuardError(std::string(what) + ": dimension " + std::to_string(m.rows()) +
                         " exceeds symbolic size guard " + std::to_string(guard));
}

inline RationalFunction det_rec(const ExactMatrix& m, std::vector<int>& cols, int row) {
  if (cols.empty()) return RationalFunction::constant(rat(1));
  // expand along `row`, skipping zero entries
  RationalFunction sum;
  for (size_t k = 0; k < cols.size(); ++k) {
    const RationalFunction& e = m.entries[row][cols[k]];
    if (e.is_zero()) continue;
    int col = cols[k];
    cols.erase(cols.begin() + k);
    RationalFunction minor = det_rec(m, cols, row + 1);
    cols.insert(cols.begin() + k, col);
    if (!minor.is_zero()) {
      RationalFunction term = e * minor;
      if (k % 2 == 1) term = -term;
      sum += term;
    }
  }
  return sum;
}

}  // namespace detail

//! Determinant by cofactor expansion (symbolic entries are small by the size
//! guard; expansion skips structural zeros).
inline RationalFunction exact_det(const ExactMatrix& m, int guard = kDefaultSymbolicGuard) {
  detail::check_square_guarded(m, guard, "exact_det");
  std::vector<int> cols(m.cols());
  for (int i = 0; i < m.cols(); ++i) cols[i] = i;
  return detail::det_rec(m, cols, 0);
}

//! Adjugate: adj(M)[i][j] = (-1)^{i+j} * det(M with row j, column i removed),
//! satisfying M * adj(M) = det(M) * I identically.
inline ExactMatrix exact_adjugate(const ExactMatrix& m, int guard = kDefaultSymbolicGuard) {
  detail::check_square_guarded(m, guard, "exact_adjugate");
  int n = m.rows();
  ExactMatrix adj = exact_zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ExactMatrix minor = exact_zeros(n - 1, n - 1);
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor.entries[rr][cc] = m.entries[r][c];
          ++cc;
        }
        ++rr;
      }
      RationalFunction d = exact_det(minor, guard);
      if ((i + j) % 2 == 1) d = -d;
      adj.entries[i][j] = d;
    }
  return adj;
}

//! Cramer solve M x = b for square symbolic M with nonzero determinant.
inline std::vector<RationalFunction> exact_solve(const ExactMatrix& m,
                                                 const std::vector<RationalFunction>& b,
                                                 int guard = kDefaultSymbolicGuard) {
  detail::check_square_guarded(m, guard, "exact_solve");
  int n = m.rows();
  RationalFunction d = exact_det(m, guard);
  if (d.is_zero()) throw std::runtime_error("exact_solve: singular matrix");
  std::vector<RationalFunction> x(n);
  for (int j = 0; j < n; ++j) {
    ExactMatrix mj = m;
    for (int r = 0; r < n; ++r) mj.entries[r][j] = b[r];
    x[j] = divide(exact_det(mj, guard), d);
  }
  return x;
}

}  // namespace semgraph

#endif
