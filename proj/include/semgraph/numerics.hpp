#ifndef SEMGRAPH_NUMERICS_HPP
#define SEMGRAPH_NUMERICS_HPP

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "semgraph/graph.hpp"
#include "semgraph/util.hpp"

namespace semgraph {

//! Dense double matrix, row-major.
class FloatMatrix {
 public:
  FloatMatrix() = default;
  FloatMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  static FloatMatrix identity(int n) {
    FloatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

  FloatMatrix transpose() const {
    FloatMatrix t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend FloatMatrix operator*(const FloatMatrix& a, const FloatMatrix& b) {
    FloatMatrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        double v = a(i, k);
        if (v == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += v * b(k, j);
      }
    return out;
  }
  friend FloatMatrix operator-(const FloatMatrix& a, const FloatMatrix& b) {
    FloatMatrix out(a.rows_, a.cols_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = a.a_[i] - b.a_[i];
    return out;
  }
  friend FloatMatrix operator+(const FloatMatrix& a, const FloatMatrix& b) {
    FloatMatrix out(a.rows_, a.cols_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = a.a_[i] + b.a_[i];
    return out;
  }

  double max_abs() const {
    double m = 0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  FloatMatrix submatrix(const NodeSet& rows, const NodeSet& cols) const {
    FloatMatrix out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t c = 0; c < cols.size(); ++c) out(r, c) = (*this)(rows[r], cols[c]);
    return out;
  }

  //! Text form: "matrix <rows> <cols>" header then whitespace rows.
  std::string serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "matrix " << rows_ << ' ' << cols_ << '\n';
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) out << (c ? " " : "") << (*this)(r, c);
      out << '\n';
    }
    return out.str();
  }

  static FloatMatrix parse(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    if (!(in >> word) || word != "matrix") throw ParseError("matrix file: expected 'matrix' header");
    int r, c;
    if (!(in >> r >> c) || r < 0 || c < 0) throw ParseError("matrix file: bad dimensions");
    FloatMatrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        if (!(in >> m(i, j))) throw ParseError("matrix file: not enough entries");
    return m;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

//! LU with partial pivoting; solves in place. Returns false when singular
//! (pivot below eps).
inline bool lu_solve(FloatMatrix a, std::vector<double>& b, double eps = 1e-13) {
  int n = a.rows();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < eps) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      a(r, col) = 0;
      for (int c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * b[c];
    b[r] = s / a(r, r);
  }
  return true;
}

inline std::optional<FloatMatrix> float_inverse(const FloatMatrix& a, double eps = 1e-13) {
  int n = a.rows();
  FloatMatrix inv(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (!lu_solve(a, e, eps)) return std::nullopt;
    for (int i = 0; i < n; ++i) inv(i, j) = e[i];
  }
  return inv;
}

inline double float_det(FloatMatrix a) {
  int n = a.rows();
  double det = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (a(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
      det = -det;
    }
    det *= a(col, col);
    for (int r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  return det;
}

//! Cholesky factor (lower) of a symmetric matrix; nullopt when not PD.
inline std::optional<FloatMatrix> cholesky(const FloatMatrix& s) {
  int n = s.rows();
  FloatMatrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = s(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0 || !std::isfinite(d)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

//! Householder QR least squares: minimizes ||A x - b||_2 (rows >= cols).
//! Returns false when A is numerically rank deficient.
inline bool qr_least_squares(FloatMatrix a, std::vector<double> b, std::vector<double>& x,
                             double eps = 1e-12) {
  int m = a.rows(), n = a.cols();
  for (int k = 0; k < n; ++k) {
    double norm = 0;
    for (int i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm < eps) return false;
    if (a(k, k) > 0) norm = -norm;
    std::vector<double> v(m - k);
    for (int i = k; i < m; ++i) v[i - k] = a(i, k);
    v[0] -= norm;
    double vnorm2 = 0;
    for (double t : v) vnorm2 += t * t;
    if (vnorm2 < eps * eps) continue;
    for (int j = k; j < n; ++j) {
      double dot = 0;
      for (int i = k; i < m; ++i) dot += v[i - k] * a(i, j);
      double f = 2 * dot / vnorm2;
      for (int i = k; i < m; ++i) a(i, j) -= f * v[i - k];
    }
    double dot = 0;
    for (int i = k; i < m; ++i) dot += v[i - k] * b[i];
    double f = 2 * dot / vnorm2;
    for (int i = k; i < m; ++i) b[i] -= f * v[i - k];
  }
  x.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    if (std::abs(a(r, r)) < eps) return false;
    x[r] = s / a(r, r);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Model parameter points
// ---------------------------------------------------------------------------

//! (Lambda, Omega) pair supported on the graph's edge sets: lambda_ij = 0
//! off D, omega_ij = 0 off B for i != j, Omega positive definite, I - Lambda
//! invertible.
struct ParamPoint {
  FloatMatrix lambda;
  FloatMatrix omega;
};

inline bool validate_param_point(const MixedGraph& g, const ParamPoint& p, std::string* why = nullptr) {
  int n = g.node_count();
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (p.lambda.rows() != n || p.lambda.cols() != n) return fail("lambda dimension mismatch");
  if (p.omega.rows() != n || p.omega.cols() != n) return fail("omega dimension mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(p.lambda(i, j)) || !std::isfinite(p.omega(i, j)))
        return fail("non-finite entry");
      if (p.lambda(i, j) != 0.0 && !g.has_directed(i, j)) return fail("lambda off support");
      if (i != j && p.omega(i, j) != 0.0 && !g.has_bidirected(i, j)) return fail("omega off support");
      if (p.omega(i, j) != p.omega(j, i)) return fail("omega not symmetric");
    }
  if (!cholesky(p.omega)) return fail("omega not positive definite");
  FloatMatrix i_minus_l = FloatMatrix::identity(n) - p.lambda;
  if (std::abs(float_det(i_minus_l)) < 1e-12) return fail("I - Lambda singular");
  return true;
}

//! Spectral radius estimate: norm(A^64)^(1/64) with rescaling between
//! squarings so the powers stay finite.
inline double spectral_radius_estimate(const FloatMatrix& a) {
  int n = a.rows();
  if (n == 0) return 0.0;
  FloatMatrix q = a;
  double log_acc = 0.0;
  double weight = 1.0;
  const int kSquarings = 6;
  for (int k = 0; k < kSquarings; ++k) {
    double norm = q.max_abs();
    if (norm == 0.0) return 0.0;
    log_acc += weight * std::log(norm);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) /= norm;
    q = q * q;
    weight /= 2.0;
  }
  log_acc += weight * std::log(std::max(q.max_abs(), 1e-300));
  return std::exp(log_acc);
}

//! Reproducible generic parameter draw. Lambda entries are uniform on
//! [-scale, scale] with a tenth of the range around zero excluded (keeps the
//! draw off non-generic strata); Omega is made positive definite by diagonal
//! dominance, which preserves the PD(B) support exactly. For cyclic graphs
//! Lambda is rescaled until the spectral radius is below 0.9 so the trek
//! power series converges and cyclic models have an equilibrium reading.
inline ParamPoint sample_params(const MixedGraph& g, std::uint64_t seed, double scale = 1.0) {
  int n = g.node_count();
  auto rng = rng_for(seed, 0xa11ce);
  std::uniform_real_distribution<double> mag(0.1 * scale, scale);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParamPoint p{FloatMatrix(n, n), FloatMatrix(n, n)};
  for (auto& [i, j] : g.directed()) {
    double v = mag(rng);
    p.lambda(i, j) = unit(rng) < 0.5 ? -v : v;
  }
  for (auto& [i, j] : g.bidirected()) {
    double v = mag(rng);
    v = unit(rng) < 0.5 ? -v : v;
    p.omega(i, j) = v;
    p.omega(j, i) = v;
  }
  std::uniform_real_distribution<double> diag_pad(0.5, 1.5);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) row_sum += std::abs(p.omega(i, j));
    p.omega(i, i) = row_sum + diag_pad(rng);
  }
  if (!topological_order(g).has_value()) {
    while (spectral_radius_estimate(p.lambda) >= 0.9) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.lambda(i, j) *= 0.8;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Block LDL decomposition
// ---------------------------------------------------------------------------

struct DecompositionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Factors of Sigma = (I - A)^-T Delta (I - A)^-1 with A strictly block
//! upper-triangular in the given ordered partition and Delta block diagonal
//! with PD blocks.
struct BlockLdl {
  FloatMatrix a;
  FloatMatrix delta;
};

//! Unique block-LDL factorization of a PD matrix with respect to an ordered
//! partition of the index set (Sigma = (I+L) Delta (I+L)^T, then
//! A = I - (I+L)^-T).
inline BlockLdl block_ldl(const FloatMatrix& s, const std::vector<NodeSet>& blocks) {
  int n = s.rows();
  {
    size_t total = 0;
    for (auto& b : blocks) total += b.size();
    if (static_cast<int>(total) != n)
      throw DecompositionError("block_ldl: blocks do not partition the index set");
  }
  FloatMatrix work = s;
  FloatMatrix unitl = FloatMatrix::identity(n);
  FloatMatrix delta(n, n);
  std::vector<int> done;  // indices already pivoted
  std::vector<bool> used(n, false);
  for (auto& block : blocks) {
    int k = static_cast<int>(block.size());
    FloatMatrix pivot = work.submatrix(block, block);
    if (!cholesky(pivot))
      throw DecompositionError("block_ldl: pivot block not positive definite");
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) delta(block[r], block[c]) = pivot(r, c);
    auto pivot_inv = float_inverse(pivot);
    if (!pivot_inv) throw DecompositionError("block_ldl: pivot block singular");
    for (int b : block) used[b] = true;
    NodeSet rest;
    for (int i = 0; i < n; ++i)
      if (!used[i]) rest.push_back(i);
    if (!rest.empty()) {
      FloatMatrix cross = work.submatrix(rest, block);  // S_rest,block
      FloatMatrix l_cols = cross * (*pivot_inv);
      for (size_t r = 0; r < rest.size(); ++r)
        for (int c = 0; c < k; ++c) unitl(rest[r], block[c]) = l_cols(static_cast<int>(r), c);
      // Schur complement on the remaining indices
      FloatMatrix corr = l_cols * cross.transpose();
      for (size_t r = 0; r < rest.size(); ++r)
        for (size_t c = 0; c < rest.size(); ++c)
          work(rest[r], rest[c]) -= corr(static_cast<int>(r), static_cast<int>(c));
    }
  }
  // A = I - (I+L)^-T
  auto unitl_inv = float_inverse(unitl);
  if (!unitl_inv) throw DecompositionError("block_ldl: unit factor singular");
  FloatMatrix a = FloatMatrix::identity(n) - unitl_inv->transpose();
  return BlockLdl{std::move(a), std::move(delta)};
}

inline FloatMatrix block_ldl_reconstruct(const BlockLdl& f) {
  int n = f.a.rows();
  FloatMatrix i_minus_a = FloatMatrix::identity(n) - f.a;
  auto inv = float_inverse(i_minus_a);
  if (!inv) throw DecompositionError("block_ldl_reconstruct: I - A singular");
  return inv->transpose() * f.delta * (*inv);
}

// ---------------------------------------------------------------------------
// Newton multistart fiber solving
// ---------------------------------------------------------------------------

struct NewtonOptions {
  int max_iterations = 100;
  double residual_tol = 1e-10;      // accept threshold on sup-norm of constraints
  double det_floor = 1e-8;          // reject near-singular I - Lambda (spurious saturation)
  double cluster_radius = 1e-5;     // relative dedup distance for multistart
};

//! Solves the fiber equations [(I - Lambda)^T Sigma (I - Lambda)]_ij = 0 over
//! non-edges of B for Lambda supported on D, by damped Gauss-Newton from the
//! given start. Returns the solution or nullopt on divergence; solutions with
//! |det(I - Lambda)| below the floor are rejected.
inline std::optional<FloatMatrix> newton_fiber_solve(const MixedGraph& g, const FloatMatrix& sigma,
                                                     const FloatMatrix& start,
                                                     const NewtonOptions& opt = {}) {
  const int n = g.node_count();
  const auto& edges = g.directed();
  const int ne = static_cast<int>(edges.size());
  std::vector<std::pair<int, int>> constraints;  // i < j, not bidirected
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!g.has_bidirected(i, j)) constraints.emplace_back(i, j);
  const int nc = static_cast<int>(constraints.size());
  if (ne == 0) return FloatMatrix(n, n);

  std::vector<double> x(ne);
  for (int e = 0; e < ne; ++e) x[e] = start(edges[e].first, edges[e].second);

  auto lambda_of = [&](const std::vector<double>& v) {
    FloatMatrix l(n, n);
    for (int e = 0; e < ne; ++e) l(edges[e].first, edges[e].second) = v[e];
    return l;
  };
  auto residual = [&](const std::vector<double>& v, std::vector<double>& f) {
    FloatMatrix l = lambda_of(v);
    FloatMatrix iml = FloatMatrix::identity(n) - l;
    FloatMatrix w = iml.transpose() * sigma * iml;
    f.resize(nc);
    double sup = 0;
    for (int k = 0; k < nc; ++k) {
      f[k] = w(constraints[k].first, constraints[k].second);
      sup = std::max(sup, std::abs(f[k]));
    }
    return sup;
  };

  std::vector<double> f;
  double sup = residual(x, f);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (sup < opt.residual_tol * 1e-2) break;
    FloatMatrix l = lambda_of(x);
    FloatMatrix iml = FloatMatrix::identity(n) - l;
    FloatMatrix m1 = sigma * iml;              // for d/dlambda at the row slot
    FloatMatrix m2 = iml.transpose() * sigma;  // for the column slot
    FloatMatrix jac(nc, ne);
    for (int k = 0; k < nc; ++k) {
      auto [ci, cj] = constraints[k];
      for (int e = 0; e < ne; ++e) {
        auto [t, h] = edges[e];
        double d = 0;
        if (h == ci) d -= m1(t, cj);
        if (h == cj) d -= m2(ci, t);
        jac(k, e) = d;
      }
    }
    std::vector<double> rhs(nc);
    for (int k = 0; k < nc; ++k) rhs[k] = -f[k];
    std::vector<double> step;
    if (!qr_least_squares(jac, rhs, step)) return std::nullopt;
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 12; ++half) {
      std::vector<double> cand = x;
      for (int e = 0; e < ne; ++e) cand[e] += t * step[e];
      std::vector<double> fc;
      double sc = residual(cand, fc);
      if (sc < sup || (sc == sup && half == 0)) {
        x = std::move(cand);
        f = std::move(fc);
        sup = sc;
        improved = true;
        break;
      }
      t /= 2;
    }
    if (!improved) break;
  }
  if (!(sup < opt.residual_tol)) return std::nullopt;
  FloatMatrix l = lambda_of(x);
  if (std::abs(float_det(FloatMatrix::identity(n) - l)) < opt.det_floor) return std::nullopt;
  return l;
}

//! Greedy clustering of multistart solutions at relative distance
//! opt.cluster_radius; returns representatives.
inline std::vector<FloatMatrix> cluster_solutions(const std::vector<FloatMatrix>& sols,
                                                  double radius = 1e-5) {
  std::vector<FloatMatrix> reps;
  for (const auto& s : sols) {
    bool found = false;
    for (const auto& r : reps) {
      double diff = (s - r).max_abs();
      double base = std::max(1.0, std::max(s.max_abs(), r.max_abs()));
      if (diff / base < radius) {
        found = true;
        break;
      }
    }
    if (!found) reps.push_back(s);
  }
  return reps;
}

}  // namespace semgraph

#endif
