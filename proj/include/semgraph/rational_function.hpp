#ifndef SEMGRAPH_RATIONAL_FUNCTION_HPP
#define SEMGRAPH_RATIONAL_FUNCTION_HPP

#include <optional>
#include <utility>
#include <vector>

#include "semgraph/polynomial.hpp"

namespace semgraph {

//! Quotient of polynomials. The denominator is kept in factored form
//! (primitive factors with positive leading coefficient, exponents >= 1);
//! reduction works by trial exact division of the numerator by each factor.
//! Every denominator this library produces is a product of such atoms
//! (principal minors, det(I - Lambda)), so trial division fully cancels the
//! cofactor garbage that cross-multiplied addition introduces.
class RationalFunction {
 public:
  RationalFunction() = default;

  RationalFunction(Polynomial num) : num_(std::move(num)) {}

  RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)) {
    if (den.is_zero()) throw std::runtime_error("rational function with zero denominator");
    Rational c = den.make_primitive();
    num_.scale(1 / c);
    if (!den.is_constant()) den_.push_back({std::move(den), 1});
    reduce();
  }

  static RationalFunction from_var(const Var& v) {
    return RationalFunction(Polynomial::variable(v));
  }
  static RationalFunction constant(const Rational& c) {
    return RationalFunction(Polynomial::constant(c));
  }

  const Polynomial& num() const { return num_; }
  const std::vector<std::pair<Polynomial, int>>& den_factors() const { return den_; }

  Polynomial den_expanded() const {
    Polynomial d = Polynomial::constant(rat(1));
    for (auto& [f, e] : den_)
      for (int k = 0; k < e; ++k) d *= f;
    return d;
  }

  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.empty(); }

  friend RationalFunction operator-(const RationalFunction& a) {
    RationalFunction r = a;
    r.num_ = -r.num_;
    return r;
  }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    RationalFunction r;
    // common denominator with per-factor max exponents
    r.den_ = merge_max(a.den_, b.den_);
    Polynomial na = a.num_ * cofactor(r.den_, a.den_);
    Polynomial nb = b.num_ * cofactor(r.den_, b.den_);
    r.num_ = na + nb;
    r.reduce();
    return r;
  }

  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
    return a + (-b);
  }

  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero() || b.is_zero()) return RationalFunction();
    RationalFunction r;
    r.num_ = a.num_ * b.num_;
    r.den_ = merge_sum(a.den_, b.den_);
    r.reduce();
    return r;
  }

  RationalFunction& operator+=(const RationalFunction& b) { return *this = *this + b; }
  RationalFunction& operator-=(const RationalFunction& b) { return *this = *this - b; }
  RationalFunction& operator*=(const RationalFunction& b) { return *this = *this * b; }

  //! a / b with b a nonzero rational function.
  friend RationalFunction divide(const RationalFunction& a, const RationalFunction& b) {
    if (b.is_zero()) throw std::runtime_error("division by zero rational function");
    if (a.is_zero()) return RationalFunction();
    RationalFunction r;
    r.num_ = a.num_;
    r.den_ = a.den_;
    // multiply by reciprocal: b's numerator becomes a denominator atom
    Polynomial bn = b.num_;
    Rational c = bn.make_primitive();
    r.num_.scale(1 / c);
    for (auto& [f, e] : b.den_)
      for (int k = 0; k < e; ++k) r.num_ *= f;
    if (!bn.is_constant()) r.den_ = merge_sum(r.den_, {{bn, 1}});
    r.reduce();
    return r;
  }

  //! Evaluates at a full assignment; nullopt when the denominator vanishes.
  std::optional<Rational> eval(const VarAssignment& a) const {
    Rational d = rat(1);
    for (auto& [f, e] : den_) {
      Rational fv = f.eval(a);
      if (semgraph::is_zero(fv)) return std::nullopt;
      for (int k = 0; k < e; ++k) d *= fv;
    }
    return Rational(num_.eval(a) / d);
  }

  std::optional<double> eval_double(const std::map<Var, double>& a) const {
    double d = 1;
    for (auto& [f, e] : den_) {
      double fv = f.eval_double(a);
      if (fv == 0) return std::nullopt;
      for (int k = 0; k < e; ++k) d *= fv;
    }
    return num_.eval_double(a) / d;
  }

  std::string to_string(bool underscores = false) const {
    if (den_.empty()) return num_.to_string(underscores);
    std::ostringstream out;
    out << '(' << num_.to_string(underscores) << ") / (";
    out << den_expanded().to_string(underscores) << ')';
    return out.str();
  }

  //! Exact symbolic equality via cross-multiplication.
  friend bool equal_symbolic(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ * b.den_expanded() == b.num_ * a.den_expanded();
  }

 private:
  void reduce() {
    if (num_.is_zero()) {
      den_.clear();
      return;
    }
    std::vector<std::pair<Polynomial, int>> kept;
    for (auto& [f, e] : den_) {
      int remaining = e;
      while (remaining > 0) {
        auto q = num_.divide_exact(f);
        if (!q) break;
        num_ = std::move(*q);
        --remaining;
      }
      if (remaining > 0) kept.push_back({f, remaining});
    }
    den_ = std::move(kept);
  }

  static std::vector<std::pair<Polynomial, int>> merge_max(
      const std::vector<std::pair<Polynomial, int>>& a,
      const std::vector<std::pair<Polynomial, int>>& b) {
    return merge_impl(a, b, true);
  }
  static std::vector<std::pair<Polynomial, int>> merge_sum(
      const std::vector<std::pair<Polynomial, int>>& a,
      const std::vector<std::pair<Polynomial, int>>& b) {
    return merge_impl(a, b, false);
  }

  static std::vector<std::pair<Polynomial, int>> merge_impl(
      std::vector<std::pair<Polynomial, int>> a,
      const std::vector<std::pair<Polynomial, int>>& b, bool take_max) {
    for (auto& [f, e] : b) {
      bool found = false;
      for (auto& [g, d] : a) {
        if (g == f) {
          d = take_max ? std::max(d, e) : d + e;
          found = true;
          break;
        }
      }
      if (!found) a.push_back({f, e});
    }
    std::sort(a.begin(), a.end(), [](const auto& x, const auto& y) {
      return poly_less(x.first, y.first);
    });
    return a;
  }

  //! Product of factors in `full` beyond those in `part`.
  static Polynomial cofactor(const std::vector<std::pair<Polynomial, int>>& full,
                             const std::vector<std::pair<Polynomial, int>>& part) {
    Polynomial r = Polynomial::constant(rat(1));
    for (auto& [f, e] : full) {
      int have = 0;
      for (auto& [g, d] : part)
        if (g == f) {
          have = d;
          break;
        }
      for (int k = 0; k < e - have; ++k) r *= f;
    }
    return r;
  }

  Polynomial num_;
  std::vector<std::pair<Polynomial, int>> den_;
};

}  // namespace semgraph

#endif
