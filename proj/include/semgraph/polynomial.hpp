#ifndef SEMGRAPH_POLYNOMIAL_HPP
#define SEMGRAPH_POLYNOMIAL_HPP

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semgraph/rational.hpp"
#include "semgraph/util.hpp"

namespace semgraph {

//! Typed model variable. Node indices are 0-based internally and printed
//! 1-based (l12 is lambda for the edge node0 -> node1). omega and sigma are
//! symmetric and stored with i <= j; lambda keeps (tail, head).
//! Variable order for the monomial order: lambda < omega < sigma, each kind
//! sorted by its index pair.
struct Var {
  enum Kind : int { Lambda = 0, Omega = 1, Sigma = 2 };
  Kind kind;
  int i, j;

  static Var lambda(int tail, int head) { return Var{Lambda, tail, head}; }
  static Var omega(int a, int b) {
    if (a > b) std::swap(a, b);
    return Var{Omega, a, b};
  }
  static Var sigma(int a, int b) {
    if (a > b) std::swap(a, b);
    return Var{Sigma, a, b};
  }

  friend bool operator==(const Var& a, const Var& b) {
    return a.kind == b.kind && a.i == b.i && a.j == b.j;
  }
  friend bool operator<(const Var& a, const Var& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  }

  std::string name(bool underscores = false) const {
    static const char* prefix[] = {"l", "w", "s"};
    std::ostringstream out;
    out << prefix[kind] << (i + 1);
    if (underscores) out << '_';
    out << (j + 1);
    return out.str();
  }
};

//! Monomial: sorted (Var, exponent) pairs, exponents >= 1.
struct Monomial {
  std::vector<std::pair<Var, int>> factors;

  int degree() const {
    int d = 0;
    for (auto& [v, e] : factors) d += e;
    return d;
  }
  bool is_constant() const { return factors.empty(); }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors == b.factors;
  }
};

//! Graded lexicographic order: total degree first, then lex over the Var
//! order (a higher exponent on an earlier variable wins).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    // walk both exponent sequences in Var order
    size_t ia = 0, ib = 0;
    while (ia < a.factors.size() && ib < b.factors.size()) {
      const Var& va = a.factors[ia].first;
      const Var& vb = b.factors[ib].first;
      if (va == vb) {
        int ea = a.factors[ia].second, eb = b.factors[ib].second;
        if (ea != eb) return ea < eb;  // higher exponent on the earliest shared var wins
        ++ia;
        ++ib;
        continue;
      }
      // the monomial owning the earlier variable is lex-larger
      return vb < va;
    }
    // identical prefixes with equal degree means identical monomials
    return false;
  }
};

using VarAssignment = std::map<Var, Rational>;

//! Sparse exact multivariate polynomial. Canonical: no zero coefficients.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rational, GradedLexLess>;

  Polynomial() = default;

  static Polynomial zero() { return Polynomial(); }
  static Polynomial constant(const Rational& c) {
    Polynomial p;
    if (!semgraph::is_zero(c)) p.terms_[Monomial{}] = c;
    return p;
  }
  static Polynomial variable(const Var& v) {
    Polynomial p;
    p.terms_[Monomial{{{v, 1}}}] = rat(1);
    return p;
  }
  //! Single term c * prod(vars); repeated vars accumulate exponents.
  static Polynomial term(const Rational& c, std::vector<Var> vars) {
    if (semgraph::is_zero(c)) return Polynomial();
    std::sort(vars.begin(), vars.end());
    Monomial m;
    for (auto& v : vars) {
      if (!m.factors.empty() && m.factors.back().first == v)
        ++m.factors.back().second;
      else
        m.factors.push_back({v, 1});
    }
    Polynomial p;
    p.terms_[m] = c;
    return p;
  }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_constant());
  }
  int total_degree() const {
    return terms_.empty() ? -1 : terms_.rbegin()->first.degree();
  }
  size_t term_count() const { return terms_.size(); }

  const Monomial& leading_monomial() const {
    if (terms_.empty()) throw std::runtime_error("leading term of zero polynomial");
    return terms_.rbegin()->first;
  }
  const Rational& leading_coefficient() const {
    if (terms_.empty()) throw std::runtime_error("leading term of zero polynomial");
    return terms_.rbegin()->second;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (semgraph::is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
    } else {
      it->second += c;
      if (semgraph::is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& other) {
    for (auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& other) {
    for (auto& [m, c] : other.terms_) add_term(m, Rational(-c));
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r;
    for (auto& [m, c] : a.terms_) r.terms_[m] = -c;
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (auto& [ma, ca] : a.terms_)
      for (auto& [mb, cb] : b.terms_) r.add_term(mul_monomials(ma, mb), ca * cb);
    return r;
  }
  Polynomial& operator*=(const Polynomial& b) { return *this = *this * b; }

  Polynomial& scale(const Rational& c) {
    if (semgraph::is_zero(c)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, coeff] : terms_) coeff *= c;
    return *this;
  }
  friend Polynomial operator*(const Rational& c, Polynomial p) { return p.scale(c); }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.terms_ == b.terms_;
  }

  //! Full-assignment evaluation; throws on a missing variable.
  Rational eval(const VarAssignment& a) const {
    Rational sum = rat(0);
    for (auto& [m, c] : terms_) {
      Rational t = c;
      for (auto& [v, e] : m.factors) {
        auto it = a.find(v);
        if (it == a.end())
          throw std::runtime_error("eval: missing assignment for variable " + v.name());
        for (int k = 0; k < e; ++k) t *= it->second;
      }
      sum += t;
    }
    return sum;
  }

  double eval_double(const std::map<Var, double>& a) const {
    double sum = 0;
    for (auto& [m, c] : terms_) {
      double t = to_double(c);
      for (auto& [v, e] : m.factors) {
        auto it = a.find(v);
        if (it == a.end())
          throw std::runtime_error("eval: missing assignment for variable " + v.name());
        for (int k = 0; k < e; ++k) t *= it->second;
      }
      sum += t;
    }
    return sum;
  }

  //! Sum of absolute per-term values; scale reference for relative vanishing.
  double eval_double_abs(const std::map<Var, double>& a) const {
    double sum = 0;
    for (auto& [m, c] : terms_) {
      double t = std::abs(to_double(c));
      for (auto& [v, e] : m.factors) {
        auto it = a.find(v);
        if (it == a.end())
          throw std::runtime_error("eval: missing assignment for variable " + v.name());
        for (int k = 0; k < e; ++k) t *= std::abs(it->second);
      }
      sum += t;
    }
    return sum;
  }

  //! Content: positive rational c such that (1/c)*this has coprime integer
  //! coefficients; the sign of the leading coefficient moves into c.
  Rational content() const {
    if (terms_.empty()) return rat(1);
    Integer num_gcd = 0, den_lcm = 1;
    for (auto& [m, c] : terms_) {
      Integer num = c.get_num(), den = c.get_den();
      mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), num.get_mpz_t());
      mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), den.get_mpz_t());
    }
    Rational c(num_gcd, den_lcm);
    c.canonicalize();
    if (sgn(leading_coefficient()) < 0) c = -c;
    return c;
  }

  //! Divides out the content; returns it. Primitive result has positive
  //! leading coefficient.
  Rational make_primitive() {
    if (terms_.empty()) return rat(1);
    Rational c = content();
    Rational inv = 1 / c;
    for (auto& [m, coeff] : terms_) coeff *= inv;
    return c;
  }

  //! Exact division test: returns this / d when the division has no
  //! remainder, nullopt otherwise.
  std::optional<Polynomial> divide_exact(const Polynomial& d) const {
    if (d.is_zero()) throw std::runtime_error("division by zero polynomial");
    Polynomial rem = *this, quot;
    const Monomial& dlead = d.leading_monomial();
    const Rational& dcoef = d.leading_coefficient();
    while (!rem.is_zero()) {
      auto q = div_monomials(rem.leading_monomial(), dlead);
      if (!q) return std::nullopt;
      Rational c = rem.leading_coefficient() / dcoef;
      Polynomial t;
      t.terms_[*q] = c;
      quot += t;
      rem -= t * d;
    }
    return quot;
  }

  //! Text form, descending graded-lex, e.g. "l12^2*l23*l34*w11 + w24".
  //! With underscores: "l1_2" (used when node indices can exceed one digit).
  std::string to_string(bool underscores = false) const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const Rational& c = it->second;
      Rational abs_c = rat_abs(c);
      if (first) {
        if (sgn(c) < 0) out << "-";
        first = false;
      } else {
        out << (sgn(c) < 0 ? " - " : " + ");
      }
      bool coeff_one = (abs_c == 1);
      if (!coeff_one || it->first.is_constant()) out << abs_c.get_str();
      bool need_star = !coeff_one && !it->first.is_constant();
      for (auto& [v, e] : it->first.factors) {
        if (need_star) out << '*';
        out << v.name(underscores);
        if (e > 1) out << '^' << e;
        need_star = true;
      }
    }
    return out.str();
  }

 private:
  static Monomial mul_monomials(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t ia = 0, ib = 0;
    while (ia < a.factors.size() || ib < b.factors.size()) {
      if (ib == b.factors.size() ||
          (ia < a.factors.size() && a.factors[ia].first < b.factors[ib].first)) {
        r.factors.push_back(a.factors[ia++]);
      } else if (ia == a.factors.size() || b.factors[ib].first < a.factors[ia].first) {
        r.factors.push_back(b.factors[ib++]);
      } else {
        r.factors.push_back({a.factors[ia].first, a.factors[ia].second + b.factors[ib].second});
        ++ia;
        ++ib;
      }
    }
    return r;
  }

  static std::optional<Monomial> div_monomials(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t ia = 0;
    for (auto& [v, e] : b.factors) {
      while (ia < a.factors.size() && a.factors[ia].first < v) r.factors.push_back(a.factors[ia++]);
      if (ia == a.factors.size() || !(a.factors[ia].first == v) || a.factors[ia].second < e)
        return std::nullopt;
      if (a.factors[ia].second > e) r.factors.push_back({v, a.factors[ia].second - e});
      ++ia;
    }
    while (ia < a.factors.size()) r.factors.push_back(a.factors[ia++]);
    return r;
  }

  TermMap terms_;
};

//! Deterministic total order on polynomials (for canonical factor lists).
inline bool poly_less(const Polynomial& a, const Polynomial& b) {
  auto ita = a.terms().rbegin(), enda = a.terms().rend();
  auto itb = b.terms().rbegin(), endb = b.terms().rend();
  GradedLexLess less;
  for (; ita != enda && itb != endb; ++ita, ++itb) {
    if (less(ita->first, itb->first)) return true;
    if (less(itb->first, ita->first)) return false;
    if (ita->second != itb->second) return ita->second < itb->second;
  }
  return itb != endb;
}

}  // namespace semgraph

#endif
