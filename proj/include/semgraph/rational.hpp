#ifndef SEMGRAPH_RATIONAL_HPP
#define SEMGRAPH_RATIONAL_HPP

#include <gmpxx.h>

#include <random>
#include <string>

namespace semgraph {

//! Exact arbitrary-precision rational. All symbolic work in the library is
//! carried out over these; no floating point enters rank or vanishing
//! statements.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline Rational rat_abs(const Rational& r) { return sgn(r) < 0 ? Rational(-r) : r; }

//! Uniform random rational with small numerator/denominator; nonzero by
//! default so evaluation points stay off coordinate hyperplanes.
inline Rational random_rational(std::mt19937_64& rng, int max_num = 9,
                                int max_den = 4, bool nonzero = true) {
  std::uniform_int_distribution<int> num_dist(-max_num, max_num);
  std::uniform_int_distribution<int> den_dist(1, max_den);
  int n = num_dist(rng);
  while (nonzero && n == 0) n = num_dist(rng);
  return rat(n, den_dist(rng));
}

}  // namespace semgraph

#endif
