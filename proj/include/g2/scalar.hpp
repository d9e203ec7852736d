#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "g2/errors.hpp"

namespace g2 {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

template <class T>
inline constexpr bool kIsExact = std::is_same_v<T, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

// Integer n-th root of a nonnegative integer when it is exact.
inline std::optional<BigInt> exact_int_root(const BigInt& v, int n) {
  if (v < 0) return std::nullopt;
  if (v == 0 || v == 1) return v;
  double guess = std::pow(v.convert_to<double>(), 1.0 / n);
  BigInt r = static_cast<long long>(std::llround(guess));
  for (BigInt c = (r > 2 ? BigInt(r - 2) : BigInt(0)); c <= r + 2; ++c) {
    BigInt p = 1;
    for (int i = 0; i < n; ++i) p *= c;
    if (p == v) return c;
  }
  return std::nullopt;
}

// Real n-th root of a rational when it is itself rational.
inline std::optional<Rational> exact_root(const Rational& q, int n) {
  if (q < 0) {
    if (n % 2 == 0) return std::nullopt;
    auto r = exact_root(Rational(-q), n);
    if (!r) return std::nullopt;
    return Rational(-*r);
  }
  auto a = exact_int_root(boost::multiprecision::numerator(q), n);
  auto b = exact_int_root(boost::multiprecision::denominator(q), n);
  if (!a || !b) return std::nullopt;
  return Rational(*a, *b);
}

inline double real_root(double x, int n) {
  if (x < 0 && n % 2 == 1) return -std::pow(-x, 1.0 / n);
  return std::pow(x, 1.0 / n);
}

inline Rational real_root(const Rational& x, int n) {
  auto r = exact_root(x, n);
  if (!r) throw InexactValue("no rational " + std::to_string(n) + "-th root");
  return *r;
}

inline std::string to_string(const Rational& q) { return q.str(); }

}  // namespace g2
