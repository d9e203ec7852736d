#pragma once

#include <array>
#include <string>
#include <vector>

#include "g2/combinatorics.hpp"
#include "g2/dense.hpp"
#include "g2/errors.hpp"
#include "g2/scalar.hpp"

namespace g2 {

template <class T>
using BasicVec7 = std::array<T, kDim>;
using Vec7 = BasicVec7<double>;

// Constant alternating k-tensor on R^7, stored over ascending multi-indices.
template <class T>
class BasicKForm {
 public:
  BasicKForm() : BasicKForm(0) {}
  explicit BasicKForm(int degree) : degree_(degree) {
    if (degree < 0) throw DegreeUnderflow("negative degree");
    if (degree > kDim) throw DegreeOverflow("degree above 7");
    coeffs_.assign(binom7(degree), T(0));
  }

  static BasicKForm basis(Mask m) {
    BasicKForm f(popcount(m));
    f.coeffs_[position_of(m)] = T(1);
    return f;
  }

  // "123" style one-based index string.
  static BasicKForm basis(const std::string& digits) {
    Mask m = 0;
    int prev = 0;
    for (char ch : digits) {
      int d = ch - '0';
      if (d < 1 || d > kDim || d <= prev) throw Error("bad multi-index: " + digits);
      prev = d;
      m |= static_cast<Mask>(1u << (d - 1));
    }
    return basis(m);
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.size()); }
  T& operator[](int i) { return coeffs_[i]; }
  const T& operator[](int i) const { return coeffs_[i]; }
  const T& at(Mask m) const { return coeffs_[position_of(m)]; }
  T& at(Mask m) { return coeffs_[position_of(m)]; }
  Mask mask(int i) const { return masks_of_degree(degree_)[i]; }
  const std::vector<T>& coeffs() const { return coeffs_; }
  std::vector<T>& coeffs() { return coeffs_; }

  BasicKForm& operator+=(const BasicKForm& o) {
    check_same(o);
    for (int i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  BasicKForm& operator-=(const BasicKForm& o) {
    check_same(o);
    for (int i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  BasicKForm& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend BasicKForm operator+(BasicKForm a, const BasicKForm& b) { return a += b; }
  friend BasicKForm operator-(BasicKForm a, const BasicKForm& b) { return a -= b; }
  friend BasicKForm operator-(BasicKForm a) { return a *= T(-1); }
  friend BasicKForm operator*(const T& s, BasicKForm a) { return a *= s; }
  friend BasicKForm operator*(BasicKForm a, const T& s) { return a *= s; }
  friend bool operator==(const BasicKForm& a, const BasicKForm& b) {
    return a.degree_ == b.degree_ && a.coeffs_ == b.coeffs_;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, abs_value(to_double(c)));
    return m;
  }

  int nonzero_count() const {
    int n = 0;
    for (const auto& c : coeffs_) n += (c != 0);
    return n;
  }

 private:
  void check_same(const BasicKForm& o) const {
    if (o.degree_ != degree_) throw DegreeMismatch("degree mismatch in form arithmetic");
  }

  int degree_;
  std::vector<T> coeffs_;
};

using KForm = BasicKForm<double>;
using QForm = BasicKForm<Rational>;

template <class T>
BasicKForm<T> wedge(const BasicKForm<T>& a, const BasicKForm<T>& b) {
  const int p = a.degree(), q = b.degree();
  if (p + q > kDim) throw DegreeOverflow("wedge degree exceeds 7");
  BasicKForm<T> out(p + q);
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    Mask ma = a.mask(i);
    for (int j = 0; j < b.size(); ++j) {
      if (b[j] == 0) continue;
      Mask mb = b.mask(j);
      int s = merge_sign(ma, mb);
      if (s == 0) continue;
      T term = a[i] * b[j];
      if (s > 0)
        out.at(static_cast<Mask>(ma | mb)) += term;
      else
        out.at(static_cast<Mask>(ma | mb)) -= term;
    }
  }
  return out;
}

// Coefficient of a ^ b on e^{1..7} for complementary degrees.
template <class T>
T wedge_top(const BasicKForm<T>& a, const BasicKForm<T>& b) {
  if (a.degree() + b.degree() != kDim) throw DegreeMismatch("wedge_top needs complementary degrees");
  T out(0);
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    Mask ma = a.mask(i);
    Mask mb = static_cast<Mask>(full_mask() & ~ma);
    const T& bv = b.at(mb);
    if (bv == 0) continue;
    if (merge_sign(ma, mb) > 0)
      out += a[i] * bv;
    else
      out -= a[i] * bv;
  }
  return out;
}

// e_i interior e^I: signed removal of index i.
template <class T>
BasicKForm<T> interior_basis(int i, const BasicKForm<T>& a) {
  if (a.degree() == 0) throw DegreeUnderflow("interior product of a 0-form");
  BasicKForm<T> out(a.degree() - 1);
  for (int j = 0; j < a.size(); ++j) {
    Mask m = a.mask(j);
    if (!(m >> i & 1) || a[j] == 0) continue;
    int below = popcount(static_cast<Mask>(m & ((1u << i) - 1)));
    Mask rest = static_cast<Mask>(m & ~(1u << i));
    if (below & 1)
      out.at(rest) -= a[j];
    else
      out.at(rest) += a[j];
  }
  return out;
}

template <class T>
BasicKForm<T> interior(const BasicVec7<T>& v, const BasicKForm<T>& a) {
  if (a.degree() == 0) throw DegreeUnderflow("interior product of a 0-form");
  BasicKForm<T> out(a.degree() - 1);
  for (int i = 0; i < kDim; ++i)
    if (v[i] != 0) out += v[i] * interior_basis(i, a);
  return out;
}

// Evaluate a k-form on k vectors.
template <class T>
T evaluate(const BasicKForm<T>& a, const std::vector<BasicVec7<T>>& vs) {
  if (static_cast<int>(vs.size()) != a.degree()) throw DegreeMismatch("wrong number of vectors");
  BasicKForm<T> cur = a;
  for (const auto& v : vs) cur = interior(v, cur);
  return cur[0];
}

// Pullback by the linear map x -> A x, i.e. (A^*a)(v...) = a(Av...).
template <class T>
BasicKForm<T> pullback(const Mat<T>& A, const BasicKForm<T>& a) {
  const int k = a.degree();
  BasicKForm<T> out(k);
  for (int i = 0; i < out.size(); ++i) {
    auto cols = indices_of(out.mask(i));
    T acc(0);
    for (int j = 0; j < a.size(); ++j) {
      if (a[j] == 0) continue;
      auto rows = indices_of(a.mask(j));
      Mat<T> sub(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = A(rows[r], cols[c]);
      acc += a[j] * determinant(sub);
    }
    out[i] = acc;
  }
  return out;
}

template <class T>
BasicKForm<T> unit_covector(int i) {
  return BasicKForm<T>::basis(static_cast<Mask>(1u << i));
}

template <class T>
BasicKForm<T> covector(const BasicVec7<T>& v) {
  BasicKForm<T> out(1);
  for (int i = 0; i < kDim; ++i) out[i] = v[i];
  return out;
}

template <class T>
BasicKForm<T> top_form() {
  return BasicKForm<T>::basis(full_mask());
}

template <class T>
BasicKForm<double> to_double(const BasicKForm<T>& a) {
  BasicKForm<double> out(a.degree());
  for (int i = 0; i < a.size(); ++i) out[i] = to_double(a[i]);
  return out;
}

inline QForm to_rational(const KForm& a) {
  QForm out(a.degree());
  for (int i = 0; i < a.size(); ++i) out[i] = Rational(a[i]);
  return out;
}

std::string index_string(Mask m);

}  // namespace g2
