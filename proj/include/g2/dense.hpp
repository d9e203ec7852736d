#pragma once

#include <cassert>
#include <utility>
#include <vector>

#include "g2/scalar.hpp"

namespace g2 {

// Small dense row-major matrix usable with double and Rational.
template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, T(0)) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  Mat operator*(const Mat& o) const {
    assert(cols_ == o.rows_);
    Mat out(rows_, o.cols_);
    for (int r = 0; r < rows_; ++r)
      for (int k = 0; k < cols_; ++k) {
        const T& a = (*this)(r, k);
        if (a == 0) continue;
        for (int c = 0; c < o.cols_; ++c) out(r, c) += a * o(k, c);
      }
    return out;
  }

  Mat operator+(const Mat& o) const {
    Mat out = *this;
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
    return out;
  }

  Mat operator-(const Mat& o) const {
    Mat out = *this;
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] -= o.data_[i];
    return out;
  }

  Mat scaled(const T& s) const {
    Mat out = *this;
    for (auto& v : out.data_) v *= s;
    return out;
  }

  std::vector<T> apply(const std::vector<T>& x) const {
    std::vector<T> y(rows_, T(0));
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) y[r] += (*this)(r, c) * x[c];
    return y;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

template <class T>
int pick_pivot(const Mat<T>& m, int col, int from) {
  int best = -1;
  double best_abs = 0.0;
  for (int r = from; r < m.rows(); ++r) {
    if (m(r, col) == 0) continue;
    if constexpr (kIsExact<T>) return r;
    double a = abs_value(to_double(m(r, col)));
    if (a > best_abs) {
      best_abs = a;
      best = r;
    }
  }
  return best;
}

template <class T>
void swap_rows(Mat<T>& m, int a, int b) {
  if (a == b) return;
  for (int c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace detail

template <class T>
T determinant(Mat<T> m) {
  const int n = m.rows();
  T det(1);
  for (int c = 0; c < n; ++c) {
    int p = detail::pick_pivot(m, c, c);
    if (p < 0) return T(0);
    if (p != c) {
      detail::swap_rows(m, p, c);
      det = -det;
    }
    det *= m(c, c);
    for (int r = c + 1; r < n; ++r) {
      if (m(r, c) == 0) continue;
      T f = m(r, c) / m(c, c);
      for (int k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

// Gauss-Jordan inverse; throws on singular input.
template <class T>
Mat<T> inverse(const Mat<T>& a) {
  const int n = a.rows();
  Mat<T> m = a;
  Mat<T> inv = Mat<T>::identity(n);
  for (int c = 0; c < n; ++c) {
    int p = detail::pick_pivot(m, c, c);
    if (p < 0) throw Error("singular matrix");
    detail::swap_rows(m, p, c);
    detail::swap_rows(inv, p, c);
    T piv = m(c, c);
    for (int k = 0; k < n; ++k) {
      m(c, k) /= piv;
      inv(c, k) /= piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      T f = m(r, c);
      for (int k = 0; k < n; ++k) {
        m(r, k) -= f * m(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

// Row rank; entries below tol (relative to the largest entry) count as zero.
template <class T>
int rank(Mat<T> m, double tol = 1e-10) {
  double scale = 0.0;
  if constexpr (!kIsExact<T>) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) scale = std::max(scale, abs_value(to_double(m(r, c))));
    if (scale == 0.0) return 0;
  }
  int rk = 0;
  for (int c = 0; c < m.cols() && rk < m.rows(); ++c) {
    int p = detail::pick_pivot(m, c, rk);
    if (p < 0) continue;
    if constexpr (!kIsExact<T>) {
      if (abs_value(to_double(m(p, c))) <= tol * scale) continue;
    }
    detail::swap_rows(m, p, rk);
    for (int r = rk + 1; r < m.rows(); ++r) {
      if (m(r, c) == 0) continue;
      T f = m(r, c) / m(rk, c);
      for (int k = c; k < m.cols(); ++k) m(r, k) -= f * m(rk, k);
    }
    ++rk;
  }
  return rk;
}

// Sylvester test on leading principal minors; exact for rationals.
template <class T>
bool is_positive_definite(const Mat<T>& m) {
  const int n = m.rows();
  for (int k = 1; k <= n; ++k) {
    Mat<T> sub(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub(r, c) = m(r, c);
    if (!(determinant(sub) > 0)) return false;
  }
  return true;
}

template <class T>
Mat<double> to_double(const Mat<T>& m) {
  Mat<double> out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(r, c) = to_double(m(r, c));
  return out;
}

}  // namespace g2

namespace g2 {

// Plain Cholesky attempt; false as soon as a pivot is not positive.
inline bool cholesky_succeeds(const Mat<double>& m) {
  const int n = m.rows();
  Mat<double> l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

}  // namespace g2
