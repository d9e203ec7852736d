#pragma once

#include <array>
#include <vector>

#include "g2/dense.hpp"
#include "g2/kform.hpp"

namespace g2 {

template <class T>
class BasicSym2 {
 public:
  BasicSym2() : m_(kDim, kDim) {}
  explicit BasicSym2(const Mat<T>& m) : m_(kDim, kDim) {
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) set(i, j, (m(i, j) + m(j, i)) / T(2));
  }
  static BasicSym2 identity() { return BasicSym2(Mat<T>::identity(kDim)); }

  const T& operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, const T& v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Mat<T>& matrix() const { return m_; }

  friend BasicSym2 operator+(const BasicSym2& a, const BasicSym2& b) { return BasicSym2(a.m_ + b.m_); }
  friend BasicSym2 operator-(const BasicSym2& a, const BasicSym2& b) { return BasicSym2(a.m_ - b.m_); }
  friend BasicSym2 operator*(const T& s, const BasicSym2& a) { return BasicSym2(a.m_.scaled(s)); }

 private:
  Mat<T> m_;
};

using Sym2Tensor = BasicSym2<double>;
using QSym2 = BasicSym2<Rational>;

namespace detail {

// In-place partial-pivot elimination on a row-major k x k buffer.
inline double small_determinant(double* m, int k) {
  double det = 1.0;
  for (int c = 0; c < k; ++c) {
    int p = c;
    for (int r = c + 1; r < k; ++r)
      if (std::fabs(m[r * k + c]) > std::fabs(m[p * k + c])) p = r;
    if (m[p * k + c] == 0.0) return 0.0;
    if (p != c) {
      for (int j = 0; j < k; ++j) std::swap(m[p * k + j], m[c * k + j]);
      det = -det;
    }
    det *= m[c * k + c];
    for (int r = c + 1; r < k; ++r) {
      double f = m[r * k + c] / m[c * k + c];
      for (int j = c; j < k; ++j) m[r * k + j] -= f * m[c * k + j];
    }
  }
  return det;
}

}  // namespace detail

// Gram matrix of the induced inner product on k-forms (ascending-index convention).
template <class T>
Mat<T> form_gram(const Mat<T>& ginv, int k) {
  const auto& ms = masks_of_degree(k);
  const int n = static_cast<int>(ms.size());
  Mat<T> G(n, n);
  for (int a = 0; a < n; ++a) {
    auto ia = indices_of(ms[a]);
    for (int b = a; b < n; ++b) {
      auto ib = indices_of(ms[b]);
      T d;
      if constexpr (kIsExact<T>) {
        Mat<T> sub(k, k);
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) sub(r, c) = ginv(ia[r], ib[c]);
        d = k == 0 ? T(1) : determinant(sub);
      } else {
        double sub[kDim * kDim];
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) sub[r * k + c] = ginv(ia[r], ib[c]);
        d = detail::small_determinant(sub, k);
      }
      G(a, b) = d;
      G(b, a) = d;
    }
  }
  return G;
}

// Matrix of the Hodge star from degree k to 7-k for volume coefficient v (vol = v e^{1..7}).
template <class T>
Mat<T> star_matrix(const Mat<T>& gram_k, int k, const T& v) {
  const auto& src = masks_of_degree(k);
  const auto& dst = masks_of_degree(kDim - k);
  Mat<T> S(static_cast<int>(dst.size()), static_cast<int>(src.size()));
  for (int j = 0; j < static_cast<int>(dst.size()); ++j) {
    Mask comp = static_cast<Mask>(full_mask() & ~dst[j]);
    int kpos = position_of(comp);
    int s = merge_sign(comp, dst[j]);
    for (int i = 0; i < static_cast<int>(src.size()); ++i) {
      const T& gi = gram_k(kpos, i);
      if (gi == 0) continue;
      S(j, i) = (s > 0 ? gi : T(-gi)) * v;
    }
  }
  return S;
}

template <class T>
BasicKForm<T> apply_matrix(const Mat<T>& M, const BasicKForm<T>& a, int out_degree) {
  BasicKForm<T> out(out_degree);
  out.coeffs() = M.apply(a.coeffs());
  return out;
}

template <class T>
T form_inner(const Mat<T>& gram, const BasicKForm<T>& a, const BasicKForm<T>& b) {
  T acc(0);
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < b.size(); ++j)
      if (b[j] != 0) acc += a[i] * gram(i, j) * b[j];
  }
  return acc;
}

// Public Hodge star for an arbitrary metric and volume form.
template <class T>
BasicKForm<T> hodge_star(const BasicSym2<T>& g, const BasicKForm<T>& vol, const BasicKForm<T>& a) {
  if (vol.degree() != kDim) throw DegreeMismatch("volume form must have degree 7");
  bool pd;
  if constexpr (kIsExact<T>)
    pd = is_positive_definite(g.matrix());
  else
    pd = cholesky_succeeds(g.matrix());
  if (!pd) throw NotPositiveDefinite("metric is not positive definite");
  Mat<T> ginv = inverse(g.matrix());
  const int k = a.degree();
  return apply_matrix(star_matrix(form_gram(ginv, k), k, vol[0]), a, kDim - k);
}

template <class T>
BasicKForm<T> standard_phi() {
  using F = BasicKForm<T>;
  F p = F::basis("123") + F::basis("145") + F::basis("167") + F::basis("246");
  p -= F::basis("257");
  p -= F::basis("347");
  p -= F::basis("356");
  return p;
}

// Raw B_ij with (e_i _| phi) ^ (e_j _| phi) ^ phi = B_ij e^{1..7}.
template <class T>
Mat<T> wedge_bilinear(const BasicKForm<T>& phi) {
  std::array<BasicKForm<T>, kDim> iota;
  for (int i = 0; i < kDim; ++i) iota[i] = interior_basis(i, phi);
  std::array<BasicKForm<T>, kDim> iota_phi;
  for (int j = 0; j < kDim; ++j) iota_phi[j] = wedge(iota[j], phi);
  Mat<T> B(kDim, kDim);
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      T v = wedge_top(iota[i], iota_phi[j]);
      B(i, j) = v;
      B(j, i) = v;
    }
  return B;
}

// +1 or -1: the orientation class is sign * e^{1..7}, fixed so that the
// defining identity carries the constant -6 at the reference form.
inline int orientation_sign() {
  static const int sign = [] {
    Mat<double> B = wedge_bilinear(standard_phi<double>());
    return B(0, 0) > 0 ? -1 : 1;
  }();
  return sign;
}

template <class T>
struct FormTypeComponents {
  int degree = 3;
  BasicKForm<T> p1, p7, p27, p14;
};

template <class T>
class BasicG2Structure;

template <class T>
BasicG2Structure<T> metric_from_phi(const BasicKForm<T>& phi, double near_degenerate = 1e-12);

template <class T>
class BasicG2Structure {
 public:
  const BasicKForm<T>& phi() const { return phi_; }
  const BasicSym2<T>& metric() const { return metric_; }
  const BasicSym2<T>& inverse_metric() const { return inverse_metric_; }
  const BasicKForm<T>& vol() const { return vol_; }
  const BasicKForm<T>& psi() const { return psi_; }
  const T& norm_factor() const { return lambda_; }
  const T& det_b() const { return det_b_; }
  const Mat<T>& b_matrix() const { return b_; }
  const Mat<T>& gram(int k) const { return gram_[k]; }
  const Mat<T>& star_matrix(int k) const { return star_[k]; }

  // Projectors on coefficient space: degree 3/4 -> {1, 7, 27}; degree 2 -> {7, 14}.
  const Mat<T>& projector(int degree, int type) const;

  T inner(const BasicKForm<T>& a, const BasicKForm<T>& b) const {
    if (a.degree() != b.degree()) throw DegreeMismatch("inner product of different degrees");
    return form_inner(gram_[a.degree()], a, b);
  }
  T norm2(const BasicKForm<T>& a) const { return inner(a, a); }

  BasicKForm<T> star(const BasicKForm<T>& a) const {
    return apply_matrix(star_[a.degree()], a, kDim - a.degree());
  }

  // Integral over the unit-covolume torus of a constant top form.
  T integrate(const BasicKForm<T>& top) const {
    if (top.degree() != kDim) throw DegreeMismatch("integrand must be a 7-form");
    return orientation_sign() > 0 ? top[0] : T(-top[0]);
  }

  T total_volume() const { return lambda_; }

  template <class U>
  friend BasicG2Structure<U> metric_from_phi(const BasicKForm<U>& phi, double near_degenerate);

 private:
  BasicKForm<T> phi_{3}, vol_{7}, psi_{4};
  BasicSym2<T> metric_, inverse_metric_;
  T lambda_{1};
  T det_b_{0};
  Mat<T> b_;
  std::array<Mat<T>, kDim + 1> gram_, star_;
  std::array<Mat<T>, 3> proj3_, proj4_;
  std::array<Mat<T>, 2> proj2_;
};

using G2Structure = BasicG2Structure<double>;
using QG2Structure = BasicG2Structure<Rational>;

namespace detail {

// G-orthogonal projector onto the column span of A: A (A^T G A)^{-1} A^T G.
template <class T>
Mat<T> span_projector(const Mat<T>& A, const Mat<T>& G) {
  Mat<T> At = A.transpose();
  Mat<T> AtG = At * G;
  return A * inverse(AtG * A) * AtG;
}

template <class T>
Mat<T> columns_of(const std::vector<BasicKForm<T>>& forms) {
  Mat<T> A(forms.front().size(), static_cast<int>(forms.size()));
  for (int c = 0; c < static_cast<int>(forms.size()); ++c)
    for (int r = 0; r < forms[c].size(); ++r) A(r, c) = forms[c][r];
  return A;
}

}  // namespace detail

template <class T>
const Mat<T>& BasicG2Structure<T>::projector(int degree, int type) const {
  switch (degree) {
    case 2:
      if (type == 7) return proj2_[0];
      if (type == 14) return proj2_[1];
      break;
    case 3:
    case 4: {
      const auto& p = degree == 3 ? proj3_ : proj4_;
      if (type == 1) return p[0];
      if (type == 7) return p[1];
      if (type == 27) return p[2];
      break;
    }
    default:
      throw UnsupportedDegree("type decomposition needs degree 2, 3 or 4");
  }
  throw UnsupportedDegree("unknown type for this degree");
}

template <class T>
BasicG2Structure<T> metric_from_phi(const BasicKForm<T>& phi, double near_degenerate) {
  if (phi.degree() != 3) throw DegreeMismatch("metric_from_phi needs a 3-form");
  const int s = orientation_sign();
  BasicG2Structure<T> fs;
  fs.phi_ = phi;
  fs.b_ = wedge_bilinear(phi).scaled(T(s));
  fs.det_b_ = determinant(fs.b_);
  const double det_d = to_double(fs.det_b_);
  if (!(-fs.det_b_ > 0)) throw NotPositive("3-form is not positive: -det B <= 0", det_d);
  if constexpr (!kIsExact<T>) {
    if (std::fabs(det_d) < near_degenerate) throw NearDegenerate("|det B| below threshold");
  }
  const T six7 = T(279936);
  fs.lambda_ = real_root(T(-fs.det_b_ / six7), 9);
  Mat<T> g = fs.b_.scaled(T(-1) / (T(6) * fs.lambda_));
  bool pd;
  if constexpr (kIsExact<T>)
    pd = is_positive_definite(g);
  else
    pd = cholesky_succeeds(g);
  if (!pd) throw NotPositive("induced metric is not positive definite", det_d);
  fs.metric_ = BasicSym2<T>(g);
  fs.inverse_metric_ = BasicSym2<T>(inverse(g));
  fs.vol_ = top_form<T>() * T(s * 1) * fs.lambda_;

  const Mat<T>& ginv = fs.inverse_metric_.matrix();
  for (int k = 0; k <= kDim; ++k) fs.gram_[k] = form_gram(ginv, k);
  for (int k = 0; k <= kDim; ++k) fs.star_[k] = star_matrix(fs.gram_[k], k, fs.vol_[0]);
  fs.psi_ = fs.star(phi);

  std::vector<BasicKForm<T>> c2, c3, c4;
  for (int i = 0; i < kDim; ++i) {
    c2.push_back(interior_basis(i, phi));
    c3.push_back(interior_basis(i, fs.psi_));
    c4.push_back(wedge(unit_covector<T>(i), phi));
  }
  fs.proj2_[0] = detail::span_projector(detail::columns_of(c2), fs.gram_[2]);
  fs.proj2_[1] = Mat<T>::identity(21) - fs.proj2_[0];
  fs.proj3_[0] = detail::span_projector(detail::columns_of(std::vector{phi}), fs.gram_[3]);
  fs.proj3_[1] = detail::span_projector(detail::columns_of(c3), fs.gram_[3]);
  fs.proj3_[2] = Mat<T>::identity(35) - fs.proj3_[0] - fs.proj3_[1];
  fs.proj4_[0] = detail::span_projector(detail::columns_of(std::vector{fs.psi_}), fs.gram_[4]);
  fs.proj4_[1] = detail::span_projector(detail::columns_of(c4), fs.gram_[4]);
  fs.proj4_[2] = Mat<T>::identity(35) - fs.proj4_[0] - fs.proj4_[1];
  return fs;
}

template <class T>
FormTypeComponents<T> decompose(const BasicG2Structure<T>& fs, const BasicKForm<T>& a) {
  FormTypeComponents<T> out;
  const int k = a.degree();
  out.degree = k;
  if (k == 2) {
    out.p7 = apply_matrix(fs.projector(2, 7), a, 2);
    out.p14 = apply_matrix(fs.projector(2, 14), a, 2);
    return out;
  }
  if (k != 3 && k != 4) throw UnsupportedDegree("decompose needs degree 2, 3 or 4");
  out.p1 = apply_matrix(fs.projector(k, 1), a, k);
  out.p7 = apply_matrix(fs.projector(k, 7), a, k);
  out.p27 = apply_matrix(fs.projector(k, 27), a, k);
  return out;
}

// Modified star: (4/3, 1, -1) on types (1, 7, 27) in degree 3; (3/4, 1, -1) in degree 4.
template <class T>
BasicKForm<T> star_op(const BasicG2Structure<T>& fs, const BasicKForm<T>& a) {
  const int k = a.degree();
  if (k != 3 && k != 4) throw UnsupportedDegree("star_op needs degree 3 or 4");
  auto c = decompose(fs, a);
  T w1 = k == 3 ? T(4) / T(3) : T(3) / T(4);
  return fs.star(w1 * c.p1 + c.p7 - c.p27);
}

template <class T>
Mat<T> star_op_matrix(const BasicG2Structure<T>& fs, int k) {
  if (k != 3 && k != 4) throw UnsupportedDegree("star_op needs degree 3 or 4");
  T w1 = k == 3 ? T(4) / T(3) : T(3) / T(4);
  Mat<T> mix = fs.projector(k, 1).scaled(w1) + fs.projector(k, 7) - fs.projector(k, 27);
  return fs.star_matrix(k) * mix;
}

// eta_ijk = h_il g^lm phi_mjk + h_jl g^lm phi_imk + h_kl g^lm phi_ijm
template <class T>
BasicKForm<T> sym2_to_form(const BasicG2Structure<T>& fs, const BasicSym2<T>& h) {
  Mat<T> H = h.matrix() * fs.inverse_metric().matrix();
  BasicKForm<T> out(3);
  for (int m = 0; m < kDim; ++m) {
    BasicKForm<T> im = interior_basis(m, fs.phi());
    for (int i = 0; i < kDim; ++i) {
      if (H(i, m) == 0) continue;
      out += H(i, m) * wedge(unit_covector<T>(i), im);
    }
  }
  return out;
}

inline std::vector<std::pair<int, int>> sym2_index_pairs() {
  std::vector<std::pair<int, int>> p;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) p.emplace_back(i, j);
  return p;
}

template <class T>
BasicSym2<T> sym2_basis(int i, int j) {
  BasicSym2<T> h;
  h.set(i, j, T(1));
  return h;
}

template <class T>
Mat<T> sym2_to_form_matrix(const BasicG2Structure<T>& fs) {
  auto pairs = sym2_index_pairs();
  Mat<T> M(35, static_cast<int>(pairs.size()));
  for (int c = 0; c < static_cast<int>(pairs.size()); ++c) {
    auto eta = sym2_to_form(fs, sym2_basis<T>(pairs[c].first, pairs[c].second));
    for (int r = 0; r < 35; ++r) M(r, c) = eta[r];
  }
  return M;
}

template <class T>
BasicSym2<T> form_to_sym2(const BasicG2Structure<T>& fs, const BasicKForm<T>& eta, double tol = 1e-9) {
  if (eta.degree() != 3) throw DegreeMismatch("form_to_sym2 needs a 3-form");
  auto c = decompose(fs, eta);
  double n7 = std::sqrt(std::max(0.0, to_double(fs.norm2(c.p7))));
  double n = std::sqrt(std::max(0.0, to_double(fs.norm2(eta))));
  if constexpr (kIsExact<T>) {
    if (c.p7.nonzero_count() != 0) throw HasSevenComponent("3-form has a nonzero type-7 part");
  } else {
    if (n7 > tol * std::max(1.0, n)) throw HasSevenComponent("3-form has a type-7 part above tolerance");
  }
  Mat<T> M = sym2_to_form_matrix(fs);
  Mat<T> Mt = M.transpose();
  std::vector<T> rhs = Mt.apply(eta.coeffs());
  std::vector<T> x = inverse(Mt * M).apply(rhs);
  auto pairs = sym2_index_pairs();
  BasicSym2<T> h;
  for (int c = 0; c < static_cast<int>(pairs.size()); ++c) h.set(pairs[c].first, pairs[c].second, x[c]);
  return h;
}

template <class T>
T l2_pairing(const BasicG2Structure<T>& fs, const BasicKForm<T>& a, const BasicKForm<T>& b) {
  if (a.degree() != b.degree()) throw DegreeMismatch("l2 pairing of different degrees");
  return fs.inner(a, b) * fs.total_volume();
}

template <class T>
T metric_trace(const BasicG2Structure<T>& fs, const BasicSym2<T>& h) {
  T acc(0);
  const auto& gi = fs.inverse_metric();
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) acc += gi(a, b) * h(a, b);
  return acc;
}

// Tr(h1 h2) = h1_ab h2_cd g^ac g^bd
template <class T>
T metric_trace_product(const BasicG2Structure<T>& fs, const BasicSym2<T>& h1, const BasicSym2<T>& h2) {
  Mat<T> a = h1.matrix() * fs.inverse_metric().matrix();
  Mat<T> b = h2.matrix() * fs.inverse_metric().matrix();
  Mat<T> p = a * b;
  T acc(0);
  for (int i = 0; i < kDim; ++i) acc += p(i, i);
  return acc;
}

// Right-hand side of the L2 trace formula: (Tr h1 Tr h2 + 2 Tr(h1 h2)) vol.
template <class T>
T trace_formula_rhs(const BasicG2Structure<T>& fs, const BasicSym2<T>& h1, const BasicSym2<T>& h2) {
  return (metric_trace(fs, h1) * metric_trace(fs, h2) + T(2) * metric_trace_product(fs, h1, h2)) *
         fs.total_volume();
}

// Fully antisymmetric component a_{i1..ik} (zero-based indices).
template <class T>
T component(const BasicKForm<T>& a, const std::vector<int>& idx) {
  Mask m = 0;
  for (int i : idx) {
    if (m >> i & 1) return T(0);
    m |= static_cast<Mask>(1u << i);
  }
  int inv = 0;
  for (size_t x = 0; x < idx.size(); ++x)
    for (size_t y = x + 1; y < idx.size(); ++y) inv += idx[x] > idx[y];
  const T& c = a.at(m);
  return (inv & 1) ? T(-c) : c;
}

template <class T>
struct ContractionReport {
  T max_residual{0};
  int tuples = 0;
  bool exact = false;
};

// phi_ijk phi_abc g^kc = g_ia g_jb - g_ib g_ja - psi_ijab over all 7^4 tuples.
template <class T>
ContractionReport<T> check_contraction_identity(const BasicG2Structure<T>& fs) {
  std::vector<T> P(343), Q(2401);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) P[(i * 7 + j) * 7 + k] = component(fs.phi(), {i, j, k});
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) Q[((i * 7 + j) * 7 + a) * 7 + b] = component(fs.psi(), {i, j, a, b});
  const auto& g = fs.metric();
  const auto& gi = fs.inverse_metric();
  ContractionReport<T> rep;
  rep.exact = kIsExact<T>;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) {
          T lhs(0);
          for (int k = 0; k < kDim; ++k) {
            const T& pk = P[(i * 7 + j) * 7 + k];
            if (pk == 0) continue;
            for (int c = 0; c < kDim; ++c) lhs += pk * P[(a * 7 + b) * 7 + c] * gi(k, c);
          }
          T rhs = g(i, a) * g(j, b) - g(i, b) * g(j, a) - Q[((i * 7 + j) * 7 + a) * 7 + b];
          T r = abs_value(T(lhs - rhs));
          if (r > rep.max_residual) rep.max_residual = r;
          ++rep.tuples;
        }
  return rep;
}

}  // namespace g2

namespace g2 {

// Volume coefficient lambda = sqrt(det g) without building the full structure.
template <class T>
T phi_volume(const BasicKForm<T>& phi, double near_degenerate = 1e-12) {
  Mat<T> B = wedge_bilinear(phi).scaled(T(orientation_sign()));
  T det = determinant(B);
  double det_d = to_double(det);
  if (!(-det > 0)) throw NotPositive("3-form is not positive: -det B <= 0", det_d);
  if constexpr (!kIsExact<T>) {
    if (std::fabs(det_d) < near_degenerate) throw NearDegenerate("|det B| below threshold");
  }
  return real_root(T(-det / T(279936)), 9);
}

// psi = *phi without the type projectors.
template <class T>
BasicKForm<T> psi_of(const BasicKForm<T>& phi, double near_degenerate = 1e-12) {
  T lambda = phi_volume(phi, near_degenerate);
  const int s = orientation_sign();
  Mat<T> g = wedge_bilinear(phi).scaled(T(s) * T(-1) / (T(6) * lambda));
  try {
    return hodge_star(BasicSym2<T>(g), top_form<T>() * T(s) * lambda, phi);
  } catch (const NotPositiveDefinite&) {
    throw NotPositive("induced metric is not positive definite", 0.0);
  }
}

}  // namespace g2
