#include "g2/moduli.hpp"

#include <array>
#include <cmath>

namespace g2 {

namespace {

using Tensor3 = std::array<double, 343>;

inline int at3(int a, int b, int c) { return (a * kDim + b) * kDim + c; }

Tensor3 full_tensor(const KForm& a) {
  Tensor3 t{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) t[at3(i, j, k)] = component(a, {i, j, k});
  return t;
}

// Contract each slot of t with the corresponding matrix: out_{abc} = M1_{a i} M2_{b j} M3_{c k} t_{ijk}.
Tensor3 contract(const Tensor3& t, const Mat<double>& m1, const Mat<double>& m2, const Mat<double>& m3) {
  Tensor3 s1{}, s2{}, s3{};
  for (int a = 0; a < kDim; ++a)
    for (int i = 0; i < kDim; ++i) {
      double w = m1(a, i);
      if (w == 0.0) continue;
      for (int jk = 0; jk < 49; ++jk) s1[a * 49 + jk] += w * t[i * 49 + jk];
    }
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int j = 0; j < kDim; ++j) {
        double w = m2(b, j);
        if (w == 0.0) continue;
        for (int k = 0; k < kDim; ++k) s2[at3(a, b, k)] += w * s1[at3(a, j, k)];
      }
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int c = 0; c < kDim; ++c)
        for (int k = 0; k < kDim; ++k) s3[at3(a, b, c)] += m3(c, k) * s2[at3(a, b, k)];
  return s3;
}

double dot(const Tensor3& a, const Tensor3& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mat<double> raised(const G2Structure& fs, const Sym2Tensor& h) {
  const Mat<double>& gi = fs.inverse_metric().matrix();
  return gi * h.matrix() * gi;
}

std::vector<KForm> orthonormalize(const G2Structure& fs, const std::vector<KForm>& candidates, size_t want) {
  std::vector<KForm> out;
  for (const KForm& c : candidates) {
    KForm v = c;
    for (const KForm& u : out) v -= fs.inner(u, v) * u;
    double n = std::sqrt(fs.norm2(v));
    if (n < 1e-8) continue;
    out.push_back((1.0 / n) * v);
    if (out.size() == want) break;
  }
  if (out.size() != want) throw Error("could not build an orthonormal basis of the requested type");
  return out;
}

void require_no_seven(const G2Structure& fs, const KForm& a, double tol) {
  double p7 = std::sqrt(fs.norm2(decompose(fs, a).p7));
  double n = std::sqrt(fs.norm2(a));
  if (p7 > tol * std::max(n, 1.0)) throw HasSevenComponent("argument has a nonzero type-7 component");
}

double unit_scale(const G2Structure& fs, const KForm& a) {
  double n = std::sqrt(fs.norm2(a));
  if (n == 0.0) return 1.0;
  return std::sqrt(fs.norm2(fs.phi())) / n;
}

double guarded(const FormFunction& fn, const KForm& phi) {
  try {
    return fn(phi);
  } catch (const NotPositive&) {
    throw StepLeavesPositiveCone("finite-difference step leaves the positive cone");
  } catch (const NearDegenerate&) {
    throw StepLeavesPositiveCone("finite-difference step reaches a degenerate form");
  }
}

double second_stencil(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b, double h) {
  double s = 0.0;
  for (int i : {1, -1})
    for (int j : {1, -1}) s += i * j * guarded(fn, phi + (i * h) * a + (j * h) * b);
  return s / (4.0 * h * h);
}

double third_stencil(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b, const KForm& c,
                     double h) {
  double s = 0.0;
  for (int i : {1, -1})
    for (int j : {1, -1})
      for (int k : {1, -1}) s += i * j * k * guarded(fn, phi + (i * h) * a + (j * h) * b + (k * h) * c);
  return s / (8.0 * h * h * h);
}

}  // namespace

Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

Eigen::VectorXd to_eigen(const KForm& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.coeffs().size()));
  for (size_t i = 0; i < f.coeffs().size(); ++i) v(static_cast<Eigen::Index>(i)) = f.coeffs()[i];
  return v;
}

KForm form_from(const Eigen::VectorXd& v, int degree) {
  KForm out(degree);
  if (static_cast<int>(v.size()) != binom7(degree)) throw DimensionMismatch("vector length does not match degree");
  for (int i = 0; i < v.size(); ++i) out.coeffs()[i] = v(i);
  return out;
}

std::vector<KForm> type7_basis(const G2Structure& fs) {
  std::vector<KForm> cands;
  for (int i = 0; i < kDim; ++i) cands.push_back(interior_basis(i, fs.psi()));
  return orthonormalize(fs, cands, 7);
}

std::vector<KForm> type27_basis(const G2Structure& fs) {
  std::vector<KForm> cands;
  for (Mask m : masks_of_degree(3)) cands.push_back(apply_matrix(fs.projector(3, 27), KForm::basis(m), 3));
  return orthonormalize(fs, cands, 27);
}

FlatChart make_chart(const KForm& phi_center) {
  FlatChart chart{metric_from_phi(phi_center), {}};
  chart.basis.push_back(phi_center);
  for (KForm& f : type7_basis(chart.center)) chart.basis.push_back(std::move(f));
  for (KForm& f : type27_basis(chart.center)) chart.basis.push_back(std::move(f));
  return chart;
}

KForm FlatChart::form_at(const std::vector<double>& x) const {
  if (x.size() != basis.size()) throw DimensionMismatch("expected 35 coordinates");
  KForm out(3);
  for (size_t i = 0; i < x.size(); ++i) out += x[i] * basis[i];
  return out;
}

std::vector<double> FlatChart::coords_of(const KForm& phi) const {
  Eigen::MatrixXd B(kModuliDim, kModuliDim);
  for (int j = 0; j < kModuliDim; ++j) B.col(j) = to_eigen(basis[j]);
  Eigen::VectorXd x = B.partialPivLu().solve(to_eigen(phi));
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<int> FlatChart::sector_1_27() const {
  std::vector<int> out{0};
  for (int i = kFirstTwentySeven; i < kModuliDim; ++i) out.push_back(i);
  return out;
}

std::vector<int> FlatChart::sector_7() const {
  std::vector<int> out;
  for (int i = kFirstSeven; i < kFirstTwentySeven; ++i) out.push_back(i);
  return out;
}

ModuliPoint make_point(const FlatChart& chart, const std::vector<double>& coords) {
  return ModuliPoint{coords, metric_from_phi(chart.form_at(coords))};
}

ModuliPoint chart_center(const FlatChart& chart) {
  std::vector<double> x(kModuliDim, 0.0);
  x[0] = 1.0;
  return ModuliPoint{x, chart.center};
}

ModuliPoint point_at(const FlatChart& chart, const KForm& phi) {
  return ModuliPoint{chart.coords_of(phi), metric_from_phi(phi)};
}

Signature signature(const Eigen::MatrixXd& sym, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  Signature s;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::fabs(ev(i)) <= tol * std::max(scale, 1e-300))
      ++s.zero;
    else if (ev(i) > 0)
      ++s.positive;
    else
      ++s.negative;
  }
  return s;
}

double superpotential(const ModuliPoint& p) { return 3.0 * p.fs.total_volume(); }

double superpotential_wedge(const G2Structure& fs) {
  return 3.0 / 7.0 * fs.integrate(wedge(fs.phi(), fs.star(fs.phi())));
}

double superpotential_of(const KForm& phi) { return 3.0 * phi_volume(phi); }

std::vector<double> gradient_f(const FlatChart& chart, const ModuliPoint& p) {
  std::vector<double> g;
  for (const KForm& eta : chart.basis) g.push_back(p.fs.integrate(wedge(eta, p.fs.psi())));
  return g;
}

std::vector<double> gradient_fd(const FlatChart& chart, const ModuliPoint& p, double h) {
  std::vector<double> g;
  for (const KForm& eta : chart.basis) {
    double up = guarded(superpotential_of, p.fs.phi() + h * eta);
    double dn = guarded(superpotential_of, p.fs.phi() - h * eta);
    g.push_back((up - dn) / (2.0 * h));
  }
  return g;
}

double G_pair(const G2Structure& fs, const KForm& a, const KForm& b) {
  return fs.integrate(wedge(a, star_op(fs, b)));
}

Eigen::MatrixXd hessian_projection(const FlatChart& chart, const ModuliPoint& p) {
  std::vector<FormTypeComponents<double>> parts;
  for (const KForm& eta : chart.basis) parts.push_back(decompose(p.fs, eta));
  Eigen::MatrixXd H(kModuliDim, kModuliDim);
  for (int i = 0; i < kModuliDim; ++i)
    for (int j = i; j < kModuliDim; ++j) {
      const auto& a = parts[i];
      const auto& b = parts[j];
      double v = 4.0 / 3.0 * l2_pairing(p.fs, a.p1, b.p1) + l2_pairing(p.fs, a.p7, b.p7) -
                 l2_pairing(p.fs, a.p27, b.p27);
      H(i, j) = H(j, i) = v;
    }
  return H;
}

Eigen::MatrixXd hessian_star(const FlatChart& chart, const ModuliPoint& p) {
  std::vector<KForm> starred;
  for (const KForm& eta : chart.basis) starred.push_back(star_op(p.fs, eta));
  Eigen::MatrixXd H(kModuliDim, kModuliDim);
  for (int i = 0; i < kModuliDim; ++i)
    for (int j = 0; j < kModuliDim; ++j) H(i, j) = p.fs.integrate(wedge(chart.basis[i], starred[j]));
  return H;
}

Eigen::MatrixXd hessian_fd(const FlatChart& chart, const ModuliPoint& p, double h, bool richardson) {
  Eigen::MatrixXd H(kModuliDim, kModuliDim);
  for (int i = 0; i < kModuliDim; ++i)
    for (int j = i; j < kModuliDim; ++j) {
      double d1 = second_stencil(superpotential_of, p.fs.phi(), chart.basis[i], chart.basis[j], h);
      double v = d1;
      if (richardson) {
        double d2 = second_stencil(superpotential_of, p.fs.phi(), chart.basis[i], chart.basis[j], h / 2);
        v = (4.0 * d2 - d1) / 3.0;
      }
      H(i, j) = H(j, i) = v;
    }
  return H;
}

HessianData hessian_G(const FlatChart& chart, const ModuliPoint& p, double tol) {
  HessianData d;
  d.gradient = gradient_f(chart, p);
  d.hessian = hessian_star(chart, p);
  d.hessian = 0.5 * (d.hessian + d.hessian.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.hessian, Eigen::EigenvaluesOnly);
  d.eigenvalues = es.eigenvalues();
  d.signature = signature(d.hessian, tol);
  if (d.signature.zero > 0) throw DegenerateHessian("Hessian metric has an eigenvalue below tolerance");
  return d;
}

double directional_second(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b, double h,
                          bool richardson) {
  G2Structure fs = metric_from_phi(phi);
  double sa = unit_scale(fs, a), sb = unit_scale(fs, b);
  KForm ua = sa * a, ub = sb * b;
  double d1 = second_stencil(fn, phi, ua, ub, h);
  double v = d1;
  if (richardson) v = (4.0 * second_stencil(fn, phi, ua, ub, h / 2) - d1) / 3.0;
  return v / (sa * sb);
}

double directional_third(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b,
                         const KForm& c, double h, bool richardson) {
  G2Structure fs = metric_from_phi(phi);
  double sa = unit_scale(fs, a), sb = unit_scale(fs, b), sc = unit_scale(fs, c);
  KForm ua = sa * a, ub = sb * b, uc = sc * c;
  double d1 = third_stencil(fn, phi, ua, ub, uc, h);
  double v = d1;
  if (richardson) v = (4.0 * third_stencil(fn, phi, ua, ub, uc, h / 2) - d1) / 3.0;
  return v / (sa * sb * sc);
}

double yukawa_sym(const G2Structure& fs, const Sym2Tensor& h1, const Sym2Tensor& h2, const Sym2Tensor& h3) {
  Tensor3 p = full_tensor(fs.phi());
  // h^{a alpha} phi_{alpha beta gamma} contracted slotwise, then paired with phi_{abc}.
  Tensor3 q = contract(p, raised(fs, h1), raised(fs, h2), raised(fs, h3));
  return dot(p, q) * fs.total_volume();
}

double yukawa(const G2Structure& fs, const KForm& a, const KForm& b, const KForm& c, double tol) {
  for (const KForm* f : {&a, &b, &c}) require_no_seven(fs, *f, tol);
  return yukawa_sym(fs, form_to_sym2(fs, a, tol), form_to_sym2(fs, b, tol), form_to_sym2(fs, c, tol));
}

ThirdDerivativeReport check_third_derivative(const ModuliPoint& p, const KForm& a, const KForm& b, const KForm& c,
                                             double h, bool richardson) {
  ThirdDerivativeReport r;
  r.closed_form = 2.0 * yukawa(p.fs, a, b, c);
  r.finite_difference = directional_third(superpotential_of, p.fs.phi(), a, b, c, h, richardson);
  r.relative_error = std::fabs(r.finite_difference - r.closed_form) / std::max(std::fabs(r.closed_form), 1.0);
  return r;
}

LogPotentialReport log_potential_checks(const ModuliPoint& p, double h) {
  const G2Structure& fs = p.fs;
  std::vector<KForm> dirs{fs.phi()};
  for (KForm& f : type27_basis(fs)) dirs.push_back(std::move(f));
  const int n = static_cast<int>(dirs.size());
  FormFunction F = [](const KForm& phi) { return -std::log(superpotential_of(phi)); };
  const double f = 3.0 * fs.total_volume();

  LogPotentialReport r;
  r.fd_hessian.resize(n, n);
  r.closed_form.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      r.fd_hessian(i, j) = r.fd_hessian(j, i) = directional_second(F, fs.phi(), dirs[i], dirs[j], h, true);
      r.closed_form(i, j) = r.closed_form(j, i) = l2_pairing(fs, dirs[i], dirs[j]) / f;
    }
  r.max_error = (r.fd_hessian - r.closed_form).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.fd_hessian, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.f00 = r.fd_hessian(0, 0);
  for (int i = 1; i < n; ++i) r.max_f0i = std::max(r.max_f0i, std::fabs(r.fd_hessian(0, i)));

  std::vector<KForm> sevens = type7_basis(fs);
  for (size_t i = 0; i < sevens.size(); ++i)
    for (size_t j = i; j < sevens.size(); ++j) {
      double fd = directional_second(F, fs.phi(), sevens[i], sevens[j], h, true);
      double cf = l2_pairing(fs, sevens[i], sevens[j]) / f;
      r.pi7_discrepancy = std::max(r.pi7_discrepancy, std::fabs(fd - cf));
    }
  return r;
}

TraceCubicReport check_trace_cubic_lemma(const G2Structure& fs, const Sym2Tensor& h1, const Sym2Tensor& h2,
                                         const Sym2Tensor& h3) {
  Tensor3 e1 = full_tensor(sym2_to_form(fs, h1));
  Tensor3 e2 = full_tensor(sym2_to_form(fs, h2));
  const Mat<double>& gi = fs.inverse_metric().matrix();
  Tensor3 up = contract(e2, raised(fs, h3), gi, gi);

  TraceCubicReport r;
  r.lhs = dot(e1, up) * fs.total_volume();
  double corr = metric_trace(fs, h1) * metric_trace_product(fs, h2, h3) +
                metric_trace(fs, h2) * metric_trace_product(fs, h3, h1) +
                metric_trace(fs, h3) * metric_trace_product(fs, h1, h2);
  r.rhs = 2.0 * yukawa_sym(fs, h1, h2, h3) + 2.0 * corr * fs.total_volume();
  r.residual = std::fabs(r.lhs - r.rhs);
  return r;
}

}  // namespace g2
