#include "g2/jacobian.hpp"

#include <cmath>

namespace g2 {

namespace {

double pairing(const KForm& a, const KForm& b) { return integrate_top(wedge(a, b)); }

std::vector<double> gradient_of(const FlatChart& chart, const KForm& phi) {
  KForm psi = psi_of(phi);
  std::vector<double> g;
  g.reserve(chart.basis.size());
  for (const KForm& eta : chart.basis) g.push_back(integrate_top(wedge(eta, psi)));
  return g;
}

Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::vector<double> stdvec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <class F>
double central(F&& f, double h) {
  double d1 = (f(h) - f(-h)) / (2.0 * h);
  double d2 = (f(h / 2) - f(-h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

PrimitiveCheck finish(double d_alpha, double om) {
  PrimitiveCheck c;
  c.d_alpha = d_alpha;
  c.omega = om;
  c.ratio = om != 0.0 ? d_alpha / om : 0.0;
  c.error = std::fabs(d_alpha - om);
  return c;
}

// Newton-chord solve of grad f(x) = y with a fixed factorized Hessian.
Eigen::VectorXd chord_solve(const FlatChart& chart, const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                            const Eigen::VectorXd& y, Eigen::VectorXd x, double tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd r = y - vec(gradient_of(chart, chart.form_at(stdvec(x))));
    if (r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, y.cwiseAbs().maxCoeff())) return x;
    x += lu.solve(r);
  }
  throw NewtonDiverged("inverse Legendre map did not converge");
}

double fhat_value(const FlatChart& chart, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  return y.dot(x) - superpotential_of(chart.form_at(stdvec(x)));
}

}  // namespace

double integrate_top(const KForm& top) {
  if (top.degree() != kDim) throw DegreeMismatch("integrand must be a 7-form");
  return orientation_sign() * top[0];
}

double omega(const JacobianVector& a, const JacobianVector& b) {
  return pairing(a.eta, b.theta) - pairing(b.eta, a.theta);
}

double alpha(const KForm& phi, const KForm& D, const JacobianVector& v) {
  return 0.5 * pairing(phi, v.theta) - 0.5 * pairing(D, v.eta);
}

double gJ(const G2Structure& fs, const JacobianVector& a, const JacobianVector& b) {
  return pairing(a.eta, star_op(fs, b.eta)) + pairing(a.theta, star_op(fs, b.theta));
}

JacobianVector Jop(const G2Structure& fs, const JacobianVector& v) {
  return JacobianVector{-1.0 * star_op(fs, v.theta), star_op(fs, v.eta)};
}

double omega_tilde(const G2Structure& fs, const TildeJacobianVector& a, const TildeJacobianVector& b) {
  return pairing(a.eta, star_op(fs, b.mu)) - pairing(b.eta, star_op(fs, a.mu));
}

double gJ_tilde(const G2Structure& fs, const TildeJacobianVector& a, const TildeJacobianVector& b) {
  return pairing(a.eta, star_op(fs, b.eta)) + pairing(a.mu, star_op(fs, b.mu));
}

TildeJacobianVector Jop_tilde(const TildeJacobianVector& v) { return TildeJacobianVector{-1.0 * v.mu, v.eta}; }

double alpha_tilde_printed(const G2Structure& fs, const KForm& C, const TildeJacobianVector& v) {
  return 0.5 * pairing(fs.phi(), star_op(fs, v.mu)) - 0.5 * pairing(C, star_op(fs, v.eta));
}

double alpha_tilde(const G2Structure& fs, const KForm& C, const TildeJacobianVector& v) {
  return 0.5 * pairing(v.mu, fs.psi()) - 0.5 * pairing(C, star_op(fs, v.eta));
}

Eigen::MatrixXd omega_matrix() {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(70, 70);
  const auto& m3 = masks_of_degree(3);
  const auto& m4 = masks_of_degree(4);
  for (int i = 0; i < 35; ++i)
    for (int j = 0; j < 35; ++j) {
      double v = pairing(KForm::basis(m3[i]), KForm::basis(m4[j]));
      W(i, 35 + j) = v;
      W(35 + j, i) = -v;
    }
  return W;
}

Eigen::MatrixXd gJ_matrix(const G2Structure& fs) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(70, 70);
  for (int k : {3, 4}) {
    const auto& ms = masks_of_degree(k);
    const int off = k == 3 ? 0 : 35;
    std::vector<KForm> starred;
    for (Mask m : ms) starred.push_back(star_op(fs, KForm::basis(m)));
    for (int i = 0; i < 35; ++i)
      for (int j = 0; j < 35; ++j) G(off + i, off + j) = pairing(KForm::basis(ms[i]), starred[j]);
  }
  return G;
}

Eigen::MatrixXd J_matrix(const G2Structure& fs) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(70, 70);
  Eigen::MatrixXd s3 = to_eigen(star_op_matrix(fs, 3));
  Eigen::MatrixXd s4 = to_eigen(star_op_matrix(fs, 4));
  J.block(0, 35, 35, 35) = -s4;
  J.block(35, 0, 35, 35) = s3;
  return J;
}

Eigen::MatrixXd omega_tilde_matrix(const G2Structure& fs) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(70, 70);
  const auto& m3 = masks_of_degree(3);
  std::vector<KForm> starred;
  for (Mask m : m3) starred.push_back(star_op(fs, KForm::basis(m)));
  for (int i = 0; i < 35; ++i)
    for (int j = 0; j < 35; ++j) {
      double v = pairing(KForm::basis(m3[i]), starred[j]);
      W(i, 35 + j) = v;
      W(35 + j, i) = -v;
    }
  return W;
}

Eigen::MatrixXd gJ_tilde_matrix(const G2Structure& fs) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(70, 70);
  const auto& m3 = masks_of_degree(3);
  std::vector<KForm> starred;
  for (Mask m : m3) starred.push_back(star_op(fs, KForm::basis(m)));
  for (int i = 0; i < 35; ++i)
    for (int j = 0; j < 35; ++j) {
      double v = pairing(KForm::basis(m3[i]), starred[j]);
      G(i, j) = v;
      G(35 + i, 35 + j) = v;
    }
  return G;
}

Eigen::MatrixXd J_tilde_matrix() {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(70, 70);
  J.block(0, 35, 35, 35) = -Eigen::MatrixXd::Identity(35, 35);
  J.block(35, 0, 35, 35) = Eigen::MatrixXd::Identity(35, 35);
  return J;
}

PrimitiveCheck check_primitive(const KForm& phi, const KForm& D, const JacobianVector& X, const JacobianVector& Y,
                               double h) {
  auto along = [&](const JacobianVector& dir, const JacobianVector& arg) {
    return central([&](double t) { return alpha(phi + t * dir.eta, D + t * dir.theta, arg); }, h);
  };
  return finish(along(X, Y) - along(Y, X), omega(X, Y));
}

PrimitiveCheck check_primitive_tilde(const KForm& phi, const KForm& C, const TildeJacobianVector& X,
                                     const TildeJacobianVector& Y, bool printed, double h) {
  auto prim = printed ? alpha_tilde_printed : alpha_tilde;
  auto along = [&](const TildeJacobianVector& dir, const TildeJacobianVector& arg) {
    return central([&](double t) { return prim(structure_along(phi, dir.eta, t), C + t * dir.mu, arg); }, h);
  };
  return finish(along(X, Y) - along(Y, X), omega_tilde(metric_from_phi(phi), X, Y));
}

LegendreData legendre(const FlatChart& chart, const ModuliPoint& p) {
  LegendreData d;
  d.dual_coords = gradient_f(chart, p);
  d.f = superpotential(p);
  double s = 0.0;
  for (size_t i = 0; i < p.coords.size(); ++i) s += d.dual_coords[i] * p.coords[i];
  d.fhat = s - d.f;
  return d;
}

std::vector<double> inverse_legendre(const FlatChart& chart, const std::vector<double>& dual,
                                     const std::vector<double>& guess, double tol, int max_iter) {
  Eigen::VectorXd x = vec(guess), y = vec(dual);
  for (int it = 0; it < max_iter; ++it) {
    ModuliPoint p = make_point(chart, stdvec(x));
    Eigen::VectorXd r = y - vec(gradient_f(chart, p));
    if (r.cwiseAbs().maxCoeff() <= tol * std::max(1.0, y.cwiseAbs().maxCoeff())) return stdvec(x);
    Eigen::MatrixXd H = hessian_star(chart, p);
    x += H.partialPivLu().solve(r);
  }
  throw NewtonDiverged("inverse Legendre map did not converge");
}

double fhat_at_dual(const FlatChart& chart, const std::vector<double>& dual, const std::vector<double>& guess) {
  std::vector<double> x = inverse_legendre(chart, dual, guess);
  return fhat_value(chart, vec(dual), vec(x));
}

LegendreHessianReport check_legendre_hessian(const FlatChart& chart, const ModuliPoint& p, double h) {
  Eigen::MatrixXd G = hessian_star(chart, p);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
  if (signature(G).zero > 0) throw DegenerateHessian("Hessian metric is degenerate at this point");
  Eigen::VectorXd x0 = vec(p.coords);
  Eigen::VectorXd y0 = vec(gradient_f(chart, p));

  auto fhat = [&](const Eigen::VectorXd& dy) {
    Eigen::VectorXd x = chord_solve(chart, lu, y0 + dy, x0 + lu.solve(dy), 1e-14, 20);
    return fhat_value(chart, y0 + dy, x);
  };
  LegendreHessianReport r;
  r.inverse = lu.inverse();
  r.fd_hessian.resize(kModuliDim, kModuliDim);
  for (int i = 0; i < kModuliDim; ++i)
    for (int j = i; j < kModuliDim; ++j) {
      double s = 0.0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          Eigen::VectorXd dy = Eigen::VectorXd::Zero(kModuliDim);
          dy(i) += a * h;
          dy(j) += b * h;
          s += a * b * fhat(dy);
        }
      r.fd_hessian(i, j) = r.fd_hessian(j, i) = s / (4.0 * h * h);
    }
  r.relative_error = (r.fd_hessian - r.inverse).cwiseAbs().maxCoeff() / r.inverse.cwiseAbs().maxCoeff();
  return r;
}

LagrangianReport check_lagrangian_graph(const ModuliPoint& p, const KForm& eta1, const KForm& eta2) {
  LagrangianReport r;
  JacobianVector a{eta1, star_op(p.fs, eta1)}, b{eta2, star_op(p.fs, eta2)};
  r.omega_value = omega(a, b);
  r.tangency_error = check_star_derivative(p.fs, eta1, 1e-4, true).relative_error;
  return r;
}

double dG(const FlatChart& chart, const ModuliPoint& p, int i, int j, int l, double h) {
  const KForm& dir = chart.basis[l];
  return central([&](double t) {
    G2Structure fs = structure_along(p.fs.phi(), dir, t);
    return G_pair(fs, chart.basis[i], chart.basis[j]);
  }, h);
}

ClosednessReport closedness_and_integrability(const FlatChart& chart, const ModuliPoint& p,
                                              const std::vector<std::array<int, 3>>& triples, double h) {
  ClosednessReport r;
  for (const auto& [i, j, l] : triples) {
    double a = dG(chart, p, i, j, l, h);
    double b = dG(chart, p, l, j, i, h);
    r.max_asymmetry = std::max(r.max_asymmetry, std::fabs(a - b));
    double fa = directional_third(superpotential_of, p.fs.phi(), chart.basis[i], chart.basis[j], chart.basis[l],
                                  1e-2, true);
    double fb = directional_third(superpotential_of, p.fs.phi(), chart.basis[l], chart.basis[i], chart.basis[j],
                                  1e-2, true);
    r.max_fd_residual = std::max(r.max_fd_residual, std::fabs(fa - fb));
    ++r.triples;
  }
  return r;
}

JacobianLattice jacobian_lattice(const G2Structure& fs) {
  JacobianLattice L;
  L.generator_matrix = to_eigen(star_op_matrix(fs, 3));
  for (Mask m : masks_of_degree(3)) L.generators.push_back(star_op(fs, KForm::basis(m)));
  L.covolume = std::fabs(L.generator_matrix.determinant());
  if (!(L.covolume > 0.0)) throw Error("lattice generators are dependent");
  return L;
}

Eigen::VectorXd JacobianLattice::coordinates(const KForm& theta) const {
  if (theta.degree() != 4) throw DegreeMismatch("fiber elements are 4-forms");
  return generator_matrix.partialPivLu().solve(to_eigen(theta));
}

KForm JacobianLattice::reduce(const KForm& theta) const {
  Eigen::VectorXd c = coordinates(theta);
  for (int i = 0; i < c.size(); ++i) {
    double r = std::round(c(i));
    c(i) = std::fabs(c(i) - r) < 1e-9 ? 0.0 : c(i) - std::floor(c(i));
  }
  return form_from(generator_matrix * c, 4);
}

CubicFormReport cubic_form_check(const ModuliPoint& p, const KForm& eta1, const KForm& eta2, const KForm& eta3,
                                 double h) {
  CubicFormReport r;
  r.closed_form = 2.0 * yukawa(p.fs, eta1, eta2, eta3);
  double t = relative_step(p.fs, eta3, h);
  r.finite_difference = central([&](double s) {
    return G_pair(structure_along(p.fs.phi(), eta3, s), eta1, eta2);
  }, t);
  r.relative_error = std::fabs(r.finite_difference - r.closed_form) / std::max(std::fabs(r.closed_form), 1.0);
  return r;
}

}  // namespace g2
