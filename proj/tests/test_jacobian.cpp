#include <cmath>
#include <random>

#include "doctest.h"
#include "g2/jacobian.hpp"

using namespace g2;

namespace {

JacobianVector random_jv(std::mt19937_64& rng) { return {random_form(rng, 3), random_form(rng, 4)}; }
TildeJacobianVector random_tv(std::mt19937_64& rng) { return {random_form(rng, 3), random_form(rng, 3)}; }

Eigen::VectorXd flat(const JacobianVector& v) {
  Eigen::VectorXd x(70);
  x << to_eigen(v.eta), to_eigen(v.theta);
  return x;
}

double max_diff(const JacobianVector& a, const JacobianVector& b) {
  return std::max((a.eta - b.eta).max_abs(), (a.theta - b.theta).max_abs());
}

int count(const Eigen::VectorXd& ev, bool positive) {
  double scale = ev.cwiseAbs().maxCoeff();
  int n = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (positive ? ev(i) > 1e-9 * scale : ev(i) < -1e-9 * scale) ++n;
  return n;
}

}  // namespace

TEST_CASE("canonical symplectic form") {
  std::mt19937_64 rng(1);
  KForm eta = random_form(rng, 3), theta = random_form(rng, 4);
  CHECK(omega({eta, KForm(4)}, {KForm(3), theta}) == doctest::Approx(integrate_top(wedge(eta, theta))));
  JacobianVector v = random_jv(rng), w = random_jv(rng);
  CHECK(omega(v, v) == 0.0);
  CHECK(omega(v, w) == doctest::Approx(-omega(w, v)));
  Eigen::MatrixXd W = omega_matrix();
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(W).rank() == 70);
  CHECK(flat(v).dot(W * flat(w)) == doctest::Approx(omega(v, w)));
  // zero section and fibers are isotropic
  CHECK(omega({eta, KForm(4)}, {random_form(rng, 3), KForm(4)}) == 0.0);
  CHECK(omega({KForm(3), theta}, {KForm(3), random_form(rng, 4)}) == 0.0);
}

TEST_CASE("complex structure and metric on the Jacobian") {
  std::mt19937_64 rng(2);
  G2Structure fs = metric_from_phi(random_positive_phi(rng, 0.2));
  KForm eta = random_form(rng, 3);
  JacobianVector Je = Jop(fs, {eta, KForm(4)});
  CHECK(Je.eta.max_abs() < 1e-15);
  CHECK((Je.theta - star_op(fs, eta)).max_abs() < 1e-14);
  for (int t = 0; t < 5; ++t) {
    JacobianVector X = random_jv(rng), Y = random_jv(rng);
    JacobianVector JJ = Jop(fs, Jop(fs, X));
    CHECK(max_diff(JJ, JacobianVector{-1.0 * X.eta, -1.0 * X.theta}) < 1e-12);
    CHECK(std::fabs(gJ(fs, X, Y) - omega(X, Jop(fs, Y))) < 1e-12);
    CHECK(std::fabs(gJ(fs, X, Y) - gJ(fs, Y, X)) < 1e-12);
    CHECK(std::fabs(gJ(fs, Jop(fs, X), Jop(fs, Y)) - gJ(fs, X, Y)) < 1e-11);
  }
  Eigen::MatrixXd G = gJ_matrix(fs), W = omega_matrix(), J = J_matrix(fs);
  CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((G - W * J).cwiseAbs().maxCoeff() < 1e-12);
  // any two of the triple determine the third
  CHECK((W.inverse() * G - J).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(((J * J) + Eigen::MatrixXd::Identity(70, 70)).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues();
  CHECK(count(ev, true) == 16);
  CHECK(count(ev, false) == 54);
}

TEST_CASE("tilde structures") {
  std::mt19937_64 rng(3);
  G2Structure fs = metric_from_phi(random_positive_phi(rng, 0.2));
  for (int t = 0; t < 5; ++t) {
    TildeJacobianVector X = random_tv(rng), Y = random_tv(rng);
    TildeJacobianVector JJ = Jop_tilde(Jop_tilde(X));
    CHECK((JJ.eta + X.eta).max_abs() == 0.0);
    CHECK((JJ.mu + X.mu).max_abs() == 0.0);
    JacobianVector Xs{X.eta, star_op(fs, X.mu)}, Ys{Y.eta, star_op(fs, Y.mu)};
    CHECK(std::fabs(omega_tilde(fs, X, Y) - omega(Xs, Ys)) < 1e-12);
    CHECK(std::fabs(gJ_tilde(fs, X, Y) - omega_tilde(fs, X, Jop_tilde(Y))) < 1e-12);
    CHECK(std::fabs(gJ_tilde(fs, Jop_tilde(X), Jop_tilde(Y)) - gJ_tilde(fs, X, Y)) < 1e-12);
  }
  Eigen::MatrixXd Gt = gJ_tilde_matrix(fs), Wt = omega_tilde_matrix(fs);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(Wt).rank() == 70);
  CHECK((Gt - Wt * J_tilde_matrix()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Gt).eigenvalues();
  CHECK(count(ev, true) == 16);
  CHECK(count(ev, false) == 54);
}

TEST_CASE("primitives differentiate to the symplectic forms") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 4; ++t) {
    KForm phi = random_positive_phi(rng, 0.2);
    PrimitiveCheck c = check_primitive(phi, random_form(rng, 4), random_jv(rng), random_jv(rng));
    CHECK(c.error < 1e-8 * std::max(1.0, std::fabs(c.omega)));

    KForm C = random_form(rng, 3);
    TildeJacobianVector X = random_tv(rng), Y = random_tv(rng);
    PrimitiveCheck ct = check_primitive_tilde(phi, C, X, Y, false);
    CHECK(ct.error < 1e-7 * std::max(1.0, std::fabs(ct.omega)));
    PrimitiveCheck cp = check_primitive_tilde(phi, C, X, Y, true);
    CHECK(cp.ratio == doctest::Approx(7.0 / 6.0).epsilon(1e-6));
  }
}

TEST_CASE("Legendre transform") {
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint c = chart_center(chart);
  LegendreData d = legendre(chart, c);
  CHECK(d.fhat == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(d.dual_coords[0] == doctest::Approx(7.0).epsilon(1e-13));

  std::mt19937_64 rng(5);
  ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
  LegendreData dp = legendre(chart, p);
  CHECK(std::fabs(dp.fhat - 4.0 / 3.0 * dp.f) < 1e-10);
  std::vector<double> x = inverse_legendre(chart, dp.dual_coords, c.coords);
  for (int i = 0; i < 35; ++i) CHECK(std::fabs(x[i] - p.coords[i]) < 1e-10);
  CHECK(fhat_at_dual(chart, dp.dual_coords, c.coords) == doctest::Approx(dp.fhat).epsilon(1e-12));

  for (const ModuliPoint& q : {c, p}) {
    LegendreHessianReport r = check_legendre_hessian(chart, q);
    CHECK(r.relative_error < 1e-4);
  }
}

TEST_CASE("graph of the superpotential gradient is Lagrangian") {
  std::mt19937_64 rng(6);
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
  KForm eta = random_form(rng, 3);
  CHECK(check_lagrangian_graph(p, eta, eta).omega_value == 0.0);
  KForm e27 = type27_basis(p.fs)[2];
  CHECK(std::fabs(check_lagrangian_graph(p, p.fs.phi(), e27).omega_value) < 1e-12);
  for (int t = 0; t < 5; ++t) {
    LagrangianReport r = check_lagrangian_graph(p, random_form(rng, 3), random_form(rng, 3));
    CHECK(std::fabs(r.omega_value) < 1e-12);
    CHECK(r.tangency_error < 1e-8);
  }
}

TEST_CASE("closedness of the tilde form") {
  FlatChart chart = make_chart(standard_phi<double>());
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> idx(0, 34);
  std::vector<std::array<int, 3>> triples;
  for (int t = 0; t < 20; ++t) triples.push_back({idx(rng), idx(rng), idx(rng)});
  ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
  ClosednessReport r = closedness_and_integrability(chart, p, triples);
  CHECK(r.triples == 20);
  CHECK(r.max_asymmetry < 1e-4);
  CHECK(r.max_fd_residual < 1e-4);

  std::vector<int> sector = chart.sector_1_27();
  std::vector<std::array<int, 3>> center_triples;
  for (int t = 0; t < 10; ++t)
    center_triples.push_back({sector[idx(rng) % 28], sector[idx(rng) % 28], sector[idx(rng) % 28]});
  CHECK(closedness_and_integrability(chart, chart_center(chart), center_triples).max_asymmetry < 1e-4);
}

TEST_CASE("Jacobian lattice") {
  G2Structure fs = metric_from_phi(standard_phi<double>());
  JacobianLattice L = jacobian_lattice(fs);
  CHECK(L.generators.size() == 35u);
  CHECK(L.covolume == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  for (const KForm& g : L.generators) CHECK(L.reduce(g).max_abs() < 1e-12);
  std::mt19937_64 rng(8);
  KForm theta = random_form(rng, 4, 3.0);
  Eigen::VectorXd c = L.coordinates(L.reduce(theta));
  CHECK(c.minCoeff() >= 0.0);
  CHECK(c.maxCoeff() < 1.0);
  Eigen::VectorXd diff = L.coordinates(theta - L.reduce(theta));
  CHECK((diff - diff.array().round().matrix()).cwiseAbs().maxCoeff() < 1e-9);

  for (int t = 0; t < 5; ++t) {
    KForm phi = random_positive_phi(rng, 0.25);
    double c1 = jacobian_lattice(metric_from_phi(phi)).covolume;
    double c2 = jacobian_lattice(metric_from_phi(2.0 * phi)).covolume;
    CHECK(c1 > 0.0);
    CHECK(std::log(c2 / c1) / std::log(2.0) == doctest::Approx(35.0 / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("cubic form equals twice the Yukawa coupling") {
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint c = chart_center(chart);
  const KForm& phi = c.fs.phi();
  CubicFormReport r = cubic_form_check(c, phi, phi, phi);
  CHECK(r.finite_difference == doctest::Approx(28.0 / 9.0).epsilon(1e-3));
  std::vector<KForm> b27 = type27_basis(c.fs);
  CHECK(std::fabs(cubic_form_check(c, b27[5], phi, phi).finite_difference) < 1e-3);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 4; ++t) {
    ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
    std::vector<KForm> s = type27_basis(p.fs);
    CHECK(cubic_form_check(p, s[t], s[t + 3], s[t + 7]).relative_error < 1e-3);
    CHECK(cubic_form_check(p, p.fs.phi(), s[t], s[t + 1]).relative_error < 1e-3);
  }
}
