#include <cmath>
#include <random>

#include "doctest.h"
#include "g2/moduli.hpp"
#include "oracles.hpp"

using namespace g2;

namespace {

Mat<double> raise(const G2Structure& fs, const Sym2Tensor& h) {
  const Mat<double>& gi = fs.inverse_metric().matrix();
  return gi * h.matrix() * gi;
}

// Six nested index loops over phi_abc phi_xyz H1^{ax} H2^{by} H3^{cz}.
double yukawa_oracle(const G2Structure& fs, const Sym2Tensor& h1, const Sym2Tensor& h2, const Sym2Tensor& h3) {
  Mat<double> A = raise(fs, h1), B = raise(fs, h2), C = raise(fs, h3);
  double P[7][7][7];
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) P[a][b][c] = oracle::comp(fs.phi(), {a, b, c});
  double s = 0.0;
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) {
        if (P[a][b][c] == 0.0) continue;
        for (int x = 0; x < 7; ++x)
          for (int y = 0; y < 7; ++y)
            for (int z = 0; z < 7; ++z) s += P[a][b][c] * P[x][y][z] * A(a, x) * B(b, y) * C(c, z);
      }
  return s * fs.total_volume();
}

Sym2Tensor scaled_metric(const G2Structure& fs, double c) { return Sym2Tensor(fs.metric().matrix().scaled(c)); }

}  // namespace

TEST_CASE("superpotential values and homogeneity") {
  KForm phi0 = standard_phi<double>();
  FlatChart chart = make_chart(phi0);
  CHECK(superpotential(chart_center(chart)) == doctest::Approx(3.0).epsilon(1e-14));
  ModuliPoint two = point_at(chart, 2.0 * phi0);
  double lambda2 = metric_from_phi(2.0 * phi0).total_volume();
  CHECK(superpotential(two) == doctest::Approx(3.0 * lambda2).epsilon(1e-13));
  CHECK(superpotential(two) == doctest::Approx(3.0 * std::pow(2.0, 7.0 / 3.0)).epsilon(1e-12));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    KForm phi = random_positive_phi(rng, 0.25);
    G2Structure fs = metric_from_phi(phi);
    CHECK(std::fabs(superpotential_wedge(fs) - 3.0 * fs.total_volume()) < 1e-12);
    CHECK(std::fabs(superpotential_of(1.7 * phi) - std::pow(1.7, 7.0 / 3.0) * superpotential_of(phi)) < 1e-10);
  }
  CHECK_THROWS_AS(superpotential_of(KForm::basis("123")), NotPositive);
}

TEST_CASE("chart basis layout") {
  FlatChart chart = make_chart(standard_phi<double>());
  REQUIRE(chart.basis.size() == 35u);
  CHECK(chart.basis[0] == chart.center.phi());
  for (int i = 1; i < 35; ++i) {
    auto c = decompose(chart.center, chart.basis[i]);
    CHECK(c.p1.max_abs() < 1e-12);
    if (i < FlatChart::kFirstTwentySeven)
      CHECK(c.p27.max_abs() < 1e-12);
    else
      CHECK(c.p7.max_abs() < 1e-12);
  }
  Mat<double> B(35, 35);
  for (int j = 0; j < 35; ++j)
    for (int i = 0; i < 35; ++i) B(i, j) = chart.basis[j].coeffs()[i];
  CHECK(rank(B) == 35);
  std::vector<double> x = chart.coords_of(chart.basis[12] + 2.0 * chart.basis[0]);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[12] == doctest::Approx(1.0));
  CHECK(chart.sector_1_27().size() == 28u);
}

TEST_CASE("gradient of the superpotential") {
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint c = chart_center(chart);
  std::vector<double> g = gradient_f(chart, c);
  CHECK(g[0] == doctest::Approx(7.0 / 3.0 * 3.0).epsilon(1e-13));
  for (int i = 1; i < 35; ++i) CHECK(std::fabs(g[i]) < 1e-12);

  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
    std::vector<double> a = gradient_f(chart, p), b = gradient_fd(chart, p);
    for (int i = 0; i < 35; ++i) CHECK(std::fabs(a[i] - b[i]) < 1e-6);
  }
}

TEST_CASE("Hessian metric: three computations, center values, signature") {
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint c = chart_center(chart);
  HessianData d = hessian_G(chart, c);
  CHECK(d.hessian(0, 0) == doctest::Approx(28.0 / 3.0).epsilon(1e-13));
  for (int i = 1; i < 35; ++i) CHECK(std::fabs(d.hessian(0, i)) < 1e-12);
  CHECK(d.signature.positive == 8);
  CHECK(d.signature.negative == 27);

  std::mt19937_64 rng(21);
  for (int t = 0; t < 3; ++t) {
    ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
    Eigen::MatrixXd a = hessian_projection(chart, p), b = hessian_star(chart, p), f = hessian_fd(chart, p);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((a - f).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((b - f).cwiseAbs().maxCoeff() < 1e-5);
  }
  for (int t = 0; t < 20; ++t) {
    ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.25));
    HessianData h = hessian_G(chart, p);
    CHECK(h.signature.positive == 8);
    CHECK(h.signature.negative == 27);
    // sector signature is taken with respect to the structure at p
    std::vector<KForm> dirs{p.fs.phi()};
    for (KForm& f : type27_basis(p.fs)) dirs.push_back(std::move(f));
    Eigen::MatrixXd local(28, 28);
    for (int i = 0; i < 28; ++i)
      for (int j = 0; j < 28; ++j) local(i, j) = G_pair(p.fs, dirs[i], dirs[j]);
    Signature ls = signature(local);
    CHECK(ls.positive == 1);
    CHECK(ls.negative == 27);
  }
}

TEST_CASE("Hessian degeneracy and cone exit are reported") {
  FlatChart chart = make_chart(standard_phi<double>());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(2, 2) = 0.0;
  CHECK(signature(m).zero == 1);
  CHECK_THROWS_AS(hessian_fd(chart, chart_center(chart), 0.9, false), StepLeavesPositiveCone);
}

TEST_CASE("Yukawa coupling: reference values and symmetry") {
  G2Structure fs = metric_from_phi(standard_phi<double>());
  const KForm& phi = fs.phi();
  CHECK(yukawa(fs, phi, phi, phi) == doctest::Approx(14.0 / 9.0).epsilon(1e-13));
  CHECK(yukawa(fs, phi, phi, phi) == doctest::Approx(14.0 / 27.0 * 3.0).epsilon(1e-13));
  std::vector<KForm> b27 = type27_basis(fs);
  for (const KForm& eta : b27) CHECK(std::fabs(yukawa(fs, phi, phi, eta)) < 1e-12);
  for (size_t i = 0; i < b27.size(); i += 4)
    for (size_t j = 0; j < b27.size(); j += 5)
      CHECK(std::fabs(yukawa(fs, phi, b27[i], b27[j]) - G_pair(fs, b27[i], b27[j]) / 6.0) < 1e-10);
  CHECK_THROWS_AS(yukawa(fs, phi, phi, type7_basis(fs)[0]), HasSevenComponent);

  std::mt19937_64 rng(3);
  G2Structure q = metric_from_phi(random_positive_phi(rng, 0.2));
  Sym2Tensor h1 = random_sym2(rng), h2 = random_sym2(rng), h3 = random_sym2(rng);
  KForm a = sym2_to_form(q, h1), b = sym2_to_form(q, h2), c = sym2_to_form(q, h3);
  double y = yukawa(q, a, b, c);
  CHECK(std::fabs(y - yukawa_oracle(q, h1, h2, h3)) < 1e-10 * std::max(1.0, std::fabs(y)));
  for (double v : {yukawa(q, a, c, b), yukawa(q, b, a, c), yukawa(q, b, c, a), yukawa(q, c, a, b),
                   yukawa(q, c, b, a)})
    CHECK(std::fabs(v - y) < 1e-12 * std::max(1.0, std::fabs(y)));
  // trilinearity
  double lin = yukawa(q, 2.0 * a + b, b, c);
  CHECK(std::fabs(lin - (2.0 * y + yukawa(q, b, b, c))) < 1e-10 * std::max(1.0, std::fabs(lin)));
}

TEST_CASE("third derivative of f equals twice the Yukawa coupling") {
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint c = chart_center(chart);
  const KForm& phi = c.fs.phi();
  auto r = check_third_derivative(c, phi, phi, phi);
  CHECK(r.relative_error < 1e-3);
  CHECK(r.finite_difference == doctest::Approx(28.0 / 9.0).epsilon(1e-3));
  std::vector<KForm> b27 = type27_basis(c.fs);
  auto z = check_third_derivative(c, b27[3], phi, phi);
  CHECK(std::fabs(z.finite_difference) < 1e-3);

  std::mt19937_64 rng(44);
  for (int t = 0; t < 4; ++t) {
    ModuliPoint p = point_at(chart, random_positive_phi(rng, 0.2));
    std::vector<KForm> s = type27_basis(p.fs);
    auto pick = [&] {
      KForm out(3);
      std::normal_distribution<double> N;
      for (const KForm& f : s) out += N(rng) * f;
      return out;
    };
    KForm a = pick(), b = pick(), d = pick();
    auto rep = check_third_derivative(p, a, b, d);
    CHECK(rep.relative_error < 1e-3);
    // symmetry of the finite-difference third derivative
    auto rep2 = check_third_derivative(p, d, a, b);
    CHECK(std::fabs(rep.finite_difference - rep2.finite_difference) < 1e-3 * std::max(1.0, std::fabs(rep.closed_form)));
  }
  CHECK_THROWS_AS(check_third_derivative(c, phi, phi, type7_basis(c.fs)[1]), HasSevenComponent);
}

TEST_CASE("log potential Hessian on the 1+27 sector") {
  FlatChart chart = make_chart(standard_phi<double>());
  LogPotentialReport c = log_potential_checks(chart_center(chart));
  CHECK(c.f00 == doctest::Approx(7.0 / 3.0).epsilon(1e-6));
  CHECK(c.max_f0i < 1e-6);
  CHECK(c.max_error < 1e-5);
  CHECK(c.min_eigenvalue > 0.0);
  MESSAGE("type-7 log-potential discrepancy at the center: " << c.pi7_discrepancy);

  std::mt19937_64 rng(71);
  LogPotentialReport r = log_potential_checks(point_at(chart, random_positive_phi(rng, 0.2)));
  CHECK(r.max_error < 1e-5);
  CHECK(r.min_eigenvalue > 0.0);
}

TEST_CASE("trace cubic lemma") {
  G2Structure fs = metric_from_phi(standard_phi<double>());
  Sym2Tensor third = scaled_metric(fs, 1.0 / 3.0);
  TraceCubicReport r = check_trace_cubic_lemma(fs, third, third, third);
  CHECK(r.lhs == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(28.0 / 9.0 + 98.0 / 9.0).epsilon(1e-12));

  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    G2Structure q = metric_from_phi(random_positive_phi(rng, 0.2));
    Sym2Tensor h1 = random_sym2(rng), h2 = random_sym2(rng), h3 = random_sym2(rng);
    TraceCubicReport rr = check_trace_cubic_lemma(q, h1, h2, h3);
    CHECK(rr.residual < 1e-10 * std::max(1.0, std::fabs(rr.lhs)));
    // independent contraction from the index-formula form
    const Mat<double> gi = q.inverse_metric().matrix();
    KForm e1 = oracle::sym2_to_form(gi, q.phi(), h1.matrix());
    KForm e2 = oracle::sym2_to_form(gi, q.phi(), h2.matrix());
    Mat<double> H3 = raise(q, h3);
    double s = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j)
        for (int k = 0; k < 7; ++k) {
          double x = oracle::comp(e1, {i, j, k});
          if (x == 0.0) continue;
          for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b)
              for (int c = 0; c < 7; ++c) s += x * oracle::comp(e2, {a, b, c}) * H3(i, a) * gi(j, b) * gi(k, c);
        }
    CHECK(std::fabs(s * q.total_volume() - rr.lhs) < 1e-9 * std::max(1.0, std::fabs(s)));

    Sym2Tensor t1 = traceless_part(q, h1), t2 = traceless_part(q, h2), t3 = traceless_part(q, h3);
    TraceCubicReport tl = check_trace_cubic_lemma(q, t1, t2, t3);
    CHECK(std::fabs(tl.lhs - 2.0 * yukawa_sym(q, t1, t2, t3)) < 1e-10 * std::max(1.0, std::fabs(tl.lhs)));
  }
}
