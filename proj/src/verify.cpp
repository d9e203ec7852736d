#include "g2/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "g2/cycles.hpp"
#include "g2/jacobian.hpp"
#include "g2/moduli.hpp"

namespace g2 {

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void record(SuiteReport& r, const std::string& name, const std::string& anchor, int criterion, double value,
            double tol, bool pass, const std::string& detail = {}) {
  r.checks.push_back({name, pass ? CheckStatus::pass : CheckStatus::fail, value, tol, anchor, criterion, detail});
}

// value <= tol passes
void bound(SuiteReport& r, const std::string& name, const std::string& anchor, int criterion, double value,
           double tol, const std::string& detail = {}) {
  record(r, name, anchor, criterion, value, tol, std::isfinite(value) && value <= tol, detail);
}

void measured(SuiteReport& r, const std::string& name, const std::string& anchor, double value,
              const std::string& detail = {}) {
  r.checks.push_back({name, CheckStatus::measured, value, 0.0, anchor, 0, detail});
}

// Runs a check body; an exception becomes a failed record under the given name.
void guard(SuiteReport& r, const std::string& name, const std::string& anchor, int criterion,
           const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    record(r, name, anchor, criterion, std::numeric_limits<double>::quiet_NaN(), 0.0, false,
           std::string("exception: ") + e.what());
  }
}

double pick(double override_value, double fallback) { return override_value > 0.0 ? override_value : fallback; }

// Rounding noise eps / h^order overtakes the tolerance below this step.
void floor_diagnostic(SuiteReport& r, const RunConfig& cfg, int order, double tol, const std::string& what) {
  if (cfg.fd_step <= 0.0) return;
  double floor = std::pow(std::numeric_limits<double>::epsilon() / tol, 1.0 / order);
  if (cfg.fd_step < floor)
    r.diagnostics.push_back(what + ": step below float floor (step " + fmt(cfg.fd_step) + " < " + fmt(floor) +
                            " for derivative order " + std::to_string(order) + " at tolerance " + fmt(tol) + ")");
}

Mat<Rational> to_rational_matrix(const Mat<double>& A) {
  Mat<Rational> out(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out(i, j) = Rational(std::llround(A(i, j)));
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Random positive 3-form whose metric has condition number at most max_cond.
KForm sample_phi(std::mt19937_64& rng, double spread, double max_cond = 25.0) {
  while (true) {
    KForm phi = random_positive_phi(rng, spread);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(metric_from_phi(phi).metric().matrix()));
    if (es.eigenvalues().maxCoeff() <= max_cond * es.eigenvalues().minCoeff()) return phi;
  }
}

}  // namespace

bool SuiteReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == CheckStatus::fail; });
}

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    default:
      return "measured";
  }
}

const std::vector<std::string>& anchor_list() {
  static const std::vector<std::string> anchors{
      "positive-3-form",        "induced-metric",       "phi-norm",
      "type-decomposition",     "star-derivative",      "modified-star",
      "superpotential",         "hessian-metric",       "star-pairing",
      "yukawa-coupling",        "yukawa-constants",     "yukawa-third-derivative",
      "log-potential",          "trace-lemmas",         "contraction-identity",
      "sym2-map",               "l2-trace-formula",     "metric-volume-variation",
      "lagrangian-graph",       "intermediate-jacobian", "pseudo-kahler",
      "legendre-transform",     "cubic-form",           "chern-simons-functional",
      "fixed-n-formula",        "normal-variation",     "abel-jacobi",
      "critical-associative",   "critical-coassociative", "critical-ddt",
      "isotropy-nu",            "isotropy-mu",          "isotropy-chi",
      "topological-number"};
  return anchors;
}

// ---------------------------------------------------------------- algebra

SuiteReport verify_algebra(const RunConfig& cfg) {
  SuiteReport r{"algebra", {}, {}, {}};
  std::mt19937_64 rng(cfg.seed);
  const KForm phi0 = standard_phi<double>();

  guard(r, "contraction_identity_exact", "contraction-identity", 1, [&] {
    QG2Structure q = metric_from_phi(standard_phi<Rational>());
    auto c = check_contraction_identity(q);
    record(r, "contraction_identity_exact", "contraction-identity", 1, to_double(c.max_residual), 0.0,
           c.max_residual == 0 && c.tuples == 2401, std::to_string(c.tuples) + " tuples, rational arithmetic");
    Rational n = q.norm2(q.phi());
    record(r, "phi0_norm_exact", "phi-norm", 1, to_double(abs_value(n - 7)), 0.0, n == 7,
           "|phi0|^2 = " + to_string(n) + " in rational arithmetic");
  });
  guard(r, "projector_ranks_exact", "type-decomposition", 1, [&] {
    QG2Structure q = metric_from_phi(standard_phi<Rational>());
    const int expect[5][3] = {{3, 1, 1}, {3, 7, 7}, {3, 27, 27}, {2, 7, 7}, {2, 14, 14}};
    int bad = 0;
    std::string ranks;
    for (auto [deg, type, want] : expect) {
      int got = rank(q.projector(deg, type));
      bad += got != want;
      ranks += std::to_string(got) + " ";
      got = deg == 3 ? rank(q.projector(4, type)) : got;
      bad += got != want;
    }
    record(r, "projector_ranks_exact", "type-decomposition", 1, bad, 0.0, bad == 0, "ranks " + ranks);
  });
  if (cfg.exact) {
    guard(r, "contraction_identity_exact_transformed", "contraction-identity", 1, [&] {
      Rational worst(0);
      const int n = std::min(cfg.samples, 3);
      for (int t = 0; t < n; ++t) {
        Mat<Rational> A = to_rational_matrix(random_unimodular(rng, 5));
        QG2Structure q = metric_from_phi(pullback(A, standard_phi<Rational>()));
        auto c = check_contraction_identity(q);
        if (c.max_residual > worst) worst = c.max_residual;
      }
      record(r, "contraction_identity_exact_transformed", "contraction-identity", 1, to_double(worst), 0.0,
             worst == 0, std::to_string(n) + " unimodular images of phi0");
    });
  } else {
    guard(r, "contraction_identity_random", "contraction-identity", 0, [&] {
      double worst = 0.0;
      for (int t = 0; t < 3; ++t)
        worst = std::max(worst, check_contraction_identity(metric_from_phi(sample_phi(rng, 0.25))).max_residual);
      bound(r, "contraction_identity_random", "contraction-identity", 0, worst, 1e-10);
    });
  }

  guard(r, "defining_identity", "induced-metric", 0, [&] {
    double worst = 0.0, norms = 0.0;
    for (int t = 0; t < 5; ++t) {
      G2Structure fs = metric_from_phi(sample_phi(rng, 0.3));
      for (int i = 0; i < kDim; ++i)
        for (int j = i; j < kDim; ++j) {
          double top = wedge_top(wedge(interior_basis(i, fs.phi()), interior_basis(j, fs.phi())), fs.phi());
          worst = std::max(worst, std::fabs(top + 6.0 * fs.metric()(i, j) * fs.vol()[0]));
        }
      norms = std::max(norms, std::fabs(fs.norm2(fs.phi()) - 7.0));
    }
    bound(r, "defining_identity", "induced-metric", 0, worst, 1e-10);
    bound(r, "phi_norm_random", "phi-norm", 0, norms, 1e-12);
  });
  guard(r, "gl_equivariance", "positive-3-form", 0, [&] {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) worst = std::max(worst, equivariance_residual(sample_phi(rng, 0.2), random_matrix(rng, 0.3)));
    bound(r, "gl_equivariance", "positive-3-form", 0, worst, 1e-10);
    bool thrown = false;
    try {
      metric_from_phi(KForm::basis("123"));
    } catch (const NotPositive&) {
      thrown = true;
    }
    record(r, "degenerate_form_rejected", "positive-3-form", 0, thrown ? 1.0 : 0.0, 1.0, thrown);
  });
  guard(r, "type_orthogonality", "type-decomposition", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.25));
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      auto d = decompose(fs, random_form(rng, 3));
      worst = std::max({worst, std::fabs(fs.inner(d.p1, d.p7)), std::fabs(fs.inner(d.p1, d.p27)),
                        std::fabs(fs.inner(d.p7, d.p27)), wedge(d.p27, fs.phi()).max_abs()});
      auto b = decompose(fs, random_form(rng, 2));
      worst = std::max(worst, wedge(b.p14, fs.psi()).max_abs());
    }
    bound(r, "type_orthogonality", "type-decomposition", 0, worst, 1e-10);
  });
  guard(r, "modified_star", "modified-star", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.25));
    double worst = (star_op(fs, fs.phi()) - (4.0 / 3.0) * fs.psi()).max_abs();
    for (int t = 0; t < 5; ++t) {
      KForm a = random_form(rng, 3);
      worst = std::max(worst, (star_op(fs, star_op(fs, a)) - a).max_abs());
      KForm b = random_form(rng, 4);
      worst = std::max(worst, (star_op(fs, star_op(fs, b)) - b).max_abs());
    }
    bound(r, "modified_star_involution", "modified-star", 0, worst, 1e-12);
  });

  {
    const double h = pick(cfg.fd_step, 1e-4);
    const double tol = pick(cfg.tol, 1e-6);
    floor_diagnostic(r, cfg, 1, tol, "star derivative");
    const int dirs = std::max(20, cfg.samples);
    for (int deg : {3, 4}) {
      const std::string name = deg == 3 ? "star_derivative_deg3" : "star_derivative_deg4";
      guard(r, name, "star-derivative", 2, [&] {
        double worst = 0.0;
        for (int p = 0; p < 5; ++p) {
          G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
          for (int d = 0; d < dirs; ++d) {
            auto c = deg == 3 ? check_star_derivative(fs, random_form(rng, 3), h)
                              : check_star_derivative4(fs, random_form(rng, 4), h);
            worst = std::max(worst, c.relative_error);
          }
        }
        bound(r, name, "star-derivative", 2, worst, tol, std::to_string(5 * dirs) + " directions at 5 points");
      });
    }
  }

  guard(r, "sym2_map", "sym2-map", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.25));
    double worst = (sym2_to_form(fs, (1.0 / 3.0) * fs.metric()) - fs.phi()).max_abs();
    Sym2Tensor h0 = traceless_part(fs, random_sym2(rng));
    Sym2Tensor back = form_to_sym2(fs, sym2_to_form(fs, h0));
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) worst = std::max(worst, std::fabs(back(i, j) - h0(i, j)));
    bound(r, "sym2_map", "sym2-map", 0, worst, 1e-12);
  });
  guard(r, "l2_trace_formula", "l2-trace-formula", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.25));
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      Sym2Tensor h1 = random_sym2(rng), h2 = random_sym2(rng);
      double lhs = l2_pairing(fs, sym2_to_form(fs, h1), sym2_to_form(fs, h2));
      worst = std::max(worst, std::fabs(lhs - trace_formula_rhs(fs, h1, h2)) / std::max(1.0, std::fabs(lhs)));
    }
    bound(r, "l2_trace_formula", "l2-trace-formula", 0, worst, 1e-10);
  });
  guard(r, "metric_volume_variation", "metric-volume-variation", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
    auto v = check_metric_volume_variation(fs, random_sym2(rng), pick(cfg.fd_step, 1e-5));
    bound(r, "metric_volume_variation", "metric-volume-variation", 0, std::max(v.inverse_metric_error, v.volume_error),
          pick(cfg.tol, 1e-6));
  });
  return r;
}

// ---------------------------------------------------------------- moduli

SuiteReport verify_moduli(const RunConfig& cfg) {
  SuiteReport r{"moduli", {}, {}, {}};
  std::mt19937_64 rng(cfg.seed + 1);
  FlatChart chart = make_chart(standard_phi<double>());
  ModuliPoint center = chart_center(chart);

  guard(r, "superpotential_center", "superpotential", 0, [&] {
    bound(r, "superpotential_center", "superpotential", 0, std::fabs(superpotential(center) - 3.0), 1e-13);
    double two = superpotential(point_at(chart, 2.0 * standard_phi<double>()));
    bound(r, "superpotential_homogeneity", "superpotential", 0, std::fabs(two - 3.0 * std::pow(2.0, 7.0 / 3.0)), 1e-11);
  });

  guard(r, "gradient", "superpotential", 0, [&] {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
      auto a = gradient_f(chart, p), b = gradient_fd(chart, p);
      for (int i = 0; i < kModuliDim; ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    bound(r, "gradient_fd", "superpotential", 0, worst, pick(cfg.tol, 1e-6));
  });

  {
    const double h = pick(cfg.fd_step, 1e-3);
    const double tol = pick(cfg.tol, 1e-5);
    floor_diagnostic(r, cfg, 2, tol, "Hessian");
    guard(r, "hessian_three_way", "hessian-metric", 3, [&] {
      double worst = 0.0, fd_error = 0.0;
      for (int t = 0; t < 3; ++t) {
        ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
        Eigen::MatrixXd a = hessian_projection(chart, p), b = hessian_star(chart, p), f = hessian_fd(chart, p, h);
        worst = std::max({worst, max_abs(a - b), max_abs(a - f), max_abs(b - f)});
        fd_error = std::max(fd_error, max_abs(f - a));
      }
      bound(r, "hessian_three_way", "hessian-metric", 3, worst, tol, "fd step " + fmt(h));
      measured(r, "hessian_fd_error", "hessian-metric", fd_error, "finite-difference Hessian against closed form at step " + fmt(h));
    });
  }
  guard(r, "hessian_signature", "hessian-metric", 3, [&] {
    int bad = 0;
    const int n = std::max(20, cfg.samples);
    for (int t = 0; t < n; ++t) {
      Signature s = hessian_G(chart, point_at(chart, sample_phi(rng, 0.25))).signature;
      bad += s.positive != 8 || s.negative != 27;
    }
    record(r, "hessian_signature", "hessian-metric", 3, bad, 0.0, bad == 0, std::to_string(n) + " points, expected (8,27)");
  });
  guard(r, "hessian_center_value", "star-pairing", 3, [&] {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      FlatChart c = make_chart(t == 0 ? standard_phi<double>() : sample_phi(rng, 0.25));
      ModuliPoint p = chart_center(c);
      worst = std::max(worst, std::fabs(hessian_star(c, p)(0, 0) - 28.0 / 9.0 * superpotential(p)));
    }
    bound(r, "hessian_center_value", "star-pairing", 3, worst, 1e-10, "G_00 against (28/9) f at chart centers");
  });

  guard(r, "yukawa_constants", "yukawa-constants", 4, [&] {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      G2Structure fs = metric_from_phi(t == 0 ? standard_phi<double>() : sample_phi(rng, 0.25));
      const KForm& phi = fs.phi();
      double f = superpotential_wedge(fs);
      worst = std::max(worst, std::fabs(yukawa(fs, phi, phi, phi) / f - 14.0 / 27.0));
      std::vector<KForm> b27 = type27_basis(fs);
      for (size_t i = 0; i < b27.size(); i += 5)
        for (size_t j = 0; j < b27.size(); j += 7)
          worst = std::max(worst, std::fabs(yukawa(fs, phi, b27[i], b27[j]) - G_pair(fs, b27[i], b27[j]) / 6.0));
    }
    bound(r, "yukawa_constants", "yukawa-constants", 4, worst, 1e-10, "ratios 14/27 and 1/6");
  });
  guard(r, "yukawa_symmetry", "yukawa-coupling", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
    KForm a = sym2_to_form(fs, random_sym2(rng)), b = sym2_to_form(fs, random_sym2(rng)), c = sym2_to_form(fs, random_sym2(rng));
    double y = yukawa(fs, a, b, c);
    double worst = 0.0;
    for (double v : {yukawa(fs, a, c, b), yukawa(fs, b, a, c), yukawa(fs, b, c, a), yukawa(fs, c, a, b), yukawa(fs, c, b, a)})
      worst = std::max(worst, std::fabs(v - y) / std::max(1.0, std::fabs(y)));
    bound(r, "yukawa_symmetry", "yukawa-coupling", 0, worst, 1e-12);
  });
  {
    const double tol = pick(cfg.tol, 1e-3);
    const double h = pick(cfg.fd_step, 1e-2);
    floor_diagnostic(r, cfg, 3, tol, "third derivative");
    guard(r, "yukawa_third_derivative", "yukawa-third-derivative", 4, [&] {
      double worst = 0.0;
      const int triples = std::max(50, cfg.samples);
      std::normal_distribution<double> N;
      for (int pnt = 0; pnt < 5; ++pnt) {
        ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
        std::vector<KForm> dirs{p.fs.phi()};
        for (KForm& f : type27_basis(p.fs)) dirs.push_back(std::move(f));
        auto draw = [&] {
          KForm out(3);
          for (const KForm& f : dirs) out += N(rng) * f;
          return out;
        };
        for (int t = 0; t < triples; ++t) {
          KForm a = draw(), b = draw(), c = draw();
          worst = std::max(worst, check_third_derivative(p, a, b, c, h).relative_error);
        }
      }
      bound(r, "yukawa_third_derivative", "yukawa-third-derivative", 4, worst, tol,
            std::to_string(5 * triples) + " sector triples at 5 points");
    });
  }
  guard(r, "log_potential", "log-potential", 0, [&] {
    LogPotentialReport c = log_potential_checks(center);
    bound(r, "log_potential_hessian", "log-potential", 0, c.max_error, pick(cfg.tol, 1e-5));
    record(r, "log_potential_positive", "log-potential", 0, c.min_eigenvalue, 0.0, c.min_eigenvalue > 0.0,
           "smallest eigenvalue on the 1+27 sector");
    bound(r, "log_potential_f00", "log-potential", 0, std::fabs(c.f00 - 7.0 / 3.0), 1e-6);
    measured(r, "log_potential_type7_discrepancy", "log-potential", c.pi7_discrepancy,
             "type-7 directions are outside the stated sector");
  });
  guard(r, "trace_cubic_lemma", "trace-lemmas", 0, [&] {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
      TraceCubicReport c = check_trace_cubic_lemma(fs, random_sym2(rng), random_sym2(rng), random_sym2(rng));
      worst = std::max(worst, c.residual / std::max(1.0, std::fabs(c.lhs)));
    }
    bound(r, "trace_cubic_lemma", "trace-lemmas", 0, worst, 1e-10);
  });
  return r;
}

// ---------------------------------------------------------------- jacobian

SuiteReport verify_jacobian(const RunConfig& cfg) {
  SuiteReport r{"jacobian", {}, {}, {}};
  std::mt19937_64 rng(cfg.seed + 2);
  FlatChart chart = make_chart(standard_phi<double>());
  auto jv = [&] { return JacobianVector{random_form(rng, 3), random_form(rng, 4)}; };
  auto tv = [&] { return TildeJacobianVector{random_form(rng, 3), random_form(rng, 3)}; };

  guard(r, "complex_structure", "pseudo-kahler", 5, [&] {
    double jj = 0.0, compat = 0.0;
    for (int t = 0; t < 5; ++t) {
      G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
      JacobianVector X = jv(), Y = jv();
      JacobianVector JJ = Jop(fs, Jop(fs, X));
      jj = std::max({jj, (JJ.eta + X.eta).max_abs(), (JJ.theta + X.theta).max_abs()});
      compat = std::max({compat, std::fabs(gJ(fs, X, Y) - omega(X, Jop(fs, Y))), std::fabs(gJ(fs, X, Y) - gJ(fs, Y, X)),
                         std::fabs(omega(Jop(fs, X), Jop(fs, Y)) - omega(X, Y))});
      TildeJacobianVector A = tv(), B = tv();
      TildeJacobianVector AA = Jop_tilde(Jop_tilde(A));
      jj = std::max({jj, (AA.eta + A.eta).max_abs(), (AA.mu + A.mu).max_abs()});
      compat = std::max({compat, std::fabs(gJ_tilde(fs, A, B) - omega_tilde(fs, A, Jop_tilde(B))),
                         std::fabs(gJ_tilde(fs, A, B) - gJ_tilde(fs, B, A)),
                         std::fabs(omega_tilde(fs, Jop_tilde(A), Jop_tilde(B)) - omega_tilde(fs, A, B))});
    }
    bound(r, "complex_structure_square", "pseudo-kahler", 5, jj, 1e-12);
    bound(r, "compatibility", "pseudo-kahler", 5, compat, 1e-12);
  });
  guard(r, "jacobian_metric_signature", "pseudo-kahler", 0, [&] {
    G2Structure fs = metric_from_phi(standard_phi<double>());
    Signature s = signature(gJ_matrix(fs)), st = signature(gJ_tilde_matrix(fs));
    bool ok = s.positive == 16 && s.negative == 54 && st.positive == 16 && st.negative == 54;
    record(r, "jacobian_metric_signature", "pseudo-kahler", 0, s.positive, 16, ok,
           "(" + std::to_string(s.positive) + "," + std::to_string(s.negative) + ") and (" +
               std::to_string(st.positive) + "," + std::to_string(st.negative) + ")");
  });
  guard(r, "closedness_proxy", "pseudo-kahler", 5, [&] {
    std::uniform_int_distribution<int> idx(0, kModuliDim - 1);
    std::vector<std::array<int, 3>> triples;
    for (int t = 0; t < std::max(20, cfg.samples); ++t) triples.push_back({idx(rng), idx(rng), idx(rng)});
    ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
    ClosednessReport c = closedness_and_integrability(chart, p, triples, pick(cfg.fd_step, 1e-4));
    bound(r, "closedness_proxy", "pseudo-kahler", 5, std::max(c.max_asymmetry, c.max_fd_residual), pick(cfg.tol, 1e-4),
          std::to_string(c.triples) + " index triples");
  });
  guard(r, "primitive", "intermediate-jacobian", 0, [&] {
    double err = 0.0, tilde = 0.0, printed = 0.0;
    for (int t = 0; t < 3; ++t) {
      KForm phi = sample_phi(rng, 0.2);
      PrimitiveCheck c = check_primitive(phi, random_form(rng, 4), jv(), jv());
      err = std::max(err, c.error / std::max(1.0, std::fabs(c.omega)));
      KForm C = random_form(rng, 3);
      TildeJacobianVector X = tv(), Y = tv();
      PrimitiveCheck ct = check_primitive_tilde(phi, C, X, Y, false);
      tilde = std::max(tilde, ct.error / std::max(1.0, std::fabs(ct.omega)));
      printed = check_primitive_tilde(phi, C, X, Y, true).ratio;
    }
    bound(r, "primitive_canonical", "intermediate-jacobian", 0, err, 1e-7);
    bound(r, "primitive_tilde", "pseudo-kahler", 0, tilde, 1e-7);
    measured(r, "primitive_tilde_printed_ratio", "pseudo-kahler", printed, "d(printed primitive) / omega_tilde");
  });
  guard(r, "legendre", "legendre-transform", 5, [&] {
    double worst = std::fabs(legendre(chart, chart_center(chart)).fhat - 4.0);
    double hess = 0.0;
    for (int t = 0; t < 3; ++t) {
      ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
      LegendreData d = legendre(chart, p);
      worst = std::max(worst, std::fabs(d.fhat - 4.0 / 3.0 * d.f));
      if (t == 0) hess = check_legendre_hessian(chart, p, pick(cfg.fd_step, 1e-3)).relative_error;
    }
    hess = std::max(hess, check_legendre_hessian(chart, chart_center(chart), pick(cfg.fd_step, 1e-3)).relative_error);
    bound(r, "legendre_fhat", "legendre-transform", 5, worst, 1e-10, "fhat against (4/3) f");
    bound(r, "legendre_hessian", "legendre-transform", 5, hess, pick(cfg.tol, 1e-4), "Hessian of fhat against inverse Hessian of f");
  });
  guard(r, "graph_isotropy", "lagrangian-graph", 5, [&] {
    double worst = 0.0, tangency = 0.0;
    ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
    for (int t = 0; t < 5; ++t) {
      LagrangianReport c = check_lagrangian_graph(p, random_form(rng, 3), random_form(rng, 3));
      worst = std::max(worst, std::fabs(c.omega_value));
      tangency = std::max(tangency, c.tangency_error);
    }
    bound(r, "graph_isotropy", "lagrangian-graph", 5, worst, 1e-12);
    bound(r, "graph_tangency", "lagrangian-graph", 0, tangency, 1e-8);
  });
  guard(r, "lattice_covolume", "intermediate-jacobian", 6, [&] {
    JacobianLattice L = jacobian_lattice(metric_from_phi(standard_phi<double>()));
    bound(r, "lattice_covolume", "intermediate-jacobian", 6, std::fabs(L.covolume - 4.0 / 3.0), 1e-12, "covolume " + fmt(L.covolume));
    KForm phi = sample_phi(rng, 0.25);
    double c1 = jacobian_lattice(metric_from_phi(phi)).covolume;
    double c2 = jacobian_lattice(metric_from_phi(2.0 * phi)).covolume;
    bound(r, "lattice_scaling", "intermediate-jacobian", 0, std::fabs(std::log2(c2 / c1) - 35.0 / 3.0), 1e-10);
  });
  guard(r, "cubic_form", "cubic-form", 0, [&] {
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      ModuliPoint p = point_at(chart, sample_phi(rng, 0.2));
      std::vector<KForm> s = type27_basis(p.fs);
      CubicFormReport c = cubic_form_check(p, p.fs.phi() + s[t], s[t + 3], s[t + 6]);
      worst = std::max(worst, c.relative_error);
    }
    bound(r, "cubic_form", "cubic-form", 0, worst, pick(cfg.tol, 1e-3));
  });
  return r;
}

// ---------------------------------------------------------------- cycles

namespace {

void witness_checks(SuiteReport& r, int k, std::mt19937_64& rng, int count) {
  const std::string anchor = k == 3 ? "critical-associative" : k == 4 ? "critical-coassociative" : "critical-ddt";
  const std::string name = "witnesses_k" + std::to_string(k);
  guard(r, name, anchor, 7, [&] {
    auto lib = witness_library(k, rng, count, count);
    int wrong = 0, pos = 0, neg = 0;
    double worst_critical = 0.0, weakest = std::numeric_limits<double>::infinity();
    std::string first_wrong;
    for (const Witness& w : lib) {
      G2Structure fs = metric_from_phi(w.phi);
      DPhiReport d = d_phi(k, w.N, w.A, fs);
      if (d.critical != w.expected_critical) {
        ++wrong;
        if (first_wrong.empty()) first_wrong = w.label;
      }
      if (w.expected_critical) {
        ++pos;
        worst_critical = std::max(worst_critical, d.max_component);
      } else {
        ++neg;
        weakest = std::min(weakest, d.max_component);
      }
    }
    record(r, name + "_classified", anchor, 7, wrong, 0.0, wrong == 0 && pos >= 20 && neg >= 20,
           std::to_string(pos) + " positive, " + std::to_string(neg) + " negative" +
               (first_wrong.empty() ? "" : ", first misclassified " + first_wrong));
    bound(r, name + "_critical_gradient", anchor, 7, worst_critical, 1e-10);
    record(r, name + "_noncritical_gradient", anchor, 7, weakest, 1e-3, weakest >= 1e-3, "smallest witness component");
  });
}

void isotropy_checks(SuiteReport& r, AJKind which, const RunConfig& cfg) {
  const std::string tag = which == AJKind::nu ? "nu" : which == AJKind::mu ? "mu" : "chi";
  const std::string anchor = "isotropy-" + tag;
  guard(r, "isotropy_" + tag, anchor, 9, [&] {
    double identity = 0.0, sympl = 0.0;
    auto fams = isotropy_families(which);
    for (const CycleFamily& f : fams) {
      IsotropyReport rep = isotropy_check(which, f, pick(cfg.fd_step, 1e-4));
      identity = std::max(identity, rep.identity_residual);
      sympl = std::max(sympl, rep.symplectic_pullback);
      r.diagnostics.push_back(tag + " family '" + f.label + "': |dPhi| = " + fmt(rep.dphi_norm) +
                              ", identity residual " + fmt(rep.identity_residual));
    }
    bound(r, "isotropy_" + tag + "_identity", anchor, 9, identity, pick(cfg.tol, 1e-5),
          std::to_string(fams.size()) + " two-parameter families");
    bound(r, "isotropy_" + tag + "_symplectic", anchor, 9, sympl, 1e-8);
  });
}

// nu identity on a family that leaves the critical locus, where dPhi does not vanish.
void nu_off_critical(SuiteReport& r) {
  guard(r, "isotropy_nu_off_critical", "isotropy-nu", 0, [&] {
    CycleFamily off = isotropy_families(AJKind::nu)[1];
    IntVec7 e4{};
    e4[3] = 1;
    off.spanning[2] = e4;
    off.base_curvature = kTwoPi * KForm::basis(Mask{0x3});
    auto inner = off.at;
    KForm F = off.base_curvature;
    off.at = [inner, F](double a, double b) {
      FamilyPoint p = inner(a, b);
      p.state.curvature = F;
      return p;
    };
    IsotropyReport rep = isotropy_check(AJKind::nu, off, 1e-4, std::numeric_limits<double>::infinity());
    bound(r, "isotropy_nu_off_critical", "isotropy-nu", 0, rep.identity_residual, 1e-8,
          "measured coefficient " + fmt(rep.measured_coefficient) + ", |dPhi| " + fmt(rep.dphi_norm));
  });
}

void ddt_checks(SuiteReport& r, const RunConfig& cfg) {
  guard(r, "ddt_exact_families", "critical-ddt", 8, [&] {
    G2Structure fs = metric_from_phi(standard_phi<double>());
    double worst = ddt_residual(KForm(2), fs).max_abs();
    int count = 0;
    KForm phi0 = standard_phi<double>();
    for (int i = 0; i < kDim; ++i) {
      KForm t = interior_basis(i, phi0);
      std::vector<KForm> terms;
      for (int j = 0; j < t.size(); ++j)
        if (t[j] != 0.0) terms.push_back(t[j] * KForm::basis(t.mask(j)));
      for (size_t a = 0; a < terms.size(); ++a)
        for (size_t b = a + 1; b < terms.size(); ++b) {
          for (double c : {1.0, -3.0}) {
            KForm F = c * kTwoPi * (terms[a] - terms[b]);
            worst = std::max({worst, ddt_residual(F, fs).max_abs(), ddt_residual(F, fs, true).max_abs()});
            ++count;
          }
        }
    }
    record(r, "ddt_exact_families", "critical-ddt", 8, worst, 0.0, worst == 0.0,
           "F = 0 and " + std::to_string(count) + " integral type-14 curvatures, residual exactly zero");
  });
  guard(r, "ddt_newton", "critical-ddt", 8, [&] {
    const int starts = std::max(10, cfg.samples / 2);
    std::mt19937_64 rng(cfg.seed + 13);
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.15));
    const Mat<double>& P7 = fs.projector(2, 7);
    double worst = 0.0;
    int worst_iter = 0;
    for (int s = 0; s < starts; ++s) {
      KForm seed = random_form(rng, 2, kTwoPi);
      NewtonTrace tr = ddt_newton(seed, fs, false, 1e-12);
      worst = std::max(worst, tr.residuals.back());
      worst_iter = std::max(worst_iter, tr.iterations);
      r.series.push_back({"ddt_newton_start_" + std::to_string(s), tr.residuals});
    }
    bound(r, "ddt_newton", "critical-ddt", 8, worst, 1e-10,
          std::to_string(starts) + " starts, at most " + std::to_string(worst_iter) + " iterations");
    KForm dir = random_form(rng, 2);
    dir = dir - apply_matrix(P7, dir, 2);
    dir *= 1.0 / dir.max_abs();
    double d1 = apply_matrix(P7, ddt_newton(0.2 * dir, fs).solution, 2).max_abs();
    double d2 = apply_matrix(P7, ddt_newton(0.1 * dir, fs).solution, 2).max_abs();
    measured(r, "ddt_type7_scaling_exponent", "critical-ddt", std::log2(d1 / d2),
             "deviation from type 14 under halving the seed");
  });
}

void aj_checks(SuiteReport& r, std::mt19937_64& rng) {
  guard(r, "aj_loops", "abel-jacobi", 6, [&] {
    double cls = 0.0, period = 0.0, lattice = 0.0;
    int loops = 0;
    for (int k : {3, 4, 7}) {
      for (const Witness& w : witness_library(k, rng, 3, 3)) {
        G2Structure fs = metric_from_phi(w.phi);
        for (const LoopReport& l : generator_loops(k, w.N, w.A, fs)) {
          cls = std::max(cls, l.class_deviation);
          period = std::max(period, l.period_deviation);
          ++loops;
        }
        if (k != 4) {
          JacobianLattice L = jacobian_lattice(fs);
          KForm here = abel_jacobi(k, path_from_base(w.N, w.A), fs).value;
          U1Connection shifted = w.A;
          shifted.holonomy[0] += 1.0;
          AffineSubtorus moved = w.N;
          if (k == 3) moved.offset[4] -= 1.0;
          KForm there = abel_jacobi(k, path_from_base(moved, shifted), fs).value;
          lattice = std::max(lattice, lattice_deviation(L, fs, there - here));
        }
      }
    }
    bound(r, "aj_loop_class_integrality", "abel-jacobi", 6, cls, 1e-9, std::to_string(loops) + " generator loops for nu, mu, chi");
    bound(r, "aj_loop_periods", "chern-simons-functional", 6, period, 1e-9);
    bound(r, "aj_lattice_coordinates", "intermediate-jacobian", 6, lattice, 1e-9);
  });
  guard(r, "aj_examples", "abel-jacobi", 0, [&] {
    G2Structure fs = metric_from_phi(standard_phi<double>());
    IntVec7 e1{1}, e2{0, 1}, e3{0, 0, 1};
    KForm at1 = abel_jacobi_nu(path_from_base(make_subtorus({e1, e2, e3}, {0, 0, 0, 1, 0, 0, 0}), flat_connection(3)), fs).value;
    KForm at_half = abel_jacobi_nu(path_from_base(make_subtorus({e1, e2, e3}, {0, 0, 0, 0.5, 0, 0, 0}), flat_connection(3)), fs).value;
    bound(r, "aj_nu_linear_translation", "abel-jacobi", 0, (at1 - 2.0 * at_half).max_abs() + integral_deviation(at1), 1e-12);
    U1Connection A = integral_connection(7, KForm::basis("23") - KForm::basis("45"), {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    bound(r, "aj_chi_constant_path", "abel-jacobi", 0, aj_chi(path_between(whole_torus(), A, Vec7{}, A), fs).value.max_abs(), 0.0);
    measured(r, "nu_differential_rank", "abel-jacobi", nu_differential_rank(make_subtorus({e1, e2, e3}), fs),
             "rank over translations and holonomy shifts of the e123 torus");
  });
}

void functional_checks(SuiteReport& r, std::mt19937_64& rng) {
  guard(r, "phi_path_independence", "chern-simons-functional", 0, [&] {
    double closed = 0.0, legs = 0.0;
    for (int k : {3, 4, 7})
      for (const Witness& w : witness_library(k, rng, 4, 4)) {
        G2Structure fs = metric_from_phi(w.phi);
        CyclePath direct = path_from_base(w.N, w.A);
        double v = phi_functional(k, direct, fs);
        closed = std::max(closed, std::fabs(v - phi_functional_closed(k, direct, fs)));
        CyclePath first = path_from_base(w.N, flat_connection(k));
        first.start.curvature = first.end.curvature = w.A.curvature;
        CyclePath second = path_between(w.N, U1Connection{std::vector<double>(k, 0.0), w.A.curvature}, w.N.offset, w.A);
        legs = std::max(legs, std::fabs(phi_functional(k, first, fs) + phi_functional(k, second, fs) - v));
      }
    bound(r, "phi_closed_form", "normal-variation", 0, closed, 1e-10);
    bound(r, "phi_path_independence", "chern-simons-functional", 0, legs, 1e-10);
  });
  guard(r, "phi_fixed_n", "fixed-n-formula", 0, [&] {
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
    IntVec7 e1{1}, e2{0, 1}, e4{0, 0, 0, 1};
    AffineSubtorus N = make_subtorus({e1, e2, e4});
    CyclePath q;
    q.spanning = N.spanning;
    q.dim = 3;
    q.start = CycleState{Vec7{}, {0, 0, 0}, KForm(2)};
    q.end = CycleState{Vec7{}, {0.3, -0.2, 0.5}, kTwoPi * (KForm::basis(Mask{0x3}) - KForm::basis(Mask{0x6}))};
    q.transverse_curvature = true;
    bound(r, "phi_fixed_n", "fixed-n-formula", 0, std::fabs(phi_functional(3, q, fs) - phi_functional_closed(3, q, fs)), 1e-12);
  });
}

void calibration_checks(SuiteReport& r, std::mt19937_64& rng) {
  guard(r, "calibration_bound", "critical-associative", 0, [&] {
    std::uniform_int_distribution<int> d(-2, 2);
    G2Structure fs = metric_from_phi(sample_phi(rng, 0.2));
    double worst = -1.0;
    int tested = 0, disagreements = 0;
    while (tested < 40) {
      AffineSubtorus N;
      N.dim = 3;
      N.spanning.resize(3);
      for (auto& u : N.spanning)
        for (int& x : u) x = d(rng);
      try {
        N.validate();
      } catch (const DimensionMismatch&) {
        continue;
      }
      ++tested;
      CalibrationReport c = is_associative(N, fs);
      worst = std::max(worst, (std::fabs(c.calibration_value) - c.volume) / c.volume);
      disagreements += (c.criterion < 1e-10) != (c.result || c.orientation_reversed);
    }
    bound(r, "calibration_bound", "critical-associative", 0, std::max(0.0, worst), 1e-12, "40 integer subtori");
    record(r, "calibration_criteria_agree", "critical-associative", 0, disagreements, 0.0, disagreements == 0);
  });
}

void psi_checks(SuiteReport& r, std::mt19937_64& rng, int samples) {
  guard(r, "psi_inequality", "topological-number", 10, [&] {
    std::uniform_int_distribution<int> d(-2, 2), kpick(0, 2);
    double worst = 0.0;
    int count = 0;
    while (count < samples) {
      const int k = std::array<int, 3>{3, 4, 7}[kpick(rng)];
      G2Structure fs = metric_from_phi(sample_phi(rng, 0.25));
      AffineSubtorus N;
      if (k == 7) {
        N = whole_torus();
      } else {
        N.dim = k;
        N.spanning.resize(k);
        for (auto& u : N.spanning)
          for (int& x : u) x = d(rng);
        try {
          N.validate();
        } catch (const DimensionMismatch&) {
          continue;
        }
      }
      KForm n(2);
      for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) n.at(static_cast<Mask>((1u << a) | (1u << b))) = d(rng) * (kpick(rng) == 0);
      PsiReport p = psi_functional(k, N, integral_connection(k, n), fs);
      worst = std::max(worst, -p.gap / p.size);
      ++count;
    }
    bound(r, "psi_inequality", "topological-number", 10, worst, 1e-12, std::to_string(count) + " random samples");
  });
  guard(r, "psi_equality", "topological-number", 10, [&] {
    int wrong = 0, total = 0;
    for (int k : {3, 4, 7})
      for (const Witness& w : witness_library(k, rng, 20, 20)) {
        G2Structure fs = metric_from_phi(w.phi);
        PsiReport p = psi_functional(k, w.N, w.A, fs);
        bool critical = d_phi(k, w.N, w.A, fs).critical;
        wrong += (std::fabs(p.gap) < 1e-10 * p.size) != critical || p.gap < -1e-12 * p.size;
        ++total;
      }
    record(r, "psi_equality_iff_critical", "topological-number", 10, wrong, 0.0, wrong == 0,
           std::to_string(total) + " witnesses");
  });
}

}  // namespace

SuiteReport cycles_demo(const std::string& demo, const RunConfig& cfg) {
  SuiteReport r{"cycles " + demo, {}, {}, {}};
  std::mt19937_64 rng(cfg.seed + 3);
  const int count = std::max(20, cfg.samples);
  if (demo == "assoc") {
    witness_checks(r, 3, rng, count);
    isotropy_checks(r, AJKind::nu, cfg);
    nu_off_critical(r);
    calibration_checks(r, rng);
  } else if (demo == "coassoc") {
    witness_checks(r, 4, rng, count);
    isotropy_checks(r, AJKind::mu, cfg);
  } else if (demo == "ddt") {
    witness_checks(r, 7, rng, count);
    ddt_checks(r, cfg);
    isotropy_checks(r, AJKind::chi, cfg);
  } else if (demo == "aj") {
    aj_checks(r, rng);
  } else {
    throw Error("unknown cycles demo: " + demo);
  }
  return r;
}

SuiteReport verify_cycles(const RunConfig& cfg) {
  SuiteReport r{"cycles", {}, {}, {}};
  for (const char* demo : {"assoc", "coassoc", "ddt", "aj"}) {
    SuiteReport part = cycles_demo(demo, cfg);
    r.checks.insert(r.checks.end(), part.checks.begin(), part.checks.end());
    r.diagnostics.insert(r.diagnostics.end(), part.diagnostics.begin(), part.diagnostics.end());
    r.series.insert(r.series.end(), part.series.begin(), part.series.end());
  }
  std::mt19937_64 rng(cfg.seed + 4);
  functional_checks(r, rng);
  psi_checks(r, rng, std::max(100, cfg.samples));
  return r;
}

}  // namespace g2
