#include "g2/algebra.hpp"

#include <cmath>
#include <string>

namespace g2 {

std::string index_string(Mask m) {
  std::string s;
  for (int i : indices_of(m)) s.push_back(static_cast<char>('1' + i));
  return s.empty() ? std::string("0") : s;
}

G2Structure structure_along(const KForm& phi, const KForm& eta, double t) {
  try {
    return metric_from_phi(phi + t * eta);
  } catch (const NotPositive&) {
    throw StepLeavesPositiveCone("finite-difference step leaves the positive cone");
  } catch (const NearDegenerate&) {
    throw StepLeavesPositiveCone("finite-difference step reaches a degenerate form");
  }
}

double relative_step(const G2Structure& fs, const KForm& direction, double h) {
  double n = std::sqrt(fs.norm2(direction));
  if (n == 0.0) return h;
  return h * std::sqrt(fs.norm2(fs.phi())) / n;
}

namespace {

template <class F>
KForm central(F&& f, double t) {
  KForm plus = f(t), minus = f(-t);
  return (1.0 / (2.0 * t)) * (plus - minus);
}

template <class F>
KForm central_maybe_richardson(F&& f, double t, bool richardson) {
  KForm d1 = central(f, t);
  if (!richardson) return d1;
  KForm d2 = central(f, t / 2);
  return (1.0 / 3.0) * (4.0 * d2 - d1);
}

DerivativeCheck finish(const G2Structure& fs, KForm fd, KForm closed) {
  DerivativeCheck c;
  c.finite_difference = std::move(fd);
  c.closed_form = std::move(closed);
  KForm diff = c.finite_difference - c.closed_form;
  c.max_abs_error = diff.max_abs();
  double ref = std::sqrt(fs.norm2(c.closed_form));
  c.relative_error = std::sqrt(fs.norm2(diff)) / std::max(ref, 1e-300);
  return c;
}

}  // namespace

DerivativeCheck check_star_derivative(const G2Structure& fs, const KForm& eta, double h, bool richardson) {
  if (eta.degree() != 3) throw DegreeMismatch("direction must be a 3-form");
  double t = relative_step(fs, eta, h);
  auto psi_at = [&](double s) { return structure_along(fs.phi(), eta, s).psi(); };
  return finish(fs, central_maybe_richardson(psi_at, t, richardson), star_op(fs, eta));
}

KForm phi_from_psi(const KForm& psi_target, const KForm& guess, double tol, int max_iter) {
  KForm phi = guess;
  double scale = std::max(1.0, psi_target.max_abs());
  for (int it = 0; it < max_iter; ++it) {
    G2Structure fs = metric_from_phi(phi);
    KForm r = psi_target - fs.psi();
    if (r.max_abs() <= tol * scale) return phi;
    Mat<double> J = star_op_matrix(fs, 3);
    KForm step(3);
    step.coeffs() = inverse(J).apply(r.coeffs());
    phi += step;
  }
  throw NewtonDiverged("phi_from_psi did not converge");
}

DerivativeCheck check_star_derivative4(const G2Structure& fs, const KForm& theta, double h, bool richardson) {
  if (theta.degree() != 4) throw DegreeMismatch("direction must be a 4-form");
  double t = relative_step(fs, theta, h);
  auto phi_at = [&](double s) {
    try {
      return phi_from_psi(fs.psi() + s * theta, fs.phi());
    } catch (const NotPositive&) {
      throw StepLeavesPositiveCone("4-form step leaves the positive cone");
    }
  };
  return finish(fs, central_maybe_richardson(phi_at, t, richardson), star_op(fs, theta));
}

VariationCheck check_metric_volume_variation(const G2Structure& fs, const Sym2Tensor& h, double step) {
  KForm eta = sym2_to_form(fs, h);
  double t = relative_step(fs, eta, step);
  G2Structure plus = structure_along(fs.phi(), eta, t);
  G2Structure minus = structure_along(fs.phi(), eta, -t);
  Mat<double> raised = fs.inverse_metric().matrix() * h.matrix() * fs.inverse_metric().matrix();
  VariationCheck v;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b) {
      double fd = (plus.inverse_metric()(a, b) - minus.inverse_metric()(a, b)) / (2 * t);
      v.inverse_metric_error = std::max(v.inverse_metric_error, std::fabs(fd + 2 * raised(a, b)));
    }
  v.volume_rate = (plus.total_volume() - minus.total_volume()) / (2 * t) / fs.total_volume();
  v.trace = metric_trace(fs, h);
  v.volume_error = std::fabs(v.volume_rate - v.trace);
  return v;
}

double equivariance_residual(const KForm& phi, const Mat<double>& A) {
  G2Structure base = metric_from_phi(phi);
  G2Structure moved = metric_from_phi(pullback(A, phi));
  Mat<double> expect = A.transpose() * base.metric().matrix() * A;
  double r = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) r = std::max(r, std::fabs(moved.metric()(i, j) - expect(i, j)));
  KForm vol_expect = pullback(A, base.vol());
  r = std::max(r, (moved.vol() - vol_expect).max_abs());
  r = std::max(r, (moved.psi() - pullback(A, base.psi())).max_abs());
  return r;
}

KForm random_form(std::mt19937_64& rng, int degree, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  KForm f(degree);
  for (auto& c : f.coeffs()) c = n(rng);
  return f;
}

Sym2Tensor random_sym2(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Sym2Tensor h;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) h.set(i, j, n(rng));
  return h;
}

Sym2Tensor traceless_part(const G2Structure& fs, const Sym2Tensor& h) {
  double tr = metric_trace(fs, h);
  return h - (tr / 7.0) * fs.metric();
}

KForm random_positive_phi(std::mt19937_64& rng, double spread) {
  KForm phi0 = standard_phi<double>();
  while (true) {
    KForm cand = phi0 + random_form(rng, 3, spread);
    try {
      metric_from_phi(cand);
      return cand;
    } catch (const Error&) {
    }
  }
}

Mat<double> random_matrix(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  while (true) {
    Mat<double> A = Mat<double>::identity(kDim);
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) A(i, j) += n(rng);
    double d = determinant(A);
    if (d >= 0.5 && d <= 2.0) return A;
  }
}

}  // namespace g2
