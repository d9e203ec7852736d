#include "g2/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

namespace g2 {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Three-point Gauss-Legendre rule on [0, 1].
constexpr std::array<double, 3> kNodes = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr std::array<double, 3> kWeights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

using Mixed = std::array<KForm, kDim + 1>;

Mixed mixed_zero() {
  Mixed m;
  for (int d = 0; d <= kDim; ++d) m[d] = KForm(d);
  return m;
}

Mixed mixed_mul(const Mixed& a, const Mixed& b, int max_degree) {
  Mixed out = mixed_zero();
  for (int p = 0; p <= max_degree; ++p) {
    if (a[p].max_abs() == 0.0) continue;
    for (int q = 0; p + q <= max_degree; ++q) {
      if (b[q].max_abs() == 0.0) continue;
      out[p + q] += wedge(a[p], b[q]);
    }
  }
  return out;
}

// Truncated exponential of a mixed form without a degree-0 part.
Mixed mixed_exp(const Mixed& x, int max_degree) {
  Mixed result = mixed_zero();
  result[0][0] = 1.0;
  Mixed term = result;
  for (int n = 1; n <= max_degree; ++n) {
    term = mixed_mul(term, x, max_degree);
    for (int d = 0; d <= max_degree; ++d) term[d] *= 1.0 / n;
    bool any = false;
    for (int d = 0; d <= max_degree; ++d) {
      result[d] += term[d];
      any = any || term[d].max_abs() != 0.0;
    }
    if (!any) break;
  }
  return result;
}

Mask low_mask(int n) { return static_cast<Mask>((1u << n) - 1u); }

// Moves slot i to slot i + by.
KForm shift_slots(const KForm& a, int by) {
  Mat<double> S(kDim, kDim);
  for (int i = 0; i + by < kDim; ++i) S(i, i + by) = 1.0;
  return pullback(S, a);
}

KForm one_form(const std::vector<double>& c, int first_slot) {
  KForm out(1);
  for (size_t a = 0; a < c.size(); ++a) out.at(static_cast<Mask>(1u << (first_slot + a))) = c[a];
  return out;
}

// Gauge term of d/dt a / 2 pi at the cube midpoint s = 1/2: dh.ds + (1/8 pi) sum dF_ab (ds_b - ds_a).
KForm gauge_velocity(const std::vector<double>& dh, const KForm& dF, int dim, int first_slot) {
  KForm b = one_form(dh, first_slot);
  for (int a = 0; a < dim; ++a)
    for (int c = a + 1; c < dim; ++c) {
      double f = dF.at(static_cast<Mask>((1u << a) | (1u << c)));
      if (f == 0.0) continue;
      b.at(static_cast<Mask>(1u << (first_slot + c))) += f / (8.0 * kPi);
      b.at(static_cast<Mask>(1u << (first_slot + a))) -= f / (8.0 * kPi);
    }
  return b;
}

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<double> padded_holonomy(std::vector<double> h, int dim) {
  if (h.empty()) h.assign(dim, 0.0);
  if (static_cast<int>(h.size()) != dim) throw DimensionMismatch("holonomy length must equal the subtorus dimension");
  return h;
}

long long gcd_ll(long long a, long long b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

void require_dim(int k) {
  if (k != 3 && k != 4 && k != 7) throw DimensionMismatch("cycle dimension must be 3, 4 or 7");
}

AffineSubtorus torus_of(const CyclePath& path, const Vec7& offset) {
  AffineSubtorus N;
  N.dim = path.dim;
  N.spanning = path.spanning;
  N.offset = offset;
  return N;
}

Mat<double> inverse_block(const Mat<double>& G, int k) {
  Mat<double> sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = G(i, j);
  Mat<double> inv = inverse(sub);
  Mat<double> out(kDim, kDim);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out(i, j) = inv(i, j);
  return out;
}

double yang_mills(const KForm& F, const Mat<double>& induced, int k, double volume) {
  Mat<double> ginv = k == kDim ? inverse(induced) : inverse_block(induced, k);
  return form_inner(form_gram(ginv, 2), F, F) * volume / (8.0 * kPi * kPi);
}

double frac_dev(double x) { return std::fabs(x - std::round(x)); }

}  // namespace

// ---------------------------------------------------------------- subtori

Mat<double> AffineSubtorus::padded() const {
  Mat<double> P(kDim, kDim);
  for (int a = 0; a < dim; ++a)
    for (int i = 0; i < kDim; ++i) P(i, a) = spanning[a][i];
  return P;
}

std::vector<Vec7> AffineSubtorus::vectors() const {
  std::vector<Vec7> out;
  for (const IntVec7& u : spanning) {
    Vec7 v{};
    for (int i = 0; i < kDim; ++i) v[i] = u[i];
    out.push_back(v);
  }
  return out;
}

void AffineSubtorus::validate() const {
  require_dim(dim);
  if (static_cast<int>(spanning.size()) != dim) throw DimensionMismatch("number of spanning vectors must equal dim");
  // gcd of the maximal minors is 1 iff the set extends to a basis of Z^7
  Mat<double> P = padded();
  long long g = 0;
  for (Mask rows : masks_of_degree(dim)) {
    auto r = indices_of(rows);
    Mat<double> sub(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) sub(i, j) = P(r[i], j);
    g = gcd_ll(g, std::llround(determinant(sub)));
  }
  if (g == 0) throw DimensionMismatch("spanning vectors are linearly dependent");
  if (g != 1) throw DimensionMismatch("spanning vectors do not extend to a lattice basis");
}

AffineSubtorus make_subtorus(const std::vector<IntVec7>& spanning, const Vec7& offset) {
  AffineSubtorus N;
  N.dim = static_cast<int>(spanning.size());
  N.spanning = spanning;
  N.offset = offset;
  N.validate();
  return N;
}

AffineSubtorus whole_torus() {
  std::vector<IntVec7> id;
  for (int i = 0; i < kDim; ++i) {
    IntVec7 e{};
    e[i] = 1;
    id.push_back(e);
  }
  return make_subtorus(id);
}

void U1Connection::validate_integral(int dim, double tol) const {
  for (int i = 0; i < curvature.size(); ++i) {
    double c = curvature[i];
    if (c == 0.0) continue;
    for (int slot : indices_of(curvature.mask(i)))
      if (slot >= dim) throw DimensionMismatch("curvature has components outside the subtorus");
    if (frac_dev(c / kTwoPi) > tol) throw NonIntegralCurvature("curvature periods are not in 2 pi Z");
  }
}

U1Connection flat_connection(int dim, std::vector<double> holonomy) {
  U1Connection A;
  A.holonomy = padded_holonomy(std::move(holonomy), dim);
  return A;
}

U1Connection integral_connection(int dim, const KForm& n, std::vector<double> holonomy) {
  U1Connection A;
  A.holonomy = padded_holonomy(std::move(holonomy), dim);
  A.curvature = kTwoPi * n;
  A.validate_integral(dim);
  return A;
}

PathKind CyclePath::kind() const {
  bool moves = false;
  for (int i = 0; i < kDim; ++i) moves = moves || end.offset[i] != start.offset[i];
  bool conn = (end.curvature - start.curvature).max_abs() != 0.0;
  for (size_t a = 0; a < start.holonomy.size(); ++a) conn = conn || end.holonomy[a] != start.holonomy[a];
  if (moves && conn) return PathKind::combined;
  return moves ? PathKind::translation : PathKind::connection;
}

Vec7 CyclePath::velocity() const {
  Vec7 v{};
  for (int i = 0; i < kDim; ++i) v[i] = end.offset[i] - start.offset[i];
  return v;
}

CyclePath path_between(const AffineSubtorus& N, const U1Connection& from, const Vec7& from_offset,
                       const U1Connection& to, bool transverse) {
  CyclePath p;
  p.spanning = N.spanning;
  p.dim = N.dim;
  p.start = CycleState{from_offset, padded_holonomy(from.holonomy, N.dim), from.curvature};
  p.end = CycleState{N.offset, padded_holonomy(to.holonomy, N.dim), to.curvature};
  p.transverse_curvature = transverse;
  return p;
}

CyclePath path_from_base(const AffineSubtorus& N, const U1Connection& A) {
  CyclePath p = path_between(N, flat_connection(N.dim), Vec7{}, A, false);
  p.start.curvature = A.curvature;
  return p;
}

Mat<double> induced_metric(const G2Structure& fs, const AffineSubtorus& N) {
  Mat<double> P = N.padded();
  return P.transpose() * fs.metric().matrix() * P;
}

double subtorus_volume(const G2Structure& fs, const AffineSubtorus& N) {
  if (N.dim == kDim) return fs.total_volume() * std::fabs(determinant(N.padded()));
  Mat<double> G = induced_metric(fs, N);
  Mat<double> sub(N.dim, N.dim);
  for (int i = 0; i < N.dim; ++i)
    for (int j = 0; j < N.dim; ++j) sub(i, j) = G(i, j);
  return std::sqrt(determinant(sub));
}

KForm restrict_form(const KForm& a, const AffineSubtorus& N) { return pullback(N.padded(), a); }

double integrate_on(const KForm& top, int dim) {
  if (top.degree() != dim) throw DegreeMismatch("integrand degree must equal the subtorus dimension");
  if (dim == kDim) return integrate_top(top);
  return top.at(low_mask(dim));
}

std::vector<Vec7> normal_frame(const G2Structure& fs, const AffineSubtorus& N) {
  const Mat<double>& g = fs.metric().matrix();
  auto ip = [&](const Vec7& a, const Vec7& b) {
    double s = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) s += a[i] * g(i, j) * b[j];
    return s;
  };
  std::vector<Vec7> basis;
  auto add = [&](Vec7 v, std::vector<Vec7>& into) {
    for (const Vec7& u : into) {
      double c = ip(u, v);
      for (int i = 0; i < kDim; ++i) v[i] -= c * u[i];
    }
    double n = std::sqrt(ip(v, v));
    if (n < 1e-9) return false;
    for (double& x : v) x /= n;
    into.push_back(v);
    return true;
  };
  for (const Vec7& u : N.vectors()) add(u, basis);
  const size_t tangent = basis.size();
  for (int i = 0; i < kDim && basis.size() < static_cast<size_t>(kDim); ++i) {
    Vec7 e{};
    e[i] = 1.0;
    add(e, basis);
  }
  return std::vector<Vec7>(basis.begin() + static_cast<long>(tangent), basis.end());
}

CalibrationReport is_associative(const AffineSubtorus& N, const G2Structure& fs, double tol) {
  if (N.dim != 3) throw DimensionMismatch("associative test needs a 3-dimensional subtorus");
  CalibrationReport r;
  std::vector<Vec7> u = N.vectors();
  r.calibration_value = evaluate(fs.phi(), u);
  r.volume = subtorus_volume(fs, N);
  r.defect = std::fabs(r.calibration_value - r.volume) / r.volume;
  for (const Vec7& X : normal_frame(fs, N)) {
    double v = evaluate(fs.psi(), {X, u[0], u[1], u[2]}) / r.volume;
    r.criterion = std::max(r.criterion, std::fabs(v));
  }
  r.result = r.defect < tol;
  r.orientation_reversed = std::fabs(r.calibration_value + r.volume) / r.volume < tol;
  return r;
}

CalibrationReport is_coassociative(const AffineSubtorus& L, const G2Structure& fs, double tol) {
  if (L.dim != 4) throw DimensionMismatch("coassociative test needs a 4-dimensional subtorus");
  CalibrationReport r;
  std::vector<Vec7> u = L.vectors();
  r.volume = subtorus_volume(fs, L);
  r.calibration_value = evaluate(fs.psi(), u);
  r.defect = std::fabs(r.calibration_value - r.volume) / r.volume;
  KForm res = restrict_form(fs.phi(), L);
  r.criterion = res.max_abs() / std::pow(r.volume, 0.75);
  r.result = r.criterion < tol;
  r.orientation_reversed = r.result && r.calibration_value < 0.0;
  return r;
}

Vec7 assoc_chi_criterion(const AffineSubtorus& N, const G2Structure& fs) {
  if (N.dim != 3) throw DimensionMismatch("associator needs a 3-dimensional subtorus");
  std::vector<Vec7> u = N.vectors();
  Vec7 lower{};
  for (int n = 0; n < kDim; ++n) {
    Vec7 e{};
    e[n] = 1.0;
    lower[n] = evaluate(fs.psi(), {e, u[0], u[1], u[2]});
  }
  Vec7 out{};
  const Mat<double>& gi = fs.inverse_metric().matrix();
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n) out[m] += gi(m, n) * lower[n];
  return out;
}

// ---------------------------------------------------------------- functionals

double swept_integral(const CyclePath& path, const G2Structure& fs, const KForm* alpha) {
  const int k = path.dim;
  require_dim(k);
  const int adeg = alpha ? alpha->degree() : 0;
  std::vector<double> dh = diff(path.end.holonomy, path.start.holonomy);
  KForm dF = path.end.curvature - path.start.curvature;

  if (k == kDim) {
    Vec7 v = path.velocity();
    for (double x : v)
      if (x != 0.0) throw DimensionMismatch("the whole torus cannot be translated");
    KForm b = gauge_velocity(dh, dF, kDim, 0);
    const int need = kDim - 1 - adeg;
    if (need < 0) return 0.0;
    double total = 0.0;
    for (int q = 0; q < 3; ++q) {
      Mixed X = mixed_zero();
      X[2] = (1.0 / kTwoPi) * (path.start.curvature + kNodes[q] * dF);
      X[3] = fs.phi();
      X[4] = fs.psi();
      Mixed E = mixed_exp(X, need);
      KForm integrand = wedge(b, E[need]);
      if (alpha) integrand = wedge(integrand, *alpha);
      total += kWeights[q] * integrate_top(integrand);
    }
    return total;
  }

  Vec7 v = path.velocity();
  Mat<double> P(kDim, kDim);
  for (int i = 0; i < kDim; ++i) P(i, 0) = v[i];
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < kDim; ++i) P(i, a + 1) = path.spanning[a][i];
  const int top = k + 1;
  const int need = top - adeg;
  if (need < 0) return 0.0;
  KForm phi_bar = pullback(P, fs.phi());
  KForm psi_bar = pullback(P, fs.psi());
  KForm alpha_bar = alpha ? pullback(P, *alpha) : KForm(0);
  if (!alpha) alpha_bar[0] = 1.0;
  KForm dt = KForm::basis(Mask{1});
  KForm dt_b = wedge(dt, gauge_velocity(dh, dF, k, 1));

  double total = 0.0;
  for (int q = 0; q < 3; ++q) {
    Mixed X = mixed_zero();
    X[2] = (1.0 / kTwoPi) * shift_slots(path.start.curvature + kNodes[q] * dF, 1) + dt_b;
    X[3] = phi_bar;
    X[4] = psi_bar;
    Mixed E = mixed_exp(X, need);
    KForm integrand = wedge(E[need], alpha_bar);
    total += kWeights[q] * integrand.at(low_mask(top));
  }
  return total;
}

namespace {

void check_path(int k, const CyclePath& path) {
  require_dim(k);
  if (path.dim != k) throw DimensionMismatch("functional degree does not match the cycle dimension");
  if (static_cast<int>(path.spanning.size()) != k) throw DimensionMismatch("spanning set has the wrong size");
  if (path.start.holonomy.size() != static_cast<size_t>(k) || path.end.holonomy.size() != static_cast<size_t>(k))
    throw DimensionMismatch("holonomy length must equal the subtorus dimension");
  if (!path.transverse_curvature) {
    U1Connection a{path.start.holonomy, path.start.curvature};
    U1Connection b{path.end.holonomy, path.end.curvature};
    a.validate_integral(k);
    b.validate_integral(k);
    if ((path.start.curvature - path.end.curvature).max_abs() > 1e-12)
      throw NonIntegralCurvature("curvature cannot vary continuously between integral classes");
  }
}

}  // namespace

double phi_functional(int k, const CyclePath& path, const G2Structure& fs) {
  check_path(k, path);
  return swept_integral(path, fs);
}

double phi_functional_closed(int k, const CyclePath& path, const G2Structure& fs) {
  check_path(k, path);
  AffineSubtorus N = torus_of(path, path.end.offset);
  std::vector<double> dh = diff(path.end.holonomy, path.start.holonomy);
  KForm dF = path.end.curvature - path.start.curvature;
  Vec7 v = path.velocity();
  const bool moves = std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });

  if (dF.max_abs() == 0.0) {
    KForm x = (1.0 / kTwoPi) * path.start.curvature;
    KForm b = one_form(dh, 0);
    switch (k) {
      case 3:
        return evaluate(fs.psi(), {v, N.vectors()[0], N.vectors()[1], N.vectors()[2]}) +
               integrate_on(wedge(b, x), 3);
      case 4: {
        KForm vphi = restrict_form(interior(v, fs.phi()), N);
        return integrate_on(wedge(x, vphi) + wedge(b, restrict_form(fs.phi(), N)), 4);
      }
      default:
        return integrate_top(wedge(b, wedge(x, fs.psi()) + (1.0 / 6.0) * wedge(x, wedge(x, x))));
    }
  }
  if (moves) throw DimensionMismatch("closed form needs constant curvature or a fixed subtorus");
  // fixed N: int_0^1 int_N b(t) ^ [exp(x_t + phi|_N + psi|_N)]_{k-1}
  KForm b = gauge_velocity(dh, dF, k, 0);
  KForm phi_n = k == kDim ? fs.phi() : restrict_form(fs.phi(), N);
  KForm psi_n = k == kDim ? fs.psi() : restrict_form(fs.psi(), N);
  double total = 0.0;
  for (int q = 0; q < 3; ++q) {
    KForm x = (1.0 / kTwoPi) * (path.start.curvature + kNodes[q] * dF);
    KForm e(k - 1);
    if (k == 3) e = x;
    if (k == 4) e = phi_n;
    if (k == 7) e = wedge(x, psi_n) + (1.0 / 6.0) * wedge(x, wedge(x, x));
    total += kWeights[q] * integrate_on(wedge(b, e), k);
  }
  return total;
}

DPhiReport d_phi(int k, const AffineSubtorus& N, const U1Connection& A, const G2Structure& fs, double critical_tol) {
  require_dim(k);
  if (N.dim != k) throw DimensionMismatch("functional degree does not match the cycle dimension");
  DPhiReport r;
  KForm x = (1.0 / kTwoPi) * A.curvature;
  std::vector<Vec7> u = N.vectors();
  if (k == 3) {
    for (const Vec7& X : normal_frame(fs, N)) r.translation.push_back(evaluate(fs.psi(), {X, u[0], u[1], u[2]}));
    for (int a = 0; a < 3; ++a) r.connection.push_back(integrate_on(wedge(KForm::basis(Mask(1u << a)), x), 3));
  } else if (k == 4) {
    KForm phi_l = restrict_form(fs.phi(), N);
    for (const Vec7& X : normal_frame(fs, N))
      r.translation.push_back(integrate_on(wedge(x, restrict_form(interior(X, fs.phi()), N)), 4));
    for (int a = 0; a < 4; ++a) r.connection.push_back(integrate_on(wedge(KForm::basis(Mask(1u << a)), phi_l), 4));
  } else {
    KForm six = ddt_residual(A.curvature, fs);
    for (int a = 0; a < kDim; ++a)
      r.connection.push_back(integrate_top(wedge(KForm::basis(Mask(1u << a)), six)) / kTwoPi);
  }
  for (size_t i = 0; i < r.translation.size(); ++i)
    if (std::fabs(r.translation[i]) > r.max_component) {
      r.max_component = std::fabs(r.translation[i]);
      r.witness = "normal translation " + std::to_string(i);
    }
  for (size_t i = 0; i < r.connection.size(); ++i)
    if (std::fabs(r.connection[i]) > r.max_component) {
      r.max_component = std::fabs(r.connection[i]);
      r.witness = "connection ds_" + std::to_string(i + 1);
    }
  r.critical = r.max_component < critical_tol;
  return r;
}

std::pair<KForm, KForm> self_dual_split(const KForm& F, const Mat<double>& induced) {
  Mat<double> G(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) G(i, j) = induced(i, j);
  Mat<double> Gi = inverse(G);
  const double vol = std::sqrt(determinant(G));
  double full[4][4] = {};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      double c = F.at(static_cast<Mask>((1u << a) | (1u << b)));
      full[a][b] = a < b ? c : -c;
    }
  double up[4][4] = {};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) up[a][b] += Gi(a, i) * Gi(b, j) * full[i][j];
  KForm star(2);
  for (int c = 0; c < 4; ++c)
    for (int d = c + 1; d < 4; ++d) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          if (a == b || a == c || a == d || b == c || b == d) continue;
          std::vector<int> p{a, b, c, d};
          int inv = 0;
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) inv += p[i] > p[j];
          s += 0.5 * up[a][b] * ((inv & 1) ? -1.0 : 1.0);
        }
      star.at(static_cast<Mask>((1u << c) | (1u << d))) = s * vol;
    }
  return {0.5 * (F + star), 0.5 * (F - star)};
}

KForm ddt_residual(const KForm& F, const G2Structure& fs, bool truncated) {
  if (F.degree() != 2) throw DegreeMismatch("curvature must be a 2-form");
  KForm r = wedge(F, fs.psi());
  if (!truncated) r += (1.0 / (24.0 * kPi * kPi)) * wedge(F, wedge(F, F));
  return r;
}

NewtonTrace ddt_newton(const KForm& seed, const G2Structure& fs, bool truncated, double tol, int max_iter) {
  NewtonTrace tr;
  KForm F = seed;
  const auto& m2 = masks_of_degree(2);
  for (int it = 0; it <= max_iter; ++it) {
    KForm r = ddt_residual(F, fs, truncated);
    double res = r.max_abs();
    if (!std::isfinite(res)) throw NewtonDiverged("DDT Newton produced a non-finite residual");
    tr.residuals.push_back(res);
    if (res < tol) {
      tr.solution = F;
      tr.iterations = it;
      tr.converged = true;
      return tr;
    }
    if (it == max_iter) break;
    KForm F2 = wedge(F, F);
    Eigen::MatrixXd J(7, 21);
    for (int c = 0; c < 21; ++c) {
      KForm e = KForm::basis(m2[c]);
      KForm col = wedge(e, fs.psi());
      if (!truncated) col += (3.0 / (24.0 * kPi * kPi)) * wedge(F2, e);
      J.col(c) = to_eigen(col);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    cod.setThreshold(1e-12);
    if (cod.rank() < 7) throw SingularLinearization("DDT linearization is rank deficient");
    Eigen::VectorXd step = cod.solve(-to_eigen(r));
    F += form_from(step, 2);
  }
  throw NewtonDiverged("DDT Newton did not reach the residual tolerance");
}

// ---------------------------------------------------------------- Abel-Jacobi

namespace {

// Representative beta with int_M beta ^ e^J = rhs(J) for every basis form e^J of degree l.
KForm solve_pairing(int l, const std::function<double(const KForm&)>& rhs) {
  KForm beta(kDim - l);
  const int s = orientation_sign();
  for (Mask J : masks_of_degree(l)) {
    Mask I = static_cast<Mask>(full_mask() & ~J);
    beta.at(I) = s * merge_sign(I, J) * rhs(KForm::basis(J));
  }
  return beta;
}

}  // namespace

AJClass abel_jacobi_nu(const CyclePath& path, const G2Structure& fs) {
  check_path(3, path);
  return AJClass{AJKind::nu, solve_pairing(4, [&](const KForm& D) { return swept_integral(path, fs, &D); })};
}

AJClass abel_jacobi_mu(const CyclePath& path, const G2Structure& fs) {
  check_path(4, path);
  return AJClass{AJKind::mu, solve_pairing(3, [&](const KForm& C) { return swept_integral(path, fs, &C); })};
}

AJClass aj_chi(const CyclePath& path, const G2Structure& fs) {
  check_path(7, path);
  // M x [0,1] carries the opposite orientation to [0,1] x M
  return AJClass{AJKind::chi, solve_pairing(4, [&](const KForm& D) { return -swept_integral(path, fs, &D); })};
}

AJClass abel_jacobi(int k, const CyclePath& path, const G2Structure& fs) {
  switch (k) {
    case 3:
      return abel_jacobi_nu(path, fs);
    case 4:
      return abel_jacobi_mu(path, fs);
    case 7:
      return aj_chi(path, fs);
    default:
      throw DimensionMismatch("Abel-Jacobi map needs k = 3, 4 or 7");
  }
}

double integral_deviation(const KForm& delta) {
  double d = 0.0;
  for (double c : delta.coeffs()) d = std::max(d, frac_dev(c));
  return d;
}

double lattice_deviation(const JacobianLattice& lattice, const G2Structure& fs, const KForm& delta) {
  Eigen::VectorXd c = lattice.coordinates(star_op(fs, delta));
  double d = 0.0;
  for (int i = 0; i < c.size(); ++i) d = std::max(d, frac_dev(c(i)));
  return d;
}

std::vector<LoopReport> generator_loops(int k, const AffineSubtorus& N, const U1Connection& A,
                                        const G2Structure& fs) {
  std::vector<LoopReport> out;
  CyclePath to_p = path_from_base(N, A);
  AJClass here = abel_jacobi(k, to_p, fs);
  const KForm& pairing_form = k == 4 ? fs.phi() : fs.psi();
  const double pairing_sign = k == 7 ? -1.0 : 1.0;

  auto record = [&](const std::string& label, const AffineSubtorus& N2, const U1Connection& A2) {
    LoopReport r;
    r.label = label;
    AJClass there = abel_jacobi(k, path_from_base(N2, A2), fs);
    KForm delta = there.value - here.value;
    r.class_deviation = integral_deviation(delta);
    CyclePath loop = path_between(N2, A, N.offset, A2);
    r.phi_value = phi_functional(k, loop, fs);
    double paired = pairing_sign * integrate_top(wedge(delta, pairing_form));
    r.period_deviation = frac_dev(r.phi_value - paired);
    out.push_back(r);
  };

  if (k != kDim)
    for (int i = 0; i < kDim; ++i) {
      AffineSubtorus N2 = N;
      N2.offset[i] += 1.0;
      record("translate e" + std::to_string(i + 1), N2, A);
    }
  for (int a = 0; a < k; ++a) {
    U1Connection A2 = A;
    A2.holonomy[a] += 1.0;
    record("holonomy s" + std::to_string(a + 1), N, A2);
  }
  return out;
}

int nu_differential_rank(const AffineSubtorus& N, const G2Structure& fs) {
  U1Connection A = flat_connection(3);
  KForm base = abel_jacobi_nu(path_from_base(N, A), fs).value;
  Eigen::MatrixXd D(35, kDim + 3);
  for (int i = 0; i < kDim; ++i) {
    AffineSubtorus N2 = N;
    N2.offset[i] += 1.0;
    D.col(i) = to_eigen(abel_jacobi_nu(path_from_base(N2, A), fs).value - base);
  }
  for (int a = 0; a < 3; ++a) {
    U1Connection A2 = A;
    A2.holonomy[a] += 1.0;
    D.col(kDim + a) = to_eigen(abel_jacobi_nu(path_from_base(N, A2), fs).value - base);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

// ---------------------------------------------------------------- isotropy

IsotropyReport isotropy_check(AJKind which, const CycleFamily& family, double h, double moduli_tol) {
  const int k = family.k;
  IsotropyReport rep;
  rep.label = family.label;
  rep.coefficient = which == AJKind::chi ? 1.0 : -0.5;

  struct Sample {
    G2Structure fs;
    KForm beta;
    double phi_value;
  };
  auto sample = [&](double a, double b) {
    FamilyPoint p = family.at(a, b);
    G2Structure fs;
    try {
      fs = metric_from_phi(p.phi);
    } catch (const Error&) {
      throw FamilyLeavesModuli("family leaves the positive cone");
    }
    CyclePath path;
    path.spanning = family.spanning;
    path.dim = k;
    path.start = CycleState{Vec7{}, std::vector<double>(k, 0.0), family.base_curvature};
    path.end = p.state;
    path.transverse_curvature = (p.state.curvature - family.base_curvature).max_abs() > 1e-12;
    AffineSubtorus N = torus_of(path, p.state.offset);
    DPhiReport crit = d_phi(k, N, U1Connection{p.state.holonomy, p.state.curvature}, fs);
    rep.max_criticality = std::max(rep.max_criticality, crit.max_component);
    if (crit.max_component > moduli_tol) throw FamilyLeavesModuli("family leaves the critical moduli");
    Sample s{fs, abel_jacobi(k, path, fs).value, swept_integral(path, fs)};
    return s;
  };

  Sample c = sample(0, 0);
  Sample ap = sample(h, 0), am = sample(-h, 0), bp = sample(0, h), bm = sample(0, -h);
  KForm phi_a = (1.0 / (2 * h)) * (family.at(h, 0).phi - family.at(-h, 0).phi);
  KForm phi_b = (1.0 / (2 * h)) * (family.at(0, h).phi - family.at(0, -h).phi);
  KForm beta_a = (1.0 / (2 * h)) * (ap.beta - am.beta);
  KForm beta_b = (1.0 / (2 * h)) * (bp.beta - bm.beta);
  double dphi_a = (ap.phi_value - am.phi_value) / (2 * h);
  double dphi_b = (bp.phi_value - bm.phi_value) / (2 * h);

  double prim_a, prim_b;
  if (which == AJKind::mu) {
    prim_a = alpha(c.fs.phi(), c.beta, JacobianVector{phi_a, beta_a});
    prim_b = alpha(c.fs.phi(), c.beta, JacobianVector{phi_b, beta_b});
    rep.symplectic_pullback = std::fabs(omega(JacobianVector{phi_a, beta_a}, JacobianVector{phi_b, beta_b}));
  } else {
    prim_a = alpha_tilde_printed(c.fs, c.beta, TildeJacobianVector{phi_a, beta_a});
    prim_b = alpha_tilde_printed(c.fs, c.beta, TildeJacobianVector{phi_b, beta_b});
    rep.symplectic_pullback =
        std::fabs(omega_tilde(c.fs, TildeJacobianVector{phi_a, beta_a}, TildeJacobianVector{phi_b, beta_b}));
  }
  rep.identity_residual =
      std::max(std::fabs(prim_a - rep.coefficient * dphi_a), std::fabs(prim_b - rep.coefficient * dphi_b));
  double nrm = dphi_a * dphi_a + dphi_b * dphi_b;
  rep.dphi_norm = std::sqrt(nrm);
  rep.measured_coefficient = nrm > 1e-16 ? (prim_a * dphi_a + prim_b * dphi_b) / nrm : 0.0;
  return rep;
}

namespace {

Mat<double> exp_generator(const Mat<double>& X, double t) {
  Eigen::MatrixXd E = (t * to_eigen(X)).exp();
  Mat<double> A(kDim, kDim);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) A(i, j) = E(i, j);
  return A;
}

IntVec7 unit_vec(int i) {
  IntVec7 e{};
  e[i] = 1;
  return e;
}

}  // namespace

std::vector<CycleFamily> isotropy_families(AJKind which) {
  const KForm phi0 = standard_phi<double>();
  std::vector<CycleFamily> out;
  auto varied = [phi0](const Mat<double>& X) {
    return [phi0, X](double a) { return (1.0 + a) * pullback(exp_generator(X, a), phi0); };
  };

  if (which == AJKind::nu) {
    CycleFamily f;
    f.k = 3;
    f.spanning = {unit_vec(0), unit_vec(1), unit_vec(2)};
    f.label = "e123: translation e4 x holonomy";
    f.at = [phi0](double a, double b) {
      FamilyPoint p{phi0, CycleState{Vec7{0.1, 0.2, 0.3, 0.25 + a, 0, 0, 0}, {0.3, 0.1 + b, 0.4}, KForm(2)}};
      return p;
    };
    out.push_back(f);
    // generator fixing e1, e2, e3
    Mat<double> X(kDim, kDim);
    X(3, 4) = 0.3;
    X(5, 6) = -0.2;
    X(0, 4) = 0.5;
    X(1, 6) = 0.4;
    X(3, 3) = 0.1;
    auto phi_of = varied(X);
    f.label = "e123: phi scaling and stabilizer flow x normal translation";
    f.at = [phi_of](double a, double b) {
      FamilyPoint p{phi_of(b), CycleState{Vec7{0.1 + 0.3 * a, 0.2, 0.3, 0.4 + a, 0.5, 0.6 - b, 0.7},
                                          {0.2 + a, 0.1 - 2 * b, 0.3}, KForm(2)}};
      return p;
    };
    out.push_back(f);
  } else if (which == AJKind::mu) {
    // calibrated orientation of e4..e7 and a self-dual integral curvature on it
    CycleFamily f;
    f.k = 4;
    f.spanning = {unit_vec(4), unit_vec(3), unit_vec(5), unit_vec(6)};
    KForm sd = KForm::basis(Mask{0x3}) + KForm::basis(Mask{0xc});
    f.base_curvature = kTwoPi * sd;
    f.label = "e4567: translation x curvature coefficient (transverse)";
    f.at = [phi0, sd](double a, double b) {
      FamilyPoint p{phi0, CycleState{Vec7{0.1 + a, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, {0.2, 0.1, 0.3, 0.5},
                                     kTwoPi * (1.0 + b) * sd}};
      return p;
    };
    out.push_back(f);
    Mat<double> X(kDim, kDim);
    X(3, 0) = 0.3;
    X(4, 1) = -0.2;
    X(0, 2) = 0.5;
    X(0, 0) = 0.1;
    auto phi_of = varied(X);
    f.label = "e4567: phi scaling and stabilizer flow x translation and holonomy";
    f.at = [phi_of, sd](double a, double b) {
      FamilyPoint p{phi_of(b), CycleState{Vec7{0.1 + a, 0.2 - b, 0.3 + b, 0.4, 0.5, 0.6, 0.7 + a},
                                          {0.2 + a, 0.1, 0.3 - b, 0.5 + a}, kTwoPi * sd}};
      return p;
    };
    out.push_back(f);
  } else {
    CycleFamily f;
    f.k = 7;
    for (int i = 0; i < kDim; ++i) f.spanning.push_back(unit_vec(i));
    KForm n = KForm::basis(std::string("23")) - KForm::basis(std::string("45"));
    f.base_curvature = kTwoPi * n;
    f.label = "DT curvature: two flat shifts";
    f.at = [phi0, n](double a, double b) {
      FamilyPoint p{phi0, CycleState{Vec7{}, {0.1 + a, 0.2, 0.3 - b, 0.4, 0.5, 0.6 + a, 0.7}, kTwoPi * n}};
      return p;
    };
    out.push_back(f);
    // generator whose transpose fixes e^2..e^5
    Mat<double> X(kDim, kDim);
    X(0, 0) = 0.2;
    X(0, 6) = 0.3;
    X(5, 6) = 0.4;
    X(6, 5) = -0.4;
    X(6, 0) = 0.1;
    auto phi_of = varied(X);
    f.label = "DT curvature: phi flow x flat shift";
    f.at = [phi_of, n](double a, double b) {
      FamilyPoint p{phi_of(a), CycleState{Vec7{}, {0.1, 0.2 + b, 0.3, 0.4 - b, 0.5, 0.6, 0.7}, kTwoPi * n}};
      return p;
    };
    out.push_back(f);
    f.label = "DT curvature: phi scaling x curvature coefficient (transverse)";
    f.at = [phi0, n](double a, double b) {
      FamilyPoint p{(1.0 + a) * phi0, CycleState{Vec7{}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}, kTwoPi * (1.0 + b) * n}};
      return p;
    };
    out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------- minimizers

PsiReport psi_functional(int k, const AffineSubtorus& N, const U1Connection& A, const G2Structure& fs) {
  require_dim(k);
  if (N.dim != k) throw DimensionMismatch("functional degree does not match the cycle dimension");
  PsiReport r;
  r.volume = subtorus_volume(fs, N);
  KForm x = (1.0 / kTwoPi) * A.curvature;
  Mat<double> G = k == kDim ? fs.metric().matrix() : induced_metric(fs, N);
  r.yang_mills = yang_mills(A.curvature, G, k, r.volume);
  if (k == 3) {
    r.psi = integrate_on(restrict_form(fs.phi(), N), 3);
    r.size = r.volume + r.yang_mills;
  } else if (k == 4) {
    r.psi = integrate_on(restrict_form(fs.psi(), N) + 0.5 * wedge(x, x), 4);
    r.size = r.volume + r.yang_mills;
  } else {
    r.psi = integrate_top(wedge(fs.phi(), fs.psi()) + 0.5 * wedge(wedge(x, x), fs.phi()));
    r.size = 7.0 * r.volume + r.yang_mills;
  }
  r.gap = r.size - r.psi;
  return r;
}

// ---------------------------------------------------------------- witnesses

Mat<double> random_unimodular(std::mt19937_64& rng, int moves) {
  Mat<double> A = Mat<double>::identity(kDim);
  std::uniform_int_distribution<int> idx(0, kDim - 1), sgn(0, 1);
  for (int m = 0; m < moves; ++m) {
    int i = idx(rng), j = idx(rng);
    if (i == j) continue;
    double c = sgn(rng) ? 1.0 : -1.0;
    for (int r = 0; r < kDim; ++r) A(r, j) += c * A(r, i);
  }
  return A;
}

Mat<double> integer_inverse(const Mat<double>& A) {
  Mat<double> inv = inverse(A);
  for (int r = 0; r < kDim; ++r)
    for (int c = 0; c < kDim; ++c) inv(r, c) = std::round(inv(r, c));
  return inv;
}

namespace {

IntVec7 apply_int(const Mat<double>& M, const IntVec7& u) {
  IntVec7 v{};
  for (int i = 0; i < kDim; ++i) {
    double s = 0.0;
    for (int j = 0; j < kDim; ++j) s += M(i, j) * u[j];
    v[i] = static_cast<int>(std::lround(s));
  }
  return v;
}

IntVec7 unit(int i) {
  IntVec7 e{};
  e[i] = 1;
  return e;
}

// Ordered index list of a coordinate plane with the calibration-positive orientation.
std::vector<int> oriented(std::vector<int> idx, double value) {
  if (value < 0) std::swap(idx[0], idx[1]);
  return idx;
}

struct Plane {
  std::vector<int> idx;
  bool calibrated;
};

std::vector<Plane> coordinate_planes(int k) {
  KForm phi0 = standard_phi<double>();
  G2Structure fs0 = metric_from_phi(phi0);
  const KForm& cal = k == 3 ? phi0 : fs0.psi();
  std::vector<Plane> out;
  for (Mask m : masks_of_degree(k)) {
    double c = cal.at(m);
    out.push_back(Plane{oriented(indices_of(m), c == 0.0 ? 1.0 : c), c != 0.0});
  }
  return out;
}

Witness transformed(const std::string& label, int k, const std::vector<int>& plane, const Mat<double>& A,
                    const KForm& n, bool critical, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Mat<double> Ainv = integer_inverse(A);
  Witness w;
  w.label = label;
  w.k = k;
  w.phi = pullback(A, standard_phi<double>());
  std::vector<IntVec7> span;
  for (int i : plane) span.push_back(apply_int(Ainv, unit(i)));
  Vec7 off{};
  for (double& o : off) o = U(rng);
  w.N = make_subtorus(span, off);
  std::vector<double> hol(k);
  for (double& x : hol) x = U(rng);
  w.A = integral_connection(k, n, hol);
  w.expected_critical = critical;
  return w;
}

// Integer 2-forms in subtorus coordinates.
KForm s2(int a, int b) { return KForm::basis(static_cast<Mask>((1u << a) | (1u << b))); }

}  // namespace

std::vector<Witness> witness_library(int k, std::mt19937_64& rng, int positives, int negatives) {
  require_dim(k);
  std::vector<Witness> out;
  std::uniform_int_distribution<int> small(-2, 2);

  if (k == 3 || k == 4) {
    std::vector<Plane> planes = coordinate_planes(k);
    std::vector<Plane> good, bad;
    for (const Plane& p : planes) (p.calibrated ? good : bad).push_back(p);
    // self-dual and anti-self-dual integer forms in the calibrated orientation of a unit 4-plane
    std::vector<KForm> sd{s2(0, 1) + s2(2, 3), s2(0, 2) - s2(1, 3), s2(0, 3) + s2(1, 2)};
    std::vector<KForm> asd{s2(0, 1) - s2(2, 3), s2(0, 2) + s2(1, 3), s2(0, 3) - s2(1, 2), s2(0, 1)};
    for (int i = 0; i < positives; ++i) {
      const Plane& p = good[i % good.size()];
      KForm n(2);
      if (k == 4 && i % 3 != 0) n = static_cast<double>(1 + i % 2) * sd[i % 3];
      std::string label = (k == 3 ? "assoc " : "coassoc ") + std::to_string(i);
      out.push_back(transformed(label, k, p.idx, random_unimodular(rng), n, true, rng));
    }
    for (int i = 0; i < negatives; ++i) {
      KForm n(2);
      if (i % 2 == 0) {
        const Plane& p = bad[(i * 5) % bad.size()];
        out.push_back(transformed("uncalibrated " + std::to_string(i), k, p.idx, random_unimodular(rng), n, false,
                                  rng));
      } else {
        const Plane& p = good[i % good.size()];
        if (k == 3) {
          n = static_cast<double>(1 + std::abs(small(rng))) * s2(i % 3, (i + 1) % 3);
        } else {
          n = asd[i % asd.size()];
        }
        out.push_back(transformed("curved " + std::to_string(i), k, p.idx, random_unimodular(rng), n, false, rng));
      }
    }
    return out;
  }

  // k = 7: integral Donaldson-Thomas curvatures from differences of e_i _| phi0 terms
  KForm phi0 = standard_phi<double>();
  std::vector<KForm> dt_forms{KForm(2)};
  std::vector<KForm> single_terms;
  for (int i = 0; i < kDim; ++i) {
    KForm t = interior_basis(i, phi0);
    std::vector<KForm> terms;
    for (int j = 0; j < t.size(); ++j)
      if (t[j] != 0.0) terms.push_back(t[j] * KForm::basis(t.mask(j)));
    for (size_t a = 0; a < terms.size(); ++a) {
      single_terms.push_back(terms[a]);
      for (size_t b = a + 1; b < terms.size(); ++b) dt_forms.push_back(terms[a] - terms[b]);
    }
  }
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto make = [&](const std::string& label, const KForm& n, bool critical) {
    Mat<double> A = random_unimodular(rng);
    Witness w;
    w.label = label;
    w.k = 7;
    w.phi = pullback(A, phi0);
    w.N = whole_torus();
    std::vector<double> hol(7);
    for (double& x : hol) x = U(rng);
    w.A = integral_connection(7, pullback(A, n), hol);
    w.expected_critical = critical;
    return w;
  };
  for (int i = 0; i < positives; ++i) out.push_back(make("dt " + std::to_string(i), dt_forms[i % dt_forms.size()], true));
  for (int i = 0; i < negatives; ++i) {
    KForm n = single_terms[i % single_terms.size()];
    if (i % 3 == 1) n += single_terms[(i + 4) % single_terms.size()];
    out.push_back(make("non-dt " + std::to_string(i), n, false));
  }
  return out;
}

}  // namespace g2
