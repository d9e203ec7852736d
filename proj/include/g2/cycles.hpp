#pragma once

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "g2/jacobian.hpp"

namespace g2 {

using IntVec7 = std::array<int, kDim>;

// Affine subtorus o + span_Z(u_1..u_k) of T^7, oriented by the ordered spanning set.
// Dimension 7 means M itself with its own orientation.
struct AffineSubtorus {
  int dim = 3;
  std::vector<IntVec7> spanning;
  Vec7 offset{};

  // 7x7 matrix with the spanning vectors as leading columns.
  Mat<double> padded() const;
  std::vector<Vec7> vectors() const;
  void validate() const;
};

AffineSubtorus make_subtorus(const std::vector<IntVec7>& spanning, const Vec7& offset = {});
AffineSubtorus whole_torus();

// U(1) connection on a subtorus: holonomy h (flat part, mod 1) and constant real curvature F
// written in the subtorus coordinates s_1..s_k (slots 0..k-1). F_A = -i F.
struct U1Connection {
  std::vector<double> holonomy;
  KForm curvature{2};
  bool c2_negative = false;

  void validate_integral(int dim, double tol = 1e-9) const;
};

U1Connection flat_connection(int dim, std::vector<double> holonomy = {});
// F = 2 pi n for an integer 2-form n on the subtorus.
U1Connection integral_connection(int dim, const KForm& n, std::vector<double> holonomy = {});

struct CycleState {
  Vec7 offset{};
  std::vector<double> holonomy;
  KForm curvature{2};
};

enum class PathKind { translation, connection, combined };

// Straight-line path between two states on subtori sharing a spanning set.
struct CyclePath {
  std::vector<IntVec7> spanning;
  int dim = 3;
  CycleState start;
  CycleState end;
  // Curvature may vary along the path; such directions leave the configuration space.
  bool transverse_curvature = false;

  PathKind kind() const;
  Vec7 velocity() const;
};

CyclePath path_between(const AffineSubtorus& N, const U1Connection& from, const Vec7& from_offset,
                       const U1Connection& to, bool transverse = false);
// From the base point (zero offset, zero holonomy, same curvature) to (N, A).
CyclePath path_from_base(const AffineSubtorus& N, const U1Connection& A);

// Induced metric on the subtorus coordinates and its volume.
Mat<double> induced_metric(const G2Structure& fs, const AffineSubtorus& N);
double subtorus_volume(const G2Structure& fs, const AffineSubtorus& N);
// Restriction of a form on M to the subtorus coordinates.
KForm restrict_form(const KForm& a, const AffineSubtorus& N);
// Integral over the oriented subtorus of a top-degree form in subtorus coordinates.
double integrate_on(const KForm& top, int dim);

// g-orthonormal basis of the normal space.
std::vector<Vec7> normal_frame(const G2Structure& fs, const AffineSubtorus& N);

struct CalibrationReport {
  bool result = false;
  double calibration_value = 0.0;  // phi(u..) or psi(u..)
  double volume = 0.0;
  double defect = 0.0;             // |value - volume| / volume
  double criterion = 0.0;          // max |(X _| psi)|_N| (associative) or max |phi|_L| (coassociative)
  bool orientation_reversed = false;
};

CalibrationReport is_associative(const AffineSubtorus& N, const G2Structure& fs, double tol = 1e-10);
CalibrationReport is_coassociative(const AffineSubtorus& L, const G2Structure& fs, double tol = 1e-10);

// Vector-valued 3-form obtained by raising an index of psi, evaluated on the spanning vectors.
Vec7 assoc_chi_criterion(const AffineSubtorus& N, const G2Structure& fs);

// Swept Chern-character integral over the chain traced by the path, optionally wedged with pi^* alpha.
double swept_integral(const CyclePath& path, const G2Structure& fs, const KForm* alpha = nullptr);

double phi_functional(int k, const CyclePath& path, const G2Structure& fs);
// Closed form by translation and curvature terms; needs constant curvature or a pure connection path.
double phi_functional_closed(int k, const CyclePath& path, const G2Structure& fs);

struct DPhiReport {
  std::vector<double> translation;  // along a g-orthonormal normal frame
  std::vector<double> connection;   // along ds_a
  double max_component = 0.0;
  std::string witness;              // direction of the largest component
  bool critical = false;
};

DPhiReport d_phi(int k, const AffineSubtorus& N, const U1Connection& A, const G2Structure& fs,
                 double critical_tol = 1e-10);

// Self-dual and anti-self-dual parts of F on a 4-dimensional subtorus (orientation of the spanning set).
std::pair<KForm, KForm> self_dual_split(const KForm& F, const Mat<double>& induced);

KForm ddt_residual(const KForm& F, const G2Structure& fs, bool truncated = false);

struct NewtonTrace {
  KForm solution{2};
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

NewtonTrace ddt_newton(const KForm& seed, const G2Structure& fs, bool truncated = false, double tol = 1e-10,
                       int max_iter = 25);

enum class AJKind { nu, mu, chi };

struct AJClass {
  AJKind kind = AJKind::nu;
  KForm value{3};  // degree 3 for nu and chi, 4 for mu
};

AJClass abel_jacobi(int k, const CyclePath& path, const G2Structure& fs);
AJClass abel_jacobi_nu(const CyclePath& path, const G2Structure& fs);
AJClass abel_jacobi_mu(const CyclePath& path, const G2Structure& fs);
AJClass aj_chi(const CyclePath& path, const G2Structure& fs);

// Largest distance of the coefficients from integers.
double integral_deviation(const KForm& delta);
// Largest distance of the lattice coordinates of *delta from integers (nu, chi classes).
double lattice_deviation(const JacobianLattice& lattice, const G2Structure& fs, const KForm& delta);

struct LoopReport {
  std::string label;
  double class_deviation = 0.0;   // integral deviation of the AJ class change
  double phi_value = 0.0;         // Phi over the closed loop
  double period_deviation = 0.0;  // |value - sum n_I P_I| with n_I integral
};

// Lattice-translation and large-gauge loops at a point.
std::vector<LoopReport> generator_loops(int k, const AffineSubtorus& N, const U1Connection& A,
                                        const G2Structure& fs);

// Two-parameter families inside the critical moduli.
struct FamilyPoint {
  KForm phi{3};
  CycleState state;
};

struct CycleFamily {
  std::string label;
  int k = 3;
  std::vector<IntVec7> spanning;
  KForm base_curvature{2};
  std::function<FamilyPoint(double, double)> at;
};

struct IsotropyReport {
  std::string label;
  double coefficient = 0.0;        // printed constant c in (pullback primitive) = c dPhi
  double identity_residual = 0.0;  // max |pullback primitive - c dPhi|
  double measured_coefficient = 0.0;  // least-squares ratio, 0 when dPhi vanishes
  double dphi_norm = 0.0;
  double symplectic_pullback = 0.0;
  double max_criticality = 0.0;    // largest d_phi component sampled along the family
};

// Reference families inside the critical moduli, varying phi, offset, holonomy and (transversally) curvature.
std::vector<CycleFamily> isotropy_families(AJKind which);

IsotropyReport isotropy_check(AJKind which, const CycleFamily& family, double h = 1e-4,
                              double moduli_tol = 1e-8);

struct PsiReport {
  double psi = 0.0;
  double volume = 0.0;
  double yang_mills = 0.0;
  double size = 0.0;  // volume (7 vol for k = 7) plus Yang-Mills
  double gap = 0.0;   // size - psi
};

PsiReport psi_functional(int k, const AffineSubtorus& N, const U1Connection& A, const G2Structure& fs);

// Witness libraries of critical and non-critical cycles.
struct Witness {
  std::string label;
  int k = 3;
  KForm phi{3};
  AffineSubtorus N;
  U1Connection A;
  bool expected_critical = false;
};

std::vector<Witness> witness_library(int k, std::mt19937_64& rng, int positives = 20, int negatives = 20);

Mat<double> random_unimodular(std::mt19937_64& rng, int moves = 4);
Mat<double> integer_inverse(const Mat<double>& A);

// Measured rank of the differential of the nu class over translations and holonomy shifts.
int nu_differential_rank(const AffineSubtorus& N, const G2Structure& fs);

}  // namespace g2
