#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "g2/algebra.hpp"

namespace g2 {

inline constexpr int kModuliDim = 35;

// Basis eta_0 = phi_center, eta_1..7 of type 7, eta_8..34 of type 27 (g-orthonormal).
struct FlatChart {
  G2Structure center;
  std::vector<KForm> basis;

  static constexpr int kFirstSeven = 1;
  static constexpr int kFirstTwentySeven = 8;

  KForm form_at(const std::vector<double>& x) const;
  std::vector<double> coords_of(const KForm& phi) const;
  std::vector<int> sector_1_27() const;
  std::vector<int> sector_7() const;
};

FlatChart make_chart(const KForm& phi_center);

struct ModuliPoint {
  std::vector<double> coords;
  G2Structure fs;
};

ModuliPoint make_point(const FlatChart& chart, const std::vector<double>& coords);
ModuliPoint chart_center(const FlatChart& chart);
ModuliPoint point_at(const FlatChart& chart, const KForm& phi);

struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

Signature signature(const Eigen::MatrixXd& sym, double tol = 1e-9);

struct HessianData {
  std::vector<double> gradient;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd eigenvalues;
  Signature signature;
};

// f = 3 vol = 3/7 int phi ^ *phi on the unit-covolume torus.
double superpotential(const ModuliPoint& p);
double superpotential_wedge(const G2Structure& fs);
double superpotential_of(const KForm& phi);

std::vector<double> gradient_f(const FlatChart& chart, const ModuliPoint& p);
std::vector<double> gradient_fd(const FlatChart& chart, const ModuliPoint& p, double h = 1e-5);

// Three computations of the Hessian metric.
Eigen::MatrixXd hessian_projection(const FlatChart& chart, const ModuliPoint& p);
Eigen::MatrixXd hessian_star(const FlatChart& chart, const ModuliPoint& p);
Eigen::MatrixXd hessian_fd(const FlatChart& chart, const ModuliPoint& p, double h = 1e-3, bool richardson = true);

HessianData hessian_G(const FlatChart& chart, const ModuliPoint& p, double tol = 1e-9);

// G(a, b) = int a ^ star_op(b) at the given structure.
double G_pair(const G2Structure& fs, const KForm& a, const KForm& b);

// Directional derivatives of a scalar function of 3-forms by central stencils.
using FormFunction = std::function<double(const KForm&)>;
double directional_second(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b, double h,
                          bool richardson);
double directional_third(const FormFunction& fn, const KForm& phi, const KForm& a, const KForm& b,
                         const KForm& c, double h, bool richardson);

double yukawa(const G2Structure& fs, const KForm& a, const KForm& b, const KForm& c, double tol = 1e-9);
double yukawa_sym(const G2Structure& fs, const Sym2Tensor& h1, const Sym2Tensor& h2, const Sym2Tensor& h3);

struct ThirdDerivativeReport {
  double finite_difference = 0.0;
  double closed_form = 0.0;  // 2 Y
  double relative_error = 0.0;  // |fd - 2Y| / max(|2Y|, 1)
};

ThirdDerivativeReport check_third_derivative(const ModuliPoint& p, const KForm& a, const KForm& b, const KForm& c,
                                             double h = 1e-2, bool richardson = true);

// g-orthonormal basis of type-27 3-forms at a structure.
std::vector<KForm> type27_basis(const G2Structure& fs);
std::vector<KForm> type7_basis(const G2Structure& fs);

struct LogPotentialReport {
  Eigen::MatrixXd fd_hessian;    // FD Hessian of -log f on (phi, type-27 basis at p)
  Eigen::MatrixXd closed_form;   // (1/f) << eta_i, eta_j >>
  double max_error = 0.0;
  double min_eigenvalue = 0.0;
  double f00 = 0.0;              // F along phi twice
  double max_f0i = 0.0;          // |F(phi, eta_i)| over type-27 directions
  double pi7_discrepancy = 0.0;  // measured only: max |F_ij - <<eta_i,eta_j>>/f| over type-7 pairs
};

LogPotentialReport log_potential_checks(const ModuliPoint& p, double h = 1e-3);

struct TraceCubicReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

TraceCubicReport check_trace_cubic_lemma(const G2Structure& fs, const Sym2Tensor& h1, const Sym2Tensor& h2,
                                         const Sym2Tensor& h3);

Eigen::MatrixXd to_eigen(const Mat<double>& m);
Eigen::VectorXd to_eigen(const KForm& f);
KForm form_from(const Eigen::VectorXd& v, int degree);

}  // namespace g2
