#pragma once

#include <array>
#include <functional>

#include "g2/moduli.hpp"

namespace g2 {

struct JacobianVector {
  KForm eta{3};
  KForm theta{4};
};

struct TildeJacobianVector {
  KForm eta{3};
  KForm mu{3};
};

// Integral of a top form over the unit torus in the orientation of the reference structure.
double integrate_top(const KForm& top);

double omega(const JacobianVector& a, const JacobianVector& b);
double alpha(const KForm& phi, const KForm& D, const JacobianVector& v);
double gJ(const G2Structure& fs, const JacobianVector& a, const JacobianVector& b);
JacobianVector Jop(const G2Structure& fs, const JacobianVector& v);

double omega_tilde(const G2Structure& fs, const TildeJacobianVector& a, const TildeJacobianVector& b);
double gJ_tilde(const G2Structure& fs, const TildeJacobianVector& a, const TildeJacobianVector& b);
TildeJacobianVector Jop_tilde(const TildeJacobianVector& v);

// 1/2 int phi ^ *mu - 1/2 int C ^ *eta
double alpha_tilde_printed(const G2Structure& fs, const KForm& C, const TildeJacobianVector& v);
// 1/2 int mu ^ psi - 1/2 int C ^ *eta
double alpha_tilde(const G2Structure& fs, const KForm& C, const TildeJacobianVector& v);

// Matrices in the basis (e^{ijk}, e^{ijkl}) or (e^{ijk}, e^{ijk}).
Eigen::MatrixXd omega_matrix();
Eigen::MatrixXd gJ_matrix(const G2Structure& fs);
Eigen::MatrixXd J_matrix(const G2Structure& fs);
Eigen::MatrixXd omega_tilde_matrix(const G2Structure& fs);
Eigen::MatrixXd gJ_tilde_matrix(const G2Structure& fs);
Eigen::MatrixXd J_tilde_matrix();

// Points of the 70-dimensional total spaces and constant tangent vectors there.
struct JacobianPoint {
  KForm phi{3};
  KForm fiber{3};  // D (degree 4) or C (degree 3)
};

struct PrimitiveCheck {
  double d_alpha = 0.0;  // X(alpha(Y)) - Y(alpha(X)) by central differences
  double omega = 0.0;
  double ratio = 0.0;    // d_alpha / omega
  double error = 0.0;    // |d_alpha - omega|
};

PrimitiveCheck check_primitive(const KForm& phi, const KForm& D, const JacobianVector& X, const JacobianVector& Y,
                               double h = 1e-4);
// printed selects alpha_tilde_printed instead of alpha_tilde.
PrimitiveCheck check_primitive_tilde(const KForm& phi, const KForm& C, const TildeJacobianVector& X,
                                     const TildeJacobianVector& Y, bool printed, double h = 1e-4);

struct LegendreData {
  std::vector<double> dual_coords;  // x_k = df/dx^k
  double f = 0.0;
  double fhat = 0.0;                // x_k x^k - f
};

LegendreData legendre(const FlatChart& chart, const ModuliPoint& p);

// Flat coordinates whose gradient equals the given dual coordinates, by Newton from a guess.
std::vector<double> inverse_legendre(const FlatChart& chart, const std::vector<double>& dual,
                                     const std::vector<double>& guess, double tol = 1e-13, int max_iter = 30);

double fhat_at_dual(const FlatChart& chart, const std::vector<double>& dual, const std::vector<double>& guess);

struct LegendreHessianReport {
  Eigen::MatrixXd fd_hessian;  // second differences of fhat in dual coordinates
  Eigen::MatrixXd inverse;     // inverse of f_ij
  double relative_error = 0.0;
};

LegendreHessianReport check_legendre_hessian(const FlatChart& chart, const ModuliPoint& p, double h = 1e-3);

struct LagrangianReport {
  double omega_value = 0.0;     // omega((eta1, *eta1), (eta2, *eta2))
  double tangency_error = 0.0;  // FD of psi along eta1 against *eta1
};

LagrangianReport check_lagrangian_graph(const ModuliPoint& p, const KForm& eta1, const KForm& eta2);

struct ClosednessReport {
  double max_asymmetry = 0.0;  // max |d_l G_ij - d_i G_lj|
  double max_fd_residual = 0.0;  // max |f_ijl - f_lij| from FD of f
  int triples = 0;
};

// FD of G_ij along eta_l at p, for the given index triples.
double dG(const FlatChart& chart, const ModuliPoint& p, int i, int j, int l, double h = 1e-4);
ClosednessReport closedness_and_integrability(const FlatChart& chart, const ModuliPoint& p,
                                              const std::vector<std::array<int, 3>>& triples, double h = 1e-4);

struct JacobianLattice {
  std::vector<KForm> generators;
  double covolume = 0.0;
  Eigen::MatrixXd generator_matrix;  // columns in the e^{ijkl} basis

  Eigen::VectorXd coordinates(const KForm& theta) const;
  KForm reduce(const KForm& theta) const;
};

JacobianLattice jacobian_lattice(const G2Structure& fs);

struct CubicFormReport {
  double finite_difference = 0.0;
  double closed_form = 0.0;  // 2 Y
  double relative_error = 0.0;
};

CubicFormReport cubic_form_check(const ModuliPoint& p, const KForm& eta1, const KForm& eta2, const KForm& eta3,
                                 double h = 1e-3);

}  // namespace g2
