#pragma once

#include <random>

#include "g2/structure.hpp"

namespace g2 {

struct DerivativeCheck {
  KForm finite_difference;
  KForm closed_form;
  double max_abs_error = 0.0;
  double relative_error = 0.0;
};

struct VariationCheck {
  double inverse_metric_error = 0.0;  // max |FD(g^-1) + 2 h^ab|
  double volume_rate = 0.0;           // FD of vol coefficient divided by vol
  double trace = 0.0;                 // Tr_g h
  double volume_error = 0.0;          // |volume_rate - trace|
};

// Central difference of t -> *_{phi+t eta}(phi+t eta) against star_op(eta).
// The step is h * |phi| / |eta|; richardson combines steps h and h/2.
DerivativeCheck check_star_derivative(const G2Structure& fs, const KForm& eta, double h = 1e-4,
                                      bool richardson = false);

// Degree-4 analogue: derivative of the 3-form determined by psi + t theta.
DerivativeCheck check_star_derivative4(const G2Structure& fs, const KForm& theta, double h = 1e-4,
                                       bool richardson = false);

// Positive 3-form whose dual 4-form is psi_target, by Newton from a nearby guess.
KForm phi_from_psi(const KForm& psi_target, const KForm& guess, double tol = 1e-14, int max_iter = 50);

VariationCheck check_metric_volume_variation(const G2Structure& fs, const Sym2Tensor& h, double step = 1e-4);

// max deviation between metric_from_phi(A^* phi) and A^* metric_from_phi(phi)
double equivariance_residual(const KForm& phi, const Mat<double>& A);

// Structure at phi + t eta, with cone exits reported as StepLeavesPositiveCone.
G2Structure structure_along(const KForm& phi, const KForm& eta, double t);

double relative_step(const G2Structure& fs, const KForm& direction, double h);

// Sampling helpers with explicit generators.
KForm random_form(std::mt19937_64& rng, int degree, double scale = 1.0);
Sym2Tensor random_sym2(std::mt19937_64& rng, double scale = 1.0);
Sym2Tensor traceless_part(const G2Structure& fs, const Sym2Tensor& h);
KForm random_positive_phi(std::mt19937_64& rng, double spread = 0.2);
Mat<double> random_matrix(std::mt19937_64& rng, double spread = 0.3);

}  // namespace g2
