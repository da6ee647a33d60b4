#pragma once

//
// Two-well integrands alpha |tau|^2 + beta (for tau != 0) and their
// divergence-quasiconvex envelopes, in the general rho_hat form and in the
// explicit 2D/3D piecewise forms, plus the eps-parametrized family whose
// envelope tends to the polar gauge pointwise.
//

#include "vmass/tensor.hpp"

namespace vmass {

struct KSParams {
    double alpha = 1.0;  // quadratic weight, > 0
    double beta = 1.0;   // mass penalty, > 0

    KSParams(double a, double b);

    double rho_hat_scale() const;  // sqrt(alpha / beta)

    // alpha = eps/2, beta = 1/(2 eps)
    static KSParams from_eps(double eps);
    // alpha = eps/2, beta = kappa^2 / (2 m eps)
    static KSParams lagrange(double eps, double mass, double kappa);
};

// the two-well integrand itself; tau counts as zero only when |tau| == 0
double ks_h(const SymMat& tau, const KSParams& p);

// envelope via rho_hat = sqrt(alpha/beta) rho_polar(tau):
//   alpha|tau|^2 + beta                         if rho_hat >= 1
//   alpha|tau|^2 + beta rho_hat (2 - rho_hat)   otherwise
double q_div_h_general(const SymMat& tau, const KSParams& p);

// the same envelope through the explicit eigenvalue formulas, with the
// 3D thin/fat subsplit written out
double q_div_h_explicit(const SymMat& tau, const KSParams& p);

// envelope of the eps-family; for eps rho_polar(tau) <= 1 this equals
// (eps/2)|tau|^2 + rho_polar(tau) - (eps/2) rho_polar(tau)^2
double q_div_h_eps(const SymMat& tau, double eps);

}  // namespace vmass
