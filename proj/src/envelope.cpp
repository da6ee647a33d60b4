#include "vmass/envelope.hpp"

#include <cmath>
#include <stdexcept>

#include "vmass/integrand.hpp"

namespace vmass {

KSParams::KSParams(double a, double b) : alpha(a), beta(b) {
    if (!(std::isfinite(a) && std::isfinite(b)) || a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("KSParams: alpha and beta must be finite and positive");
}

double KSParams::rho_hat_scale() const { return std::sqrt(alpha / beta); }

KSParams KSParams::from_eps(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("KSParams: eps must be positive");
    return KSParams(eps / 2.0, 1.0 / (2.0 * eps));
}

KSParams KSParams::lagrange(double eps, double mass, double kappa) {
    if (!(eps > 0.0) || !(mass > 0.0 && mass < 1.0) || !(kappa > 0.0))
        throw std::invalid_argument("KSParams: need eps > 0, mass in (0,1), kappa > 0");
    return KSParams(eps / 2.0, kappa * kappa / (2.0 * mass * eps));
}

double ks_h(const SymMat& tau, const KSParams& p) {
    // exact zero test on the entries; squaring tiny entries would underflow
    if (tau.max_abs() == 0.0) return 0.0;
    return p.alpha * tau.norm2() + p.beta;
}

double q_div_h_general(const SymMat& tau, const KSParams& p) {
    double rho_hat = p.rho_hat_scale() * rho_polar(tau).value;
    double quad = p.alpha * tau.norm2();
    if (rho_hat >= 1.0) return quad + p.beta;
    return quad + p.beta * rho_hat * (2.0 - rho_hat);
}

double q_div_h_explicit(const SymMat& tau, const KSParams& p) {
    Spectrum s = eigen_ordered(tau);
    const double t1 = std::abs(s.eigvals[0]);
    const double t2 = std::abs(s.eigvals[1]);
    const double rp = rho_polar(tau).value;
    const double threshold = std::sqrt(p.beta / p.alpha);
    const double quad = p.alpha * tau.norm2();
    if (rp >= threshold) return quad + p.beta;
    const double two_sab = 2.0 * std::sqrt(p.alpha * p.beta);
    if (tau.dim() == 2) return two_sab * rp - 2.0 * p.alpha * t1 * t2;
    const double t3 = std::abs(s.eigvals[2]);
    if (t1 + t2 <= t3) return two_sab * rp - 2.0 * p.alpha * t1 * t2;
    return two_sab * rp +
           p.alpha * (0.5 * tau.norm2() - t1 * t2 - t1 * t3 - t2 * t3);
}

double q_div_h_eps(const SymMat& tau, double eps) {
    return q_div_h_general(tau, KSParams::from_eps(eps));
}

}  // namespace vmass
