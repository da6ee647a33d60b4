#pragma once

//
// The convex-analysis integrands: the quadratic pair j / j*, the wave-cone
// restricted conjugate jbar with its gauge rho, the polar gauge rho_polar
// (the one-homogeneous mass cost of a stress direction) and jbar* = (1/2)
// rho_polar^2, plus the quadratic-form families q_alpha and Q_xi and a
// brute-force oracle for the polar.
//

#include <cstdint>
#include <functional>
#include <string>

#include "vmass/tensor.hpp"

namespace vmass {

enum class Branch { none, thin, fat };

std::string branch_name(Branch b);

// nonnegative energy density plus the piecewise case that produced it;
// branch is `none` in 2D where the formulas have a single case
struct IntegrandValue {
    double value = 0.0;
    Branch branch = Branch::none;
};

double j(const SymMat& xi);        // (1/2)|xi|^2
double j_star(const SymMat& tau);  // (1/2)|tau|^2

// (1/2)(|xi|^2 - xi_1^2), xi_1 the smallest eigenvalue in absolute value
double j_bar(const SymMat& xi);

// gauge of { j_bar <= 1/2 }: sqrt(xi_2^2 + ... + xi_n^2)
double rho(const SymMat& xi);

// polar gauge: n=2: |t1|+|t2|; n=3: sqrt((|t1|+|t2|)^2+t3^2) on the thin
// branch |t1|+|t2| <= |t3|, else (|t1|+|t2|+|t3|)/sqrt(2)
IntegrandValue rho_polar(const SymMat& tau);

double j_bar_star(const SymMat& tau);  // (1/2) rho_polar^2

// 2D only: (1/2)|tau|^2 + alpha det(tau), alpha in [-1, 1]
double q_alpha(const SymMat& tau, double alpha);

// (1/2)|tau|^2 - (1/2)(xi:tau)^2; requires rho(xi) <= 1 (within 1e-12),
// which is what makes the form convex along the wave cone
double Q_xi_form(const SymMat& xi, const SymMat& tau);

// Lower-bound maximization of xi:tau over { rho(xi) <= 1 } after
// diagonalizing tau; grid search over the feasible set followed by a
// projected-gradient polish. grid_n >= 64.
double rho_polar_bruteforce(const SymMat& tau, int grid_n);

struct ConvexityReport {
    double min_value = 0.0;
    int samples = 0;
    bool pass = false;  // min_value >= -1e-10
};

// Evaluates a quadratic form on `count` wave-cone samples and reports the
// minimum; for quadratic forms nonnegativity on the cone is equivalent to
// convexity along wave-cone lines.
ConvexityReport lambda_div_convexity_check(
    const std::function<double(const SymMat&)>& qform, int dim,
    std::uint64_t seed, int count);

}  // namespace vmass
