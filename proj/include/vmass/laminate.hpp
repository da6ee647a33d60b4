#pragma once

//
// Periodic slab laminates on the unit square/cube carrying rank-one
// stresses. Each slab family occupies a fixed fraction of one coordinate
// axis, so every region measure is an exact polynomial in (gamma, eps) and
// energies, divergence pairings and compensated-compactness values reduce
// to finite region sums.
//

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vmass/tensor.hpp"

namespace vmass {

enum class LaminateCase { two_d, three_d_case1, three_d_case2 };

std::string laminate_case_name(LaminateCase c);

// slabs ( i/k, (i + gamma eps)/k ) x (full cross-section), i = 0..k-1
struct SlabFamily {
    int axis = 0;
    double gamma = 0.0;  // volume fraction parameter; occupied axis fraction is gamma*eps
    double eps = 0.0;
    int periods = 1;

    double fraction() const { return gamma * eps; }
    bool contains(double coord) const;  // slab membership of one coordinate
};

// one diagonal stress entry: `amplitude` on the union of the listed slab
// families, zero elsewhere
struct StressEntry {
    double amplitude = 0.0;
    std::vector<int> carrier_families;
};

struct LaminateConstruction {
    int dim = 2;
    LaminateCase case_tag = LaminateCase::two_d;
    std::array<double, 3> alphas{};
    double eps = 0.0;
    int periods = 1;
    std::vector<SlabFamily> families;
    std::array<StressEntry, 3> entries;

    // diagonal stress on the region selected by a family-membership bitmask
    SymMat sigma_for_pattern(unsigned mask) const;
    bool pattern_active(int entry, unsigned mask) const;
    SymMat sigma_at(const std::array<double, 3>& x) const;  // pointwise, for oracles
    SymMat target_sigma() const { return SymMat::diag(dim, alphas); }
};

// Case selection: 2D for two alphas; with three alphas Case I iff
// |a3| >= |a1| + |a2|, Case II otherwise. Requires |a1| <= ... <= |an| and
// eps in (0,1); when a1 == 0 the 2D/Case-I fraction falls back to 1 - eps.
LaminateConstruction build_construction(const std::vector<double>& alphas,
                                        double eps, int periods);

struct RegionMeasureTable {
    int n_families = 0;
    // exact measure of every membership pattern (bit i = inside family i)
    std::array<double, 8> region{};

    double family_measure(int i) const;              // L(D^i)
    double pair_measure(int i, int j) const;         // L(D^i cap D^j)
    double triple_measure() const;                   // n_families == 3 only
    double union_measure() const;                    // L(D_eps)
    double union_pair(int i, int j) const;           // L(D^i cup D^j)
};

RegionMeasureTable measure_table(const LaminateConstruction& c);

// exact rescaled energy (1/eps) * int (1/2)|sigma_eps|^2 over the unit cell
double energy_eps(const LaminateConstruction& c);

// max over bump-weighted polynomial test fields (component degree <=
// test_fn_degree) of | int sigma_eps mu_eps : grad(v) |, evaluated by
// per-axis slab integration with quad_n Gauss nodes per interval
double weak_divergence_residual(const LaminateConstruction& c,
                                int test_fn_degree, int quad_n);

// swaps the stress carriers onto their own axes, which breaks the
// divergence-free structure; negative control for the residual check
LaminateConstruction corrupt_carriers(const LaminateConstruction& c);

// exact value of int Q_xi(sqrt(eps) sigma_eps mu_eps) dx; requires
// rho(xi) <= 1 and xi.dim == c.dim
double cc_check(const LaminateConstruction& c, const SymMat& xi);

struct ConvergenceRow {
    double eps = 0.0;
    int periods = 1;
    double energy = 0.0;
    double error = 0.0;  // energy - jbar*(diag(alpha)), signed
    double bound = 0.0;  // predicted |error| for the built construction
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double limit = 0.0;       // jbar*(diag(alpha))
    double slope = 0.0;       // log-log least squares fit of |error| vs eps
    bool slope_defined = false;  // false when the errors vanish (2D)
};

using KRule = std::function<int(double)>;

// default k(eps) = ceil(eps^{-1/2}), which satisfies eps/k -> 0
int default_k_rule(double eps);

ConvergenceStudy convergence_study(const std::vector<double>& alphas,
                                   const std::vector<double>& eps_list,
                                   const KRule& k_rule = default_k_rule);

}  // namespace vmass
