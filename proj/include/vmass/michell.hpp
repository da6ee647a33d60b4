#pragma once

//
// Discrete ground-structure solver for the mass-minimal truss problem
// min sum_i L_i |q_i| subject to node equilibrium, and extraction of the
// limit quantities kappa, the bar mass weights, the per-bar stresses
// kappa sign(q) e (x) e and the compliance kappa^2 / 2.
//

#include <array>
#include <map>
#include <string>
#include <vector>

#include "vmass/simplex.hpp"
#include "vmass/tensor.hpp"

namespace vmass {

using Vec3 = std::array<double, 3>;

struct Node {
    int id = 0;
    Vec3 pos{};
};

struct Bar {
    int a = 0, b = 0;
    double length = 0.0;
    Vec3 dir{};  // unit vector from a to b
};

struct GroundStructure {
    int dim = 2;
    std::vector<Node> nodes;
    std::vector<Bar> bars;
};

// Node ids must be dense 0..N-1; bar endpoints distinct and valid.
GroundStructure make_ground_structure(int dim, const std::vector<Vec3>& positions,
                                      const std::vector<std::array<int, 2>>& bars);

// Regular grid of nodes with bars between all pairs within the radius;
// bars exactly covered by shorter collinear bars through intermediate grid
// nodes are dropped. nz == 0 requests a 2D grid.
GroundStructure build_grid_ground_structure(int nx, int ny, int nz, double spacing,
                                            double connectivity_radius);

struct LoadCase {
    std::map<int, Vec3> loads;  // node id -> force
};

struct BalanceReport {
    double force_residual = 0.0;
    double moment_residual = 0.0;
    double scale = 1.0;
    bool ok = false;
};

// residuals of total force and total moment against the rigid motions
BalanceReport check_balanced(const LoadCase& lc, const GroundStructure& gs);

struct TrussSolution {
    LpStatus lp_status = LpStatus::infeasible;
    std::vector<double> q;  // axial force per bar, tension positive
    double objective = 0.0;
    // dual certificate: virtual displacement per node (dim entries each,
    // zeros on rows dropped as redundant)
    std::vector<double> virtual_displacement;
    double dual_gap = 0.0;            // |objective - f . u|
    double dual_violation = 0.0;      // max over bars of (|e.(u_b - u_a)| - L)+
    double equilibrium_residual = 0.0;  // |B q - f|_inf over all rows
    std::vector<double> farkas;       // infeasibility certificate, per row
    int iterations = 0;
    int dropped_rows = 0;
};

// Splits q into q+ - q- and runs the two-phase simplex; redundant
// equilibrium rows (the rigid-motion kernel) are removed up front by
// rank-revealing elimination. Throws on unbalanced loads referencing
// unknown nodes.
TrussSolution solve_michell_lp(const GroundStructure& gs, const LoadCase& lc);

struct LimitShape {
    int dim = 2;
    double kappa = 0.0;
    std::vector<Bar> bars;
    std::vector<double> q;
    std::vector<double> weights;  // w_i = |q_i| L_i / kappa, sums to 1
    std::vector<double> sign;     // sign(q_i), +1 on zero-force bars
    double compliance = 0.0;      // kappa^2 / 2

    SymMat sigma_star(std::size_t bar) const;  // kappa sign e (x) e
};

// Requires an optimal solution with kappa > 0; zero loads have no shape.
LimitShape extract_limit_shape(const GroundStructure& gs, const TrussSolution& sol);

// | sum w rho_polar(sigma)^2 - (sum w rho_polar(sigma))^2 | for a general
// weighted stress decomposition, and the same for an extracted shape
double decomposition_entropy_residual(const std::vector<double>& w,
                                      const std::vector<SymMat>& sigma);
double verify_entropy_condition(const LimitShape& shape);

// compliance of a decomposition, sum_i w_i jbar*(sigma_i)
double decomposition_compliance(const std::vector<double>& w,
                                const std::vector<SymMat>& sigma);

}  // namespace vmass
