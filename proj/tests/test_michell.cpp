#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vmass/integrand.hpp"
#include "vmass/michell.hpp"

using namespace vmass;

namespace {

GroundStructure two_bar_structure() {
    return make_ground_structure(
        2, {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}},
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

LoadCase two_bar_loads() {
    LoadCase lc;
    lc.loads[1] = {1.0, 0.0, 0.0};
    lc.loads[2] = {0.0, 1.0, 0.0};
    lc.loads[0] = {-1.0, -1.0, 0.0};
    return lc;
}

// Independent optimum: enumerate all supports of full rank, solve the
// square equilibrium system on each, and keep the best feasible objective.
// This walks every vertex of { q : B q = f }, so the minimum of the
// piecewise-linear objective is among the candidates.
struct EnumResult {
    bool feasible = false;
    double objective = 0.0;
};

EnumResult enumerate_optimum(const GroundStructure& gs, const LoadCase& lc) {
    const int dim = gs.dim;
    const int rows_full = static_cast<int>(gs.nodes.size()) * dim;
    const int m = static_cast<int>(gs.bars.size());
    std::vector<std::vector<double>> A(static_cast<std::size_t>(rows_full),
                                       std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> f(static_cast<std::size_t>(rows_full), 0.0);
    for (int i = 0; i < m; ++i) {
        const Bar& bar = gs.bars[static_cast<std::size_t>(i)];
        for (int c = 0; c < dim; ++c) {
            A[static_cast<std::size_t>(bar.b * dim + c)][static_cast<std::size_t>(i)] += bar.dir[static_cast<std::size_t>(c)];
            A[static_cast<std::size_t>(bar.a * dim + c)][static_cast<std::size_t>(i)] -= bar.dir[static_cast<std::size_t>(c)];
        }
    }
    for (const auto& [id, load] : lc.loads)
        for (int c = 0; c < dim; ++c) f[static_cast<std::size_t>(id * dim + c)] = load[static_cast<std::size_t>(c)];

    // row-reduce [A | f] by Gaussian elimination to find the rank
    std::vector<std::vector<double>> R(A.size());
    for (std::size_t r = 0; r < A.size(); ++r) {
        R[r] = A[r];
        R[r].push_back(f[r]);
    }
    int rank = 0;
    const int cols = m + 1;
    for (int c = 0; c < m && rank < static_cast<int>(R.size()); ++c) {
        int piv = -1;
        double best = 1e-10;
        for (int r = rank; r < static_cast<int>(R.size()); ++r)
            if (std::abs(R[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) > best) {
                best = std::abs(R[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
                piv = r;
            }
        if (piv < 0) continue;
        std::swap(R[static_cast<std::size_t>(rank)], R[static_cast<std::size_t>(piv)]);
        for (int r = 0; r < static_cast<int>(R.size()); ++r) {
            if (r == rank) continue;
            double fac = R[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] /
                         R[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)];
            if (fac == 0.0) continue;
            for (int cc = 0; cc < cols; ++cc)
                R[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc)] -=
                    fac * R[static_cast<std::size_t>(rank)][static_cast<std::size_t>(cc)];
        }
        ++rank;
    }
    // inconsistent system: a zero row with nonzero rhs
    for (int r = rank; r < static_cast<int>(R.size()); ++r)
        if (std::abs(R[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)]) > 1e-8)
            return {};

    const int k = std::min(rank, m);
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;

    EnumResult best;
    auto try_support = [&](const std::vector<int>& support) {
        // solve the reduced square system on the support columns
        std::vector<std::vector<double>> M(static_cast<std::size_t>(rank),
                                           std::vector<double>(support.size() + 1, 0.0));
        for (int r = 0; r < rank; ++r) {
            for (std::size_t cc = 0; cc < support.size(); ++cc)
                M[static_cast<std::size_t>(r)][cc] =
                    R[static_cast<std::size_t>(r)][static_cast<std::size_t>(support[cc])];
            M[static_cast<std::size_t>(r)][support.size()] =
                R[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
        }
        std::vector<int> where(support.size(), -1);
        int rr = 0;
        for (std::size_t c = 0; c < support.size() && rr < rank; ++c) {
            int piv = -1;
            double pbest = 1e-9;
            for (int r = rr; r < rank; ++r)
                if (std::abs(M[static_cast<std::size_t>(r)][c]) > pbest) {
                    pbest = std::abs(M[static_cast<std::size_t>(r)][c]);
                    piv = r;
                }
            if (piv < 0) return;
            std::swap(M[static_cast<std::size_t>(rr)], M[static_cast<std::size_t>(piv)]);
            for (int r = 0; r < rank; ++r) {
                if (r == rr) continue;
                double fac = M[static_cast<std::size_t>(r)][c] / M[static_cast<std::size_t>(rr)][c];
                if (fac == 0.0) continue;
                for (std::size_t cc = 0; cc <= support.size(); ++cc)
                    M[static_cast<std::size_t>(r)][cc] -= fac * M[static_cast<std::size_t>(rr)][cc];
            }
            where[c] = rr;
            ++rr;
        }
        if (rr < rank) return;  // singular support
        std::vector<double> q(static_cast<std::size_t>(m), 0.0);
        for (std::size_t c = 0; c < support.size(); ++c)
            q[static_cast<std::size_t>(support[c])] =
                M[static_cast<std::size_t>(where[c])][support.size()] /
                M[static_cast<std::size_t>(where[c])][c];
        // verify against the full system
        for (std::size_t r = 0; r < A.size(); ++r) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += A[r][static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(i)];
            if (std::abs(s - f[r]) > 1e-8) return;
        }
        double obj = 0.0;
        for (int i = 0; i < m; ++i)
            obj += gs.bars[static_cast<std::size_t>(i)].length * std::abs(q[static_cast<std::size_t>(i)]);
        if (!best.feasible || obj < best.objective) best = {true, obj};
    };

    // iterate over all k-subsets of the m columns
    for (;;) {
        try_support(idx);
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
    return best;
}

}  // namespace

TEST_CASE("grid generator node and bar counts") {
    auto g22 = build_grid_ground_structure(2, 2, 0, 1.0, 1.0);
    CHECK(g22.nodes.size() == 4);
    CHECK(g22.bars.size() == 4);  // square edges only

    auto g22d = build_grid_ground_structure(2, 2, 0, 1.0, std::sqrt(2.0));
    CHECK(g22d.bars.size() == 6);  // edges plus both diagonals

    auto g33 = build_grid_ground_structure(3, 3, 0, 1.0, 1.0);
    CHECK(g33.nodes.size() == 9);
    CHECK(g33.bars.size() == 12);

    // radius 2 would admit length-2 bars, but they run over the middle
    // node and must be dropped as covered
    auto g33w = build_grid_ground_structure(3, 3, 0, 1.0, 2.0);
    for (const auto& bar : g33w.bars) CHECK(bar.length < 1.9);

    // 3D grid: the unit cube has 12 edges
    auto g222 = build_grid_ground_structure(2, 2, 2, 1.0, 1.0);
    CHECK(g222.dim == 3);
    CHECK(g222.nodes.size() == 8);
    CHECK(g222.bars.size() == 12);

    CHECK_THROWS_AS(build_grid_ground_structure(1, 2, 0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid_ground_structure(2, 2, 0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("balance checks") {
    auto gs = two_bar_structure();
    CHECK(check_balanced(two_bar_loads(), gs).ok);

    LoadCase unbalanced;
    unbalanced.loads[0] = {1.0, 0.0, 0.0};
    auto rep = check_balanced(unbalanced, gs);
    CHECK_FALSE(rep.ok);
    CHECK(rep.force_residual == doctest::Approx(1.0));

    // pure torque pair: forces cancel, moments add to 2
    GroundStructure pair = make_ground_structure(2, {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}},
                                                 {{0, 1}});
    LoadCase torque;
    torque.loads[0] = {0.0, 1.0, 0.0};
    torque.loads[1] = {0.0, -1.0, 0.0};
    auto trep = check_balanced(torque, pair);
    CHECK_FALSE(trep.ok);
    CHECK(trep.force_residual == doctest::Approx(0.0));
    CHECK(trep.moment_residual == doctest::Approx(2.0));
}

TEST_CASE("single bar instance") {
    auto gs = make_ground_structure(2, {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, {{0, 1}});
    LoadCase lc;
    lc.loads[1] = {1.0, 0.0, 0.0};
    lc.loads[0] = {-1.0, 0.0, 0.0};
    auto sol = solve_michell_lp(gs, lc);
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.q[0] == doctest::Approx(1.0).epsilon(1e-12));

    auto shape = extract_limit_shape(gs, sol);
    CHECK(shape.kappa == doctest::Approx(1.0));
    CHECK(shape.weights[0] == doctest::Approx(1.0));
    CHECK(shape.compliance == doctest::Approx(0.5));
    CHECK(verify_entropy_condition(shape) <= 1e-12);
}

TEST_CASE("two-bar instance reproduces the closed-form optimum") {
    auto gs = two_bar_structure();
    auto sol = solve_michell_lp(gs, two_bar_loads());
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.equilibrium_residual <= 1e-9);
    CHECK(sol.dual_gap <= 1e-8);
    CHECK(sol.dual_violation <= 1e-8);

    auto shape = extract_limit_shape(gs, sol);
    CHECK(shape.compliance == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        bool axis_bar = gs.bars[i].a == 0 && (gs.bars[i].b == 1 || gs.bars[i].b == 2);
        CHECK(shape.weights[i] == doctest::Approx(axis_bar ? 0.5 : 0.0).epsilon(1e-9));
    }
    double wsum = 0.0;
    for (double w : shape.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(verify_entropy_condition(shape) <= 1e-8 * shape.kappa * shape.kappa);

    // rho_polar of every loaded bar stress equals kappa
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        if (shape.weights[i] == 0.0) continue;
        CHECK(rho_polar(shape.sigma_star(i)).value ==
              doctest::Approx(shape.kappa).epsilon(1e-10));
    }

    auto oracle = enumerate_optimum(gs, two_bar_loads());
    REQUIRE(oracle.feasible);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-10));
}

TEST_CASE("load scaling: kappa linear, weights fixed, compliance quadratic") {
    auto gs = two_bar_structure();
    auto base = extract_limit_shape(gs, solve_michell_lp(gs, two_bar_loads()));
    for (double t : {0.5, 2.0, 7.25}) {
        LoadCase scaled;
        for (const auto& [id, f] : two_bar_loads().loads)
            scaled.loads[id] = {t * f[0], t * f[1], 0.0};
        auto shape = extract_limit_shape(gs, solve_michell_lp(gs, scaled));
        CHECK(shape.kappa == doctest::Approx(t * base.kappa).epsilon(1e-10));
        CHECK(shape.compliance == doctest::Approx(t * t * base.compliance).epsilon(1e-10));
        for (std::size_t i = 0; i < shape.weights.size(); ++i)
            CHECK(shape.weights[i] == doctest::Approx(base.weights[i]).epsilon(1e-9));
    }
}

TEST_CASE("refining the ground structure never increases kappa") {
    // nested structures on the two-bar geometry: each one adds bars
    auto lc = two_bar_loads();
    std::vector<std::vector<std::array<int, 2>>> families = {
        {{0, 1}, {0, 2}},
        {{0, 1}, {0, 2}, {1, 3}, {2, 3}},
        {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 3}},
        {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {0, 3}, {1, 2}}};
    double prev = 1e300;
    for (const auto& bars : families) {
        auto gs = make_ground_structure(
            2, {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}}, bars);
        auto sol = solve_michell_lp(gs, lc);
        REQUIRE(sol.lp_status == LpStatus::optimal);
        CHECK(sol.objective <= prev + 1e-10);
        prev = sol.objective;
    }
}

TEST_CASE("cantilever on the diagonal grid matches support enumeration") {
    auto gs = build_grid_ground_structure(3, 3, 0, 1.0, 1.5);
    CHECK(gs.bars.size() == 20);

    // tip load at the middle of the right edge, balancing reactions on the
    // pinned left edge
    LoadCase lc;
    lc.loads[5] = {0.0, -1.0, 0.0};        // node (2, 1)
    lc.loads[0] = {1.0, 1.0 / 3.0, 0.0};   // node (0, 0)
    lc.loads[3] = {0.0, 1.0 / 3.0, 0.0};   // node (0, 1)
    lc.loads[6] = {-1.0, 1.0 / 3.0, 0.0};  // node (0, 2)
    REQUIRE(check_balanced(lc, gs).ok);

    auto sol = solve_michell_lp(gs, lc);
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.dual_gap <= 1e-8);
    CHECK(sol.dual_violation <= 1e-8);
    CHECK(sol.equilibrium_residual <= 1e-9);

    auto oracle = enumerate_optimum(gs, lc);
    REQUIRE(oracle.feasible);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-9));

    auto shape = extract_limit_shape(gs, sol);
    CHECK(verify_entropy_condition(shape) <= 1e-8 * shape.kappa * shape.kappa);
}

TEST_CASE("axial-only grid carries aligned ties") {
    auto gs = build_grid_ground_structure(3, 3, 0, 1.0, 1.0);
    LoadCase lc;
    lc.loads[5] = {-1.0, 0.0, 0.0};  // push the middle-right node inward
    lc.loads[3] = {1.0, 0.0, 0.0};   // reaction at the middle-left node
    REQUIRE(check_balanced(lc, gs).ok);
    auto sol = solve_michell_lp(gs, lc);
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));

    auto oracle = enumerate_optimum(gs, lc);
    REQUIRE(oracle.feasible);
    CHECK(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-10));
}

TEST_CASE("shear on the axial-only grid is infeasible with a certificate") {
    auto gs = build_grid_ground_structure(3, 3, 0, 1.0, 1.0);
    // balanced, but needs panel shear the edge-only grid cannot carry
    LoadCase lc;
    lc.loads[5] = {0.0, -1.0, 0.0};
    lc.loads[0] = {1.0, 1.0 / 3.0, 0.0};
    lc.loads[3] = {0.0, 1.0 / 3.0, 0.0};
    lc.loads[6] = {-1.0, 1.0 / 3.0, 0.0};
    REQUIRE(check_balanced(lc, gs).ok);

    auto sol = solve_michell_lp(gs, lc);
    CHECK(sol.lp_status == LpStatus::infeasible);
    REQUIRE_FALSE(sol.farkas.empty());

    // Farkas direction: y.f > 0 while y is orthogonal to every bar column
    double yf = 0.0;
    for (const auto& [id, f] : lc.loads)
        for (int c = 0; c < 2; ++c)
            yf += f[static_cast<std::size_t>(c)] * sol.farkas[static_cast<std::size_t>(id * 2 + c)];
    CHECK(yf > 1e-10);
    for (const auto& bar : gs.bars) {
        double along = 0.0;
        for (int c = 0; c < 2; ++c)
            along += bar.dir[static_cast<std::size_t>(c)] *
                     (sol.farkas[static_cast<std::size_t>(bar.b * 2 + c)] -
                      sol.farkas[static_cast<std::size_t>(bar.a * 2 + c)]);
        CHECK(std::abs(along) <= 1e-7 * std::max(1.0, yf));
    }

    auto oracle = enumerate_optimum(gs, lc);
    CHECK_FALSE(oracle.feasible);
}

TEST_CASE("3D single diagonal bar") {
    auto gs = make_ground_structure(3, {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}, {{0, 1}});
    double s3 = 1.0 / std::sqrt(3.0);
    LoadCase lc;
    lc.loads[1] = {s3, s3, s3};
    lc.loads[0] = {-s3, -s3, -s3};
    REQUIRE(check_balanced(lc, gs).ok);
    auto sol = solve_michell_lp(gs, lc);
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    auto shape = extract_limit_shape(gs, sol);
    CHECK(rho_polar(shape.sigma_star(0)).value == doctest::Approx(shape.kappa).epsilon(1e-12));
}

TEST_CASE("hand-built suboptimal splits reproduce the compliance family") {
    // mass split (d, 1-d) across the two axis bars with the rescaled
    // stresses: compliance 1/(2d) + 1/(2(1-d)), minimal at the even split
    double best = 1e300, best_delta = 0.0;
    for (int i = 1; i <= 9; ++i) {
        double d = 0.1 * i;
        std::vector<double> w = {d, 1.0 - d};
        std::vector<SymMat> sigma = {SymMat::diag(2, {1.0 / d, 0.0, 0.0}),
                                     SymMat::diag(2, {0.0, 1.0 / (1.0 - d), 0.0})};
        double comp = decomposition_compliance(w, sigma);
        CHECK(comp == doctest::Approx(0.5 / d + 0.5 / (1.0 - d)).epsilon(1e-12));
        if (comp < best) { best = comp; best_delta = d; }
        if (i != 5) CHECK(decomposition_entropy_residual(w, sigma) > 1e-3);
    }
    CHECK(best_delta == doctest::Approx(0.5));
    CHECK(best == doctest::Approx(2.0).epsilon(1e-12));

    // delta = 0.25 evaluates to 8/3
    std::vector<double> w = {0.25, 0.75};
    std::vector<SymMat> sigma = {SymMat::diag(2, {4.0, 0.0, 0.0}),
                                 SymMat::diag(2, {0.0, 4.0 / 3.0, 0.0})};
    CHECK(decomposition_compliance(w, sigma) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("extract_limit_shape rejects zero loads and non-optimal input") {
    auto gs = two_bar_structure();
    TrussSolution empty;
    CHECK_THROWS_AS(extract_limit_shape(gs, empty), std::invalid_argument);

    LoadCase zero;
    zero.loads[0] = {0.0, 0.0, 0.0};
    auto sol = solve_michell_lp(gs, zero);
    REQUIRE(sol.lp_status == LpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(0.0));
    CHECK_THROWS_AS(extract_limit_shape(gs, sol), std::invalid_argument);
}
