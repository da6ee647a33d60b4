#include "vmass/michell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vmass/integrand.hpp"

namespace vmass {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

void validate(const GroundStructure& gs) {
    const int n = static_cast<int>(gs.nodes.size());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& node : gs.nodes) {
        if (node.id < 0 || node.id >= n || seen[static_cast<std::size_t>(node.id)])
            throw std::invalid_argument("ground structure: node ids must be dense 0..N-1");
        seen[static_cast<std::size_t>(node.id)] = true;
    }
    for (const auto& bar : gs.bars) {
        if (bar.a == bar.b || bar.a < 0 || bar.b < 0 || bar.a >= n || bar.b >= n)
            throw std::invalid_argument("ground structure: invalid bar endpoints");
        if (!(bar.length > 0.0)) throw std::invalid_argument("ground structure: zero-length bar");
    }
}

}  // namespace

GroundStructure make_ground_structure(int dim, const std::vector<Vec3>& positions,
                                      const std::vector<std::array<int, 2>>& bars) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("ground structure: dim must be 2 or 3");
    GroundStructure gs;
    gs.dim = dim;
    for (std::size_t i = 0; i < positions.size(); ++i)
        gs.nodes.push_back({static_cast<int>(i), positions[i]});
    for (const auto& ab : bars) {
        Bar bar;
        bar.a = std::min(ab[0], ab[1]);
        bar.b = std::max(ab[0], ab[1]);
        if (bar.a < 0 || bar.b >= static_cast<int>(positions.size()) || bar.a == bar.b)
            throw std::invalid_argument("ground structure: invalid bar endpoints");
        Vec3 d = sub(positions[static_cast<std::size_t>(bar.b)],
                     positions[static_cast<std::size_t>(bar.a)]);
        bar.length = norm(d);
        if (!(bar.length > 0.0)) throw std::invalid_argument("ground structure: coincident nodes");
        bar.dir = {d[0] / bar.length, d[1] / bar.length, d[2] / bar.length};
        gs.bars.push_back(bar);
    }
    std::sort(gs.bars.begin(), gs.bars.end(), [](const Bar& x, const Bar& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    validate(gs);
    return gs;
}

GroundStructure build_grid_ground_structure(int nx, int ny, int nz, double spacing,
                                            double connectivity_radius) {
    const int dim = nz > 0 ? 3 : 2;
    if (nx < 2 || ny < 2 || (dim == 3 && nz < 2) || !(spacing > 0.0))
        throw std::invalid_argument("build_grid_ground_structure: degenerate grid");
    if (connectivity_radius < spacing)
        throw std::invalid_argument("build_grid_ground_structure: radius below spacing");

    std::vector<Vec3> pos;
    const int nzz = dim == 3 ? nz : 1;
    for (int k = 0; k < nzz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                pos.push_back({i * spacing, j * spacing, dim == 3 ? k * spacing : 0.0});

    const double r2 = connectivity_radius * connectivity_radius * (1.0 + 1e-12);
    std::vector<std::array<int, 2>> bars;
    const int n = static_cast<int>(pos.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            Vec3 d = sub(pos[static_cast<std::size_t>(b)], pos[static_cast<std::size_t>(a)]);
            double len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if (len2 > r2) continue;
            // drop bars running exactly over an intermediate grid node;
            // two shorter collinear bars already cover them
            bool covered = false;
            for (int m = 0; m < n && !covered; ++m) {
                if (m == a || m == b) continue;
                Vec3 am = sub(pos[static_cast<std::size_t>(m)], pos[static_cast<std::size_t>(a)]);
                double t = (am[0] * d[0] + am[1] * d[1] + am[2] * d[2]) / len2;
                if (t <= 1e-9 || t >= 1.0 - 1e-9) continue;
                Vec3 c = cross(am, d);
                if (norm(c) * norm(c) < 1e-18 * len2) covered = true;
            }
            if (!covered) bars.push_back({a, b});
        }
    }
    return make_ground_structure(dim, pos, bars);
}

BalanceReport check_balanced(const LoadCase& lc, const GroundStructure& gs) {
    BalanceReport rep;
    Vec3 force{};
    Vec3 moment{};
    double scale = 0.0;
    for (const auto& [id, f] : lc.loads) {
        if (id < 0 || id >= static_cast<int>(gs.nodes.size()))
            throw std::invalid_argument("check_balanced: load on unknown node");
        const Vec3& x = gs.nodes[static_cast<std::size_t>(id)].pos;
        for (int c = 0; c < 3; ++c) force[static_cast<std::size_t>(c)] += f[static_cast<std::size_t>(c)];
        Vec3 m = cross(x, f);
        for (int c = 0; c < 3; ++c) moment[static_cast<std::size_t>(c)] += m[static_cast<std::size_t>(c)];
        scale = std::max(scale, norm(f));
    }
    rep.force_residual = norm(force);
    rep.moment_residual = norm(moment);  // the z component alone in 2D
    rep.scale = std::max(1.0, scale);
    rep.ok = rep.force_residual <= 1e-10 * rep.scale && rep.moment_residual <= 1e-10 * rep.scale;
    return rep;
}

namespace {

// equilibrium matrix: row (node, coord), column bar; +e on b, -e on a
std::vector<std::vector<double>> equilibrium_matrix(const GroundStructure& gs) {
    const int dim = gs.dim;
    const std::size_t rows = gs.nodes.size() * static_cast<std::size_t>(dim);
    std::vector<std::vector<double>> A(rows, std::vector<double>(gs.bars.size(), 0.0));
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        const Bar& bar = gs.bars[i];
        for (int c = 0; c < dim; ++c) {
            A[static_cast<std::size_t>(bar.b * dim + c)][i] += bar.dir[static_cast<std::size_t>(c)];
            A[static_cast<std::size_t>(bar.a * dim + c)][i] -= bar.dir[static_cast<std::size_t>(c)];
        }
    }
    return A;
}

std::vector<double> load_vector(const GroundStructure& gs, const LoadCase& lc) {
    const int dim = gs.dim;
    std::vector<double> f(gs.nodes.size() * static_cast<std::size_t>(dim), 0.0);
    for (const auto& [id, load] : lc.loads) {
        if (id < 0 || id >= static_cast<int>(gs.nodes.size()))
            throw std::invalid_argument("solve_michell_lp: load on unknown node");
        for (int c = 0; c < dim; ++c)
            f[static_cast<std::size_t>(id * dim + c)] = load[static_cast<std::size_t>(c)];
    }
    return f;
}

// greedy selection of independent rows by Gram-Schmidt with a pivot
// threshold; the rigid-motion kernel makes dim*(dim+1)/2 rows dependent
std::vector<int> independent_rows(const std::vector<std::vector<double>>& A, double tol) {
    std::vector<int> kept;
    std::vector<std::vector<double>> basis;
    for (std::size_t r = 0; r < A.size(); ++r) {
        std::vector<double> v = A[r];
        double orig = 0.0;
        for (double x : v) orig += x * x;
        if (orig == 0.0) continue;
        for (const auto& u : basis) {
            double dot = 0.0, uu = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                dot += v[j] * u[j];
                uu += u[j] * u[j];
            }
            double fac = dot / uu;
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= fac * u[j];
        }
        double rem = 0.0;
        for (double x : v) rem += x * x;
        if (std::sqrt(rem) > tol * std::sqrt(orig)) {
            kept.push_back(static_cast<int>(r));
            basis.push_back(v);
        }
    }
    return kept;
}

// A dropped row is a combination of the kept ones; if the load disagrees
// with that combination, y = e_r - sum c_i e_kept_i certifies that no
// equilibrium exists: y.A = 0 while y.f != 0. Coefficients come from the
// normal equations over the kept rows.
std::vector<double> inconsistency_certificate(const std::vector<std::vector<double>>& A_full,
                                              const std::vector<double>& f_full,
                                              const std::vector<int>& kept) {
    const std::size_t k = kept.size();
    const std::size_t m = A_full.empty() ? 0 : A_full[0].size();
    std::vector<std::vector<double>> gram(k, std::vector<double>(k + 1, 0.0));
    auto dot_rows = [&](int a, int b) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            s += A_full[static_cast<std::size_t>(a)][j] * A_full[static_cast<std::size_t>(b)][j];
        return s;
    };

    double best_gap = 0.0;
    std::vector<double> best_y;
    std::vector<bool> is_kept(A_full.size(), false);
    for (int r : kept) is_kept[static_cast<std::size_t>(r)] = true;

    for (std::size_t r = 0; r < A_full.size(); ++r) {
        if (is_kept[r]) continue;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) gram[i][j] = dot_rows(kept[i], kept[j]);
            gram[i][k] = dot_rows(kept[i], static_cast<int>(r));
        }
        // solve the k x k normal system by Gaussian elimination
        std::vector<std::vector<double>> g = gram;
        std::vector<double> c(k, 0.0);
        bool ok = true;
        for (std::size_t col = 0; col < k && ok; ++col) {
            std::size_t piv = col;
            for (std::size_t rr = col + 1; rr < k; ++rr)
                if (std::abs(g[rr][col]) > std::abs(g[piv][col])) piv = rr;
            if (std::abs(g[piv][col]) < 1e-14) { ok = false; break; }
            std::swap(g[col], g[piv]);
            for (std::size_t rr = 0; rr < k; ++rr) {
                if (rr == col) continue;
                double fac = g[rr][col] / g[col][col];
                if (fac == 0.0) continue;
                for (std::size_t cc = col; cc <= k; ++cc) g[rr][cc] -= fac * g[col][cc];
            }
        }
        if (!ok) continue;
        for (std::size_t i = 0; i < k; ++i) c[i] = g[i][k] / g[i][i];

        double gap = f_full[r];
        for (std::size_t i = 0; i < k; ++i) gap -= c[i] * f_full[static_cast<std::size_t>(kept[i])];
        if (std::abs(gap) > std::abs(best_gap)) {
            best_gap = gap;
            best_y.assign(A_full.size(), 0.0);
            best_y[r] = 1.0;
            for (std::size_t i = 0; i < k; ++i) best_y[static_cast<std::size_t>(kept[i])] -= c[i];
            if (gap < 0.0)
                for (double& v : best_y) v = -v;
        }
    }
    return best_y;
}

}  // namespace

TrussSolution solve_michell_lp(const GroundStructure& gs, const LoadCase& lc) {
    validate(gs);
    BalanceReport bal = check_balanced(lc, gs);
    if (!bal.ok) throw std::invalid_argument("solve_michell_lp: unbalanced load case");

    const std::size_t m = gs.bars.size();
    auto A_full = equilibrium_matrix(gs);
    auto f_full = load_vector(gs, lc);

    std::vector<int> kept = independent_rows(A_full, 1e-10);
    TrussSolution sol;
    sol.dropped_rows = static_cast<int>(A_full.size()) - static_cast<int>(kept.size());

    // split q = q+ - q-, columns [A, -A], cost L on both halves
    std::vector<std::vector<double>> A(kept.size(), std::vector<double>(2 * m, 0.0));
    std::vector<double> b(kept.size(), 0.0);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& row = A_full[static_cast<std::size_t>(kept[i])];
        for (std::size_t j = 0; j < m; ++j) {
            A[i][j] = row[j];
            A[i][m + j] = -row[j];
        }
        b[i] = f_full[static_cast<std::size_t>(kept[i])];
    }
    std::vector<double> cost(2 * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) cost[j] = cost[m + j] = gs.bars[j].length;

    LpResult lp = solve_lp(A, b, cost);
    sol.lp_status = lp.status;
    sol.iterations = lp.iterations;
    if (lp.status == LpStatus::infeasible) {
        sol.farkas.assign(f_full.size(), 0.0);
        for (std::size_t i = 0; i < kept.size(); ++i)
            sol.farkas[static_cast<std::size_t>(kept[i])] = lp.farkas[i];
        return sol;
    }
    if (lp.status != LpStatus::optimal)
        throw std::runtime_error("solve_michell_lp: unexpected LP status");

    sol.q.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) sol.q[j] = lp.x[j] - lp.x[m + j];
    sol.objective = lp.objective;

    // full-system equilibrium residual, including the dropped rows
    double fscale = 1.0;
    for (double v : f_full) fscale = std::max(fscale, std::abs(v));
    double resid = 0.0;
    for (std::size_t r = 0; r < A_full.size(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += A_full[r][j] * sol.q[j];
        resid = std::max(resid, std::abs(s - f_full[r]));
    }
    sol.equilibrium_residual = resid;
    if (resid > 1e-9 * fscale) {
        // the kept rows solved but a dropped one disagrees: the full
        // system admits no equilibrium
        sol.lp_status = LpStatus::infeasible;
        sol.farkas = inconsistency_certificate(A_full, f_full, kept);
        return sol;
    }

    // dual certificate (virtual displacement), zero on dropped rows
    sol.virtual_displacement.assign(f_full.size(), 0.0);
    for (std::size_t i = 0; i < kept.size(); ++i)
        sol.virtual_displacement[static_cast<std::size_t>(kept[i])] = lp.y[i];
    double fu = 0.0;
    for (std::size_t r = 0; r < f_full.size(); ++r)
        fu += f_full[r] * sol.virtual_displacement[r];
    sol.dual_gap = std::abs(sol.objective - fu);
    double viol = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const Bar& bar = gs.bars[j];
        double e_du = 0.0;
        for (int c = 0; c < gs.dim; ++c)
            e_du += bar.dir[static_cast<std::size_t>(c)] *
                    (sol.virtual_displacement[static_cast<std::size_t>(bar.b * gs.dim + c)] -
                     sol.virtual_displacement[static_cast<std::size_t>(bar.a * gs.dim + c)]);
        viol = std::max(viol, std::abs(e_du) - bar.length);
    }
    sol.dual_violation = std::max(0.0, viol);
    return sol;
}

SymMat LimitShape::sigma_star(std::size_t bar) const {
    Vec3 d = bars[bar].dir;
    std::array<double, 3> v = {d[0], d[1], d[2]};
    return SymMat::outer(dim, v) * (kappa * sign[bar]);
}

LimitShape extract_limit_shape(const GroundStructure& gs, const TrussSolution& sol) {
    if (sol.lp_status != LpStatus::optimal)
        throw std::invalid_argument("extract_limit_shape: solution not optimal");
    if (!(sol.objective > 0.0))
        throw std::invalid_argument("extract_limit_shape: empty optimal shape (kappa = 0)");
    LimitShape shape;
    shape.dim = gs.dim;
    shape.kappa = sol.objective;
    shape.bars = gs.bars;
    shape.q = sol.q;
    shape.compliance = 0.5 * sol.objective * sol.objective;
    shape.weights.resize(gs.bars.size());
    shape.sign.resize(gs.bars.size());
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        shape.weights[i] = std::abs(sol.q[i]) * gs.bars[i].length / shape.kappa;
        shape.sign[i] = sol.q[i] < 0.0 ? -1.0 : 1.0;
    }
    return shape;
}

double decomposition_entropy_residual(const std::vector<double>& w,
                                      const std::vector<SymMat>& sigma) {
    if (w.size() != sigma.size())
        throw std::invalid_argument("decomposition_entropy_residual: size mismatch");
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double r = rho_polar(sigma[i]).value;
        first += w[i] * r * r;
        second += w[i] * r;
    }
    return std::abs(first - second * second);
}

double verify_entropy_condition(const LimitShape& shape) {
    std::vector<double> w;
    std::vector<SymMat> sigma;
    for (std::size_t i = 0; i < shape.weights.size(); ++i) {
        if (shape.weights[i] == 0.0) continue;
        w.push_back(shape.weights[i]);
        sigma.push_back(shape.sigma_star(i));
    }
    return decomposition_entropy_residual(w, sigma);
}

double decomposition_compliance(const std::vector<double>& w,
                                const std::vector<SymMat>& sigma) {
    if (w.size() != sigma.size())
        throw std::invalid_argument("decomposition_compliance: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) total += w[i] * j_bar_star(sigma[i]);
    return total;
}

}  // namespace vmass
