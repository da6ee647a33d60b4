#include "vmass/laminate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vmass/integrand.hpp"

namespace vmass {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
// Legendre polynomial; cached per order.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = t;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

struct GaussRule {
    std::vector<double> x, w;
    explicit GaussRule(int n) { gauss_legendre(n, x, w); }

    template <class F>
    double integrate(double a, double b, F&& f) const {
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(mid + half * x[i]);
        return s * half;
    }
};

}  // namespace

std::string laminate_case_name(LaminateCase c) {
    switch (c) {
        case LaminateCase::two_d: return "2D";
        case LaminateCase::three_d_case1: return "3D-I";
        default: return "3D-II";
    }
}

bool SlabFamily::contains(double coord) const {
    double scaled = coord * periods;
    double frac = scaled - std::floor(scaled);
    return frac < gamma * eps;
}

bool LaminateConstruction::pattern_active(int entry, unsigned mask) const {
    for (int f : entries[static_cast<std::size_t>(entry)].carrier_families)
        if (mask & (1u << f)) return true;
    return false;
}

SymMat LaminateConstruction::sigma_for_pattern(unsigned mask) const {
    SymMat s(dim);
    for (int i = 0; i < dim; ++i)
        if (pattern_active(i, mask)) s.set(i, i, entries[static_cast<std::size_t>(i)].amplitude);
    return s;
}

SymMat LaminateConstruction::sigma_at(const std::array<double, 3>& x) const {
    unsigned mask = 0;
    for (std::size_t f = 0; f < families.size(); ++f)
        if (families[f].contains(x[static_cast<std::size_t>(families[f].axis)])) mask |= (1u << f);
    return sigma_for_pattern(mask);
}

LaminateConstruction build_construction(const std::vector<double>& alphas,
                                        double eps, int periods) {
    const int dim = static_cast<int>(alphas.size());
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("build_construction: need 2 or 3 alphas");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("build_construction: eps out of range (0,1)");
    if (periods < 1) throw std::invalid_argument("build_construction: periods must be >= 1");
    for (int i = 0; i + 1 < dim; ++i)
        if (std::abs(alphas[static_cast<std::size_t>(i)]) >
            std::abs(alphas[static_cast<std::size_t>(i + 1)]))
            throw std::invalid_argument("build_construction: alphas must be ordered by |.|");

    LaminateConstruction c;
    c.dim = dim;
    c.eps = eps;
    c.periods = periods;
    for (int i = 0; i < dim; ++i) c.alphas[static_cast<std::size_t>(i)] = alphas[static_cast<std::size_t>(i)];

    const double a1 = std::abs(alphas[0]);
    const double a2 = std::abs(alphas[1]);
    const double a3 = dim == 3 ? std::abs(alphas[2]) : 0.0;

    const bool case2 = dim == 3 && a3 < a1 + a2;
    if (!case2) {
        // 2D and 3D Case I share the two-family layout
        c.case_tag = dim == 2 ? LaminateCase::two_d : LaminateCase::three_d_case1;
        double gamma = a1 == 0.0 ? 1.0 - eps : a2 / (a1 + a2);
        c.families = {SlabFamily{0, gamma, eps, periods},
                      SlabFamily{1, 1.0 - gamma, eps, periods}};
        c.entries[0] = {a1 == 0.0 ? 0.0 : alphas[0] / (1.0 - gamma), {1}};
        c.entries[1] = {alphas[1] / gamma, {0}};
        if (dim == 3) c.entries[2] = {alphas[2], {0, 1}};
    } else {
        c.case_tag = LaminateCase::three_d_case2;
        const double sum = a1 + a2 + a3;
        std::array<double, 3> g = {(a2 + a3 - a1) / sum, (a1 + a3 - a2) / sum,
                                   (a1 + a2 - a3) / sum};
        for (int i = 0; i < 3; ++i)
            c.families.push_back(SlabFamily{i, g[static_cast<std::size_t>(i)], eps, periods});
        c.entries[0] = {alphas[0] / (1.0 - g[0]), {1, 2}};
        c.entries[1] = {alphas[1] / (1.0 - g[1]), {0, 2}};
        c.entries[2] = {alphas[2] / (1.0 - g[2]), {0, 1}};
    }
    return c;
}

RegionMeasureTable measure_table(const LaminateConstruction& c) {
    RegionMeasureTable t;
    t.n_families = static_cast<int>(c.families.size());
    const unsigned n_masks = 1u << t.n_families;
    for (unsigned mask = 0; mask < n_masks; ++mask) {
        double m = 1.0;
        for (int f = 0; f < t.n_families; ++f) {
            double frac = c.families[static_cast<std::size_t>(f)].fraction();
            m *= (mask & (1u << f)) ? frac : (1.0 - frac);
        }
        t.region[mask] = m;
    }
    return t;
}

double RegionMeasureTable::family_measure(int i) const {
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n_families); ++mask)
        if (mask & (1u << i)) s += region[mask];
    return s;
}

double RegionMeasureTable::pair_measure(int i, int j) const {
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n_families); ++mask)
        if ((mask & (1u << i)) && (mask & (1u << j))) s += region[mask];
    return s;
}

double RegionMeasureTable::triple_measure() const {
    return n_families == 3 ? region[7] : 0.0;
}

double RegionMeasureTable::union_measure() const {
    double s = 0.0;
    for (unsigned mask = 1; mask < (1u << n_families); ++mask) s += region[mask];
    return s;
}

double RegionMeasureTable::union_pair(int i, int j) const {
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n_families); ++mask)
        if ((mask & (1u << i)) || (mask & (1u << j))) s += region[mask];
    return s;
}

double energy_eps(const LaminateConstruction& c) {
    RegionMeasureTable t = measure_table(c);
    double e = 0.0;
    for (unsigned mask = 1; mask < (1u << t.n_families); ++mask) {
        SymMat s = c.sigma_for_pattern(mask);
        e += 0.5 * s.norm2() * t.region[mask];
    }
    return e / c.eps;
}

namespace {

// test fields v = e_comp * x^mono * bump(x), bump = prod 16 t^2 (1-t)^2
// (normalized to peak one so residual magnitudes are comparable across
// degrees and dimensions)
double bump1(double t) { return 16.0 * t * t * (1.0 - t) * (1.0 - t); }
double dbump1(double t) { return 32.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

struct Factor {
    int power = 0;
    bool derivative = false;
    double operator()(double t) const {
        double mono = 1.0, dmono = 0.0;
        for (int p = 0; p < power; ++p) mono *= t;
        if (derivative) {
            dmono = power == 0 ? 0.0 : power * std::pow(t, power - 1);
            return dmono * bump1(t) + mono * dbump1(t);
        }
        return mono * bump1(t);
    }
};

// integral of `fac` against the indicator of the family slabs (or of the
// whole interval when fam == nullptr)
double axis_integral(const Factor& fac, const SlabFamily* fam, const GaussRule& rule) {
    if (fam == nullptr) return rule.integrate(0.0, 1.0, fac);
    double s = 0.0;
    const double width = fam->fraction() / fam->periods;
    for (int i = 0; i < fam->periods; ++i) {
        double lo = static_cast<double>(i) / fam->periods;
        s += rule.integrate(lo, lo + width, fac);
    }
    return s;
}

}  // namespace

double weak_divergence_residual(const LaminateConstruction& c,
                                int test_fn_degree, int quad_n) {
    if (test_fn_degree < 0) throw std::invalid_argument("weak_divergence_residual: degree < 0");
    GaussRule rule(std::max(4, quad_n));

    // multi-indices with |mono| <= degree
    std::vector<std::array<int, 3>> monos;
    for (int a = 0; a <= test_fn_degree; ++a)
        for (int b = 0; a + b <= test_fn_degree; ++b) {
            if (c.dim == 2) {
                monos.push_back({a, b, 0});
            } else {
                for (int d = 0; a + b + d <= test_fn_degree; ++d) monos.push_back({a, b, d});
            }
        }

    double worst = 0.0;
    for (int comp = 0; comp < c.dim; ++comp) {
        const StressEntry& entry = c.entries[static_cast<std::size_t>(comp)];
        if (entry.amplitude == 0.0 || entry.carrier_families.empty()) continue;
        for (const auto& mono : monos) {
            // indicator of a union expands by inclusion-exclusion into
            // products of single-family indicators, each of which
            // factorizes over the axes
            double total = 0.0;
            const auto& fams = entry.carrier_families;
            const unsigned n_sub = 1u << fams.size();
            for (unsigned sub = 1; sub < n_sub; ++sub) {
                double sign = 1.0;
                const SlabFamily* on_axis[3] = {nullptr, nullptr, nullptr};
                int bits = 0;
                for (std::size_t fi = 0; fi < fams.size(); ++fi) {
                    if (sub & (1u << fi)) {
                        const SlabFamily& f = c.families[static_cast<std::size_t>(fams[fi])];
                        on_axis[f.axis] = &f;
                        ++bits;
                    }
                }
                if (bits % 2 == 0) sign = -1.0;
                double prod = 1.0;
                for (int ax = 0; ax < c.dim; ++ax) {
                    Factor fac;
                    fac.power = mono[static_cast<std::size_t>(ax)];
                    fac.derivative = (ax == comp);
                    prod *= axis_integral(fac, on_axis[ax], rule);
                }
                total += sign * prod;
            }
            worst = std::max(worst, std::abs(entry.amplitude * total / c.eps));
        }
    }
    return worst;
}

LaminateConstruction corrupt_carriers(const LaminateConstruction& c) {
    LaminateConstruction bad = c;
    // re-point every stress entry at a slab family living on its own axis,
    // so the entry varies along the coordinate it differentiates against
    for (int i = 0; i < bad.dim; ++i) {
        for (std::size_t f = 0; f < bad.families.size(); ++f) {
            if (bad.families[f].axis == i) {
                bad.entries[static_cast<std::size_t>(i)].carrier_families = {static_cast<int>(f)};
                break;
            }
        }
    }
    return bad;
}

double cc_check(const LaminateConstruction& c, const SymMat& xi) {
    if (xi.dim() != c.dim) throw std::invalid_argument("cc_check: dimension mismatch");
    if (rho(xi) > 1.0 + 1e-12) throw std::invalid_argument("cc_check: rho(xi) must be <= 1");
    RegionMeasureTable t = measure_table(c);
    const double inv_sqrt_eps = 1.0 / std::sqrt(c.eps);
    double total = 0.0;
    for (unsigned mask = 1; mask < (1u << t.n_families); ++mask) {
        SymMat tau = c.sigma_for_pattern(mask) * inv_sqrt_eps;
        total += Q_xi_form(xi, tau) * t.region[mask];
    }
    return total;
}

int default_k_rule(double eps) {
    return std::max(1, static_cast<int>(std::ceil(1.0 / std::sqrt(eps))));
}

ConvergenceStudy convergence_study(const std::vector<double>& alphas,
                                   const std::vector<double>& eps_list,
                                   const KRule& k_rule) {
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (eps_list[i] <= eps_list[i + 1])
            throw std::invalid_argument("convergence_study: eps_list must be decreasing");

    ConvergenceStudy study;
    std::array<double, 3> a{};
    for (std::size_t i = 0; i < alphas.size(); ++i) a[i] = alphas[i];
    study.limit = j_bar_star(SymMat::diag(static_cast<int>(alphas.size()), a));

    const bool fallback = std::abs(alphas[0]) == 0.0;
    for (double eps : eps_list) {
        LaminateConstruction c = build_construction(alphas, eps, k_rule(eps));
        ConvergenceRow row;
        row.eps = eps;
        row.periods = c.periods;
        row.energy = energy_eps(c);
        row.error = row.energy - study.limit;
        // predicted remainder of the built construction: the overlap term
        // of the slab measures, plus the gamma = 1 - eps correction when the
        // smallest alpha vanishes
        double bound = 0.0;
        switch (c.case_tag) {
            case LaminateCase::two_d:
                if (fallback) bound = 0.5 * a[1] * a[1] * eps / (1.0 - eps);
                break;
            case LaminateCase::three_d_case1: {
                double g = c.families[0].gamma;
                bound = 0.5 * a[2] * a[2] * g * (1.0 - g) * eps;
                if (fallback) bound += 0.5 * a[1] * a[1] * eps / (1.0 - eps);
                break;
            }
            case LaminateCase::three_d_case2:
                for (int i = 0; i < 3; ++i) {
                    double prod = 1.0;
                    for (int jj = 0; jj < 3; ++jj)
                        if (jj != i) prod *= c.families[static_cast<std::size_t>(jj)].gamma;
                    double one_minus = 1.0 - c.families[static_cast<std::size_t>(i)].gamma;
                    bound += 0.5 * a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)] *
                             prod / (one_minus * one_minus) * eps;
                }
                break;
        }
        row.bound = bound + 1e-12 * std::max(1.0, std::abs(study.limit));
        study.rows.push_back(row);
    }

    // least-squares slope of log|error| against log(eps)
    std::vector<double> xs, ys;
    for (const auto& r : study.rows) {
        if (std::abs(r.error) > 1e-13 * std::max(1.0, study.limit)) {
            xs.push_back(std::log(r.eps));
            ys.push_back(std::log(std::abs(r.error)));
        }
    }
    if (xs.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += (xs[i] - mx) * (ys[i] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        study.slope = num / den;
        study.slope_defined = true;
    }
    return study;
}

}  // namespace vmass
