#include "vmass/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vmass {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// quintic smoothstep ramp and derivatives
double ramp(double t) { return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t); }
double ramp1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double ramp2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

struct Radial {
    double value = 0.0, d1 = 0.0, d2 = 0.0;
};

// cutoff: 0 outside [0.5, 1.5], 1 on [0.75, 1.25], quintic ramps between
Radial cutoff(double r) {
    if (r <= 0.5 || r >= 1.5) return {};
    if (r < 0.75) {
        double t = (r - 0.5) / 0.25;
        return {ramp(t), ramp1(t) / 0.25, ramp2(t) / 0.0625};
    }
    if (r <= 1.25) return {1.0, 0.0, 0.0};
    double t = (1.5 - r) / 0.25;
    return {ramp(t), -ramp1(t) / 0.25, ramp2(t) / 0.0625};
}

// k(r) = cutoff(r) (r - 1) as a radial profile
Radial profile(double r) {
    Radial phi = cutoff(r);
    Radial k;
    k.value = phi.value * (r - 1.0);
    k.d1 = phi.d1 * (r - 1.0) + phi.value;
    k.d2 = phi.d2 * (r - 1.0) + 2.0 * phi.d1;
    return k;
}

double vlen(Vec2 v) { return std::hypot(v.x, v.y); }

// Gauss-Legendre nodes on [-1, 1]
void gl_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
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

struct GlCache {
    std::vector<double> x8, w8, x12, w12, x16, w16, x32, w32;
    GlCache() {
        gl_nodes(8, x8, w8);
        gl_nodes(12, x12, w12);
        gl_nodes(16, x16, w16);
        gl_nodes(32, x32, w32);
    }
};
const GlCache& gl_cache() {
    static const GlCache c;
    return c;
}
const std::vector<double>& gl_x(int n) {
    const GlCache& c = gl_cache();
    if (n == 8) return c.x8;
    if (n == 12) return c.x12;
    if (n == 16) return c.x16;
    return c.x32;
}
const std::vector<double>& gl_w(int n) {
    const GlCache& c = gl_cache();
    if (n == 8) return c.w8;
    if (n == 12) return c.w12;
    if (n == 16) return c.w16;
    return c.w32;
}

template <class F>
double gauss1d(double a, double b, int n, F&& f) {
    const auto& xs = gl_x(n);
    const auto& ws = gl_w(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * f(mid + half * xs[i]);
    return s * half;
}

template <class F>
double gauss2d(Vec2 lo, Vec2 hi, int n, F&& f) {
    const auto& xs = gl_x(n);
    const auto& ws = gl_w(n);
    double mx = 0.5 * (lo.x + hi.x), hx = 0.5 * (hi.x - lo.x);
    double my = 0.5 * (lo.y + hi.y), hy = 0.5 * (hi.y - lo.y);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double rowsum = 0.0;
        double px = mx + hx * xs[i];
        for (std::size_t j = 0; j < xs.size(); ++j)
            rowsum += ws[j] * f(Vec2{px, my + hy * xs[j]});
        s += ws[i] * rowsum;
    }
    return s * hx * hy;
}

// panel-adaptive 2D quadrature: compare one panel against its quadrants
// and recurse where they disagree
// acceptance combines the caller's absolute budget with a relative floor
// matching the accuracy of the convolution kernels themselves
constexpr double kQuadRelFloor = 3e-8;

template <class F>
double adapt2d(Vec2 lo, Vec2 hi, const F& f, double tol, int depth) {
    double coarse = gauss2d(lo, hi, 8, f);
    Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    double fine = gauss2d(lo, mid, 8, f) + gauss2d(Vec2{mid.x, lo.y}, Vec2{hi.x, mid.y}, 8, f) +
                  gauss2d(Vec2{lo.x, mid.y}, Vec2{mid.x, hi.y}, 8, f) + gauss2d(mid, hi, 8, f);
    double diff = std::abs(fine - coarse);
    if (diff <= tol || diff <= kQuadRelFloor * std::abs(fine) || depth <= 0) return fine;
    return adapt2d(lo, mid, f, tol * 0.3, depth - 1) +
           adapt2d(Vec2{mid.x, lo.y}, Vec2{hi.x, mid.y}, f, tol * 0.3, depth - 1) +
           adapt2d(Vec2{lo.x, mid.y}, Vec2{mid.x, hi.y}, f, tol * 0.3, depth - 1) +
           adapt2d(mid, hi, f, tol * 0.3, depth - 1);
}

// vector version sharing the refinement decision across components, used
// where one expensive field evaluation feeds many pairings
template <int N, class F>
std::array<double, N> gauss2d_vec(Vec2 lo, Vec2 hi, int n, const F& f) {
    const auto& xs = gl_x(n);
    const auto& ws = gl_w(n);
    double mx = 0.5 * (lo.x + hi.x), hx = 0.5 * (hi.x - lo.x);
    double my = 0.5 * (lo.y + hi.y), hy = 0.5 * (hi.y - lo.y);
    std::array<double, N> acc{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double px = mx + hx * xs[i];
        for (std::size_t j = 0; j < xs.size(); ++j) {
            std::array<double, N> v = f(Vec2{px, my + hy * xs[j]});
            double w = ws[i] * ws[j];
            for (int k = 0; k < N; ++k) acc[static_cast<std::size_t>(k)] += w * v[static_cast<std::size_t>(k)];
        }
    }
    for (int k = 0; k < N; ++k) acc[static_cast<std::size_t>(k)] *= hx * hy;
    return acc;
}

template <int N, class F>
void adapt2d_vec(Vec2 lo, Vec2 hi, const F& f, double tol, int depth,
                 std::array<double, N>& out) {
    std::array<double, N> coarse = gauss2d_vec<N>(lo, hi, 8, f);
    Vec2 mid{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    std::array<std::array<double, N>, 4> fine = {
        gauss2d_vec<N>(lo, mid, 8, f),
        gauss2d_vec<N>(Vec2{mid.x, lo.y}, Vec2{hi.x, mid.y}, 8, f),
        gauss2d_vec<N>(Vec2{lo.x, mid.y}, Vec2{mid.x, hi.y}, 8, f),
        gauss2d_vec<N>(mid, hi, 8, f)};
    double diff = 0.0;
    double scale = 0.0;
    for (int k = 0; k < N; ++k) {
        double s = fine[0][static_cast<std::size_t>(k)] + fine[1][static_cast<std::size_t>(k)] +
                   fine[2][static_cast<std::size_t>(k)] + fine[3][static_cast<std::size_t>(k)];
        diff = std::max(diff, std::abs(s - coarse[static_cast<std::size_t>(k)]));
        scale = std::max(scale, std::abs(s));
    }
    if (diff <= tol || diff <= kQuadRelFloor * scale || depth <= 0) {
        for (int k = 0; k < N; ++k)
            out[static_cast<std::size_t>(k)] +=
                fine[0][static_cast<std::size_t>(k)] + fine[1][static_cast<std::size_t>(k)] +
                fine[2][static_cast<std::size_t>(k)] + fine[3][static_cast<std::size_t>(k)];
        return;
    }
    adapt2d_vec<N>(lo, mid, f, tol * 0.3, depth - 1, out);
    adapt2d_vec<N>(Vec2{mid.x, lo.y}, Vec2{hi.x, mid.y}, f, tol * 0.3, depth - 1, out);
    adapt2d_vec<N>(Vec2{lo.x, mid.y}, Vec2{mid.x, hi.y}, f, tol * 0.3, depth - 1, out);
    adapt2d_vec<N>(mid, hi, f, tol * 0.3, depth - 1, out);
}

// Pre-tiling at the bump scale keeps the refinement test honest: a panel
// comparable to the feature size cannot silently miss it the way one
// spanning many bump widths can.
template <class F>
double tiled_adapt2d(Vec2 lo, Vec2 hi, double tile, const F& f, double tol, int depth) {
    int nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / tile)));
    int ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / tile)));
    double per = tol / (nx * ny);
    double total = 0.0;
    for (int i = 0; i < nx; ++i) {
        double x0 = lo.x + (hi.x - lo.x) * i / nx;
        double x1 = lo.x + (hi.x - lo.x) * (i + 1) / nx;
        for (int j = 0; j < ny; ++j) {
            double y0 = lo.y + (hi.y - lo.y) * j / ny;
            double y1 = lo.y + (hi.y - lo.y) * (j + 1) / ny;
            total += adapt2d(Vec2{x0, y0}, Vec2{x1, y1}, f, per, depth);
        }
    }
    return total;
}

template <int N, class F>
void tiled_adapt2d_vec(Vec2 lo, Vec2 hi, double tile, const F& f, double tol, int depth,
                       std::array<double, N>& out) {
    int nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / tile)));
    int ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / tile)));
    double per = tol / (nx * ny);
    for (int i = 0; i < nx; ++i) {
        double x0 = lo.x + (hi.x - lo.x) * i / nx;
        double x1 = lo.x + (hi.x - lo.x) * (i + 1) / nx;
        for (int j = 0; j < ny; ++j) {
            double y0 = lo.y + (hi.y - lo.y) * j / ny;
            double y1 = lo.y + (hi.y - lo.y) * (j + 1) / ny;
            adapt2d_vec<N>(Vec2{x0, y0}, Vec2{x1, y1}, f, per, depth, out);
        }
    }
}

struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
};

Mat2 sandwich(const SymMat& m, const SymMat& jac, double det_jac) {
    // det(J) * m * J^{-1} with symmetric 2x2 J
    double inv = 1.0 / (jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(0, 1));
    double i00 = jac(1, 1) * inv, i11 = jac(0, 0) * inv, i01 = -jac(0, 1) * inv;
    Mat2 r;
    r.a00 = det_jac * (m(0, 0) * i00 + m(0, 1) * i01);
    r.a01 = det_jac * (m(0, 0) * i01 + m(0, 1) * i11);
    r.a10 = det_jac * (m(0, 1) * i00 + m(1, 1) * i01);
    r.a11 = det_jac * (m(0, 1) * i01 + m(1, 1) * i11);
    return r;
}

}  // namespace

DomainDescriptor DomainDescriptor::unit_disk() {
    DomainDescriptor d;
    d.k = [](Vec2 x) {
        double r = vlen(x);
        return r <= 0.5 ? 0.0 : profile(r).value;
    };
    d.grad_k = [](Vec2 x) -> Vec2 {
        double r = vlen(x);
        if (r <= 0.5 || r >= 1.5) return {};
        Radial k = profile(r);
        return {k.d1 * x.x / r, k.d1 * x.y / r};
    };
    d.hess_k = [](Vec2 x) -> SymMat {
        SymMat h(2);
        double r = vlen(x);
        if (r <= 0.5 || r >= 1.5) return h;
        Radial k = profile(r);
        double ux = x.x / r, uy = x.y / r;
        double tang = k.d1 / r;
        h.set(0, 0, k.d2 * ux * ux + tang * uy * uy);
        h.set(1, 1, k.d2 * uy * uy + tang * ux * ux);
        h.set(0, 1, (k.d2 - tang) * ux * uy);
        return h;
    };
    d.inside = [](Vec2 x) { return x.x * x.x + x.y * x.y < 1.0; };
    d.dist_to_closure = [](Vec2 x) { return std::max(0.0, vlen(x) - 1.0); };
    d.boundary_point = [](double t) -> Vec2 {
        return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
    };

    // sampled sup norms of the radial profile; the Hessian operator norm of
    // a radial function is max(|k''|, |k'|/r)
    double sup_hess = 0.0, sup_grad = 0.0;
    const int samples = 300000;
    for (int i = 0; i <= samples; ++i) {
        double r = 0.4 + 1.2 * static_cast<double>(i) / samples;
        Radial k = profile(r);
        sup_hess = std::max({sup_hess, std::abs(k.d2), std::abs(k.d1) / r});
        sup_grad = std::max(sup_grad, std::abs(k.d1));
    }
    d.sup_hess = sup_hess;
    d.sup_grad = sup_grad;
    d.delta0 = 0.9 * std::min(1.0 / (3.0 * sup_hess), 1.0);
    return d;
}

ThetaResult theta(Vec2 x, double delta, const DomainDescriptor& dom) {
    if (!(delta > 0.0) || delta >= dom.delta0)
        throw std::invalid_argument("theta: delta outside (0, delta0)");
    Vec2 g = dom.grad_k(x);
    ThetaResult r;
    r.point = {x.x + 3.0 * delta * g.x, x.y + 3.0 * delta * g.y};
    r.jacobian = SymMat::identity(2) + dom.hess_k(x) * (3.0 * delta);
    return r;
}

ExpansionReport check_expansion(const DomainDescriptor& dom, double delta,
                                int boundary_samples) {
    ExpansionReport rep;
    rep.samples = boundary_samples;
    rep.required = 2.0 * delta;
    rep.min_distance = std::numeric_limits<double>::infinity();
    for (int i = 0; i < boundary_samples; ++i) {
        Vec2 z = dom.boundary_point(static_cast<double>(i) / boundary_samples);
        Vec2 pushed = theta(z, delta, dom).point;
        rep.min_distance = std::min(rep.min_distance, dom.dist_to_closure(pushed));
    }
    rep.pass = rep.min_distance > rep.required;
    return rep;
}

double standard_bump(double r2) {
    // normalization over the unit disk, computed once by composite Gauss
    static const double norm = [] {
        double integral = 0.0;
        const int panels = 40;
        for (int p = 0; p < panels; ++p) {
            double a = static_cast<double>(p) / panels;
            double b = static_cast<double>(p + 1) / panels;
            integral += gauss1d(a, b, 32, [](double r) {
                double s = 1.0 - r * r;
                return s > 0.0 ? std::exp(-1.0 / s) * r : 0.0;
            });
        }
        return 1.0 / (kTwoPi * integral);
    }();
    if (r2 >= 1.0) return 0.0;
    return norm * std::exp(-1.0 / (1.0 - r2));
}

double DiscreteMeasure::total_variation() const {
    double tv = 0.0;
    for (const auto& a : atoms) tv += a.weight.norm();
    for (const auto& b : boxes)
        tv += b.density.norm() * std::abs((b.hi.x - b.lo.x) * (b.hi.y - b.lo.y));
    for (const auto& s : segments)
        tv += s.density.norm() * vlen({s.p1.x - s.p0.x, s.p1.y - s.p0.y});
    return tv;
}

SymMat DiscreteMeasure::total() const {
    SymMat t(2);
    for (const auto& a : atoms) t += a.weight;
    for (const auto& b : boxes)
        t += b.density * ((b.hi.x - b.lo.x) * (b.hi.y - b.lo.y));
    for (const auto& s : segments)
        t += s.density * vlen({s.p1.x - s.p0.x, s.p1.y - s.p0.y});
    return t;
}

double ScalarMeasure::total_mass() const {
    double t = 0.0;
    for (const auto& a : atoms) t += a.w;
    for (const auto& b : boxes) t += b.density * (b.hi.x - b.lo.x) * (b.hi.y - b.lo.y);
    return t;
}

namespace {

// Cumulative mass of the unit bump over south-west quadrants,
// Phi(u, v) = int_{z1 <= u, z2 <= v} eta(z) dz, tabulated once on a fine
// grid. A box convolution is then four bicubic lookups through the 2D
// inclusion-exclusion identity, with uniform accuracy near edges, corners
// and tangencies alike.
class BumpCdf {
public:
    BumpCdf() {
        values_.assign(static_cast<std::size_t>(kN + 1) * (kN + 1), 0.0);
        // cell integrals by 4x4 Gauss, then prefix sums
        const auto& xs = gl_x(8);
        const auto& ws = gl_w(8);
        std::vector<double> cell(static_cast<std::size_t>(kN) * kN, 0.0);
        const double h = 2.0 / kN;
        for (int i = 0; i < kN; ++i) {
            double cx = -1.0 + h * (i + 0.5);
            for (int j = 0; j < kN; ++j) {
                double cy = -1.0 + h * (j + 0.5);
                if (cx * cx + cy * cy > (1.0 + h) * (1.0 + h)) continue;
                double acc = 0.0;
                for (std::size_t a = 0; a < xs.size(); ++a)
                    for (std::size_t b = 0; b < xs.size(); ++b) {
                        double px = cx + 0.5 * h * xs[a], py = cy + 0.5 * h * xs[b];
                        acc += ws[a] * ws[b] * standard_bump(px * px + py * py);
                    }
                cell[static_cast<std::size_t>(i) * kN + j] = acc * 0.25 * h * h;
            }
        }
        for (int i = 1; i <= kN; ++i)
            for (int j = 1; j <= kN; ++j)
                at(i, j) = cell[static_cast<std::size_t>(i - 1) * kN + (j - 1)] + at(i - 1, j) +
                           at(i, j - 1) - at(i - 1, j - 1);
    }

    // Catmull-Rom bicubic in both axes; coordinates clamp to [-1, 1],
    // which matches the constant continuation of the cumulative outside
    double operator()(double u, double v) const {
        double fu = (std::clamp(u, -1.0, 1.0) + 1.0) * 0.5 * kN;
        double fv = (std::clamp(v, -1.0, 1.0) + 1.0) * 0.5 * kN;
        int iu = std::clamp(static_cast<int>(fu), 0, kN - 1);
        int iv = std::clamp(static_cast<int>(fv), 0, kN - 1);
        double tu = fu - iu, tv = fv - iv;
        double rows[4];
        for (int a = -1; a <= 2; ++a) {
            double p0 = at_clamped(iu + a, iv - 1), p1 = at_clamped(iu + a, iv);
            double p2 = at_clamped(iu + a, iv + 1), p3 = at_clamped(iu + a, iv + 2);
            rows[a + 1] = catmull(p0, p1, p2, p3, tv);
        }
        return catmull(rows[0], rows[1], rows[2], rows[3], tu);
    }

private:
    static double catmull(double p0, double p1, double p2, double p3, double t) {
        return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                               t * (3.0 * (p1 - p2) + p3 - p0)));
    }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * (kN + 1) + j]; }
    double at_clamped(int i, int j) const {
        i = std::clamp(i, 0, kN);
        j = std::clamp(j, 0, kN);
        return values_[static_cast<std::size_t>(i) * (kN + 1) + j];
    }

    static constexpr int kN = 1024;
    std::vector<double> values_;
};

const BumpCdf& bump_cdf() {
    static const BumpCdf cdf;
    return cdf;
}

// int eta((q - y)/delta) dy over a box through the cumulative table
double box_window_integral(Vec2 lo, Vec2 hi, Vec2 q, double delta) {
    const double lx = (lo.x - q.x) / delta, hx = (hi.x - q.x) / delta;
    const double ly = (lo.y - q.y) / delta, hy = (hi.y - q.y) / delta;
    if (lx >= 1.0 || hx <= -1.0 || ly >= 1.0 || hy <= -1.0) return 0.0;
    if (lx <= -1.0 && hx >= 1.0 && ly <= -1.0 && hy >= 1.0)
        return delta * delta;  // the window covers the whole unit bump
    const BumpCdf& cdf = bump_cdf();
    double val = cdf(hx, hy) - cdf(lx, hy) - cdf(hx, ly) + cdf(lx, ly);
    return std::max(0.0, val) * delta * delta;
}

// int eta((q - y(t))/delta) |p1 - p0| dt over the exact parameter window;
// composite Gauss handles the flat ends of the bump profile
double segment_window_integral(Vec2 p0, Vec2 p1, Vec2 q, double delta) {
    Vec2 d{p1.x - p0.x, p1.y - p0.y};
    double len2 = d.x * d.x + d.y * d.y;
    if (len2 == 0.0) return 0.0;
    Vec2 w{q.x - p0.x, q.y - p0.y};
    double b = (w.x * d.x + w.y * d.y) / len2;
    double c = (w.x * w.x + w.y * w.y - delta * delta) / len2;
    double disc = b * b - c;
    if (disc <= 0.0) return 0.0;
    double t0 = std::max(0.0, b - std::sqrt(disc));
    double t1 = std::min(1.0, b + std::sqrt(disc));
    if (t0 >= t1) return 0.0;
    double len = std::sqrt(len2);
    double total = 0.0;
    for (int p = 0; p < 12; ++p) {
        double a = t0 + (t1 - t0) * p / 12.0;
        double bb = t0 + (t1 - t0) * (p + 1) / 12.0;
        total += gauss1d(a, bb, 12, [&](double t) {
            double dx = (q.x - (p0.x + t * d.x)) / delta;
            double dy = (q.y - (p0.y + t * d.y)) / delta;
            return standard_bump(dx * dx + dy * dy) * len;
        });
    }
    return total;
}

SymMat moment_matrix(const DiscreteMeasure& m, Vec2 q, double delta) {
    SymMat acc(2);
    for (const auto& a : m.atoms) {
        double dx = (q.x - a.pos.x) / delta, dy = (q.y - a.pos.y) / delta;
        double e = standard_bump(dx * dx + dy * dy);
        if (e != 0.0) acc += a.weight * e;
    }
    for (const auto& b : m.boxes) {
        double v = box_window_integral(b.lo, b.hi, q, delta);
        if (v != 0.0) acc += b.density * v;
    }
    for (const auto& s : m.segments) {
        double v = segment_window_integral(s.p0, s.p1, q, delta);
        if (v != 0.0) acc += s.density * v;
    }
    return acc;
}

}  // namespace

MollifiedField::MollifiedField(DiscreteMeasure source, double delta,
                               const DomainDescriptor* dom)
    : source_(std::move(source)), delta_(delta), dom_(dom) {}

double MollifiedField::support_inflation() const {
    return delta_ * (1.0 + 3.0 * dom_->sup_grad) * 1.01 + delta_ * 0.05;
}

SymMat MollifiedField::evaluate(Vec2 x) const {
    ThetaResult th = theta(x, delta_, *dom_);
    SymMat m = moment_matrix(source_, th.point, delta_);
    Mat2 full = sandwich(m, th.jacobian, th.jacobian.det());
    SymMat out(2);
    out.set(0, 0, full.a00 / (delta_ * delta_));
    out.set(1, 1, full.a11 / (delta_ * delta_));
    out.set(0, 1, 0.5 * (full.a01 + full.a10) / (delta_ * delta_));
    return out;
}

namespace {

struct Rect {
    Vec2 lo, hi;
};

std::vector<Rect> piece_rects(const DiscreteMeasure& m, double inflate) {
    std::vector<Rect> rects;
    for (const auto& a : m.atoms)
        rects.push_back({{a.pos.x - inflate, a.pos.y - inflate},
                         {a.pos.x + inflate, a.pos.y + inflate}});
    for (const auto& b : m.boxes)
        rects.push_back({{b.lo.x - inflate, b.lo.y - inflate},
                         {b.hi.x + inflate, b.hi.y + inflate}});
    for (const auto& s : m.segments)
        rects.push_back({{std::min(s.p0.x, s.p1.x) - inflate, std::min(s.p0.y, s.p1.y) - inflate},
                         {std::max(s.p0.x, s.p1.x) + inflate, std::max(s.p0.y, s.p1.y) + inflate}});
    return rects;
}

DiscreteMeasure single_piece(const DiscreteMeasure& m, std::size_t index) {
    DiscreteMeasure p;
    if (index < m.atoms.size()) {
        p.atoms.push_back(m.atoms[index]);
        return p;
    }
    index -= m.atoms.size();
    if (index < m.boxes.size()) {
        p.boxes.push_back(m.boxes[index]);
        return p;
    }
    index -= m.boxes.size();
    p.segments.push_back(m.segments[index]);
    return p;
}

std::size_t piece_count(const DiscreteMeasure& m) {
    return m.atoms.size() + m.boxes.size() + m.segments.size();
}

}  // namespace

double MollifiedField::pair(const std::function<SymMat(Vec2)>& phi, double tol) const {
    // per-piece integration keeps the panels small and avoids double
    // counting; the pairing is linear in the measure
    double total = 0.0;
    const double inflate = support_inflation();
    for (std::size_t p = 0; p < piece_count(source_); ++p) {
        DiscreteMeasure piece = single_piece(source_, p);
        Rect r = piece_rects(piece, inflate)[0];
        auto f = [&](Vec2 x) {
            ThetaResult th = theta(x, delta_, *dom_);
            SymMat m = moment_matrix(piece, th.point, delta_);
            if (m.norm2() == 0.0) return 0.0;
            Mat2 full = sandwich(m, th.jacobian, th.jacobian.det());
            SymMat ph = phi(x);
            // phi symmetric, so pairing against the symmetric part is exact
            return (full.a00 * ph(0, 0) + full.a11 * ph(1, 1) +
                    (full.a01 + full.a10) * ph(0, 1)) /
                   (delta_ * delta_);
        };
        total += tiled_adapt2d(r.lo, r.hi, 2.0 * delta_, f, tol, 6);
    }
    return total;
}

double MollifiedField::total_variation(double tol) const {
    double total = 0.0;
    const double inflate = support_inflation();
    for (std::size_t p = 0; p < piece_count(source_); ++p) {
        DiscreteMeasure piece = single_piece(source_, p);
        Rect r = piece_rects(piece, inflate)[0];
        auto f = [&](Vec2 x) {
            ThetaResult th = theta(x, delta_, *dom_);
            SymMat m = moment_matrix(piece, th.point, delta_);
            if (m.norm2() == 0.0) return 0.0;
            Mat2 full = sandwich(m, th.jacobian, th.jacobian.det());
            return std::sqrt(full.a00 * full.a00 + full.a01 * full.a01 +
                             full.a10 * full.a10 + full.a11 * full.a11) /
                   (delta_ * delta_);
        };
        total += tiled_adapt2d(r.lo, r.hi, 2.0 * delta_, f, tol, 6);
    }
    return total;
}

namespace {

// measures must live in the closed domain; outside support would leak
// through the expansion map and break the mass identity
void require_inside(const DomainDescriptor& dom, Vec2 p, const char* what) {
    if (dom.dist_to_closure(p) > 1e-12)
        throw std::invalid_argument(std::string(what) + ": support outside the closed domain");
}

void validate_support(const DiscreteMeasure& m, const DomainDescriptor& dom) {
    for (const auto& a : m.atoms) require_inside(dom, a.pos, "atom");
    for (const auto& b : m.boxes) {
        require_inside(dom, b.lo, "box");
        require_inside(dom, b.hi, "box");
        require_inside(dom, {b.lo.x, b.hi.y}, "box");
        require_inside(dom, {b.hi.x, b.lo.y}, "box");
    }
    for (const auto& s : m.segments) {
        require_inside(dom, s.p0, "segment");
        require_inside(dom, s.p1, "segment");
    }
}

void validate_support(const ScalarMeasure& m, const DomainDescriptor& dom) {
    for (const auto& a : m.atoms) require_inside(dom, a.pos, "atom");
    for (const auto& b : m.boxes) {
        require_inside(dom, b.lo, "box");
        require_inside(dom, b.hi, "box");
        require_inside(dom, {b.lo.x, b.hi.y}, "box");
        require_inside(dom, {b.hi.x, b.lo.y}, "box");
    }
}

}  // namespace

MollifiedField mollify(const DiscreteMeasure& lambda, double delta,
                       const DomainDescriptor& dom) {
    if (!(delta > 0.0) || delta >= dom.delta0)
        throw std::invalid_argument("mollify: delta outside (0, delta0)");
    validate_support(lambda, dom);
    return MollifiedField(lambda, delta, &dom);
}

double mollified_scalar_at(const ScalarMeasure& mu, double delta,
                           const DomainDescriptor& dom, Vec2 x) {
    ThetaResult th = theta(x, delta, dom);
    double acc = 0.0;
    for (const auto& a : mu.atoms) {
        double dx = (th.point.x - a.pos.x) / delta, dy = (th.point.y - a.pos.y) / delta;
        acc += a.w * standard_bump(dx * dx + dy * dy);
    }
    for (const auto& b : mu.boxes)
        acc += b.density * box_window_integral(b.lo, b.hi, th.point, delta);
    return acc * th.jacobian.det() / (delta * delta);
}

double mollified_mass(const ScalarMeasure& mu, double delta,
                      const DomainDescriptor& dom, double tol) {
    if (!(delta > 0.0) || delta >= dom.delta0)
        throw std::invalid_argument("mollified_mass: delta outside (0, delta0)");
    validate_support(mu, dom);
    const double inflate = delta * (1.0 + 3.0 * dom.sup_grad) * 1.01 + delta * 0.05;
    double total = 0.0;
    auto piece_mass = [&](const ScalarMeasure& piece, Rect r) {
        auto f = [&](Vec2 x) { return mollified_scalar_at(piece, delta, dom, x); };
        return tiled_adapt2d(r.lo, r.hi, 2.0 * delta, f, tol, 6);
    };
    for (const auto& a : mu.atoms) {
        ScalarMeasure piece;
        piece.atoms.push_back(a);
        total += piece_mass(piece, {{a.pos.x - inflate, a.pos.y - inflate},
                                    {a.pos.x + inflate, a.pos.y + inflate}});
    }
    for (const auto& b : mu.boxes) {
        ScalarMeasure piece;
        piece.boxes.push_back(b);
        total += piece_mass(piece, {{b.lo.x - inflate, b.lo.y - inflate},
                                    {b.hi.x + inflate, b.hi.y + inflate}});
    }
    return total;
}

double mass_check(const ScalarMeasure& mu, double delta, const DomainDescriptor& dom) {
    if (std::abs(mu.total_mass() - 1.0) > 1e-9)
        throw std::invalid_argument("mass_check: measure is not a probability measure");
    return std::abs(mollified_mass(mu, delta, dom, 3e-8) - 1.0);
}

namespace {

// gradient of the monomial field e_comp * x^a y^b as a full 2x2 matrix
struct PolyField {
    int comp = 0, a = 0, b = 0;

    static double mono(double x, int p) {
        double v = 1.0;
        for (int i = 0; i < p; ++i) v *= x;
        return v;
    }

    std::array<double, 4> grad(Vec2 p) const {
        double gx = a == 0 ? 0.0 : a * mono(p.x, a - 1) * mono(p.y, b);
        double gy = b == 0 ? 0.0 : b * mono(p.y, b - 1) * mono(p.x, a);
        std::array<double, 4> g{};  // row-major d_j v_i
        g[static_cast<std::size_t>(comp * 2 + 0)] = gx;
        g[static_cast<std::size_t>(comp * 2 + 1)] = gy;
        return g;
    }
};

// exact pairing < lambda, grad v > of the discrete measure
double input_pairing(const DiscreteMeasure& m, const PolyField& v) {
    auto contract = [](const SymMat& s, const std::array<double, 4>& g) {
        return s(0, 0) * g[0] + s(0, 1) * (g[1] + g[2]) + s(1, 1) * g[3];
    };
    double total = 0.0;
    for (const auto& a : m.atoms) total += contract(a.weight, v.grad(a.pos));
    for (const auto& b : m.boxes)
        total += gauss2d(b.lo, b.hi, 8, [&](Vec2 p) { return contract(b.density, v.grad(p)); });
    for (const auto& s : m.segments) {
        Vec2 d{s.p1.x - s.p0.x, s.p1.y - s.p0.y};
        double len = vlen(d);
        total += gauss1d(0.0, 1.0, 32, [&](double t) {
            Vec2 p{s.p0.x + t * d.x, s.p0.y + t * d.y};
            return contract(s.density, v.grad(p)) * len;
        });
    }
    return total;
}

// pairings of the mollified field against the full (non-symmetrized)
// gradients of every test field at once; the expensive part of each node
// is the convolution, which all pairings share
constexpr int kMaxFields = 32;

std::vector<double> mollified_pairings(const MollifiedField& field, const DomainDescriptor& dom,
                                       const std::vector<PolyField>& fields, double tol) {
    if (fields.size() > kMaxFields)
        throw std::invalid_argument("divergence check: too many test fields");
    std::array<double, kMaxFields> totals{};
    const auto& src = field.source();
    const double inflate = field.support_inflation();
    const double inv_d2 = 1.0 / (field.delta() * field.delta());
    for (std::size_t p = 0; p < piece_count(src); ++p) {
        DiscreteMeasure piece = single_piece(src, p);
        Rect r = piece_rects(piece, inflate)[0];
        auto f = [&](Vec2 x) -> std::array<double, kMaxFields> {
            std::array<double, kMaxFields> vals{};
            ThetaResult th = theta(x, field.delta(), dom);
            SymMat m = moment_matrix(piece, th.point, field.delta());
            if (m.norm2() == 0.0) return vals;
            Mat2 full = sandwich(m, th.jacobian, th.jacobian.det());
            for (std::size_t i = 0; i < fields.size(); ++i) {
                auto g = fields[i].grad(x);
                vals[i] = (full.a00 * g[0] + full.a01 * g[1] + full.a10 * g[2] +
                           full.a11 * g[3]) *
                          inv_d2;
            }
            return vals;
        };
        std::array<double, kMaxFields> out{};
        tiled_adapt2d_vec<kMaxFields>(r.lo, r.hi, 2.0 * field.delta(), f, tol, 6, out);
        for (std::size_t i = 0; i < fields.size(); ++i) totals[i] += out[i];
    }
    return std::vector<double>(totals.begin(), totals.begin() + static_cast<long>(fields.size()));
}

}  // namespace

DivergenceReport divergence_preservation_check(const DiscreteMeasure& lambda,
                                               double delta,
                                               const DomainDescriptor& dom,
                                               int test_degree) {
    MollifiedField field = mollify(lambda, delta, dom);
    std::vector<PolyField> fields;
    for (int comp = 0; comp < 2; ++comp)
        for (int a = 0; a <= test_degree; ++a)
            for (int b = 0; a + b <= test_degree; ++b) fields.push_back(PolyField{comp, a, b});

    DivergenceReport rep;
    for (const auto& v : fields)
        rep.input_residual = std::max(rep.input_residual, std::abs(input_pairing(lambda, v)));
    auto paired = mollified_pairings(field, dom, fields, 1e-8);
    for (double v : paired) rep.mollified_residual = std::max(rep.mollified_residual, std::abs(v));
    rep.pass = rep.mollified_residual <= 1e-6;
    return rep;
}

}  // namespace vmass
