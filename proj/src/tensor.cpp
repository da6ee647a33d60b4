#include "vmass/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vmass {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("SymMat: dim must be 2 or 3");
}

int upper_index(int i, int j) {
    if (i > j) std::swap(i, j);
    if (i == j) return i;
    if (i == 0) return j == 1 ? 3 : 4;
    return 5;  // (1,2)
}

}  // namespace

SymMat::SymMat(int dim) : dim_(dim) { check_dim(dim); }

SymMat::SymMat(int dim, const std::array<double, 6>& upper) : dim_(dim), a_(upper) {
    check_dim(dim);
}

SymMat SymMat::identity(int dim) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

SymMat SymMat::diag(int dim, const std::array<double, 3>& d) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
    return m;
}

SymMat SymMat::outer(int dim, const std::array<double, 3>& v) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
            m.set(i, j, v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
    return m;
}

SymMat SymMat::from_rows(int dim, const std::array<double, 9>& rows, double tol) {
    check_dim(dim);
    double scale = 0.0;
    for (int i = 0; i < dim * dim; ++i)
        scale = std::max(scale, std::abs(rows[static_cast<std::size_t>(i)]));
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            double u = rows[static_cast<std::size_t>(i * dim + j)];
            double l = rows[static_cast<std::size_t>(j * dim + i)];
            if (std::abs(u - l) > tol * std::max(1.0, scale))
                throw std::invalid_argument("SymMat: matrix is not symmetric");
            m.set(i, j, 0.5 * (u + l));
        }
    }
    return m;
}

double SymMat::operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(upper_index(i, j))];
}

void SymMat::set(int i, int j, double v) {
    a_[static_cast<std::size_t>(upper_index(i, j))] = v;
}

SymMat SymMat::operator+(const SymMat& o) const {
    SymMat r = *this;
    for (std::size_t k = 0; k < 6; ++k) r.a_[k] += o.a_[k];
    return r;
}

SymMat SymMat::operator-(const SymMat& o) const {
    SymMat r = *this;
    for (std::size_t k = 0; k < 6; ++k) r.a_[k] -= o.a_[k];
    return r;
}

SymMat SymMat::operator*(double t) const {
    SymMat r = *this;
    for (std::size_t k = 0; k < 6; ++k) r.a_[k] *= t;
    return r;
}

SymMat& SymMat::operator+=(const SymMat& o) {
    for (std::size_t k = 0; k < 6; ++k) a_[k] += o.a_[k];
    return *this;
}

double SymMat::trace() const {
    double t = a_[0] + a_[1];
    if (dim_ == 3) t += a_[2];
    return t;
}

double SymMat::det() const {
    if (dim_ == 2) return a_[0] * a_[1] - a_[3] * a_[3];
    const double xx = a_[0], yy = a_[1], zz = a_[2], xy = a_[3], xz = a_[4], yz = a_[5];
    return xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz);
}

double SymMat::norm2() const {
    double s = a_[0] * a_[0] + a_[1] * a_[1] + 2.0 * a_[3] * a_[3];
    if (dim_ == 3) s += a_[2] * a_[2] + 2.0 * (a_[4] * a_[4] + a_[5] * a_[5]);
    return s;
}

double SymMat::norm() const { return std::sqrt(norm2()); }

double SymMat::max_abs() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
}

bool SymMat::is_finite() const {
    for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j)
            if (!std::isfinite((*this)(i, j))) return false;
    return true;
}

std::array<double, 9> SymMat::rows() const {
    std::array<double, 9> r{};
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) r[static_cast<std::size_t>(i * dim_ + j)] = (*this)(i, j);
    return r;
}

double inner(const SymMat& a, const SymMat& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) s += a(i, j) * b(i, j);
    return s;
}

SymMat Spectrum::recompose() const {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k)
                s += rotation[static_cast<std::size_t>(i * dim + k)] *
                     eigvals[static_cast<std::size_t>(k)] *
                     rotation[static_cast<std::size_t>(j * dim + k)];
            m.set(i, j, s);
        }
    }
    return m;
}

namespace {

// singular-value ordering: by |lambda| ascending, signed value breaks ties
bool sv_less(double a, double b) {
    double aa = std::abs(a), ab = std::abs(b);
    if (aa != ab) return aa < ab;
    return a < b;
}

struct EigPair {
    double lam;
    std::array<double, 3> vec;
};

void sort_and_pack(int dim, std::array<EigPair, 3>& pairs, Spectrum& out) {
    std::sort(pairs.begin(), pairs.begin() + dim,
              [](const EigPair& x, const EigPair& y) { return sv_less(x.lam, y.lam); });
    out.dim = dim;
    for (int k = 0; k < dim; ++k) {
        out.eigvals[static_cast<std::size_t>(k)] = pairs[static_cast<std::size_t>(k)].lam;
        for (int i = 0; i < dim; ++i)
            out.rotation[static_cast<std::size_t>(i * dim + k)] =
                pairs[static_cast<std::size_t>(k)].vec[static_cast<std::size_t>(i)];
    }
    // normalize to det +1 by flipping the last column if needed
    double d;
    if (dim == 2) {
        d = out.rotation[0] * out.rotation[3] - out.rotation[1] * out.rotation[2];
    } else {
        const auto& r = out.rotation;
        d = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
            r[2] * (r[3] * r[7] - r[4] * r[6]);
    }
    if (d < 0.0)
        for (int i = 0; i < dim; ++i) out.rotation[static_cast<std::size_t>(i * dim + (dim - 1))] *= -1.0;
}

Spectrum eigen2(const SymMat& m) {
    const double a = m(0, 0), b = m(0, 1), c = m(1, 1);
    std::array<EigPair, 3> pairs{};
    if (b == 0.0) {
        pairs[0] = {a, {1.0, 0.0, 0.0}};
        pairs[1] = {c, {0.0, 1.0, 0.0}};
    } else {
        const double mean = 0.5 * (a + c);
        const double r = std::hypot(0.5 * (a - c), b);
        const double th = 0.5 * std::atan2(2.0 * b, a - c);
        const double ct = std::cos(th), st = std::sin(th);
        // (ct, st) belongs to mean + r: check via Rayleigh quotient
        const double ray = a * ct * ct + 2.0 * b * ct * st + c * st * st;
        if (std::abs(ray - (mean + r)) <= std::abs(ray - (mean - r))) {
            pairs[0] = {mean + r, {ct, st, 0.0}};
            pairs[1] = {mean - r, {-st, ct, 0.0}};
        } else {
            pairs[0] = {mean - r, {ct, st, 0.0}};
            pairs[1] = {mean + r, {-st, ct, 0.0}};
        }
    }
    Spectrum s;
    sort_and_pack(2, pairs, s);
    return s;
}

std::array<double, 3> cross3(const std::array<double, 3>& u, const std::array<double, 3>& v) {
    return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

double dot3(const std::array<double, 3>& u, const std::array<double, 3>& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

std::array<double, 3> normalize3(const std::array<double, 3>& u) {
    double n = std::sqrt(dot3(u, u));
    return {u[0] / n, u[1] / n, u[2] / n};
}

// unit eigenvector of (m - lam I) by the largest row cross product
std::array<double, 3> null_vector3(const SymMat& m, double lam) {
    std::array<std::array<double, 3>, 3> rows;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                m(i, j) - (i == j ? lam : 0.0);
    std::array<std::array<double, 3>, 3> cand = {cross3(rows[0], rows[1]),
                                                 cross3(rows[0], rows[2]),
                                                 cross3(rows[1], rows[2])};
    int best = 0;
    double bn = dot3(cand[0], cand[0]);
    for (int k = 1; k < 3; ++k) {
        double n = dot3(cand[static_cast<std::size_t>(k)], cand[static_cast<std::size_t>(k)]);
        if (n > bn) { bn = n; best = k; }
    }
    if (bn == 0.0) return {1.0, 0.0, 0.0};  // (near) scalar matrix, any direction works
    return normalize3(cand[static_cast<std::size_t>(best)]);
}

// The analytic solve loses a few digits on clustered spectra; a couple of
// Jacobi sweeps on the almost-diagonal R^T m R restore machine precision
// without changing the decomposition.
void jacobi_cleanup(const SymMat& m, Spectrum& s) {
    const double scale = std::max(m.max_abs(), 1e-300);
    double d[3][3];
    double r[3][3];
    for (int i = 0; i < 3; ++i)
        for (int jc = 0; jc < 3; ++jc)
            r[i][jc] = s.rotation[static_cast<std::size_t>(i * 3 + jc)];
    for (int i = 0; i < 3; ++i) {
        for (int jc = 0; jc < 3; ++jc) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) acc += r[a][i] * m(a, b) * r[b][jc];
            d[i][jc] = acc;
        }
    }
    for (int sweep = 0; sweep < 4; ++sweep) {
        double off = std::abs(d[0][1]) + std::abs(d[0][2]) + std::abs(d[1][2]);
        if (off <= 1e-15 * scale) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(d[p][q]) <= 1e-18 * scale) continue;
                double theta = 0.5 * (d[q][q] - d[p][p]) / d[p][q];
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (int k = 0; k < 3; ++k) {
                    double dkp = d[k][p], dkq = d[k][q];
                    d[k][p] = c * dkp - sn * dkq;
                    d[k][q] = sn * dkp + c * dkq;
                }
                for (int k = 0; k < 3; ++k) {
                    double dpk = d[p][k], dqk = d[q][k];
                    d[p][k] = c * dpk - sn * dqk;
                    d[q][k] = sn * dpk + c * dqk;
                }
                d[p][q] = d[q][p] = 0.0;
                for (int k = 0; k < 3; ++k) {
                    double rkp = r[k][p], rkq = r[k][q];
                    r[k][p] = c * rkp - sn * rkq;
                    r[k][q] = sn * rkp + c * rkq;
                }
            }
        }
    }
    std::array<EigPair, 3> pairs{};
    for (int k = 0; k < 3; ++k) {
        pairs[static_cast<std::size_t>(k)].lam = d[k][k];
        for (int i = 0; i < 3; ++i)
            pairs[static_cast<std::size_t>(k)].vec[static_cast<std::size_t>(i)] = r[i][k];
    }
    sort_and_pack(3, pairs, s);
}

Spectrum eigen3(const SymMat& m) {
    const double scale = std::max(m.max_abs(), 1e-300);
    SymMat b = m * (1.0 / scale);

    const double p1 = b(0, 1) * b(0, 1) + b(0, 2) * b(0, 2) + b(1, 2) * b(1, 2);
    std::array<EigPair, 3> pairs{};
    if (p1 == 0.0) {
        for (int i = 0; i < 3; ++i) {
            pairs[static_cast<std::size_t>(i)].lam = m(i, i);
            pairs[static_cast<std::size_t>(i)].vec = {0.0, 0.0, 0.0};
            pairs[static_cast<std::size_t>(i)].vec[static_cast<std::size_t>(i)] = 1.0;
        }
        Spectrum s;
        sort_and_pack(3, pairs, s);
        return s;
    }

    // trigonometric form of Cardano for the characteristic roots
    const double q = b.trace() / 3.0;
    const double p2 = (b(0, 0) - q) * (b(0, 0) - q) + (b(1, 1) - q) * (b(1, 1) - q) +
                      (b(2, 2) - q) * (b(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    SymMat c = (b - SymMat::identity(3) * q) * (1.0 / p);
    double r = std::clamp(c.det() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    double mu1 = q + 2.0 * p * std::cos(phi);                  // largest
    double mu3 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0); // smallest
    double mu2 = 3.0 * q - mu1 - mu3;

    // one Newton step per root on det(b - t I)
    const double i1 = b.trace();
    const double i2 = b(0, 0) * b(1, 1) - b(0, 1) * b(0, 1) + b(0, 0) * b(2, 2) -
                      b(0, 2) * b(0, 2) + b(1, 1) * b(2, 2) - b(1, 2) * b(1, 2);
    const double i3 = b.det();
    auto polish = [&](double t) {
        double f = -t * t * t + i1 * t * t - i2 * t + i3;
        double df = -3.0 * t * t + 2.0 * i1 * t - i2;
        if (std::abs(df) > 1e-8) t -= f / df;
        return t;
    };
    mu1 = polish(mu1);
    mu2 = polish(mu2);
    mu3 = polish(mu3);

    // eigenvector of the best-separated root first, then deflate to 2x2
    double g1 = mu2 - mu3, g3 = mu1 - mu2;  // mu3 <= mu2 <= mu1
    double iso = (g1 >= g3) ? mu3 : mu1;
    std::array<double, 3> w = null_vector3(b, iso);

    std::array<double, 3> t = (std::abs(w[0]) < 0.9) ? std::array<double, 3>{1.0, 0.0, 0.0}
                                                     : std::array<double, 3>{0.0, 1.0, 0.0};
    double proj = dot3(t, w);
    std::array<double, 3> u = normalize3({t[0] - proj * w[0], t[1] - proj * w[1], t[2] - proj * w[2]});
    std::array<double, 3> v = cross3(w, u);

    auto apply = [&](const std::array<double, 3>& x) {
        std::array<double, 3> y{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) y[static_cast<std::size_t>(i)] += b(i, j) * x[static_cast<std::size_t>(j)];
        return y;
    };
    std::array<double, 3> bu = apply(u), bv = apply(v);
    const double tuu = dot3(u, bu), tuv = dot3(u, bv), tvv = dot3(v, bv);

    // 2x2 eigenproblem in span{u, v}
    double cc = 1.0, ss = 0.0, l1, l2;
    if (tuv == 0.0) {
        l1 = tuu;
        l2 = tvv;
    } else {
        const double mean = 0.5 * (tuu + tvv);
        const double rad = std::hypot(0.5 * (tuu - tvv), tuv);
        const double th = 0.5 * std::atan2(2.0 * tuv, tuu - tvv);
        cc = std::cos(th);
        ss = std::sin(th);
        const double ray = tuu * cc * cc + 2.0 * tuv * cc * ss + tvv * ss * ss;
        if (std::abs(ray - (mean + rad)) <= std::abs(ray - (mean - rad))) {
            l1 = mean + rad;
            l2 = mean - rad;
        } else {
            l1 = mean - rad;
            l2 = mean + rad;
        }
    }
    std::array<double, 3> e1{}, e2{};
    for (int i = 0; i < 3; ++i) {
        e1[static_cast<std::size_t>(i)] = cc * u[static_cast<std::size_t>(i)] + ss * v[static_cast<std::size_t>(i)];
        e2[static_cast<std::size_t>(i)] = -ss * u[static_cast<std::size_t>(i)] + cc * v[static_cast<std::size_t>(i)];
    }

    pairs[0] = {scale * iso, w};
    pairs[1] = {scale * l1, e1};
    pairs[2] = {scale * l2, e2};
    Spectrum s;
    sort_and_pack(3, pairs, s);
    jacobi_cleanup(m, s);
    return s;
}

}  // namespace

Spectrum eigen_ordered(const SymMat& m) {
    if (!m.is_finite()) throw std::invalid_argument("eigen_ordered: non-finite entries");
    return m.dim() == 2 ? eigen2(m) : eigen3(m);
}

std::array<double, 9> random_rotation(int dim, Rng& rng) {
    std::array<double, 9> p{};
    if (dim == 2) {
        double th = rng.uniform(0.0, 2.0 * kPi);
        double c = std::cos(th), s = std::sin(th);
        p = {c, -s, s, c, 0.0, 0.0, 0.0, 0.0, 0.0};  // row-major 2x2
    } else {
        // rotation from a random unit quaternion
        double q0 = rng.normal(), q1 = rng.normal(), q2 = rng.normal(), q3 = rng.normal();
        double n = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
        if (n == 0.0) { q0 = 1.0; n = 1.0; }
        q0 /= n; q1 /= n; q2 /= n; q3 /= n;
        p = {1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
             2 * (q1 * q2 + q0 * q3), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1),
             2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 1 - 2 * (q1 * q1 + q2 * q2)};
    }
    return p;
}

SymMat rotate(const SymMat& m, const std::array<double, 9>& p) {
    const int n = m.dim();
    SymMat r(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    s += p[static_cast<std::size_t>(i * n + k)] * m(k, l) *
                         p[static_cast<std::size_t>(j * n + l)];
            r.set(i, j, s);
        }
    }
    return r;
}

SymMat random_sym(int dim, Rng& rng, double scale) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) m.set(i, j, rng.uniform(-scale, scale));
    return m;
}

std::vector<WaveConeSample> sample_wave_cone(int dim, std::uint64_t rng_seed, int count) {
    if (count < 1) throw std::invalid_argument("sample_wave_cone: count must be >= 1");
    Rng rng(rng_seed);
    std::vector<WaveConeSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        std::array<double, 3> d{};
        for (int i = 1; i < dim; ++i) d[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
        auto p = random_rotation(dim, rng);
        SymMat m = rotate(SymMat::diag(dim, d), p);
        out.push_back({m, m.det()});
    }
    return out;
}

}  // namespace vmass
