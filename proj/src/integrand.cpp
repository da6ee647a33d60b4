#include "vmass/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vmass {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kHalfPi = 1.57079632679489661923;

}  // namespace

std::string branch_name(Branch b) {
    switch (b) {
        case Branch::thin: return "thin";
        case Branch::fat: return "fat";
        default: return "none";
    }
}

double j(const SymMat& xi) { return 0.5 * xi.norm2(); }

double j_star(const SymMat& tau) { return 0.5 * tau.norm2(); }

double j_bar(const SymMat& xi) {
    Spectrum s = eigen_ordered(xi);
    double acc = 0.0;
    for (int i = 1; i < xi.dim(); ++i) {
        double e = s.eigvals[static_cast<std::size_t>(i)];
        acc += e * e;
    }
    return 0.5 * acc;
}

double rho(const SymMat& xi) {
    Spectrum s = eigen_ordered(xi);
    double acc = 0.0;
    for (int i = 1; i < xi.dim(); ++i) {
        double e = s.eigvals[static_cast<std::size_t>(i)];
        acc += e * e;
    }
    return std::sqrt(acc);
}

IntegrandValue rho_polar(const SymMat& tau) {
    Spectrum s = eigen_ordered(tau);
    const double t1 = std::abs(s.eigvals[0]);
    const double t2 = std::abs(s.eigvals[1]);
    if (tau.dim() == 2) return {t1 + t2, Branch::none};
    const double t3 = std::abs(s.eigvals[2]);
    if (t1 + t2 <= t3) return {std::hypot(t1 + t2, t3), Branch::thin};
    return {(t1 + t2 + t3) / kSqrt2, Branch::fat};
}

double j_bar_star(const SymMat& tau) {
    double r = rho_polar(tau).value;
    return 0.5 * r * r;
}

double q_alpha(const SymMat& tau, double alpha) {
    if (tau.dim() != 2) throw std::invalid_argument("q_alpha: requires dim == 2");
    return 0.5 * tau.norm2() + alpha * tau.det();
}

double Q_xi_form(const SymMat& xi, const SymMat& tau) {
    if (rho(xi) > 1.0 + 1e-12)
        throw std::invalid_argument("Q_xi: rho(xi) must be <= 1");
    double ip = inner(xi, tau);
    return 0.5 * tau.norm2() - 0.5 * ip * ip;
}

namespace {

// Feasible set of the diagonalized polar problem, { rho(diag(x)) <= 1 }:
// the sup-norm box in 2D, and in 3D the intersection of the pairwise
// cylinders x_i^2 + x_j^2 <= 1 (equivalently, the two largest squares sum
// to at most one). Rescaling violated pairs only ever shrinks coordinates,
// so a couple of sweeps land inside the set.
void project_feasible(int dim, double* x) {
    if (dim == 2) {
        x[0] = std::clamp(x[0], -1.0, 1.0);
        x[1] = std::clamp(x[1], -1.0, 1.0);
        return;
    }
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int i = 0; i < dim; ++i) {
            for (int jj = i + 1; jj < dim; ++jj) {
                double s = x[i] * x[i] + x[jj] * x[jj];
                if (s > 1.0) {
                    double t = 1.0 / std::sqrt(s);
                    x[i] *= t;
                    x[jj] *= t;
                }
            }
        }
    }
}

double polish(int dim, const double* d, double* x, int iters) {
    double best = 0.0;
    for (int i = 0; i < dim; ++i) best += d[i] * x[i];
    double step = 0.5;
    double gnorm = 0.0;
    for (int i = 0; i < dim; ++i) gnorm = std::max(gnorm, std::abs(d[i]));
    if (gnorm == 0.0) return best;
    for (int it = 0; it < iters; ++it) {
        double y[3];
        for (int i = 0; i < dim; ++i) y[i] = x[i] + step / gnorm * d[i];
        project_feasible(dim, y);
        double val = 0.0;
        for (int i = 0; i < dim; ++i) val += d[i] * y[i];
        if (val > best) {
            best = val;
            for (int i = 0; i < dim; ++i) x[i] = y[i];
        } else {
            step *= 0.5;
        }
    }
    return best;
}

}  // namespace

double rho_polar_bruteforce(const SymMat& tau, int grid_n) {
    if (grid_n < 64) throw std::invalid_argument("rho_polar_bruteforce: grid_n must be >= 64");
    Spectrum s = eigen_ordered(tau);
    const int dim = tau.dim();
    double d[3] = {std::abs(s.eigvals[0]), std::abs(s.eigvals[1]),
                   dim == 3 ? std::abs(s.eigvals[2]) : 0.0};
    // the optimizer picks x_i = sign(tau_i) |x_i|, so it is enough to search
    // the nonnegative orthant against |d|
    double best = 0.0;
    double xb[3] = {0.0, 0.0, 0.0};
    if (dim == 2) {
        // boundary of the unit box, parametrized by the angle
        for (int i = 0; i <= grid_n; ++i) {
            double th = kHalfPi * static_cast<double>(i) / static_cast<double>(grid_n);
            double c = std::cos(th), sn = std::sin(th);
            double scale = 1.0 / std::max(c, sn);
            double val = scale * (d[0] * c + d[1] * sn);
            if (val > best) {
                best = val;
                xb[0] = scale * c;
                xb[1] = scale * sn;
            }
        }
    } else {
        // spherical octant scaled onto the boundary of the pairwise cylinder
        // intersection; numerator and denominator are both 2-homogeneous so
        // the sqrt can wait until the end
        std::vector<double> cph(static_cast<std::size_t>(grid_n) + 1);
        std::vector<double> sph(static_cast<std::size_t>(grid_n) + 1);
        for (int jj = 0; jj <= grid_n; ++jj) {
            double ph = kHalfPi * static_cast<double>(jj) / static_cast<double>(grid_n);
            cph[static_cast<std::size_t>(jj)] = std::cos(ph);
            sph[static_cast<std::size_t>(jj)] = std::sin(ph);
        }
        double best_num = 0.0, best_den = 1.0;
        int bi = 0, bj = 0;
        for (int i = 0; i <= grid_n; ++i) {
            const double ct = cph[static_cast<std::size_t>(i)];
            const double st = sph[static_cast<std::size_t>(i)];
            const double a = d[0] * ct + d[1] * st;       // times sin(phi)
            const double mt = std::max(ct * ct, st * st);  // times sin^2(phi)
            for (int jj = 0; jj <= grid_n; ++jj) {
                const double sp = sph[static_cast<std::size_t>(jj)];
                const double cp = cph[static_cast<std::size_t>(jj)];
                const double sp2 = sp * sp;
                const double num0 = a * sp + d[2] * cp;
                const double num = num0 * num0;
                const double den = std::max(sp2, cp * cp + sp2 * mt);
                if (num * best_den > best_num * den) {
                    best_num = num;
                    best_den = den;
                    bi = i;
                    bj = jj;
                }
            }
        }
        if (best_den > 0.0) {
            best = std::sqrt(best_num / best_den);
            double ct = cph[static_cast<std::size_t>(bi)], st = sph[static_cast<std::size_t>(bi)];
            double sp = sph[static_cast<std::size_t>(bj)], cp = cph[static_cast<std::size_t>(bj)];
            double u[3] = {ct * sp, st * sp, cp};
            double den = std::sqrt(std::max({u[0] * u[0] + u[1] * u[1],
                                             u[0] * u[0] + u[2] * u[2],
                                             u[1] * u[1] + u[2] * u[2]}));
            if (den > 0.0)
                for (int k = 0; k < 3; ++k) xb[k] = u[k] / den;
        }
    }
    return polish(dim, d, xb, 60);
}

ConvexityReport lambda_div_convexity_check(
    const std::function<double(const SymMat&)>& qform, int dim,
    std::uint64_t seed, int count) {
    auto samples = sample_wave_cone(dim, seed, count);
    ConvexityReport rep;
    rep.samples = count;
    rep.min_value = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) rep.min_value = std::min(rep.min_value, qform(s.matrix));
    rep.pass = rep.min_value >= -1e-10;
    return rep;
}

}  // namespace vmass
