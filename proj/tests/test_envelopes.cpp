#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vmass/envelope.hpp"
#include "vmass/integrand.hpp"
#include "vmass/rng.hpp"

using namespace vmass;

TEST_CASE("KSParams validation and derived scales") {
    CHECK_THROWS_AS(KSParams(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KSParams(1.0, -2.0), std::invalid_argument);
    CHECK(KSParams(4.0, 1.0).rho_hat_scale() == doctest::Approx(2.0));

    KSParams eps = KSParams::from_eps(1e-2);
    CHECK(eps.alpha == doctest::Approx(5e-3));
    CHECK(eps.beta == doctest::Approx(50.0));
    CHECK_THROWS_AS(KSParams::from_eps(0.0), std::invalid_argument);

    KSParams lag = KSParams::lagrange(1e-2, 0.25, 3.0);
    CHECK(lag.alpha == doctest::Approx(5e-3));
    CHECK(lag.beta == doctest::Approx(9.0 / (2.0 * 0.25 * 1e-2)));
}

TEST_CASE("two-well integrand h") {
    KSParams p(1.0, 1.0);
    CHECK(ks_h(SymMat::zero(2), p) == 0.0);
    CHECK(ks_h(SymMat::identity(2), p) == doctest::Approx(3.0));
    // the well at zero is decided by an exact norm test
    CHECK(ks_h(SymMat::diag(2, {1e-300, 0.0, 0.0}), p) == doctest::Approx(1.0));
}

TEST_CASE("envelope values from the piecewise formulas") {
    KSParams p(1.0, 1.0);
    // rho_polar = 2 >= sqrt(beta/alpha) = 1: unrelaxed branch
    CHECK(q_div_h_general(SymMat::diag(2, {2.0, 0.0, 0.0}), p) == doctest::Approx(5.0));
    CHECK(q_div_h_explicit(SymMat::diag(2, {2.0, 0.0, 0.0}), p) == doctest::Approx(5.0));

    // rho_hat = 0.5: 0.125 + 0.75 through the general form, and
    // 2 sqrt(ab) rho_polar - 2 a |t1 t2| through the explicit one
    SymMat quarter = SymMat::diag(2, {0.25, 0.25, 0.0});
    CHECK(q_div_h_general(quarter, p) == doctest::Approx(0.875).epsilon(1e-14));
    CHECK(q_div_h_explicit(quarter, p) == doctest::Approx(0.875).epsilon(1e-14));

    CHECK(q_div_h_general(SymMat::zero(3), p) == 0.0);

    // 3D fat branch: 2 sqrt(ab) rho_polar + a (|t|^2/2 - sum |ti tj|)
    KSParams p2(1.0, 100.0);
    double expected = 20.0 * (3.0 / std::sqrt(2.0)) + (0.5 * 3.0 - 3.0);
    CHECK(q_div_h_explicit(SymMat::identity(3), p2) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(q_div_h_general(SymMat::identity(3), p2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("general and explicit envelopes agree on random input") {
    Rng rng(21);
    double worst = 0.0;
    for (int dim : {2, 3}) {
        for (int it = 0; it < 100000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            KSParams p(rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0));
            worst = std::max(worst,
                             std::abs(q_div_h_general(t, p) - q_div_h_explicit(t, p)));
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("envelope is squeezed between zero and h, equal on the unrelaxed branch") {
    Rng rng(22);
    for (int dim : {2, 3}) {
        for (int it = 0; it < 20000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            KSParams p(rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0));
            double env = q_div_h_general(t, p);
            double h = ks_h(t, p);
            CHECK(env >= 0.0);
            CHECK(env <= h + 1e-12 * std::max(1.0, h));
            if (p.rho_hat_scale() * rho_polar(t).value >= 1.0)
                CHECK(env == doctest::Approx(h).epsilon(1e-14));
        }
    }
}

TEST_CASE("eps family: frozen value and pointwise polar limit") {
    CHECK(q_div_h_eps(SymMat::diag(2, {1.0, 1.0, 0.0}), 1e-3) ==
          doctest::Approx(1.999).epsilon(1e-14));
    CHECK(q_div_h_eps(SymMat::zero(2), 1e-3) == 0.0);
    CHECK_THROWS_AS(q_div_h_eps(SymMat::identity(2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(q_div_h_eps(SymMat::identity(2), -1.0), std::invalid_argument);

    Rng rng(23);
    for (int dim : {2, 3}) {
        for (int it = 0; it < 5000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            double rp = rho_polar(t).value;
            for (double eps : {1e-2, 1e-3, 1e-4}) {
                double err = std::abs(q_div_h_eps(t, eps) - rp);
                CHECK(err <= eps * (t.norm2() + rp * rp) + 1e-15);
            }
        }
    }
}

TEST_CASE("capped mass penalty increases monotonically to the envelope") {
    // stand-in for the truncated integrands used to exhaust h from below:
    // capping beta at M gives envelopes that grow with M and reach the
    // uncapped value once M >= beta
    Rng rng(24);
    for (int dim : {2, 3}) {
        for (int it = 0; it < 2000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            KSParams p(rng.uniform(0.1, 4.0), rng.uniform(0.5, 8.0));
            double prev = -1.0;
            for (double cap = 0.25; cap <= 16.0; cap *= 2.0) {
                KSParams capped(p.alpha, std::min(p.beta, cap));
                double v = q_div_h_general(t, capped);
                CHECK(v >= prev - 1e-12);
                prev = v;
                if (cap >= p.beta)
                    CHECK(v == doctest::Approx(q_div_h_general(t, p)).epsilon(1e-14));
            }
            // the pointwise integrands also increase in M
            double hm_prev = -1.0;
            for (double em = 0.5; em <= 64.0; em *= 2.0) {
                double n2 = t.norm2();
                double hm = n2 == 0.0 ? 0.0 : std::min(p.alpha * n2 + p.beta, em * n2);
                CHECK(hm >= hm_prev - 1e-12);
                hm_prev = hm;
            }
        }
    }
}

TEST_CASE("Lagrange-multiplier family matches its displayed envelope") {
    // with alpha = eps/2, beta = kappa^2/(2 m eps) the low branch reads
    // (kappa/sqrt(m)) rho_polar(tau) - eps |t1 t2| in 2D, and in 3D gains
    // (eps/2)(|tau|^2/2 - sum |ti tj|) on the fat side
    Rng rng(26);
    for (int it = 0; it < 20000; ++it) {
        double eps = rng.uniform(1e-3, 0.5);
        double mass = rng.uniform(0.05, 0.95);
        double kappa = rng.uniform(0.5, 4.0);
        KSParams p = KSParams::lagrange(eps, mass, kappa);
        int dim = it % 2 == 0 ? 2 : 3;
        SymMat t = random_sym(dim, rng, 2.0);
        Spectrum s = eigen_ordered(t);
        double t1 = std::abs(s.eigvals[0]), t2 = std::abs(s.eigvals[1]);
        double rp = rho_polar(t).value;
        double expected;
        if (rp >= kappa / (eps * std::sqrt(mass))) {
            expected = 0.5 * eps * t.norm2() + kappa * kappa / (2.0 * mass * eps);
        } else if (dim == 2 || t1 + t2 <= std::abs(s.eigvals[2])) {
            expected = kappa / std::sqrt(mass) * rp - eps * t1 * t2;
        } else {
            double t3 = std::abs(s.eigvals[2]);
            expected = kappa / std::sqrt(mass) * rp +
                       0.5 * eps * (0.5 * t.norm2() - t1 * t2 - t1 * t3 - t2 * t3);
        }
        CHECK(q_div_h_explicit(t, p) ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(q_div_h_general(t, p) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("envelope is midpoint convex along wave-cone lines") {
    Rng rng(25);
    for (int dim : {2, 3}) {
        auto cone = sample_wave_cone(dim, 77, 100);
        for (const auto& dir : cone) {
            SymMat base = random_sym(dim, rng, 2.0);
            KSParams p(rng.uniform(0.1, 4.0), rng.uniform(0.1, 4.0));
            double vals[41];
            for (int i = 0; i <= 40; ++i)
                vals[i] = q_div_h_general(base + dir.matrix * (-2.0 + 0.1 * i), p);
            for (int i = 1; i < 40; ++i)
                CHECK(vals[i - 1] + vals[i + 1] - 2.0 * vals[i] >= -1e-9);
        }
    }
}
