#include "vmass/check_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmass/envelope.hpp"
#include "vmass/integrand.hpp"
#include "vmass/laminate.hpp"
#include "vmass/michell.hpp"
#include "vmass/mollify.hpp"
#include "vmass/rng.hpp"

namespace vmass {

namespace {

void push(std::vector<PropertyResult>& out, const std::string& name, double value,
          double threshold, bool lower_bound = false) {
    PropertyResult r;
    r.name = name;
    r.value = value;
    r.threshold = threshold;
    r.lower_bound = lower_bound;
    r.pass = lower_bound ? value >= threshold : value <= threshold;
    out.push_back(r);
}

// independent closed form for jbar*, written directly from the eigenvalues
double jbs_closed(const SymMat& t) {
    Spectrum s = eigen_ordered(t);
    double t1 = std::abs(s.eigvals[0]), t2 = std::abs(s.eigvals[1]);
    if (t.dim() == 2) return 0.5 * (t1 + t2) * (t1 + t2);
    double t3 = std::abs(s.eigvals[2]);
    if (t1 + t2 <= t3) return 0.5 * ((t1 + t2) * (t1 + t2) + t3 * t3);
    return 0.25 * (t1 + t2 + t3) * (t1 + t2 + t3);
}

SymMat random_admissible_xi(int dim, Rng& rng) {
    for (;;) {
        SymMat xi = random_sym(dim, rng, 1.0);
        double r = rho(xi);
        if (r > 1e-8) return xi * (rng.uniform(0.2, 1.0) / r);
    }
}

void tensor_checks(std::vector<PropertyResult>& out, std::uint64_t seed) {
    Rng rng(seed + 1);
    double recompose_err = 0.0, frob_err = 0.0, covariance_err = 0.0, orth_err = 0.0;
    for (int dim : {2, 3}) {
        for (int it = 0; it < 2000; ++it) {
            SymMat m = random_sym(dim, rng, 3.0);
            Spectrum s = eigen_ordered(m);
            recompose_err = std::max(recompose_err, (s.recompose() - m).norm());
            double sum2 = 0.0;
            for (int i = 0; i < dim; ++i)
                sum2 += s.eigvals[static_cast<std::size_t>(i)] * s.eigvals[static_cast<std::size_t>(i)];
            frob_err = std::max(frob_err, std::abs(sum2 - m.norm2()));
            for (int i = 0; i < dim; ++i) {
                for (int jc = 0; jc < dim; ++jc) {
                    double dot = 0.0;
                    for (int r = 0; r < dim; ++r)
                        dot += s.rotation[static_cast<std::size_t>(r * dim + i)] *
                               s.rotation[static_cast<std::size_t>(r * dim + jc)];
                    orth_err = std::max(orth_err, std::abs(dot - (i == jc ? 1.0 : 0.0)));
                }
            }
            auto p = random_rotation(dim, rng);
            Spectrum sr = eigen_ordered(rotate(m, p));
            for (int i = 0; i < dim; ++i)
                covariance_err = std::max(covariance_err,
                                          std::abs(sr.eigvals[static_cast<std::size_t>(i)] -
                                                   s.eigvals[static_cast<std::size_t>(i)]));
        }
    }
    push(out, "tensor.recompose_frobenius", recompose_err, 1e-12);
    push(out, "tensor.eigenvalue_norm_identity", frob_err, 1e-12);
    push(out, "tensor.rotation_orthogonality", orth_err, 1e-12);
    push(out, "tensor.eigenvalue_rotation_covariance", covariance_err, 1e-10);

    double det_err = 0.0;
    for (int dim : {2, 3}) {
        auto samples = sample_wave_cone(dim, seed + 2, 500);
        for (const auto& s : samples)
            det_err = std::max(det_err, std::abs(s.certificate) /
                                            std::max(1.0, std::pow(s.matrix.norm(), dim)));
    }
    push(out, "tensor.wave_cone_singularity", det_err, 1e-12);
}

void integrand_checks(std::vector<PropertyResult>& out, std::uint64_t seed) {
    Rng rng(seed + 3);

    double cone_err = 0.0;
    for (int dim : {2, 3}) {
        for (const auto& s : sample_wave_cone(dim, seed + 4, 2000))
            cone_err = std::max(cone_err, std::abs(j_bar_star(s.matrix) - j_star(s.matrix)));
    }
    push(out, "integrand.jbar_star_equals_j_star_on_cone", cone_err, 1e-10);

    double square_err = 0.0, qa_err = 0.0, sandwich_viol = 0.0, diag_err = 0.0, homo_err = 0.0;
    for (int dim : {2, 3}) {
        for (int it = 0; it < 5000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            square_err = std::max(square_err, std::abs(j_bar_star(t) - jbs_closed(t)));
            if (dim == 2) {
                double qmax = std::max(q_alpha(t, -1.0), q_alpha(t, 1.0));
                qa_err = std::max(qa_err, std::abs(qmax - j_bar_star(t)));
            }
            double jb = j_bar(t);
            double lower = t.norm2() / (2.0 * dim), upper = 0.5 * t.norm2();
            sandwich_viol = std::max({sandwich_viol, lower - jb, jb - upper});
            Spectrum s = eigen_ordered(t);
            double diag_tail = 0.0, eig_tail = 0.0;
            for (int i = 1; i < dim; ++i) {
                diag_tail += t(i, i) * t(i, i);
                eig_tail += s.eigvals[static_cast<std::size_t>(i)] * s.eigvals[static_cast<std::size_t>(i)];
            }
            diag_err = std::max(diag_err, diag_tail - eig_tail);
            double c = rng.uniform(0.1, 10.0);
            homo_err = std::max(homo_err,
                                std::abs(rho_polar(t * c).value - c * rho_polar(t).value) /
                                    std::max(1.0, c * rho_polar(t).value));
        }
    }
    push(out, "integrand.jbar_star_piecewise_form", square_err, 1e-12);
    push(out, "integrand.q_alpha_max_identity", qa_err, 1e-12);
    push(out, "integrand.jbar_two_sided_bound", sandwich_viol, 0.0);
    push(out, "integrand.diagonal_entries_inequality", diag_err, 1e-12);
    push(out, "integrand.polar_homogeneity", homo_err, 1e-12);

    double oracle_err = 0.0;
    for (int dim : {2, 3}) {
        for (int it = 0; it < 50; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            double closed = rho_polar(t).value;
            double brute = rho_polar_bruteforce(t, 512);
            oracle_err = std::max(oracle_err, std::abs(closed - brute) / std::max(1.0, closed));
        }
    }
    push(out, "integrand.polar_bruteforce_agreement", oracle_err, 5e-3);

    double qxi_min = 0.0;
    for (int it = 0; it < 50; ++it) {
        int dim = it % 2 == 0 ? 2 : 3;
        SymMat xi = random_admissible_xi(dim, rng);
        auto rep = lambda_div_convexity_check(
            [&](const SymMat& s) { return Q_xi_form(xi, s); }, dim, seed + 5 + it, 400);
        qxi_min = std::min(qxi_min, rep.min_value);
    }
    push(out, "integrand.Q_xi_cone_nonnegativity", qxi_min, -1e-10, true);

    auto neg = lambda_div_convexity_check(
        [](const SymMat& s) { return -0.5 * s.norm2(); }, 2, seed + 6, 400);
    push(out, "integrand.negative_definite_control_fails", neg.pass ? 1.0 : 0.0, 0.0);
}

void envelope_checks(std::vector<PropertyResult>& out, std::uint64_t seed) {
    Rng rng(seed + 7);
    double agree = 0.0, bound_viol = 0.0, eps_rate_viol = 0.0, mono_viol = 0.0, conv_viol = 0.0;
    for (int dim : {2, 3}) {
        for (int it = 0; it < 5000; ++it) {
            SymMat t = random_sym(dim, rng, 3.0);
            KSParams p(rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0));
            double g = q_div_h_general(t, p), e = q_div_h_explicit(t, p);
            agree = std::max(agree, std::abs(g - e));
            double h = ks_h(t, p);
            bound_viol = std::max({bound_viol, -g, g - h - 1e-12});
            for (double eps : {1e-2, 1e-3}) {
                double rp = rho_polar(t).value;
                double err = std::abs(q_div_h_eps(t, eps) - rp);
                eps_rate_viol = std::max(eps_rate_viol, err - eps * (t.norm2() + rp * rp));
            }
            // capped mass penalty grows the envelope monotonically
            double prev = 0.0;
            for (double mcap : {0.5, 1.0, 2.0, 4.0}) {
                KSParams capped(p.alpha, std::min(p.beta, mcap));
                double v = q_div_h_general(t, capped);
                mono_viol = std::max(mono_viol, prev - v - 1e-12);
                prev = v;
            }
        }
        // midpoint convexity along wave-cone lines
        auto cone = sample_wave_cone(dim, seed + 8, 40);
        for (const auto& dir : cone) {
            SymMat base = random_sym(dim, rng, 2.0);
            KSParams p(rng.uniform(0.1, 4.0), rng.uniform(0.1, 4.0));
            double vals[41];
            for (int i = 0; i <= 40; ++i) {
                double tpar = -2.0 + 0.1 * i;
                vals[i] = q_div_h_general(base + dir.matrix * tpar, p);
            }
            for (int i = 1; i < 40; ++i)
                conv_viol = std::max(conv_viol, 2.0 * vals[i] - vals[i - 1] - vals[i + 1]);
        }
    }
    push(out, "envelope.general_vs_explicit", agree, 1e-10);
    push(out, "envelope.zero_le_envelope_le_h", bound_viol, 0.0);
    push(out, "envelope.eps_family_polar_limit_rate", eps_rate_viol, 0.0);
    push(out, "envelope.capped_penalty_monotone", mono_viol, 0.0);
    push(out, "envelope.wave_cone_midpoint_convexity", conv_viol, 1e-9);
}

void laminate_checks(std::vector<PropertyResult>& out, std::uint64_t seed) {
    Rng rng(seed + 9);
    // closed-form energies
    double e2 = 0.0;
    for (double eps : {0.3, 0.05, 1e-3})
        e2 = std::max(e2, std::abs(energy_eps(build_construction({1.0, 2.0}, eps, 4)) - 4.5));
    push(out, "laminate.energy_2d_exact", e2, 1e-12);

    double e31 = 0.0, e32 = 0.0;
    for (double eps : {0.2, 0.02}) {
        auto c1 = build_construction({1.0, 1.0, 3.0}, eps, 3);
        e31 = std::max(e31, std::abs(energy_eps(c1) - (6.5 - 1.125 * eps)));
        auto c2 = build_construction({1.0, 1.0, 1.0}, eps, 3);
        e32 = std::max(e32, std::abs(energy_eps(c2) - (2.25 - 0.375 * eps)));
    }
    push(out, "laminate.energy_3d_case1_remainder", e31, 1e-12);
    push(out, "laminate.energy_3d_case2_remainder", e32, 1e-12);

    double div_resid = 0.0;
    for (auto alphas : std::vector<std::vector<double>>{{1.0, 2.0}, {1.0, 1.0, 3.0}, {1.0, 1.0, 1.0}}) {
        auto c = build_construction(alphas, 0.2, 5);
        div_resid = std::max(div_resid, weak_divergence_residual(c, 2, 16));
    }
    push(out, "laminate.weak_divergence_residual", div_resid, 1e-10);
    auto bad = corrupt_carriers(build_construction({1.0, 2.0}, 0.2, 5));
    push(out, "laminate.corrupted_control_detects", weak_divergence_residual(bad, 2, 16), 1e-3, true);

    double cc_min_margin = std::numeric_limits<double>::infinity();
    double cc_zero_err = 0.0;
    for (auto alphas : std::vector<std::vector<double>>{{1.0, 2.0}, {1.0, 1.0, 3.0}, {1.0, 1.0, 1.0}}) {
        double sum2 = 0.0;
        for (double a : alphas) sum2 += a * a;
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            auto c = build_construction(alphas, eps, default_k_rule(eps));
            cc_zero_err = std::max(cc_zero_err,
                                   std::abs(cc_check(c, SymMat::zero(c.dim)) - energy_eps(c)));
            for (int it = 0; it < 25; ++it) {
                SymMat xi = random_admissible_xi(c.dim, rng);
                double v = cc_check(c, xi);
                cc_min_margin = std::min(cc_min_margin, v + 10.0 * eps * sum2 * sum2);
            }
        }
    }
    push(out, "laminate.cc_lower_bound_margin", cc_min_margin, 0.0, true);
    push(out, "laminate.cc_at_zero_equals_energy", cc_zero_err, 1e-12);

    auto study = convergence_study({1.0, 1.0, 3.0}, {1e-1, 1e-2, 1e-3, 1e-4});
    push(out, "laminate.case1_loglog_slope", std::abs(study.slope - 1.0), 0.01);

    // inclusion-exclusion against the pattern table
    auto c = build_construction({1.0, 1.0, 1.0}, 0.3, 2);
    auto table = measure_table(c);
    double ie = table.family_measure(0) + table.family_measure(1) + table.family_measure(2) -
                table.pair_measure(0, 1) - table.pair_measure(0, 2) - table.pair_measure(1, 2) +
                table.triple_measure();
    push(out, "laminate.inclusion_exclusion", std::abs(ie - table.union_measure()), 1e-15);
}

void michell_checks(std::vector<PropertyResult>& out) {
    auto gs = make_ground_structure(
        2, {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}},
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    LoadCase lc;
    lc.loads[1] = {1.0, 0.0, 0.0};
    lc.loads[2] = {0.0, 1.0, 0.0};
    lc.loads[0] = {-1.0, -1.0, 0.0};
    auto sol = solve_michell_lp(gs, lc);
    auto shape = extract_limit_shape(gs, sol);
    push(out, "michell.two_bar_kappa", std::abs(shape.kappa - 2.0), 1e-9);
    push(out, "michell.two_bar_compliance", std::abs(shape.compliance - 2.0), 1e-9);
    double waxis = 0.0;
    for (std::size_t i = 0; i < gs.bars.size(); ++i) {
        bool axis_bar = (gs.bars[i].a == 0 && (gs.bars[i].b == 1 || gs.bars[i].b == 2));
        waxis = std::max(waxis, std::abs(shape.weights[i] - (axis_bar ? 0.5 : 0.0)));
    }
    push(out, "michell.two_bar_half_weights", waxis, 1e-9);
    push(out, "michell.two_bar_entropy_residual", verify_entropy_condition(shape),
         1e-8 * shape.kappa * shape.kappa);
    push(out, "michell.two_bar_dual_gap", sol.dual_gap, 1e-8);
    push(out, "michell.two_bar_dual_feasibility", sol.dual_violation, 1e-8);

    // the delta-family of decompositions has compliance 1/(2d) + 1/(2(1-d)),
    // minimized at the even split
    double family_err = 0.0;
    double best = 1e300;
    double best_delta = 0.0;
    for (int i = 1; i <= 9; ++i) {
        double d = 0.1 * i;
        std::vector<double> w = {d, 1.0 - d};
        std::vector<SymMat> sigma = {SymMat::diag(2, {1.0 / d, 0.0, 0.0}),
                                     SymMat::diag(2, {0.0, 1.0 / (1.0 - d), 0.0})};
        double comp = decomposition_compliance(w, sigma);
        family_err = std::max(family_err,
                              std::abs(comp - (0.5 / d + 0.5 / (1.0 - d))));
        if (comp < best) { best = comp; best_delta = d; }
    }
    push(out, "michell.delta_family_compliance", family_err, 1e-12);
    push(out, "michell.delta_family_minimum_at_half", std::abs(best_delta - 0.5), 1e-12);
}

void mollify_checks(std::vector<PropertyResult>& out, std::uint64_t seed) {
    static const DomainDescriptor disk = DomainDescriptor::unit_disk();
    const double delta = 0.005;
    Rng rng(seed + 11);

    auto exp_rep = check_expansion(disk, delta, 360);
    push(out, "mollify.boundary_expansion_margin", exp_rep.min_distance - exp_rep.required, 0.0, true);
    push(out, "mollify.boundary_expansion_is_3delta",
         std::abs(exp_rep.min_distance - 3.0 * delta), 1e-12);

    // jacobian symmetry and injectivity estimate at random points
    double inj_viol = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Vec2 x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        Vec2 x2{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        auto t1 = theta(x, delta, disk);
        auto t2 = theta(x2, delta, disk);
        double dx = std::hypot(x.x - x2.x, x.y - x2.y);
        double dth = std::hypot(t1.point.x - t2.point.x, t1.point.y - t2.point.y);
        inj_viol = std::max(inj_viol, dx - 3.0 * delta * disk.sup_hess * dx - dth);
    }
    push(out, "mollify.injectivity_inequality", inj_viol, 1e-12);

    ScalarMeasure one_atom;
    one_atom.atoms.push_back({{0.2, 0.1}, 1.0});
    push(out, "mollify.mass_single_atom", mass_check(one_atom, delta, disk), 1e-6);

    ScalarMeasure box;
    box.boxes.push_back({{-0.4, -0.4}, {0.4, 0.4}, 1.0 / 0.64});
    push(out, "mollify.mass_uniform_box", mass_check(box, delta, disk), 1e-6);

    ScalarMeasure atoms;
    for (int i = 0; i < 10; ++i) {
        double r = std::sqrt(rng.uniform01());
        double th = rng.uniform(0.0, 6.283185307179586);
        atoms.atoms.push_back({{r * std::cos(th), r * std::sin(th)}, 0.1});
    }
    push(out, "mollify.mass_random_atoms", mass_check(atoms, delta, disk), 1e-6);

    // balanced box measure: constant density with the compensating atom
    DiscreteMeasure balanced;
    balanced.boxes.push_back({{-0.25, -0.25}, {0.25, 0.25}, SymMat::identity(2)});
    balanced.atoms.push_back({{0.0, 0.0}, SymMat::identity(2) * -0.25});
    auto div_rep = divergence_preservation_check(balanced, delta, disk, 2);
    push(out, "mollify.divergence_balanced_box", div_rep.mollified_residual, 1e-6);

    DiscreteMeasure cross;
    cross.segments.push_back({{-0.3, 0.0}, {0.3, 0.0}, SymMat::diag(2, {1.0, 0.0, 0.0})});
    cross.segments.push_back({{0.0, -0.3}, {0.0, 0.3}, SymMat::diag(2, {0.0, 1.0, 0.0})});
    cross.atoms.push_back({{0.0, 0.0}, SymMat::identity(2) * -0.6});
    auto cross_rep = divergence_preservation_check(cross, delta, disk, 2);
    push(out, "mollify.divergence_cross", cross_rep.mollified_residual, 1e-6);

    DiscreteMeasure broken = balanced;
    broken.atoms.clear();
    auto broken_rep = divergence_preservation_check(broken, delta, disk, 2);
    push(out, "mollify.divergence_control_detects", broken_rep.mollified_residual, 1e-2, true);

    // interior support: the field vanishes on a boundary collar
    DiscreteMeasure touching;
    touching.atoms.push_back({{1.0, 0.0}, SymMat::identity(2)});
    auto field = mollify(touching, delta, disk);
    double collar = disk.collar_width(delta);
    double worst = 0.0;
    for (int i = 0; i < 720; ++i) {
        double ang = 6.283185307179586 * i / 720.0;
        double rr = 1.0 - 0.5 * collar * (i % 3 + 1) / 3.0;
        worst = std::max(worst, field.evaluate({rr * std::cos(ang), rr * std::sin(ang)}).norm());
    }
    push(out, "mollify.support_strictly_interior", worst, 0.0);

    // total variation within the (1 + M delta) envelope
    DiscreteMeasure tv;
    tv.atoms.push_back({{0.3, 0.0}, SymMat::diag(2, {1.0, -2.0, 0.0})});
    tv.atoms.push_back({{-0.4, 0.2}, SymMat::diag(2, {0.5, 0.5, 0.0})});
    auto tv_field = mollify(tv, delta, disk);
    double tv_delta = tv_field.total_variation(1e-8);
    double m_const = 3.0 * disk.sup_hess / (1.0 - 3.0 * delta * disk.sup_hess);
    push(out, "mollify.total_variation_envelope",
         tv_delta - (1.0 + m_const * delta) * tv.total_variation(), 0.0);
}

}  // namespace

std::vector<PropertyResult> run_check_suite(std::uint64_t seed) {
    std::vector<PropertyResult> out;
    tensor_checks(out, seed);
    integrand_checks(out, seed);
    envelope_checks(out, seed);
    laminate_checks(out, seed);
    michell_checks(out);
    mollify_checks(out, seed);
    return out;
}

}  // namespace vmass
