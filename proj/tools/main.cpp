//
// vmass command line: integrand tables, envelope evaluation, the truss
// solver, laminate convergence studies, the mollifier demo and the
// cross-module property suite.
//
// Exit codes: 0 ok, 2 infeasible, 3 schema violation, 4 unbalanced load,
// 5 internal error.
//

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vmass/check_suite.hpp"
#include "vmass/envelope.hpp"
#include "vmass/integrand.hpp"
#include "vmass/io_json.hpp"
#include "vmass/laminate.hpp"
#include "vmass/michell.hpp"
#include "vmass/mollify.hpp"
#include "vmass/svg.hpp"
#include "vmass/version.hpp"

namespace fs = std::filesystem;
using vmass::json;

namespace {

enum ExitCode { kOk = 0, kInfeasible = 2, kSchema = 3, kUnbalanced = 4, kInternal = 5 };

int log_level() {
    const char* lv = std::getenv("VM_LOG");
    if (!lv) return 1;
    std::string s(lv);
    if (s == "debug") return 3;
    if (s == "info") return 2;
    if (s == "quiet" || s == "error") return 0;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[vmass] " << msg << "\n";
}

// minimal flat TOML subset: key = value lines, [section] prefixes,
// # comments; enough for run configuration files
std::map<std::string, std::string> read_toml(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vmass::SchemaError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw vmass::SchemaError("config line without '=': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

struct RunConfig {
    std::string config_file;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format = "json";
    bool seed_set = false, out_set = false, format_set = false;

    void finalize() {
        if (!config_file.empty()) {
            auto kv = read_toml(config_file);
            if (!seed_set && kv.count("seed")) seed = std::stoull(kv["seed"]);
            if (!out_set && kv.count("out")) out_dir = kv["out"];
            if (!format_set && kv.count("format")) format = kv["format"];
        }
        if (format != "json" && format != "csv" && format != "svg")
            throw vmass::SchemaError("format must be json, csv or svg");
    }

    // reproducibility-relevant parameters only; volatile paths stay out so
    // identical runs give identical bytes wherever they write
    json echo(const std::string& subcommand) const {
        return {{"subcommand", subcommand}, {"seed", seed}, {"format", format}};
    }
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--config", cfg.config_file, "TOML config file");
    cmd->add_option("--seed", cfg.seed, "random seed")->each([&](const std::string&) {
        cfg.seed_set = true;
    });
    cmd->add_option("--out", cfg.out_dir, "output directory")->each([&](const std::string&) {
        cfg.out_set = true;
    });
    cmd->add_option("--format", cfg.format, "output format (json|csv|svg)")
        ->each([&](const std::string&) { cfg.format_set = true; });
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << data;
    log_info("wrote " + path.string());
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw vmass::SchemaError("output directory is not usable: " + dir.string());
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vmass::SchemaError("cannot open input file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json checks_to_json(const std::vector<vmass::PropertyResult>& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"kind", c.lower_bound ? "lower_bound" : "upper_bound"},
                       {"pass", c.pass}});
    return arr;
}

// ---------------------------------------------------------------- integrand

int run_integrand(const RunConfig& cfg, const std::string& tau_text) {
    vmass::SymMat tau = vmass::parse_sym_mat(vmass::parse_json_text(tau_text));
    auto polar = vmass::rho_polar(tau);
    json payload = {{"dim", tau.dim()},
                    {"tau", vmass::sym_mat_to_json(tau)},
                    {"j", vmass::j(tau)},
                    {"j_star", vmass::j_star(tau)},
                    {"j_bar", vmass::j_bar(tau)},
                    {"j_bar_star", vmass::j_bar_star(tau)},
                    {"rho", vmass::rho(tau)},
                    {"rho_polar", polar.value},
                    {"branch", vmass::branch_name(polar.branch)}};
    std::string text = vmass::dump_json(vmass::make_envelope(cfg.echo("integrand"), payload, json::array()));
    std::fputs(text.c_str(), stdout);
    if (!cfg.out_dir.empty()) write_file(ensure_out_dir(cfg) / "integrand.json", text);
    return kOk;
}

// ----------------------------------------------------------------- envelope

int run_envelope(const RunConfig& cfg, const std::string& tau_text, double alpha, double beta,
                 double eps) {
    vmass::SymMat tau = vmass::parse_sym_mat(vmass::parse_json_text(tau_text));
    vmass::KSParams p = eps > 0.0 ? vmass::KSParams::from_eps(eps) : vmass::KSParams(alpha, beta);
    json payload = {{"dim", tau.dim()},
                    {"tau", vmass::sym_mat_to_json(tau)},
                    {"alpha", p.alpha},
                    {"beta", p.beta},
                    {"h", vmass::ks_h(tau, p)},
                    {"q_div_h", vmass::q_div_h_general(tau, p)},
                    {"q_div_h_explicit", vmass::q_div_h_explicit(tau, p)},
                    {"rho_polar", vmass::rho_polar(tau).value}};
    std::string text = vmass::dump_json(vmass::make_envelope(cfg.echo("envelope"), payload, json::array()));
    std::fputs(text.c_str(), stdout);
    if (!cfg.out_dir.empty()) write_file(ensure_out_dir(cfg) / "envelope.json", text);
    return kOk;
}

// ------------------------------------------------------------------ michell

int run_michell(const RunConfig& cfg, const std::string& input, bool svg) {
    fs::path dir = ensure_out_dir(cfg);  // paths first, computation second
    auto prob = vmass::parse_michell_problem(vmass::parse_json_text(read_file(input)));

    auto balance = vmass::check_balanced(prob.lc, prob.gs);
    if (!balance.ok) {
        json report = {{"error", "unbalanced load case"},
                       {"force_residual", balance.force_residual},
                       {"moment_residual", balance.moment_residual},
                       {"tolerance", 1e-10 * balance.scale}};
        std::fputs(vmass::dump_json(report).c_str(), stderr);
        return kUnbalanced;
    }

    auto sol = vmass::solve_michell_lp(prob.gs, prob.lc);
    if (sol.lp_status == vmass::LpStatus::infeasible) {
        json farkas = json::array();
        for (double v : sol.farkas) farkas.push_back(v);
        json report = {{"error", "load not supportable by the ground structure"},
                       {"farkas_certificate", farkas}};
        std::fputs(vmass::dump_json(report).c_str(), stderr);
        return kInfeasible;
    }

    auto shape = vmass::extract_limit_shape(prob.gs, sol);
    json payload = vmass::michell_result_payload(prob.gs, sol, shape);

    std::vector<vmass::PropertyResult> checks;
    checks.push_back({"entropy_residual", vmass::verify_entropy_condition(shape),
                      1e-8 * shape.kappa * shape.kappa, false, true});
    checks.back().pass = checks.back().value <= checks.back().threshold;
    checks.push_back({"dual_gap", sol.dual_gap, 1e-8, false, sol.dual_gap <= 1e-8});
    checks.push_back({"equilibrium_residual", sol.equilibrium_residual, 1e-9, false,
                      sol.equilibrium_residual <= 1e-9});

    std::string text =
        vmass::dump_json(vmass::make_envelope(cfg.echo("michell solve"), payload, checks_to_json(checks)));
    write_file(dir / "result.json", text);
    write_file(dir / "result.csv", vmass::michell_result_csv(prob.gs, sol, shape));
    if (svg || cfg.format == "svg") write_file(dir / "result.svg", vmass::truss_svg(prob.gs, shape));
    std::fputs(text.c_str(), stdout);
    return kOk;
}

// ----------------------------------------------------------------- laminate

int run_laminate(const RunConfig& cfg, const std::vector<double>& alphas,
                 const std::vector<double>& eps_list) {
    fs::path dir = ensure_out_dir(cfg);
    auto study = vmass::convergence_study(alphas, eps_list);

    std::string csv = "eps,energy,error,bound\n";
    char buf[200];
    for (const auto& row : study.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", row.eps, row.energy,
                      row.error, row.bound);
        csv += buf;
    }

    json rows = json::array();
    for (const auto& row : study.rows)
        rows.push_back({{"eps", row.eps},
                        {"k", row.periods},
                        {"energy", row.energy},
                        {"error", row.error},
                        {"bound", row.bound}});
    json payload = {{"alphas", alphas},
                    {"limit", study.limit},
                    {"slope", study.slope_defined ? json(study.slope) : json(nullptr)},
                    {"rows", rows}};

    write_file(dir / "convergence.csv", csv);
    std::string text =
        vmass::dump_json(vmass::make_envelope(cfg.echo("laminate study"), payload, json::array()));
    write_file(dir / "convergence.json", text);
    if (alphas.size() == 2) {
        auto c = vmass::build_construction(alphas, eps_list.front(), vmass::default_k_rule(eps_list.front()));
        write_file(dir / "cross_section.svg", vmass::laminate_svg(c));
    }
    std::fputs(text.c_str(), stdout);
    return kOk;
}

// ------------------------------------------------------------------ mollify

int run_mollify(const RunConfig& cfg, const std::string& measure_file, double delta) {
    static const vmass::DomainDescriptor disk = vmass::DomainDescriptor::unit_disk();
    if (!(delta > 0.0) || delta >= disk.delta0)
        throw vmass::SchemaError("delta must lie in (0, " + std::to_string(disk.delta0) + ")");

    fs::path dir = ensure_out_dir(cfg);
    vmass::DiscreteMeasure lambda;
    vmass::ScalarMeasure mu;
    if (measure_file.empty()) {
        // built-in demo: the balanced cross plus a probability measure
        lambda.segments.push_back({{-0.3, 0.0}, {0.3, 0.0}, vmass::SymMat::diag(2, {1.0, 0.0, 0.0})});
        lambda.segments.push_back({{0.0, -0.3}, {0.0, 0.3}, vmass::SymMat::diag(2, {0.0, 1.0, 0.0})});
        lambda.atoms.push_back({{0.0, 0.0}, vmass::SymMat::identity(2) * -0.6});
        mu.atoms.push_back({{0.2, 0.1}, 0.5});
        mu.boxes.push_back({{-0.4, -0.4}, {0.0, 0.0}, 0.5 / 0.16});
    } else {
        json j = vmass::parse_json_text(read_file(measure_file));
        lambda = vmass::parse_matrix_measure(j);
        // scalar companion: total-variation weights of the same pieces
        for (const auto& a : lambda.atoms) mu.atoms.push_back({a.pos, a.weight.norm()});
        for (const auto& b : lambda.boxes) mu.boxes.push_back({b.lo, b.hi, b.density.norm()});
        double total = mu.total_mass();
        if (total <= 0.0) throw vmass::SchemaError("measure must have positive mass");
        for (auto& a : mu.atoms) a.w /= total;
        for (auto& b : mu.boxes) b.density /= total;
    }

    auto expansion = vmass::check_expansion(disk, delta, 360);
    double mass_err = vmass::mass_check(mu, delta, disk);
    auto divergence = vmass::divergence_preservation_check(lambda, delta, disk, 2);

    auto field = vmass::mollify(lambda, delta, disk);
    double collar = disk.collar_width(delta);
    double support_worst = 0.0;
    for (int i = 0; i < 720; ++i) {
        double ang = 6.283185307179586 * i / 720.0;
        double r = 1.0 - 0.25 * collar;
        support_worst = std::max(support_worst,
                                 field.evaluate({r * std::cos(ang), r * std::sin(ang)}).norm());
    }

    std::vector<vmass::PropertyResult> checks;
    checks.push_back({"expansion_margin", expansion.min_distance - expansion.required, 0.0, true,
                      expansion.pass});
    checks.push_back({"mass_error", mass_err, 1e-6, false, mass_err <= 1e-6});
    checks.push_back({"divergence_residual", divergence.mollified_residual, 1e-6, false,
                      divergence.pass});
    checks.push_back({"support_collar_field", support_worst, 0.0, false, support_worst == 0.0});

    // sampled field on a polar grid
    std::string csv = "x,y,l00,l01,l11\n";
    char buf[240];
    for (int ir = 0; ir < 24; ++ir) {
        for (int ia = 0; ia < 48; ++ia) {
            double r = (ir + 0.5) / 24.0;
            double ang = 6.283185307179586 * ia / 48.0;
            vmass::Vec2 x{r * std::cos(ang), r * std::sin(ang)};
            vmass::SymMat v = field.evaluate(x);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", x.x, x.y, v(0, 0),
                          v(0, 1), v(1, 1));
            csv += buf;
        }
    }

    json payload = {{"delta", delta},
                    {"delta0", disk.delta0},
                    {"collar_width", collar},
                    {"input_divergence_residual", divergence.input_residual},
                    {"expansion_min_distance", expansion.min_distance}};
    write_file(dir / "field.csv", csv);
    std::string text =
        vmass::dump_json(vmass::make_envelope(cfg.echo("mollify demo"), payload, checks_to_json(checks)));
    write_file(dir / "report.json", text);
    std::fputs(text.c_str(), stdout);

    bool all_pass = true;
    for (const auto& c : checks) all_pass = all_pass && c.pass;
    return all_pass ? kOk : kInternal;
}

// -------------------------------------------------------------------- check

int run_check(const RunConfig& cfg) {
    auto results = vmass::run_check_suite(cfg.seed);
    bool all_pass = true;
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        std::printf("[%s] %-45s value=%.3e threshold=%.3e\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.value, r.threshold);
    }
    json payload = {{"total", results.size()}, {"all_pass", all_pass}};
    std::string text =
        vmass::dump_json(vmass::make_envelope(cfg.echo("check"), payload, checks_to_json(results)));
    if (!cfg.out_dir.empty()) write_file(ensure_out_dir(cfg) / "check.json", text);
    std::printf("%s: %zu properties\n", all_pass ? "ALL PASS" : "FAILURES PRESENT", results.size());
    return all_pass ? kOk : kInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vmass: limit-compliance integrands, trusses, laminates and mollifiers"};
    app.set_version_flag("--version", vmass::kVersion);
    app.require_subcommand(1);

    RunConfig cfg;

    auto* integrand = app.add_subcommand("integrand", "evaluate the integrand family on a matrix");
    std::string tau_text;
    integrand->add_option("--tau", tau_text, "row-major JSON matrix")->required();
    add_common(integrand, cfg);

    auto* envelope = app.add_subcommand("envelope", "evaluate the two-well envelope");
    std::string env_tau;
    double env_alpha = 1.0, env_beta = 1.0, env_eps = 0.0;
    envelope->add_option("--tau", env_tau, "row-major JSON matrix")->required();
    envelope->add_option("--alpha", env_alpha, "quadratic weight");
    envelope->add_option("--beta", env_beta, "mass penalty");
    envelope->add_option("--eps", env_eps, "use the eps-parametrized family");
    add_common(envelope, cfg);

    auto* michell = app.add_subcommand("michell", "ground-structure solver");
    auto* solve = michell->add_subcommand("solve", "solve a problem JSON");
    std::string problem_file;
    bool want_svg = false;
    solve->add_option("problem", problem_file, "problem JSON path")->required();
    solve->add_flag("--svg", want_svg, "also write an SVG rendering");
    add_common(solve, cfg);
    michell->require_subcommand(1);

    auto* laminate = app.add_subcommand("laminate", "slab laminate studies");
    auto* study = laminate->add_subcommand("study", "convergence study over eps");
    std::vector<double> alphas;
    std::vector<double> eps_list;
    study->add_option("--alphas", alphas, "target eigenvalues, |a1| <= ... <= |an|")
        ->required()
        ->delimiter(',');
    study->add_option("--eps", eps_list, "decreasing eps values")->required()->delimiter(',');
    add_common(study, cfg);
    laminate->require_subcommand(1);

    auto* mollify = app.add_subcommand("mollify", "support-preserving mollification");
    auto* demo = mollify->add_subcommand("demo", "run the property demo on the unit disk");
    std::string measure_file;
    double delta = 0.005;
    demo->add_option("--measure", measure_file, "measure JSON path (optional)");
    demo->add_option("--delta", delta, "mollification scale");
    add_common(demo, cfg);
    mollify->require_subcommand(1);

    auto* check = app.add_subcommand("check", "run every property suite");
    add_common(check, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.finalize();
        if (integrand->parsed()) return run_integrand(cfg, tau_text);
        if (envelope->parsed()) return run_envelope(cfg, env_tau, env_alpha, env_beta, env_eps);
        if (michell->parsed()) return run_michell(cfg, problem_file, want_svg);
        if (laminate->parsed()) return run_laminate(cfg, alphas, eps_list);
        if (mollify->parsed()) return run_mollify(cfg, measure_file, delta);
        if (check->parsed()) return run_check(cfg);
    } catch (const vmass::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return kSchema;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kSchema;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
    return kInternal;
}
