#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kolmo/coefficients.hpp"
#include "kolmo/gamma.hpp"
#include "kolmo/potentials.hpp"
#include "kolmo/probe.hpp"
#include "kolmo/problem_file.hpp"
#include "kolmo/reduction.hpp"
#include "kolmo/solver.hpp"
#include "kolmo/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace kolmo {
namespace {

// A bad flag value; reported with the flag and a hint, exit code 2.
struct UsageError : std::runtime_error {
    UsageError(std::string flag, const std::string& what, std::string hint)
        : std::runtime_error(what), flag(std::move(flag)), hint(std::move(hint)) {}
    std::string flag, hint;
};

// Validation failure of otherwise well-formed input, exit code 1.
struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> list_flag(const std::string& flag, const std::string& text, std::size_t count = 0) {
    std::vector<double> v;
    try {
        v = parse_list(text);
    } catch (const InputError& e) {
        throw UsageError(flag, e.what(), "pass comma-separated numbers, e.g. " + flag + " 0.4,0.2,0.1");
    }
    if (count && v.size() != count) {
        throw UsageError(flag, "expected " + std::to_string(count) + " numbers, got " + std::to_string(v.size()),
                         "pass exactly " + std::to_string(count) + " comma-separated numbers");
    }
    return v;
}

Point point_flag(const std::string& flag, const std::string& text) {
    auto v = list_flag(flag, text, 3);
    return {v[0], v[1], v[2]};
}

json point_json(const Point& p) { return json::array({p.x, p.y, p.t}); }

json with_provenance(const std::string& spec_hash) {
    json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["spec_hash"] = spec_hash;
    return j;
}

void write_text(const fs::path& file, const std::string& text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InputError("cannot write " + file.string());
    out << text;
}

// Prints to stdout when `file` is empty.
void emit(const std::string& file, const std::string& text) {
    if (file.empty()) {
        std::cout << text;
    } else {
        write_text(file, text);
    }
}

// ---- gamma ----------------------------------------------------------------

struct GammaArgs {
    std::string at, pole = "0,0,0";
    bool dx = false;
    std::optional<double> residual;
};

int cmd_gamma(const GammaArgs& a) {
    Point z = point_flag("--at", a.at), pole = point_flag("--pole", a.pole);
    std::map<std::string, std::string> args{{"gamma.at", a.at}, {"gamma.pole", a.pole}};
    if (a.residual) args["gamma.residual"] = format_number(*a.residual);
    json j = with_provenance(content_hash(args));
    j["at"] = point_json(z);
    j["pole"] = point_json(pole);
    j["gamma"] = gamma(z, pole);
    if (a.dx) j["gamma_dxi"] = gamma_dx(z, pole);
    if (a.residual) {
        Point local = compose(inverse(pole), z);
        try {
            j["l0_residual"] = l0_residual(local, *a.residual);
        } catch (const std::invalid_argument& e) {
            throw UsageError("--residual", e.what(), "use a step at most 1/10 of the distance to the pole");
        }
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

// ---- solve ----------------------------------------------------------------

bool has_tables(const ProblemFile& pf) {
    for (const char* key : {"coefficients.a", "coefficients.b0", "coefficients.b"}) {
        if (pf.get(key).value_or("").rfind("table:", 0) == 0) return true;
    }
    return false;
}

// Structural conditions: the full sampled check for expressions, ellipticity
// at the cell centers for tables.
void validate_problem(const ProblemFile& pf, const ProblemSpec& spec) {
    if (!has_tables(pf)) {
        auto rep = validate(pf.coefficient_set(), spec.grid.box());
        if (!rep.passed) throw ValidationFailure("coefficient validation failed\n" + rep.summary());
        return;
    }
    const double mu = pf.number("coefficients.mu", 0.5);
    const Grid& g = spec.grid;
    for (double t : {g.t0, g.t1}) {
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                Point z{g.xc(i), g.yc(j), t};
                double a = spec.coefficients.a(z);
                if (!(a > mu && a < 1 / mu)) {
                    std::ostringstream os;
                    os << "coefficient validation failed: a = " << a << " at (" << z.x << ", " << z.y << ", " << z.t
                       << ") violates mu < a < 1/mu with mu = " << mu;
                    throw ValidationFailure(os.str());
                }
            }
        }
    }
}

struct SolveArgs {
    std::string problem, out;
    bool no_validate = false;
};

int cmd_solve(const SolveArgs& a) {
    auto pf = ProblemFile::load(a.problem);
    ProblemSpec spec;
    try {
        spec = pf.problem_spec();
    } catch (const std::invalid_argument& e) {
        throw ValidationFailure(e.what());
    }
    if (a.no_validate) {
        std::cerr << "kolmo: warning: coefficient validation skipped; estimates may not apply\n";
    } else {
        validate_problem(pf, spec);
    }
    if (auto advice = spec.grid.anisotropy_advisory()) std::cerr << "kolmo: warning: " << *advice << "\n";
    SolveStats stats;
    Trajectory tr;
    try {
        tr = solve(spec, &stats);
    } catch (const InstabilityError& e) {
        throw ValidationFailure(e.what());
    }
    fs::path dir = a.out.empty() ? pf.output_directory() : fs::path(a.out);
    write_trajectory(tr, dir, pf.spec_hash);
    std::cerr << "kolmo: solve: " << stats.steps << " steps, dt = " << stats.dt << ", " << tr.levels.size()
              << " levels";
    if (stats.upwind_drift_cells) std::cerr << ", upwinded drift in " << stats.upwind_drift_cells << " cells";
    std::cerr << "\n";
    std::cout << (dir / "manifest.json").string() << "\n";
    return 0;
}

// ---- transform ------------------------------------------------------------

struct TransformArgs {
    std::string problem, emit;
    int times = 9;
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
    return v;
}

int cmd_transform(const TransformArgs& a) {
    auto pf = ProblemFile::load(a.problem);
    if (has_tables(pf)) {
        throw InputError("transform needs expression coefficients; the drift b must be differentiable");
    }
    auto cs = pf.coefficient_set();
    Grid g = pf.grid();
    auto rep = validate(cs, g.box());
    if (!rep.passed) throw ValidationFailure("coefficient validation failed\n" + rep.summary());
    auto source = pf.problem_spec();
    auto tc = transform_coeffs(cs, g.box());

    Grid h = g;
    h.x0 = tc.image_box.x0;
    h.x1 = tc.image_box.x1;
    std::vector<double> xs, ys, xs_ext, ys_ext;
    for (int i = 0; i < h.nx; ++i) xs.push_back(h.xc(i));
    for (int j = 0; j < h.ny; ++j) ys.push_back(h.yc(j));
    for (int i = -1; i <= h.nx; ++i) xs_ext.push_back(h.xc(i));
    for (int j = -1; j <= h.ny; ++j) ys_ext.push_back(h.yc(j));
    const bool moving = tc.a_tilde.time_dependent || tc.b0_tilde.time_dependent;
    auto coeff_times = moving ? linspace(h.t0, h.t1, std::max(2, a.times)) : std::vector<double>{h.t0};

    // Data in the new variables: u(x(xi, eta, tau), eta, tau).
    auto pulled = [&](const ScalarFn& f) {
        return [&, f](const Point& z) { return f({tc.inverse_map(z), z.y, z.t}); };
    };
    auto a_tab = LatticeTable::sample(xs, ys, coeff_times, [&](const Point& z) { return tc.a_tilde(z); });
    auto b0_tab = LatticeTable::sample(xs, ys, coeff_times, [&](const Point& z) { return tc.b0_tilde(z); });
    auto init_tab = LatticeTable::sample(xs_ext, ys_ext, {h.t0}, pulled(source.initial));
    auto bnd_tab = LatticeTable::sample(xs_ext, ys_ext, linspace(h.t0, h.t1, std::max(2, a.times)),
                                        pulled(source.boundary.value));

    // Structural constant of the new problem from the tabulated values.
    double a_lo = 1e300, a_hi = 0, b0_sup = 0;
    for (double t : coeff_times) {
        for (double x : xs) {
            for (double y : ys) {
                a_lo = std::min(a_lo, a_tab({x, y, t}));
                a_hi = std::max(a_hi, a_tab({x, y, t}));
                b0_sup = std::max(b0_sup, std::abs(b0_tab({x, y, t})));
            }
        }
    }
    double xi_c2 = std::max({std::abs(h.x0), std::abs(h.x1), 1.0});
    double mu = 0.99 * std::min({a_lo, 1 / a_hi, 1 / (xi_c2 + b0_sup)});

    fs::path dir = a.emit;
    fs::create_directories(dir);
    const std::string& hash = pf.spec_hash;
    write_text(dir / "a_tilde.csv", a_tab.to_csv(hash));
    write_text(dir / "b0_tilde.csv", b0_tab.to_csv(hash));
    write_text(dir / "initial.csv", init_tab.to_csv(hash));
    write_text(dir / "boundary.csv", bnd_tab.to_csv(hash));

    const char* boundary = pf.y_boundary() == BoundaryKind::PeriodicY ? "periodic" : "dirichlet";
    std::ostringstream cfg;
    cfg << provenance_line(hash) << "\n"
        << "# transformed from " << fs::path(a.problem).filename().string() << " with xi = b(x, y, t)\n"
        << "[coefficients]\na = table:a_tilde.csv\nb0 = table:b0_tilde.csv\nb = x\n"
        << "mu = " << format_number(mu) << "\nclass = L2\n\n"
        << "[grid]\nx0 = " << format_number(h.x0) << "\nx1 = " << format_number(h.x1) << "\ny0 = "
        << format_number(h.y0) << "\ny1 = " << format_number(h.y1) << "\nnx = " << h.nx << "\nny = " << h.ny
        << "\nt0 = " << format_number(h.t0) << "\nt1 = " << format_number(h.t1) << "\ny_boundary = " << boundary
        << "\n\n[initial]\nu = table:initial.csv\n\n[boundary]\nu = table:boundary.csv\n\n[output]\ndirectory = solution\n";
    auto times = pf.output_times();
    if (!times.empty()) {
        cfg << "times = ";
        for (std::size_t k = 0; k < times.size(); ++k) cfg << (k ? ", " : "") << format_number(times[k]);
        cfg << "\n";
    }
    if (pf.every_step()) cfg << "every_step = true\n";
    write_text(dir / "transformed.cfg", cfg.str());

    json m = with_provenance(hash);
    m["source"] = fs::path(a.problem).filename().string();
    m["closed_form_derivatives"] = tc.closed_form;
    m["image_box"] = {{"x0", h.x0}, {"x1", h.x1}, {"y0", h.y0}, {"y1", h.y1}, {"t0", h.t0}, {"t1", h.t1}};
    m["mu"] = mu;
    m["files"] = {"transformed.cfg", "a_tilde.csv", "b0_tilde.csv", "initial.csv", "boundary.csv"};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
    std::cerr << "kolmo: transform: image x-range [" << h.x0 << ", " << h.x1 << "], mu = " << mu << "\n";
    std::cout << (dir / "transformed.cfg").string() << "\n";
    return 0;
}

// ---- probe ----------------------------------------------------------------

struct ProbeArgs {
    std::string traj, problem, center, radii, h_levels, out, csv;
    std::optional<double> theta, alpha, beta, p, poincare, log_h;
    std::optional<int> lattice;
};

int cmd_probe(const ProbeArgs& a) {
    ProbeConfig cfg;
    std::optional<Point> center;
    if (!a.problem.empty()) {
        auto pf = ProblemFile::load(a.problem);
        cfg = pf.probe_config();
        center = pf.probe_center();
    }
    if (!a.center.empty()) center = point_flag("--center", a.center);
    if (!center) throw UsageError("--center", "no probe center given", "pass --center x,y,t or a [probe] center");
    if (!a.radii.empty()) cfg.radii = list_flag("--radii", a.radii);
    if (!a.h_levels.empty()) cfg.h_levels = list_flag("--h-levels", a.h_levels);
    if (a.theta) cfg.theta = *a.theta;
    if (a.alpha) cfg.alpha = *a.alpha;
    if (a.beta) cfg.beta = *a.beta;
    if (a.p) cfg.p = *a.p;
    if (a.lattice) cfg.lattice = *a.lattice;
    try {
        cfg.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError("--radii/--theta/--p", e.what(), "radii must decrease and 0 < theta < 1");
    }

    auto tr = read_trajectory(a.traj);
    std::string hash;
    {
        std::ifstream in(fs::path(a.traj) / "manifest.json");
        hash = json::parse(in).value("spec_hash", "");
    }
    ProbeReport rep;
    try {
        rep = run_probe(tr, *center, cfg);
        if (a.poincare) {
            PoincareOptions opt;
            opt.integral_cells = 64;
            rep.poincare = poincare_check(a.log_h ? log_transform(tr, *a.log_h) : tr, *center, *a.poincare,
                                          cfg.theta, opt);
        }
    } catch (const std::out_of_range& e) {
        throw UsageError("--center/--radii", e.what(), "choose a center and radii whose balls lie inside the trajectory");
    } catch (const std::invalid_argument& e) {
        throw UsageError("--radii", e.what(), "each radius must be at most 1/4 of the x half-width of the trajectory");
    }
    json j = with_provenance(hash);
    const json body = json::parse(rep.to_json());
    for (const auto& [k, v] : body.items()) j[k] = v;
    emit(a.out, j.dump(2) + "\n");
    if (!a.csv.empty()) write_text(a.csv, provenance_line(hash) + "\n" + rep.to_csv());
    std::cerr << "kolmo: probe: max decay ratio " << rep.decay.max_ratio << ", alpha_hat " << rep.holder.alpha_hat
              << "\n";
    return 0;
}

// ---- potential ------------------------------------------------------------

struct PotentialArgs {
    std::string kernel = "gamma", source, box = "-2,2,-2,2,0,2", out;
    int n = 32;
    double p = 2;
    std::optional<double> q;
};

int cmd_potential(const PotentialArgs& a) {
    HomogeneousKernel kernel;
    try {
        kernel = kernel_by_name(a.kernel);
    } catch (const std::invalid_argument& e) {
        throw UsageError("--kernel", e.what(), "use --kernel gamma or --kernel gamma-dx");
    }
    dsl::Expr f;
    try {
        f = dsl::Expr::parse(a.source);
    } catch (const dsl::ParseError& e) {
        throw UsageError("--source", e.what(), "see docs/dsl.md for the expression grammar");
    }
    auto b = list_flag("--box", a.box, 6);
    SpaceTimeGrid g{b[0], b[1], b[2], b[3], b[4], b[5], a.n, a.n, a.n};
    try {
        g.check();
    } catch (const std::invalid_argument& e) {
        throw UsageError("--box", e.what(), "pass x0,x1,y0,y1,t0,t1 with each range nonempty");
    }
    double q = 0;
    try {
        q = a.q ? *a.q : target_exponent(kernel.alpha, a.p);
    } catch (const std::invalid_argument& e) {
        throw UsageError("--p", e.what(), "the kernel gains alpha/6 in 1/p; p must be below 6/alpha");
    }
    auto field = SpaceTimeField::sample(g, [&](const Point& z) { return f.eval(z); });
    double ratio = 0;
    try {
        ratio = gain_ratio(kernel, field, a.p, q);
    } catch (const std::invalid_argument& e) {
        throw UsageError(a.q ? "--q" : "--source", e.what(), "--q must equal the target exponent 1/(1/p - alpha/6)");
    }
    auto pot = convolve(kernel, field);

    std::map<std::string, std::string> args{{"potential.kernel", kernel.name}, {"potential.source", a.source},
                                            {"potential.box", a.box},          {"potential.n", std::to_string(a.n)},
                                            {"potential.p", format_number(a.p)}, {"potential.q", format_number(q)}};
    std::string hash = content_hash(args);
    json j = with_provenance(hash);
    j["kernel"] = kernel.name;
    j["alpha"] = kernel.alpha;
    j["p"] = a.p;
    j["q"] = q;
    j["source_norm"] = lp_norm(field, a.p);
    j["potential_norm"] = lp_norm(pot, q);
    j["ratio"] = ratio;
    if (a.out.empty()) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    fs::path dir = a.out;
    fs::create_directories(dir);
    std::string csv = provenance_line(hash) + "\nx,y,t,f,potential\n";
    for (int k = 0; k < g.nt; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            for (int jj = 0; jj < g.ny; ++jj) {
                Point z = g.center(k, i, jj);
                csv += format_number(z.x) + "," + format_number(z.y) + "," + format_number(z.t) + "," +
                       format_number(field(k, i, jj)) + "," + format_number(pot(k, i, jj)) + "\n";
            }
        }
    }
    write_text(dir / "potential.csv", csv);
    write_text(dir / "report.json", j.dump(2) + "\n");
    std::cout << (dir / "report.json").string() << "\n";
    return 0;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
    std::string out;
    std::vector<std::string> suites;
};

int cmd_verify(const VerifyArgs& a, std::uint64_t seed) {
    VerifyReport rep;
    rep.seed = seed;
    if (a.suites.empty()) {
        rep = run_verify(seed, &std::cerr);
    } else {
        auto names = verify_suite_names();
        for (const auto& s : a.suites) {
            if (std::find(names.begin(), names.end(), s) == names.end()) {
                throw UsageError("--suite", "unknown suite '" + s + "'",
                                 "suites: group, gamma, dsl, coefficients, solver, potentials, reduction, probe");
            }
            rep.suites.push_back(run_verify_suite(s, seed));
        }
    }
    emit(a.out, rep.to_json());
    for (const auto& s : rep.suites) {
        for (const auto& c : s.checks) {
            if (!c.passed) std::cerr << "kolmo: verify: " << s.name << ": " << c.name << " = " << c.value << " fails "
                                     << c.relation << " " << c.bound << "\n";
        }
        if (!s.error.empty()) std::cerr << "kolmo: verify: " << s.name << ": " << s.error << "\n";
    }
    return rep.passed() ? 0 : 1;
}

int run(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for Kolmogorov-type ultraparabolic equations", "kolmo"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "Seed for every random draw")->capture_default_str();

    GammaArgs ga;
    auto* gamma_cmd = app.add_subcommand("gamma", "Evaluate the fundamental solution");
    gamma_cmd->add_option("--at", ga.at, "Evaluation point x,y,t")->required();
    gamma_cmd->add_option("--pole", ga.pole, "Pole xi,eta,tau")->capture_default_str();
    gamma_cmd->add_flag("--dx", ga.dx, "Also report the derivative in the pole's first coordinate");
    gamma_cmd->add_option("--residual", ga.residual, "Finite-difference step for the L0 residual at --at");

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file and write a trajectory directory");
    solve_cmd->add_option("--problem", sa.problem, "Problem file")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--out", sa.out, "Output directory (default: [output] directory)");
    solve_cmd->add_flag("--no-validate", sa.no_validate, "Skip coefficient validation (exploratory rough-b runs)");

    TransformArgs ta;
    auto* transform_cmd = app.add_subcommand("transform", "Emit the problem in the canonical drift variables");
    transform_cmd->add_option("--problem", ta.problem, "Problem file")->required()->check(CLI::ExistingFile);
    transform_cmd->add_option("--emit", ta.emit, "Directory for the derived problem and tables")->required();
    transform_cmd->add_option("--times", ta.times, "Time levels of time-dependent tables")
        ->capture_default_str()
        ->check(CLI::Range(2, 10000));

    ProbeArgs pa;
    auto* probe_cmd = app.add_subcommand("probe", "Regularity probes on a trajectory directory");
    probe_cmd->add_option("--traj", pa.traj, "Trajectory directory")->required()->check(CLI::ExistingDirectory);
    probe_cmd->add_option("--problem", pa.problem, "Take probe defaults from this file's [probe] section")
        ->check(CLI::ExistingFile);
    probe_cmd->add_option("--center", pa.center, "Probe center x,y,t");
    probe_cmd->add_option("--radii", pa.radii, "Decreasing radii, e.g. 0.4,0.2,0.1,0.05");
    probe_cmd->add_option("--theta", pa.theta, "Shrink factor of the decay ratio");
    probe_cmd->add_option("--alpha", pa.alpha, "Time fraction of the level-set cylinders");
    probe_cmd->add_option("--beta", pa.beta, "Space fraction of the level-set cylinders");
    probe_cmd->add_option("--p", pa.p, "Moser exponent");
    probe_cmd->add_option("--h-levels", pa.h_levels, "Level-set thresholds");
    probe_cmd->add_option("--lattice", pa.lattice, "Sample lattice points per axis (odd)");
    probe_cmd->add_option("--poincare", pa.poincare, "Also run the Poincare check at this radius");
    probe_cmd->add_option("--log-h", pa.log_h, "Apply ln+(h/(u + h^(9/8))) before the Poincare check");
    probe_cmd->add_option("--out", pa.out, "JSON report file (default: standard output)");
    probe_cmd->add_option("--csv", pa.csv, "Decay table as CSV");

    PotentialArgs qa;
    auto* potential_cmd = app.add_subcommand("potential", "Group convolution of a source with Gamma or -dxi Gamma");
    potential_cmd->add_option("--kernel", qa.kernel, "gamma or gamma-dx")->capture_default_str();
    potential_cmd->add_option("--source", qa.source, "Source f(x,y,t) as an expression")->required();
    potential_cmd->add_option("--box", qa.box, "x0,x1,y0,y1,t0,t1")->capture_default_str();
    potential_cmd->add_option("--n", qa.n, "Cells per axis")->capture_default_str()->check(CLI::Range(2, 512));
    potential_cmd->add_option("--p", qa.p, "Source exponent")->capture_default_str();
    potential_cmd->add_option("--q", qa.q, "Target exponent (default: the one the kernel gains)");
    potential_cmd->add_option("--out", qa.out, "Directory for potential.csv and report.json");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Run every identity and property suite");
    verify_cmd->add_option("--out", va.out, "JSON report file (default: standard output)");
    verify_cmd->add_option("--suite", va.suites, "Run only these suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::string sub = app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name() + " ";
        std::cerr << "kolmo: error: " << e.what() << "\n"
                  << "kolmo: hint: run 'kolmo " << sub << "--help' for the accepted flags\n";
        return 2;
    }

    if (gamma_cmd->parsed()) return cmd_gamma(ga);
    if (solve_cmd->parsed()) return cmd_solve(sa);
    if (transform_cmd->parsed()) return cmd_transform(ta);
    if (probe_cmd->parsed()) return cmd_probe(pa);
    if (potential_cmd->parsed()) return cmd_potential(qa);
    return cmd_verify(va, seed);
}

}  // namespace
}  // namespace kolmo

int main(int argc, char** argv) {
    try {
        return kolmo::run(argc, argv);
    } catch (const kolmo::UsageError& e) {
        std::cerr << "kolmo: error: " << e.flag << ": " << e.what() << "\nkolmo: hint: " << e.hint << "\n";
        return 2;
    } catch (const kolmo::ValidationFailure& e) {
        std::cerr << "kolmo: validation failed: " << e.what() << "\n";
        return 1;
    } catch (const kolmo::InputError& e) {
        std::cerr << "kolmo: input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "kolmo: error: " << e.what() << "\n";
        return 1;
    }
}
