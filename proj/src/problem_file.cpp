#include "kolmo/problem_file.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace kolmo {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"coefficients", {"a", "b0", "b", "mu", "class"}},
        {"grid", {"x0", "x1", "y0", "y1", "nx", "ny", "t0", "t1", "y_boundary"}},
        {"initial", {"u"}},
        {"boundary", {"u"}},
        {"probe", {"center", "radii", "theta", "alpha", "beta", "p", "h_levels", "lattice"}},
        {"output", {"directory", "times", "every_step"}},
    };
    return s;
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot open " + file.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int k = 15; k >= 0; --k, h >>= 4) s[k] = digits[h & 15];
    return s;
}

double to_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InputError(what + ": expected a number, got '" + text + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

// Data rows of a kolmo CSV: '#' lines and the header are skipped.
std::vector<std::vector<double>> read_rows(const fs::path& file, std::size_t columns) {
    std::ifstream in(file);
    if (!in) throw InputError("cannot open " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header = false;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        auto cells = split_csv(line);
        if (cells.size() != columns) {
            throw InputError(file.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " columns");
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(to_number(c, file.string() + ":" + std::to_string(line_no)));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Index of the lattice interval containing v, clamped, with the weight.
std::pair<std::size_t, double> bracket(const std::vector<double>& axis, double v) {
    if (axis.size() == 1) return {0, 0.0};
    if (v <= axis.front()) return {0, 0.0};
    if (v >= axis.back()) return {axis.size() - 2, 1.0};
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t k = static_cast<std::size_t>(it - axis.begin()) - 1;
    return {k, (v - axis[k]) / (axis[k + 1] - axis[k])};
}

std::string fmt(double v) { return format_number(v); }

std::string provenance(const std::string& spec_hash) { return provenance_line(spec_hash) + "\n"; }

}  // namespace

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string provenance_line(const std::string& spec_hash) {
    return std::string("# ") + kToolName + " " + kToolVersion + " spec_hash=" + spec_hash;
}

std::string content_hash(const std::map<std::string, std::string>& entries) {
    std::string canon;
    for (const auto& [k, v] : entries) canon += k + "=" + v + "\n";
    return hex16(fnv1a(canon));
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& cell : split_csv(text)) out.push_back(to_number(cell, "list"));
    if (out.empty()) throw InputError("empty list");
    return out;
}

Point parse_point(const std::string& text) {
    auto v = parse_list(text);
    if (v.size() != 3) throw InputError("expected x,y,t, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

LatticeTable LatticeTable::load(const fs::path& file) {
    auto rows = read_rows(file, 4);
    if (rows.empty()) throw InputError(file.string() + ": empty table");
    std::set<double> xs, ys, ts;
    for (const auto& r : rows) {
        xs.insert(r[0]);
        ys.insert(r[1]);
        ts.insert(r[2]);
    }
    LatticeTable t;
    t.xs_.assign(xs.begin(), xs.end());
    t.ys_.assign(ys.begin(), ys.end());
    t.ts_.assign(ts.begin(), ts.end());
    const std::size_t nx = t.xs_.size(), ny = t.ys_.size(), nt = t.ts_.size();
    if (nx * ny * nt != rows.size()) throw InputError(file.string() + ": rows do not form a regular x-y-t lattice");
    t.v_.assign(rows.size(), std::numeric_limits<double>::quiet_NaN());
    auto index = [](const std::vector<double>& axis, double v) {
        return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
    };
    for (const auto& r : rows) t.v_[(index(t.ts_, r[2]) * nx + index(t.xs_, r[0])) * ny + index(t.ys_, r[1])] = r[3];
    for (double v : t.v_) {
        if (std::isnan(v)) throw InputError(file.string() + ": duplicate lattice point");
    }
    return t;
}

LatticeTable LatticeTable::sample(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<double>& ts, const std::function<double(const Point&)>& f) {
    LatticeTable t;
    t.xs_ = xs;
    t.ys_ = ys;
    t.ts_ = ts;
    for (double tt : ts) {
        for (double x : xs) {
            for (double y : ys) t.v_.push_back(f({x, y, tt}));
        }
    }
    return t;
}

double LatticeTable::operator()(const Point& z) const {
    const std::size_t nx = xs_.size(), ny = ys_.size();
    auto [i, wx] = bracket(xs_, z.x);
    auto [j, wy] = bracket(ys_, z.y);
    auto [k, wt] = bracket(ts_, z.t);
    auto at = [&](std::size_t kk, std::size_t ii, std::size_t jj) { return v_[(kk * nx + ii) * ny + jj]; };
    auto plane = [&](std::size_t kk) {
        std::size_t i1 = std::min(i + 1, nx - 1), j1 = std::min(j + 1, ny - 1);
        return (1 - wx) * ((1 - wy) * at(kk, i, j) + wy * at(kk, i, j1)) +
               wx * ((1 - wy) * at(kk, i1, j) + wy * at(kk, i1, j1));
    };
    double v = plane(k);
    if (ts_.size() == 1 || wt == 0.0) return v;
    return (1 - wt) * v + wt * plane(k + 1);
}

std::string LatticeTable::to_csv(const std::string& spec_hash) const {
    std::string out = provenance(spec_hash) + "x,y,t,value\n";
    const std::size_t nx = xs_.size(), ny = ys_.size();
    for (std::size_t k = 0; k < ts_.size(); ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                out += fmt(xs_[i]) + "," + fmt(ys_[j]) + "," + fmt(ts_[k]) + "," + fmt(v_[(k * nx + i) * ny + j]) + "\n";
            }
        }
    }
    return out;
}

ProblemFile ProblemFile::load(const fs::path& file) {
    ProblemFile pf = parse(read_file(file), file.parent_path());
    pf.source = file;
    return pf;
}

ProblemFile ProblemFile::parse(const std::string& text, const fs::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InputError("problem file line " + std::to_string(e.line()) + ": " + e.message());
    }
    ProblemFile pf;
    pf.base_dir = base_dir;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw InputError("key '" + section + "' outside of any section");
        auto s = schema().find(section);
        if (s == schema().end()) throw InputError("unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!s->second.count(key)) throw InputError("unknown key '" + key + "' in [" + section + "]");
            pf.entries[section + "." + key] = trim(value.data());
        }
    }
    // Table contents are part of the provenance of the problem.
    auto hashed = pf.entries;
    for (const auto& [key, value] : pf.entries) {
        if (value.rfind("table:", 0) == 0) hashed[key + "#content"] = hex16(fnv1a(read_file(pf.resolve(value.substr(6)))));
    }
    pf.spec_hash = content_hash(hashed);
    return pf;
}

fs::path ProblemFile::resolve(const std::string& path) const {
    fs::path p(path);
    return p.is_absolute() ? p : base_dir / p;
}

std::optional<std::string> ProblemFile::get(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

std::string ProblemFile::require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw InputError("missing key '" + key + "'");
    return *v;
}

double ProblemFile::number(const std::string& key, std::optional<double> fallback) const {
    auto v = get(key);
    if (!v) {
        if (fallback) return *fallback;
        throw InputError("missing key '" + key + "'");
    }
    double out = 0.0;
    const char* end = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(v->data(), end, out);
    if (ec == std::errc() && ptr == end && std::isfinite(out)) return out;
    // Constant expressions such as 2*pi are accepted too.
    try {
        auto e = dsl::Expr::parse(*v);
        if (!e.depends_on(dsl::Variable::X) && !e.depends_on(dsl::Variable::Y) && !e.depends_on(dsl::Variable::T)) {
            out = e.eval(kOrigin);
            if (std::isfinite(out)) return out;
        }
    } catch (const std::exception&) {
    }
    throw InputError(key + ": expected a number or a constant expression, got '" + *v + "'");
}

Grid ProblemFile::grid() const {
    Grid g;
    g.x0 = number("grid.x0");
    g.x1 = number("grid.x1");
    g.y0 = number("grid.y0");
    g.y1 = number("grid.y1");
    g.t0 = number("grid.t0", 0.0);
    g.t1 = number("grid.t1");
    double nx = number("grid.nx"), ny = number("grid.ny");
    if (nx != std::floor(nx) || ny != std::floor(ny)) throw InputError("grid.nx and grid.ny must be integers");
    g.nx = static_cast<int>(nx);
    g.ny = static_cast<int>(ny);
    try {
        g.check();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return g;
}

BoundaryKind ProblemFile::y_boundary() const {
    auto v = get("grid.y_boundary").value_or("dirichlet");
    if (v == "dirichlet") return BoundaryKind::Dirichlet;
    if (v == "periodic") return BoundaryKind::PeriodicY;
    throw InputError("grid.y_boundary must be 'dirichlet' or 'periodic'");
}

EquationClass ProblemFile::equation_class() const {
    auto v = get("coefficients.class").value_or("general");
    if (v == "L0") return EquationClass::L0;
    if (v == "L1") return EquationClass::L1;
    if (v == "L2") return EquationClass::L2;
    if (v == "general") return EquationClass::General;
    throw InputError("coefficients.class must be one of L0, L1, L2, general");
}

CoefficientSet ProblemFile::coefficient_set() const {
    auto expr = [&](const std::string& key, const char* fallback) {
        std::string v = get(key).value_or(fallback);
        if (v.rfind("table:", 0) == 0) throw InputError(key + " is a table, not an expression");
        return v;
    };
    try {
        return CoefficientSet::parse(expr("coefficients.a", "1"), expr("coefficients.b0", "0"),
                                     expr("coefficients.b", "x"), number("coefficients.mu", 0.5));
    } catch (const dsl::ParseError& e) {
        throw InputError(std::string("coefficient expression: ") + e.what());
    }
}

ProblemSpec ProblemFile::problem_spec() const {
    const Grid g = grid();
    auto field = [&](const std::string& key, const char* fallback) -> CoefficientField {
        std::string v = get(key).value_or(fallback);
        if (v.rfind("table:", 0) == 0) {
            auto table = std::make_shared<LatticeTable>(LatticeTable::load(resolve(v.substr(6))));
            return {[table](const Point& z) { return (*table)(z); }, table->time_dependent()};
        }
        try {
            return CoefficientField::from_expr(dsl::Expr::parse(v));
        } catch (const dsl::ParseError& e) {
            throw InputError(key + ": " + e.what());
        }
    };
    auto scalar = [&](const std::string& key, const char* fallback) -> ScalarFn { return field(key, fallback).fn; };

    bool tables = false;
    for (const char* key : {"coefficients.a", "coefficients.b0", "coefficients.b"}) {
        if (get(key).value_or("").rfind("table:", 0) == 0) tables = true;
    }
    ProblemSpec spec;
    if (!tables && get("initial.u").value_or("").rfind("table:", 0) != 0 &&
        get("boundary.u").value_or("").rfind("table:", 0) != 0) {
        try {
            spec = make_problem(g, coefficient_set(), equation_class(), dsl::Expr::parse(require("initial.u")),
                                dsl::Expr::parse(get("boundary.u").value_or("0")), y_boundary());
        } catch (const dsl::ParseError& e) {
            throw InputError(std::string("initial/boundary expression: ") + e.what());
        }
    } else {
        spec.grid = g;
        spec.coefficients = {field("coefficients.a", "1"), field("coefficients.b0", "0"), field("coefficients.b", "x")};
        spec.initial = scalar("initial.u", "0");
        if (!get("initial.u")) throw InputError("missing key 'initial.u'");
        spec.boundary = {y_boundary(), scalar("boundary.u", "0")};
        spec.equation_class = equation_class();
    }
    spec.output_times = output_times();
    spec.record_every_step = every_step();
    return spec;
}

ProbeConfig ProblemFile::probe_config() const {
    ProbeConfig cfg;
    cfg.theta = number("probe.theta", cfg.theta);
    cfg.alpha = number("probe.alpha", cfg.alpha);
    cfg.beta = number("probe.beta", cfg.beta);
    cfg.p = number("probe.p", cfg.p);
    if (auto v = get("probe.radii")) cfg.radii = parse_list(*v);
    if (auto v = get("probe.h_levels")) cfg.h_levels = parse_list(*v);
    cfg.lattice = static_cast<int>(number("probe.lattice", cfg.lattice));
    return cfg;
}

std::optional<Point> ProblemFile::probe_center() const {
    if (auto v = get("probe.center")) return parse_point(*v);
    return std::nullopt;
}

fs::path ProblemFile::output_directory() const {
    auto v = get("output.directory");
    if (!v) {
        std::string stem = source.empty() ? "problem" : source.stem().string();
        return base_dir / (stem + "_out");
    }
    return resolve(*v);
}

std::vector<double> ProblemFile::output_times() const {
    if (auto v = get("output.times")) return parse_list(*v);
    return {};
}

bool ProblemFile::every_step() const {
    auto v = get("output.every_step").value_or("false");
    if (v == "true") return true;
    if (v == "false") return false;
    throw InputError("output.every_step must be 'true' or 'false'");
}

void write_trajectory(const Trajectory& tr, const fs::path& dir, const std::string& spec_hash) {
    fs::create_directories(dir);
    const Grid& g = tr.grid;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < tr.levels.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "level_%04zu.csv", k);
        std::string out = provenance(spec_hash) + "# t=" + fmt(tr.times[k]) + "\nx,y,value\n";
        const Field& f = tr.levels[k];
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) out += fmt(g.xc(i)) + "," + fmt(g.yc(j)) + "," + fmt(f(i, j)) + "\n";
        }
        std::ofstream(dir / name, std::ios::binary) << out;
        files.push_back(name);
    }
    nlohmann::ordered_json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["spec_hash"] = spec_hash;
    m["grid"] = {{"x0", g.x0}, {"x1", g.x1}, {"y0", g.y0}, {"y1", g.y1},
                 {"nx", g.nx}, {"ny", g.ny}, {"t0", g.t0}, {"t1", g.t1}};
    m["periodic_y"] = tr.periodic_y;
    m["times"] = tr.times;
    m["files"] = files;
    std::ofstream(dir / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
}

Trajectory read_trajectory(const fs::path& dir) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw InputError((dir / "manifest.json").string() + ": " + e.what());
    }
    Trajectory tr;
    try {
        const auto& g = m.at("grid");
        tr.grid = {g.at("x0"), g.at("x1"), g.at("y0"), g.at("y1"), g.at("nx"), g.at("ny"), g.at("t0"), g.at("t1")};
        tr.periodic_y = m.at("periodic_y");
        tr.times = m.at("times").get<std::vector<double>>();
        auto files = m.at("files").get<std::vector<std::string>>();
        if (files.size() != tr.times.size() || files.empty()) throw InputError("manifest: files and times differ");
        for (std::size_t k = 0; k < files.size(); ++k) {
            auto rows = read_rows(dir / files[k], 3);
            if (rows.size() != static_cast<std::size_t>(tr.grid.nx) * tr.grid.ny) {
                throw InputError(files[k] + ": expected nx*ny rows");
            }
            Field f{tr.grid.nx, tr.grid.ny, tr.times[k], {}};
            f.v.reserve(rows.size());
            for (const auto& r : rows) f.v.push_back(r[2]);
            tr.levels.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError((dir / "manifest.json").string() + ": " + e.what());
    }
    return tr;
}

}  // namespace kolmo
