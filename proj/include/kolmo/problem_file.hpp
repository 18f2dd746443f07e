#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kolmo/probe.hpp"
#include "kolmo/solver.hpp"

namespace kolmo {

inline constexpr const char* kToolName = "kolmo";
inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed problem files, tables or trajectory directories. The CLI maps
/// it to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values on a regular x-y-t lattice read from CSV rows "x,y,t,value".
/// Lookups interpolate trilinearly and clamp to the lattice hull; a lattice
/// with one time level is constant in t.
class LatticeTable {
public:
    static LatticeTable load(const std::filesystem::path& file);
    static LatticeTable sample(const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::vector<double>& ts, const std::function<double(const Point&)>& f);

    double operator()(const Point& z) const;
    bool time_dependent() const { return ts_.size() > 1; }

    /// CSV text with a provenance comment line and header "x,y,t,value".
    std::string to_csv(const std::string& spec_hash) const;

private:
    std::vector<double> xs_, ys_, ts_;
    std::vector<double> v_;  // index (k * nx + i) * ny + j
};

/// Parsed problem file. Sections and keys:
///   [coefficients] a, b0, b, mu, class (L0 | L1 | L2 | general)
///   [grid]         x0, x1, y0, y1, nx, ny, t0, t1, y_boundary (dirichlet | periodic)
///   [initial]      u
///   [boundary]     u
///   [probe]        center, radii, theta, alpha, beta, p, h_levels, lattice
///   [output]       directory, times, every_step
/// A value "table:<file>" in [coefficients] a/b0, [initial] or [boundary]
/// loads a LatticeTable. Relative paths resolve against the file's directory.
struct ProblemFile {
    std::filesystem::path source;
    std::filesystem::path base_dir;
    std::map<std::string, std::string> entries;  // "section.key" -> value
    std::string spec_hash;

    static ProblemFile load(const std::filesystem::path& file);
    static ProblemFile parse(const std::string& text, const std::filesystem::path& base_dir);

    std::optional<std::string> get(const std::string& key) const;
    std::string require(const std::string& key) const;
    double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;

    Grid grid() const;
    BoundaryKind y_boundary() const;
    EquationClass equation_class() const;

    /// The coefficients as DSL expressions; throws InputError when one of
    /// them is a table.
    CoefficientSet coefficient_set() const;
    ProblemSpec problem_spec() const;
    ProbeConfig probe_config() const;
    std::optional<Point> probe_center() const;
    std::filesystem::path output_directory() const;
    std::vector<double> output_times() const;
    bool every_step() const;

    std::filesystem::path resolve(const std::string& path) const;
};

/// FNV-1a (64 bit) of the sorted "section.key=value" lines, as 16 hex digits.
std::string content_hash(const std::map<std::string, std::string>& entries);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

/// "# kolmo <version> spec_hash=<hash>", the first line of every CSV output.
std::string provenance_line(const std::string& spec_hash);

/// Comma-separated reals; throws InputError on anything else.
std::vector<double> parse_list(const std::string& text);
Point parse_point(const std::string& text);

/// Writes level_NNNN.csv files ("x,y,value" rows, x-major) and manifest.json.
void write_trajectory(const Trajectory& tr, const std::filesystem::path& dir, const std::string& spec_hash);
Trajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace kolmo
