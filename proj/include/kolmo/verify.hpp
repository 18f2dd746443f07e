#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kolmo {

/// One measured quantity against its bound. `relation` is "<=" or ">=".
struct Check {
    std::string name;
    double value = 0.0;
    std::string relation = "<=";
    double bound = 0.0;
    bool passed = false;
};

struct SuiteResult {
    std::string name;
    std::vector<Check> checks;
    std::string error;  // set when the suite threw; the suite then fails
    bool passed() const;
};

struct VerifyReport {
    std::uint64_t seed = 42;
    std::vector<SuiteResult> suites;

    bool passed() const;
    /// Pretty-printed JSON. Contains no timings, so reruns with the same seed
    /// and thread count are byte-identical.
    std::string to_json() const;
};

/// Names of the suites in run order: group, gamma, dsl, coefficients,
/// solver, potentials, reduction, probe.
std::vector<std::string> verify_suite_names();

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed);

/// Runs every suite. Progress and timings go to `log` when it is non-null.
VerifyReport run_verify(std::uint64_t seed, std::ostream* log = nullptr);

}  // namespace kolmo
