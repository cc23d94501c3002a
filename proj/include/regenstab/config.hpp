#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regenstab/process.hpp"

namespace regenstab {

enum class TaskKind { Analyze, Sweep, Simulate, FloquetCheck };

const char* to_string(TaskKind task);

struct SweepRange {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 2;
};

/// "A:B:STEPS"
SweepRange parse_sweep_range(const std::string& text);

struct ModelConfig {
    std::string kind;  // maintenance | finite-support | periodic | uniform-handoff
    double period = 1.25;         // maintenance T
    double jitter_fraction = 0.1; // maintenance delta
    double failure_rate = 1.0;    // maintenance lambda
    double handoff_min = 1.0;     // uniform-handoff T
    std::vector<std::pair<double, Cycle>> cycles;  // finite-support / periodic
};

/// Fully parsed run request. Field defaults match the CLI documentation.
struct RunConfig {
    TimeKind time_kind = TimeKind::Continuous;
    std::vector<Eigen::MatrixXd> matrices;
    ModelConfig model;
    int degree = 2;
    TaskKind task = TaskKind::Analyze;
    std::string method;  // "analytic" | "monte-carlo" | "" (auto)
    long samples = 100000;
    long paths = 10000;
    double horizon = 30.0;
    double dt = 0.1;
    std::optional<SweepRange> range;
    std::optional<std::uint64_t> seed;  // mandatory for randomized tasks
    int workers = 1;
    bool assert_positive = false;
    bool strict = false;
    std::vector<double> x0;  // optional; defaults to a normalized all-ones state
    std::string out_dir = ".";
};

/// Parses the JSON run configuration; error messages carry the object path.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/**
 * Built-in benchmark fixture: a two-dimensional plant dx/dt = Ax + Bu whose
 * stabilizing state feedback drops out while a fault is active, switched by
 * the jittered-maintenance model (T = 1.25, delta = 0.1, lambda = 1, m = 2).
 * Mode 1 is the closed loop A + BK (recomputed from A, B, K at load time),
 * mode 2 the open loop A.
 */
RunConfig paper_fixture();

/// Built-in positivity fixture: an averaging mode plus a clockwise rotation
/// mode under the uniform-handoff model.
RunConfig positivity_fixture();

RunConfig builtin_fixture(const std::string& name);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;
    std::string assumption_summary;
};

/// Full schema/invariant check plus assumption pre-check; never throws for
/// content errors (they are collected into the report).
ValidationReport validate_config(const RunConfig& config);

SwitchedSystem build_system(const RunConfig& config);
std::unique_ptr<CycleModel> build_model(const ModelConfig& model);
Eigen::VectorXd initial_state(const RunConfig& config);
PositivityAssertion positivity_assertion(const RunConfig& config);

}  // namespace regenstab
