#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "regenstab/runner.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string fixture;
    std::string task;
    std::string method;
    std::optional<int> degree;
    std::optional<double> period;
    std::optional<double> failure_rate;
    std::optional<double> jitter;
    std::optional<long> samples;
    std::optional<long> paths;
    std::optional<double> horizon;
    std::optional<double> dt;
    std::string range;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir;
    bool assert_positive = false;
    bool strict = false;
};

void add_common_options(CLI::App& cmd, CliOptions& opts) {
    cmd.add_option("--config", opts.config_path, "Path to a JSON run configuration");
    cmd.add_option("--fixture", opts.fixture, "Built-in configuration: paper|positivity");
}

void add_run_options(CLI::App& cmd, CliOptions& opts) {
    cmd.add_option("--task", opts.task, "analyze|sweep|simulate|floquet-check");
    cmd.add_option("--method", opts.method, "Expectation engine for analyze: analytic|monte-carlo");
    cmd.add_option("--m", opts.degree, "Mean order / lift degree");
    cmd.add_option("--T", opts.period, "Maintenance period T");
    cmd.add_option("--lambda", opts.failure_rate, "Failure rate lambda");
    cmd.add_option("--delta", opts.jitter, "Jitter fraction delta");
    cmd.add_option("--samples", opts.samples, "Monte Carlo sample count");
    cmd.add_option("--paths", opts.paths, "Simulation path count");
    cmd.add_option("--horizon", opts.horizon, "Simulation horizon");
    cmd.add_option("--dt", opts.dt, "Simulation grid step");
    cmd.add_option("--range", opts.range, "Sweep grid A:B:STEPS");
    cmd.add_option("--seed", opts.seed, "RNG seed (required for randomized tasks)");
    cmd.add_option("--workers", opts.workers, "Worker threads (results are worker-count invariant)");
    cmd.add_option("--out", opts.out_dir, "Output directory");
    cmd.add_flag("--assert-positive", opts.assert_positive,
                 "Assert the system is positive (assumption A1 for odd degrees)");
    cmd.add_flag("--strict", opts.strict, "Exit 4 when the verdict is inconclusive");
}

int build_config(const CliOptions& opts, regenstab::RunConfig& config) {
    try {
        if (!opts.fixture.empty() && !opts.config_path.empty()) {
            std::cerr << "error: --config and --fixture are mutually exclusive\n";
            return regenstab::kExitValidation;
        }
        if (!opts.fixture.empty()) {
            config = regenstab::builtin_fixture(opts.fixture);
        } else if (!opts.config_path.empty()) {
            config = regenstab::parse_config_file(opts.config_path);
        } else {
            std::cerr << "error: one of --config or --fixture is required\n";
            return regenstab::kExitValidation;
        }

        if (!opts.task.empty()) {
            if (opts.task == "analyze") config.task = regenstab::TaskKind::Analyze;
            else if (opts.task == "sweep") config.task = regenstab::TaskKind::Sweep;
            else if (opts.task == "simulate") config.task = regenstab::TaskKind::Simulate;
            else if (opts.task == "floquet-check") config.task = regenstab::TaskKind::FloquetCheck;
            else throw regenstab::ValidationError("--task: unknown task '" + opts.task + "'");
        }
        if (!opts.method.empty()) {
            if (opts.method != "analytic" && opts.method != "monte-carlo")
                throw regenstab::ValidationError("--method: expected analytic|monte-carlo");
            config.method = opts.method;
        }
        if (opts.degree) config.degree = *opts.degree;
        if (opts.period) config.model.period = *opts.period;
        if (opts.failure_rate) config.model.failure_rate = *opts.failure_rate;
        if (opts.jitter) config.model.jitter_fraction = *opts.jitter;
        if (opts.samples) config.samples = *opts.samples;
        if (opts.paths) config.paths = *opts.paths;
        if (opts.horizon) config.horizon = *opts.horizon;
        if (opts.dt) config.dt = *opts.dt;
        if (!opts.range.empty()) config.range = regenstab::parse_sweep_range(opts.range);
        if (opts.seed) config.seed = *opts.seed;
        if (opts.workers) config.workers = *opts.workers;
        if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
        if (opts.assert_positive) config.assert_positive = true;
        if (opts.strict) config.strict = true;
        return regenstab::kExitOk;
    } catch (const regenstab::ValidationError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return regenstab::kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenstab: mean stability certification for regeneratively switched linear systems"};
    app.require_subcommand(1);

    CliOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "Execute a task and write report/CSV outputs");
    add_common_options(*run_cmd, run_opts);
    add_run_options(*run_cmd, run_opts);

    CliOptions validate_opts;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Check a configuration and print the assumption pre-check");
    add_common_options(*validate_cmd, validate_opts);
    add_run_options(*validate_cmd, validate_opts);

    CLI11_PARSE(app, argc, argv);

    regenstab::RunConfig config;
    if (run_cmd->parsed()) {
        const int status = build_config(run_opts, config);
        if (status != regenstab::kExitOk) return status;
        return regenstab::run_task(config);
    }
    const int status = build_config(validate_opts, config);
    if (status != regenstab::kExitOk) return status;
    return regenstab::run_validate(config);
}
