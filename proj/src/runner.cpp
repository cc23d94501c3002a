#include "regenstab/runner.hpp"

#include <filesystem>
#include <iostream>
#include <sstream>

#include "regenstab/analyzer.hpp"
#include "regenstab/csv.hpp"
#include "regenstab/simulate.hpp"

namespace regenstab {

namespace fs = std::filesystem;

std::string resolved_method(const RunConfig& config) {
    if (!config.method.empty()) return config.method;
    if (config.model.kind == "maintenance" || config.model.kind == "finite-support" ||
        config.model.kind == "periodic")
        return "analytic";
    return "monte-carlo";
}

namespace {

void append_assumptions(std::ostringstream& out, const AssumptionReport& report) {
    out << "A1: " << to_string(report.even_or_positive.status) << " -- "
        << report.even_or_positive.detail << '\n';
    out << "A2: " << to_string(report.bounded_cycles.status) << " -- "
        << report.bounded_cycles.detail << '\n';
    out << "A3: " << to_string(report.bounded_modes.status) << " -- " << report.bounded_modes.detail
        << '\n';
    out << "A4: " << to_string(report.invertible_modes.status) << " -- "
        << report.invertible_modes.detail << '\n';
}

void append_stability(std::ostringstream& out, const StabilityReport& report) {
    out << "rho: " << format_double(report.rho) << '\n';
    out << "margin: " << format_double(report.margin) << '\n';
    out << "verdict: " << to_string(report.verdict) << '\n';
    out << "hypotheses: " << (report.within_hypotheses ? "satisfied" : "violated") << '\n';
    if (report.has_interval) {
        out << "rho_lower: " << format_double(report.rho_lower) << '\n';
        out << "rho_upper: " << format_double(report.rho_upper) << '\n';
    }
    if (!report.annotation.empty()) out << "annotation: " << report.annotation << '\n';
    append_assumptions(out, report.assumptions);
}

std::vector<std::string> basis_labels(int n, int degree) {
    const LiftBasis basis(n, degree);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(basis.size()));
    for (Eigen::Index i = 0; i < basis.size(); ++i) labels.push_back(basis.label(i));
    return labels;
}

void write_expectation_files(const fs::path& out_dir, const LiftedExpectation& expectation, int n) {
    const auto labels = basis_labels(n, expectation.degree);
    write_file_atomic(out_dir / "expectation.csv", matrix_csv(expectation.estimate, labels));
    if (expectation.method == ExpectationMethod::MonteCarlo)
        write_file_atomic(out_dir / "expectation_stderr.csv",
                          matrix_csv(expectation.standard_error, labels));
}

int finish(const RunConfig& config, const std::string& report_text, Verdict verdict,
           bool has_verdict) {
    write_file_atomic(fs::path(config.out_dir) / "report.txt", report_text);
    std::cout << report_text;
    if (config.strict && has_verdict && verdict == Verdict::Inconclusive)
        return kExitInconclusiveStrict;
    return kExitOk;
}

int run_analyze(const RunConfig& config, const SwitchedSystem& system, const CycleModel& model) {
    const AssumptionReport assumptions =
        check_assumptions(system, model, config.degree, positivity_assertion(config));
    if (assumptions.even_or_positive.status == CheckStatus::Fail)
        throw ValidationError("assumption A1 failed: " + assumptions.even_or_positive.detail);

    const std::string method = resolved_method(config);
    LiftedExpectation expectation;
    if (method == "analytic") {
        if (const auto* maintenance = dynamic_cast<const MaintenanceModel*>(&model)) {
            expectation = expected_lift_analytic(system, *maintenance, config.degree);
        } else if (const auto* finite = dynamic_cast<const FiniteSupportModel*>(&model)) {
            expectation = expected_lift_exact(system, *finite, config.degree);
        } else {
            throw ValidationError("analytic method is not available for model kind '" +
                                  config.model.kind + "'; use monte-carlo");
        }
    } else {
        expectation = expected_lift_mc(system, model, config.degree, config.samples, *config.seed,
                                       config.workers);
    }

    const StabilityReport stability = decide_stability(expectation, assumptions);

    std::ostringstream out;
    out << "task: analyze\n";
    out << "model: " << model.describe() << '\n';
    out << "degree: " << config.degree << '\n';
    out << "method: " << method << '\n';
    if (method == "monte-carlo") {
        out << "samples: " << expectation.sample_count << '\n';
        out << "seed: " << *config.seed << '\n';
        out << "workers: " << config.workers << '\n';
    }
    append_stability(out, stability);
    write_expectation_files(config.out_dir, expectation, system.dimension());
    return finish(config, out.str(), stability.verdict, true);
}

int run_sweep(const RunConfig& config, const SwitchedSystem& system) {
    const SweepRange range = *config.range;
    const auto rho_of_period = [&](double period) {
        const MaintenanceModel model(period, config.model.jitter_fraction, config.model.failure_rate);
        return spectral_radius(expected_lift_analytic(system, model, config.degree).estimate).radius;
    };
    const SweepResult sweep = threshold_sweep(rho_of_period, range.lo, range.hi, range.steps);

    std::string csv = csv_row({"theta", "rho", "verdict"});
    for (const auto& row : sweep.rows)
        csv += csv_row({format_double(row.theta), format_double(row.rho), to_string(row.verdict)});
    write_file_atomic(fs::path(config.out_dir) / "sweep.csv", csv);

    std::ostringstream out;
    out << "task: sweep\n";
    out << "degree: " << config.degree << '\n';
    out << "method: analytic\n";
    out << "grid: " << range.steps << " points on [" << format_double(range.lo) << ", "
        << format_double(range.hi) << "]\n";
    if (sweep.theta_star) {
        out << "T_star: " << format_double(*sweep.theta_star) << '\n';
    } else {
        out << "T_star: none (no rho = 1 crossing bracketed by the grid)\n";
    }
    return finish(config, out.str(), Verdict::Inconclusive, false);
}

int run_simulate(const RunConfig& config, const SwitchedSystem& system, const CycleModel& model) {
    const Eigen::VectorXd x0 = initial_state(config);
    const long stored_count = std::min<long>(config.paths, 64);
    std::vector<TrajectoryRecord> stored;
    const EnsembleSummary summary =
        ensemble_mean(system, model, x0, config.degree, config.horizon, config.dt, config.paths,
                      *config.seed, config.workers, stored_count, &stored);

    // paths.csv: grid time plus one column per stored path; truncated paths
    // leave empty fields past their divergence point.
    std::vector<std::string> header{"t"};
    for (long p = 0; p < stored_count; ++p) header.push_back("path_" + std::to_string(p));
    std::string paths_csv = csv_row(header);
    for (std::size_t j = 0; j < summary.times.size(); ++j) {
        std::vector<std::string> row{format_double(summary.times[j])};
        for (const auto& record : stored)
            row.push_back(j < record.values.size() ? format_double(record.values[j]) : "");
        paths_csv += csv_row(row);
    }
    write_file_atomic(fs::path(config.out_dir) / "paths.csv", paths_csv);

    std::string ensemble_csv = csv_row({"t", "mean", "stderr"});
    for (std::size_t j = 0; j < summary.times.size(); ++j)
        ensemble_csv += csv_row({format_double(summary.times[j]), format_double(summary.mean[j]),
                                 format_double(summary.standard_error[j])});
    write_file_atomic(fs::path(config.out_dir) / "ensemble.csv", ensemble_csv);

    std::ostringstream out;
    out << "task: simulate\n";
    out << "model: " << model.describe() << '\n';
    out << "degree: " << config.degree << '\n';
    out << "paths: " << summary.paths << '\n';
    out << "horizon: " << format_double(config.horizon) << '\n';
    out << "dt: " << format_double(config.dt) << '\n';
    out << "seed: " << *config.seed << '\n';
    out << "workers: " << config.workers << '\n';
    out << "diverged_paths: " << summary.diverged_count << '\n';
    if (summary.unstable_by_divergence) {
        out << "empirical_verdict: unstable (all paths diverged)\n";
    } else if (summary.exponent_valid) {
        out << "beta_hat: " << format_double(summary.decay_exponent) << '\n';
        out << "empirical_verdict: " << (summary.decay_exponent > 0.0 ? "stable" : "unstable")
            << " (sign of the fitted exponent)\n";
    } else {
        out << "empirical_verdict: inconclusive (no finite tail to fit)\n";
    }
    return finish(config, out.str(), Verdict::Inconclusive, false);
}

int run_floquet(const RunConfig& config, const SwitchedSystem& system) {
    const Cycle cycle = config.model.cycles.front().second;
    const FloquetReport floquet = floquet_check(system, cycle, config.degree);

    std::ostringstream out;
    out << "task: floquet-check\n";
    out << "degree: " << config.degree << '\n';
    out << "rho_base: " << format_double(floquet.rho_base) << '\n';
    out << "rho_lifted: " << format_double(floquet.rho_lifted) << '\n';
    out << "relative_error: " << format_double(floquet.relative_error) << '\n';
    out << "identity_holds: " << (floquet.identity_holds ? "yes" : "no") << '\n';
    out << "classical_stable: " << (floquet.classical_stable ? "yes" : "no") << '\n';
    out << "verdict: " << to_string(floquet.analyzer_verdict) << '\n';
    out << "verdicts_agree: " << (floquet.verdicts_agree ? "yes" : "no") << '\n';
    return finish(config, out.str(), floquet.analyzer_verdict, true);
}

}  // namespace

int run_validate(const RunConfig& config) {
    const ValidationReport report = validate_config(config);
    if (report.ok) {
        std::cout << "config: ok\n";
    } else {
        std::cout << "config: invalid\n";
        for (const auto& message : report.errors) std::cout << "error: " << message << '\n';
    }
    std::cout << report.assumption_summary;
    return report.ok ? kExitOk : kExitValidation;
}

int run_task(const RunConfig& config) {
    try {
        const ValidationReport report = validate_config(config);
        if (!report.ok) {
            for (const auto& message : report.errors) std::cerr << "error: " << message << '\n';
            return kExitValidation;
        }
        const SwitchedSystem system = build_system(config);
        const auto model = build_model(config.model);
        switch (config.task) {
            case TaskKind::Analyze: return run_analyze(config, system, *model);
            case TaskKind::Sweep: return run_sweep(config, system);
            case TaskKind::Simulate: return run_simulate(config, system, *model);
            case TaskKind::FloquetCheck: return run_floquet(config, system);
        }
        return kExitValidation;
    } catch (const ModelViolation& err) {
        std::cerr << "model violation: " << err.what() << '\n';
        return kExitModelViolation;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace regenstab
