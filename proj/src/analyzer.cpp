#include "regenstab/analyzer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace regenstab {

namespace {

constexpr long kChunkSize = 1024;  // samples per reduction chunk, fixed for determinism
constexpr double kBoundaryEps = 1e-9;

Eigen::MatrixXd integer_matrix_power(const Eigen::MatrixXd& A, long k) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd base = A;
    while (k > 0) {
        if (k & 1) result = base * result;
        base = base * base;
        k >>= 1;
    }
    return result;
}

/// Runs fn(chunk) for chunk in [0, chunks) across workers; chunk c goes to
/// worker c % workers. The first exception thrown in any worker is rethrown.
void run_chunks(long chunks, int workers, const std::function<void(long)>& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || chunks <= 1) {
        for (long c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long c = w; c < chunks; c += workers) fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

TransitionMatrix cycle_transition(const SwitchedSystem& system, const Cycle& cycle) {
    validate_cycle(cycle, system.time_kind());
    const int n = system.dimension();
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (const auto& seg : cycle.segments) {
        const Eigen::MatrixXd& A = system.mode_matrix(seg.mode);
        if (system.time_kind() == TimeKind::Continuous) {
            M = expm(A, seg.duration) * M;
        } else {
            M = integer_matrix_power(A, static_cast<long>(seg.duration)) * M;
        }
    }
    return {std::move(M), cycle};
}

Eigen::MatrixXd lifted_cycle_transition(const SwitchedSystem& system, const Cycle& cycle,
                                        const LiftBasis& basis) {
    validate_cycle(cycle, system.time_kind());
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(basis.size(), basis.size());
    for (const auto& seg : cycle.segments) {
        const Eigen::MatrixXd& A = system.mode_matrix(seg.mode);
        if (system.time_kind() == TimeKind::Continuous) {
            M = expm((infinitesimal_lift(A, basis).mat * seg.duration).eval()) * M;
        } else {
            M = integer_matrix_power(lift_matrix(A, basis).mat, static_cast<long>(seg.duration)) * M;
        }
    }
    return M;
}

namespace {

/// Per-mode lifted generators (continuous) or lifted powers (discrete),
/// precomputed once per Monte Carlo run.
struct LiftedModeCache {
    LiftedModeCache(const SwitchedSystem& system, const LiftBasis& basis) : system_(&system) {
        lifted_.reserve(static_cast<std::size_t>(system.mode_count()));
        for (int mode = 1; mode <= system.mode_count(); ++mode) {
            const Eigen::MatrixXd& A = system.mode_matrix(mode);
            lifted_.push_back(system.time_kind() == TimeKind::Continuous
                                  ? infinitesimal_lift(A, basis).mat
                                  : lift_matrix(A, basis).mat);
        }
    }

    Eigen::MatrixXd transition(const Cycle& cycle) const {
        const Eigen::Index nm = lifted_.front().rows();
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(nm, nm);
        for (const auto& seg : cycle.segments) {
            const Eigen::MatrixXd& L = lifted_[static_cast<std::size_t>(seg.mode - 1)];
            if (system_->time_kind() == TimeKind::Continuous) {
                M = expm((L * seg.duration).eval()) * M;
            } else {
                M = integer_matrix_power(L, static_cast<long>(seg.duration)) * M;
            }
        }
        return M;
    }

  private:
    const SwitchedSystem* system_;
    std::vector<Eigen::MatrixXd> lifted_;
};

}  // namespace

LiftedExpectation expected_lift_mc(const SwitchedSystem& system, const CycleModel& model, int degree,
                                   long samples, std::uint64_t seed, int workers) {
    if (samples < 2) throw ValidationError("expected_lift_mc: needs at least 2 samples");
    const LiftBasis basis(system.dimension(), degree);
    const LiftedModeCache cache(system, basis);
    const Eigen::Index nm = basis.size();

    // Accumulation is centered on the first sample so a deterministic model
    // yields an exactly zero spread and the mean reproduces the sample
    // bit-for-bit.
    Eigen::MatrixXd center;
    {
        RngStream rng(seed, 0);
        center = cache.transition(sample_cycle(model, rng));
    }

    const long chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Eigen::MatrixXd> chunk_sum(static_cast<std::size_t>(chunks));
    std::vector<Eigen::MatrixXd> chunk_sumsq(static_cast<std::size_t>(chunks));

    run_chunks(chunks, workers, [&](long c) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(nm, nm);
        Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(nm, nm);
        const long first = c * kChunkSize;
        const long last = std::min(samples, first + kChunkSize);
        for (long i = first; i < last; ++i) {
            RngStream rng(seed, static_cast<std::uint64_t>(i));
            const Eigen::MatrixXd deviation = cache.transition(sample_cycle(model, rng)) - center;
            sum += deviation;
            sumsq += deviation.cwiseProduct(deviation);
        }
        chunk_sum[static_cast<std::size_t>(c)] = std::move(sum);
        chunk_sumsq[static_cast<std::size_t>(c)] = std::move(sumsq);
    });

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(nm, nm);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(nm, nm);
    for (long c = 0; c < chunks; ++c) {
        sum += chunk_sum[static_cast<std::size_t>(c)];
        sumsq += chunk_sumsq[static_cast<std::size_t>(c)];
    }

    const double N = static_cast<double>(samples);
    const Eigen::MatrixXd mean_dev = sum / N;
    LiftedExpectation out;
    out.degree = degree;
    out.method = ExpectationMethod::MonteCarlo;
    out.sample_count = samples;
    out.estimate = center + mean_dev;
    const Eigen::MatrixXd variance =
        ((sumsq / N - mean_dev.cwiseProduct(mean_dev)) * (N / (N - 1.0))).cwiseMax(0.0);
    out.standard_error = (variance / N).cwiseSqrt();
    return out;
}

LiftedExpectation expected_lift_analytic(const SwitchedSystem& system, const MaintenanceModel& model,
                                         int degree) {
    if (system.time_kind() != TimeKind::Continuous)
        throw ValidationError("expected_lift_analytic: maintenance model is continuous-time");
    if (system.mode_count() != 2)
        throw ValidationError(
            "expected_lift_analytic: the maintenance structure needs exactly two modes");

    const LiftBasis basis(system.dimension(), degree);
    const Eigen::Index nm = basis.size();
    const Eigen::MatrixXd L1 = infinitesimal_lift(system.mode_matrix(1), basis).mat;
    const Eigen::MatrixXd L2 = infinitesimal_lift(system.mode_matrix(2), basis).mat;
    const double lambda = model.failure_rate();
    const double T = model.period();
    const double delta = model.jitter_fraction();

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nm, nm);
    const Eigen::MatrixXd tail_gen = L1 - lambda * I;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * nm, 2 * nm);
    G.topLeftCorner(nm, nm) = L2;
    G.topRightCorner(nm, nm) = lambda * I;
    G.bottomRightCorner(nm, nm) = tail_gen;

    LiftedExpectation out;
    out.degree = degree;
    out.method = ExpectationMethod::Analytic;
    if (delta == 0.0) {
        // Degenerate jitter: single cycle length T.
        out.estimate = expm((G * T).eval()).topRightCorner(nm, nm) + expm((tail_gen * T).eval());
        return out;
    }
    const double lo = (1.0 - delta) * T;
    const double hi = (1.0 + delta) * T;
    const Eigen::MatrixXd failure_term = expm_integral(G, lo, hi).topRightCorner(nm, nm);
    const Eigen::MatrixXd no_failure_term = expm_integral(tail_gen, lo, hi);
    out.estimate = (failure_term + no_failure_term) / (2.0 * delta * T);
    return out;
}

LiftedExpectation expected_lift_exact(const SwitchedSystem& system, const FiniteSupportModel& model,
                                      int degree) {
    const LiftBasis basis(system.dimension(), degree);
    LiftedExpectation out;
    out.degree = degree;
    out.method = ExpectationMethod::Analytic;
    out.estimate = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (const auto& [p, cycle] : model.atoms())
        out.estimate += p * lifted_cycle_transition(system, cycle, basis);
    return out;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

Verdict classify(double rho) {
    if (rho < 1.0 - kBoundaryEps) return Verdict::Stable;
    if (rho > 1.0 + kBoundaryEps) return Verdict::Unstable;
    return Verdict::Inconclusive;
}

}  // namespace

StabilityReport decide_stability(const LiftedExpectation& expectation,
                                 const AssumptionReport& assumptions) {
    if (!expectation.estimate.allFinite())
        throw ValidationError("decide_stability: expectation estimate has non-finite entries");

    StabilityReport report;
    report.method = expectation.method;
    report.assumptions = assumptions;
    report.within_hypotheses = assumptions.theorem_hypotheses_met();
    report.spectral = spectral_radius(expectation.estimate);
    report.rho = report.spectral.radius;
    report.margin = report.rho - 1.0;

    if (!report.spectral.converged) {
        report.verdict = Verdict::Inconclusive;
        report.annotation = "spectral radius iteration did not converge";
        return report;
    }

    if (expectation.method == ExpectationMethod::MonteCarlo && expectation.standard_error.size() > 0) {
        // Entrywise +-3 SE perturbations: the two uniform extremes plus fixed
        // random sign patterns. Conservative bracket, not a confidence set.
        const Eigen::MatrixXd spread = 3.0 * expectation.standard_error;
        double lo = report.rho, hi = report.rho;
        auto absorb = [&](const Eigen::MatrixXd& signs) {
            const double r = spectral_radius((expectation.estimate + spread.cwiseProduct(signs)).eval()).radius;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        };
        const Eigen::Index nm = expectation.estimate.rows();
        absorb(Eigen::MatrixXd::Constant(nm, nm, 1.0));
        absorb(Eigen::MatrixXd::Constant(nm, nm, -1.0));
        RngStream pattern_rng(0x9D2C5680u, 0);  // fixed: bracket is reproducible across runs
        for (int k = 0; k < 32; ++k) {
            Eigen::MatrixXd signs(nm, nm);
            for (Eigen::Index i = 0; i < nm; ++i)
                for (Eigen::Index j = 0; j < nm; ++j)
                    signs(i, j) = pattern_rng.uniform01() < 0.5 ? -1.0 : 1.0;
            absorb(signs);
        }
        report.has_interval = true;
        report.rho_lower = lo;
        report.rho_upper = hi;
        if (hi < 1.0 - kBoundaryEps) {
            report.verdict = Verdict::Stable;
        } else if (lo > 1.0 + kBoundaryEps) {
            report.verdict = Verdict::Unstable;
        } else {
            report.verdict = Verdict::Inconclusive;
            report.annotation = "Monte Carlo uncertainty bracket straddles 1";
        }
    } else {
        report.verdict = classify(report.rho);
        if (report.verdict == Verdict::Inconclusive)
            report.annotation = "spectral radius within 1e-9 of the stability boundary";
    }

    if (!report.within_hypotheses) {
        std::string reasons;
        auto add = [&](const char* name, const AssumptionCheck& check) {
            if (check.status == CheckStatus::Fail) {
                if (!reasons.empty()) reasons += "; ";
                reasons += std::string(name) + ": " + check.detail;
            }
        };
        add("A1", assumptions.even_or_positive);
        add("A2", assumptions.bounded_cycles);
        add("A3", assumptions.bounded_modes);
        add("A4", assumptions.invertible_modes);
        report.annotation = report.annotation.empty()
                                ? "outside theorem hypotheses (" + reasons + ")"
                                : report.annotation + "; outside theorem hypotheses (" + reasons + ")";
    }
    return report;
}

SweepResult threshold_sweep(const std::function<double(double)>& rho_of_theta, double lo, double hi,
                            int steps) {
    if (steps < 2) throw ValidationError("threshold_sweep: needs at least 2 grid points");
    if (!(lo < hi)) throw ValidationError("threshold_sweep: range endpoints out of order");

    SweepResult result;
    result.rows.reserve(static_cast<std::size_t>(steps));
    const double step = (hi - lo) / static_cast<double>(steps - 1);
    for (int i = 0; i < steps; ++i) {
        const double theta = (i == steps - 1) ? hi : lo + step * static_cast<double>(i);
        const double rho = rho_of_theta(theta);
        result.rows.push_back({theta, rho, classify(rho)});
    }

    for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
        const double fa = result.rows[i].rho - 1.0;
        const double fb = result.rows[i + 1].rho - 1.0;
        if (fa == 0.0) {
            result.theta_star = result.rows[i].theta;
            break;
        }
        if (fa * fb > 0.0) continue;
        double a = result.rows[i].theta;
        double b = result.rows[i + 1].theta;
        double mid = 0.5 * (a + b);
        bool rising = fb > fa;
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (a + b);
            const double f = rho_of_theta(mid) - 1.0;
            if (std::abs(f) < 1e-6) break;
            if ((f > 0.0) == rising) {
                b = mid;
            } else {
                a = mid;
            }
        }
        result.theta_star = mid;
        break;
    }
    return result;
}

FloquetReport floquet_check(const SwitchedSystem& system, const Cycle& periodic_cycle, int degree) {
    FloquetReport report;
    const TransitionMatrix transition = cycle_transition(system, periodic_cycle);
    report.rho_base = spectral_radius(transition.matrix).radius;
    const LiftedMatrix<double> lifted = lift_matrix(transition.matrix, degree);
    report.rho_lifted = spectral_radius(lifted.mat).radius;

    const double expected = std::pow(report.rho_base, degree);
    report.relative_error = std::abs(report.rho_lifted - expected) / std::max(expected, 1e-300);
    report.identity_holds = report.relative_error <= 1e-8;
    report.classical_stable = report.rho_base < 1.0;

    // A single deterministic cycle has expectation equal to the lift itself.
    LiftedExpectation expectation;
    expectation.degree = degree;
    expectation.method = ExpectationMethod::Analytic;
    expectation.estimate = lifted.mat;
    auto model = make_periodic_model(periodic_cycle);
    const AssumptionReport assumptions =
        check_assumptions(system, *model, degree, PositivityAssertion::None);
    report.analyzer_verdict = decide_stability(expectation, assumptions).verdict;
    report.verdicts_agree = (report.analyzer_verdict == Verdict::Stable) == report.classical_stable &&
                            report.analyzer_verdict != Verdict::Inconclusive;
    return report;
}

}  // namespace regenstab
