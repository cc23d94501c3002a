#include "regenstab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "regenstab/linalg.hpp"

namespace regenstab {

namespace {

constexpr double kDivergenceNorm = 1e300;
constexpr long kPathChunk = 16;  // paths per reduction chunk, fixed for determinism

/// Walks one path, invoking visit(grid_index, time, state) at every grid
/// point reached before the horizon or divergence. Returns the divergence
/// time once the state norm exceeds divergence_norm; the offending state is
/// not visited, so every visited value stays representable.
template <typename Visit>
std::optional<double> walk_path(const SwitchedSystem& system, const CycleModel& model,
                                const Eigen::VectorXd& x0, double horizon, double dt,
                                double divergence_norm, RngStream& rng, Visit&& visit) {
    if (!(dt > 0.0)) throw ValidationError("simulate: dt must be positive");
    if (!(horizon > 0.0)) throw ValidationError("simulate: horizon must be positive");
    if (x0.size() != system.dimension())
        throw ValidationError("simulate: initial state dimension mismatch");
    const bool discrete = system.time_kind() == TimeKind::Discrete;
    if (discrete) dt = 1.0;

    const long grid_count = static_cast<long>(std::floor(horizon / dt * (1.0 + 1e-12))) + 1;
    // One exponential per (mode, dt) reused across segments.
    std::vector<std::optional<Eigen::MatrixXd>> step_cache(
        static_cast<std::size_t>(system.mode_count()));
    auto grid_step = [&](int mode) -> const Eigen::MatrixXd& {
        auto& slot = step_cache[static_cast<std::size_t>(mode - 1)];
        if (!slot) {
            slot = discrete ? system.mode_matrix(mode) : expm(system.mode_matrix(mode), dt);
        }
        return *slot;
    };
    auto hop = [&](int mode, double duration, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (discrete) {
            Eigen::VectorXd y = x;
            for (long k = 0; k < static_cast<long>(duration); ++k) y = system.mode_matrix(mode) * y;
            return y;
        }
        return expm(system.mode_matrix(mode), duration) * x;
    };

    Eigen::VectorXd x = x0;
    visit(0l, 0.0, x);
    long next = 1;
    double segment_start = 0.0;
    while (next < grid_count) {
        const Cycle cycle = sample_cycle(model, rng);
        for (const auto& seg : cycle.segments) {
            const double segment_end = segment_start + seg.duration;
            if (next < grid_count && static_cast<double>(next) * dt < segment_end) {
                // First grid point inside the segment: one exponential from
                // the segment start; later points advance by the cached
                // grid-step factor, all products of exact exponentials.
                const double first_time = static_cast<double>(next) * dt;
                Eigen::VectorXd xg = hop(seg.mode, first_time - segment_start, x);
                if (xg.norm() > divergence_norm) return first_time;
                visit(next, first_time, xg);
                ++next;
                while (next < grid_count && static_cast<double>(next) * dt < segment_end) {
                    const double time = static_cast<double>(next) * dt;
                    xg = grid_step(seg.mode) * xg;
                    if (xg.norm() > divergence_norm) return time;
                    visit(next, time, xg);
                    ++next;
                }
            }
            x = hop(seg.mode, seg.duration, x);
            segment_start = segment_end;
            if (x.norm() > divergence_norm) return segment_end;
            if (next >= grid_count) break;
        }
    }
    return std::nullopt;
}

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

TrajectoryRecord simulate_path(const SwitchedSystem& system, const CycleModel& model,
                               const Eigen::VectorXd& x0, int degree, double horizon, double dt,
                               std::uint64_t seed, std::uint64_t stream) {
    if (degree < 1) throw ValidationError("simulate_path: degree must be >= 1");
    TrajectoryRecord record;
    record.seed = seed;
    record.stream = stream;
    RngStream rng(seed, stream);
    // Truncate once |x|^degree would leave the representable range.
    const double norm_cap = std::pow(kDivergenceNorm, 1.0 / static_cast<double>(degree));
    const auto blowup = walk_path(system, model, x0, horizon, dt, norm_cap, rng,
                                  [&](long, double t, const Eigen::VectorXd& x) {
                                      record.times.push_back(t);
                                      record.values.push_back(std::pow(x.norm(), degree));
                                  });
    if (blowup) {
        record.diverged = true;
        record.divergence_time = *blowup;
    }
    return record;
}

Eigen::MatrixXd simulate_states(const SwitchedSystem& system, const CycleModel& model,
                                const Eigen::VectorXd& x0, double horizon, double dt,
                                std::uint64_t seed, std::uint64_t stream) {
    const bool discrete = system.time_kind() == TimeKind::Discrete;
    const double effective_dt = discrete ? 1.0 : dt;
    const long grid_count =
        static_cast<long>(std::floor(horizon / effective_dt * (1.0 + 1e-12))) + 1;
    Eigen::MatrixXd states(system.dimension(), grid_count);
    long filled = 0;
    RngStream rng(seed, stream);
    walk_path(system, model, x0, horizon, dt, kDivergenceNorm, rng,
              [&](long j, double, const Eigen::VectorXd& x) {
                  states.col(j) = x;
                  filled = j + 1;
              });
    return states.leftCols(filled);
}

EnsembleSummary ensemble_mean(const SwitchedSystem& system, const CycleModel& model,
                              const Eigen::VectorXd& x0, int degree, double horizon, double dt,
                              long paths, std::uint64_t seed, int workers, long store_paths,
                              std::vector<TrajectoryRecord>* stored) {
    if (paths < 2) throw ValidationError("ensemble_mean: needs at least 2 paths");
    const bool discrete = system.time_kind() == TimeKind::Discrete;
    const double effective_dt = discrete ? 1.0 : dt;
    const long grid_count =
        static_cast<long>(std::floor(horizon / effective_dt * (1.0 + 1e-12))) + 1;

    if (stored) stored->assign(static_cast<std::size_t>(std::min(store_paths, paths)), {});

    const long chunks = (paths + kPathChunk - 1) / kPathChunk;
    std::vector<Eigen::ArrayXd> chunk_sum(static_cast<std::size_t>(chunks));
    std::vector<Eigen::ArrayXd> chunk_sumsq(static_cast<std::size_t>(chunks));
    std::vector<long> chunk_diverged(static_cast<std::size_t>(chunks), 0);

    run_chunks(chunks, workers, [&](long c) {
        Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(grid_count);
        Eigen::ArrayXd sumsq = Eigen::ArrayXd::Zero(grid_count);
        long diverged = 0;
        const long first = c * kPathChunk;
        const long last = std::min(paths, first + kPathChunk);
        for (long p = first; p < last; ++p) {
            TrajectoryRecord record = simulate_path(system, model, x0, degree, horizon, dt, seed,
                                                    static_cast<std::uint64_t>(p));
            if (record.diverged) ++diverged;
            const long have = static_cast<long>(record.values.size());
            for (long j = 0; j < grid_count; ++j) {
                // A truncated (diverged) path counts as +inf past its end.
                const double v =
                    j < have ? record.values[static_cast<std::size_t>(j)]
                             : std::numeric_limits<double>::infinity();
                sum[j] += v;
                sumsq[j] += v * v;
            }
            if (stored && p < static_cast<long>(stored->size()))
                (*stored)[static_cast<std::size_t>(p)] = std::move(record);
        }
        chunk_sum[static_cast<std::size_t>(c)] = std::move(sum);
        chunk_sumsq[static_cast<std::size_t>(c)] = std::move(sumsq);
        chunk_diverged[static_cast<std::size_t>(c)] = diverged;
    });

    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(grid_count);
    Eigen::ArrayXd sumsq = Eigen::ArrayXd::Zero(grid_count);
    EnsembleSummary summary;
    for (long c = 0; c < chunks; ++c) {
        sum += chunk_sum[static_cast<std::size_t>(c)];
        sumsq += chunk_sumsq[static_cast<std::size_t>(c)];
        summary.diverged_count += chunk_diverged[static_cast<std::size_t>(c)];
    }

    summary.paths = paths;
    summary.unstable_by_divergence = summary.diverged_count == paths;
    const double P = static_cast<double>(paths);
    summary.times.resize(static_cast<std::size_t>(grid_count));
    summary.mean.resize(static_cast<std::size_t>(grid_count));
    summary.standard_error.resize(static_cast<std::size_t>(grid_count));
    for (long j = 0; j < grid_count; ++j) {
        summary.times[static_cast<std::size_t>(j)] = static_cast<double>(j) * effective_dt;
        const double mean = sum[j] / P;
        summary.mean[static_cast<std::size_t>(j)] = mean;
        const double var = std::max(0.0, (sumsq[j] / P - mean * mean) * (P / (P - 1.0)));
        summary.standard_error[static_cast<std::size_t>(j)] = std::sqrt(var / P);
    }

    // Fit log(mean) ~ a - decay_exponent * t on the tail half of the horizon;
    // the transient is discarded, the window is not tuned per system.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (long j = 0; j < grid_count; ++j) {
        const double t = summary.times[static_cast<std::size_t>(j)];
        const double m = summary.mean[static_cast<std::size_t>(j)];
        if (t < horizon / 2.0 || !(m > 0.0) || !std::isfinite(m)) continue;
        const double y = std::log(m);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++count;
    }
    const double denom = static_cast<double>(count) * sxx - sx * sx;
    if (count >= 2 && denom > 0.0) {
        summary.decay_exponent = -((static_cast<double>(count) * sxy - sx * sy) / denom);
        summary.exponent_valid = true;
    }
    return summary;
}

}  // namespace regenstab
