#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "regenstab/process.hpp"

namespace regenstab {

/// One simulated path of |x(t)|^m on a uniform time grid. A path whose state
/// norm exceeds 1e300 is truncated there and flagged; times and values stay
/// aligned and cover only the surviving prefix of the grid.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    bool diverged = false;
    double divergence_time = 0.0;
};

/**
 * Simulates one sample path of the switched system under the cycle model,
 * recording |x(t)|^degree at grid times j*dt up to the horizon. Within each
 * constant-mode segment states are propagated by matrix exponentials (or
 * matrix powers in discrete time), so there is no integration error; the
 * switching signal is taken right-continuous, so a grid point on a segment
 * boundary evaluates in the incoming mode.
 */
TrajectoryRecord simulate_path(const SwitchedSystem& system, const CycleModel& model,
                               const Eigen::VectorXd& x0, int degree, double horizon, double dt,
                               std::uint64_t seed, std::uint64_t stream = 0);

/// State-history variant: column j holds x(j*dt). Columns after a divergence
/// are dropped.
Eigen::MatrixXd simulate_states(const SwitchedSystem& system, const CycleModel& model,
                                const Eigen::VectorXd& x0, double horizon, double dt,
                                std::uint64_t seed, std::uint64_t stream = 0);

/// Ensemble statistics of |x(t)|^m over independent paths, plus a fitted
/// decay exponent.
struct EnsembleSummary {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> standard_error;
    long paths = 0;
    long diverged_count = 0;
    bool unstable_by_divergence = false;
    /// Least-squares exponent of the ensemble mean over the tail half of the
    /// horizon: mean ~ exp(-decay_exponent * t), so positive means decay.
    double decay_exponent = 0.0;
    bool exponent_valid = false;
};

/**
 * Averages `paths` independent paths (path p is driven by RngStream(seed, p))
 * on the shared grid and fits the decay exponent on [horizon/2, horizon].
 * Chunked deterministic reduction: results are identical for any worker
 * count. Up to `store_paths` full records (the first paths by index) are
 * copied into `stored` when given.
 */
EnsembleSummary ensemble_mean(const SwitchedSystem& system, const CycleModel& model,
                              const Eigen::VectorXd& x0, int degree, double horizon, double dt,
                              long paths, std::uint64_t seed, int workers = 1, long store_paths = 0,
                              std::vector<TrajectoryRecord>* stored = nullptr);

}  // namespace regenstab
