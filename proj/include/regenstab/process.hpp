#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regenstab/errors.hpp"
#include "regenstab/rng.hpp"

namespace regenstab {

enum class TimeKind { Continuous, Discrete };

/**
 * Switched linear system: one square matrix per mode, all with a shared state
 * dimension. Modes are numbered from 1. Continuous systems evolve by
 * dx/dt = A_s x, discrete ones by x(k+1) = A_s x(k).
 */
class SwitchedSystem {
  public:
    SwitchedSystem(TimeKind time_kind, std::vector<Eigen::MatrixXd> mode_matrices);

    TimeKind time_kind() const { return time_kind_; }
    int dimension() const { return dimension_; }
    int mode_count() const { return static_cast<int>(matrices_.size()); }
    const Eigen::MatrixXd& mode_matrix(int mode) const;

    bool all_metzler() const;
    bool all_nonnegative() const;
    /// Largest mode-matrix operator norm proxy (max 1-norm over modes).
    double max_mode_norm() const;
    /// Smallest reciprocal condition number over the mode matrices.
    double min_reciprocal_condition() const;

  private:
    TimeKind time_kind_;
    int dimension_ = 0;
    std::vector<Eigen::MatrixXd> matrices_;
};

struct Segment {
    int mode = 1;
    double duration = 0.0;
};

/// One regenerative cycle: a piecewise-constant mode trajectory of total
/// length R. Durations are strictly positive and sum to the length.
struct Cycle {
    double length = 0.0;
    std::vector<Segment> segments;
};

Cycle make_cycle(std::vector<Segment> segments);
void validate_cycle(const Cycle& cycle, TimeKind time_kind);

/**
 * Distribution over cycles. Samplers must be driven by a caller-owned
 * RngStream so that (seed, stream) pairs pin the draw sequence. A model
 * that can bound its cycle length essentially should declare the bound;
 * models returning nullopt are usable for simulation but stability verdicts
 * on them fall outside the theorem hypotheses.
 */
class CycleModel {
  public:
    virtual ~CycleModel() = default;
    virtual Cycle sample(RngStream& rng) const = 0;
    virtual std::optional<double> length_bound() const = 0;
    virtual std::string describe() const = 0;
};

/// Bound-enforcing sampling front end: throws ModelViolation when a draw
/// exceeds the model's declared length bound.
Cycle sample_cycle(const CycleModel& model, RngStream& rng);

/**
 * Two-mode repair-and-failure cycle: the cycle length is T jittered
 * uniformly by +-jitter_fraction*T, mode 1 (healthy) holds until an
 * exponential failure time, and mode 2 (failed) holds until the cycle ends.
 * Repairs are instantaneous and always restore mode 1, so a cycle has one
 * failure at most; a different repair behavior needs a different model.
 */
class MaintenanceModel : public CycleModel {
  public:
    MaintenanceModel(double period, double jitter_fraction, double failure_rate);

    Cycle sample(RngStream& rng) const override;
    std::optional<double> length_bound() const override { return (1.0 + jitter_fraction_) * period_; }
    std::string describe() const override;

    double period() const { return period_; }
    double jitter_fraction() const { return jitter_fraction_; }
    double failure_rate() const { return failure_rate_; }

  private:
    double period_;
    double jitter_fraction_;
    double failure_rate_;
};

/// Finitely supported cycle distribution: explicit (probability, cycle) atoms.
class FiniteSupportModel : public CycleModel {
  public:
    explicit FiniteSupportModel(std::vector<std::pair<double, Cycle>> atoms);

    Cycle sample(RngStream& rng) const override;
    std::optional<double> length_bound() const override;
    std::string describe() const override;

    const std::vector<std::pair<double, Cycle>>& atoms() const { return atoms_; }

  private:
    std::vector<std::pair<double, Cycle>> atoms_;
};

/// Deterministic periodic switching: the same cycle every period.
std::unique_ptr<FiniteSupportModel> make_periodic_model(Cycle cycle);

/**
 * Fixed-length cycle with a uniformly random handoff: mode 1 holds for
 * h ~ Uniform[T, T+1], mode 2 for the remainder of the cycle of length T+1.
 */
class UniformHandoffModel : public CycleModel {
  public:
    explicit UniformHandoffModel(double mode1_min_duration);

    Cycle sample(RngStream& rng) const override;
    std::optional<double> length_bound() const override { return mode1_min_ + 1.0; }
    std::string describe() const override;

    double mode1_min_duration() const { return mode1_min_; }

  private:
    double mode1_min_;
};

enum class CheckStatus { Pass, Fail, Asserted, NotApplicable };

struct AssumptionCheck {
    CheckStatus status = CheckStatus::NotApplicable;
    std::string detail;
    bool ok() const { return status == CheckStatus::Pass || status == CheckStatus::Asserted; }
};

struct AssumptionReport {
    AssumptionCheck even_or_positive;  // A1
    AssumptionCheck bounded_cycles;    // A2
    AssumptionCheck bounded_modes;     // A3
    AssumptionCheck invertible_modes;  // A4, discrete time only

    bool theorem_hypotheses_met() const;
};

enum class PositivityAssertion { MetzlerCheck, UserAssertedPositive, None };

const char* to_string(CheckStatus status);

/**
 * Reports the theorem hypotheses for the given system/model/degree without
 * enforcing them. A1 passes when the degree is even, when every mode matrix
 * is Metzler (continuous) or entrywise nonnegative (discrete), or when the
 * caller asserts positivity; the matrix conditions are sufficient for a
 * positive system but not necessary, hence the assertion escape hatch.
 */
AssumptionReport check_assumptions(const SwitchedSystem& system, const CycleModel& model, int degree,
                                   PositivityAssertion assertion);

}  // namespace regenstab
