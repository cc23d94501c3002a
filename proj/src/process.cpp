#include "regenstab/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace regenstab {

SwitchedSystem::SwitchedSystem(TimeKind time_kind, std::vector<Eigen::MatrixXd> mode_matrices)
    : time_kind_(time_kind), matrices_(std::move(mode_matrices)) {
    if (matrices_.empty()) throw ValidationError("SwitchedSystem: at least one mode is required");
    dimension_ = static_cast<int>(matrices_.front().rows());
    for (std::size_t i = 0; i < matrices_.size(); ++i) {
        const auto& M = matrices_[i];
        if (M.rows() != M.cols())
            throw ValidationError("SwitchedSystem: mode " + std::to_string(i + 1) + " matrix is not square");
        if (M.rows() != dimension_)
            throw ValidationError("SwitchedSystem: mode " + std::to_string(i + 1) +
                                  " dimension differs from mode 1");
        if (!M.allFinite())
            throw ValidationError("SwitchedSystem: mode " + std::to_string(i + 1) +
                                  " matrix has non-finite entries");
    }
}

const Eigen::MatrixXd& SwitchedSystem::mode_matrix(int mode) const {
    if (mode < 1 || mode > mode_count())
        throw ValidationError("SwitchedSystem: unknown mode " + std::to_string(mode));
    return matrices_[static_cast<std::size_t>(mode - 1)];
}

bool SwitchedSystem::all_metzler() const {
    for (const auto& M : matrices_)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            for (Eigen::Index j = 0; j < M.cols(); ++j)
                if (i != j && M(i, j) < 0.0) return false;
    return true;
}

bool SwitchedSystem::all_nonnegative() const {
    for (const auto& M : matrices_)
        if ((M.array() < 0.0).any()) return false;
    return true;
}

double SwitchedSystem::max_mode_norm() const {
    double worst = 0.0;
    for (const auto& M : matrices_) worst = std::max(worst, M.cwiseAbs().colwise().sum().maxCoeff());
    return worst;
}

double SwitchedSystem::min_reciprocal_condition() const {
    double worst = 1.0;
    for (const auto& M : matrices_) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        worst = std::min(worst, smax > 0.0 ? smin / smax : 0.0);
    }
    return worst;
}

Cycle make_cycle(std::vector<Segment> segments) {
    Cycle cycle;
    cycle.segments = std::move(segments);
    for (const auto& seg : cycle.segments) cycle.length += seg.duration;
    if (cycle.segments.empty()) throw ValidationError("Cycle: needs at least one segment");
    for (const auto& seg : cycle.segments)
        if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
            throw ValidationError("Cycle: segment durations must be positive and finite");
    return cycle;
}

void validate_cycle(const Cycle& cycle, TimeKind time_kind) {
    if (cycle.segments.empty()) throw ValidationError("Cycle: needs at least one segment");
    double total = 0.0;
    for (const auto& seg : cycle.segments) {
        if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
            throw ValidationError("Cycle: segment durations must be positive and finite");
        if (time_kind == TimeKind::Discrete &&
            (seg.duration != std::floor(seg.duration) || seg.duration < 1.0))
            throw ValidationError("Cycle: discrete-time durations must be integers >= 1");
        total += seg.duration;
    }
    if (std::abs(total - cycle.length) > 1e-9 * std::max(1.0, cycle.length))
        throw ValidationError("Cycle: segment durations do not sum to the cycle length");
}

Cycle sample_cycle(const CycleModel& model, RngStream& rng) {
    Cycle cycle = model.sample(rng);
    if (auto bound = model.length_bound(); bound && cycle.length > *bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "cycle model violated assumption A2: sampled length " << cycle.length
            << " exceeds the declared bound " << *bound << " (" << model.describe() << ")";
        throw ModelViolation(msg.str());
    }
    return cycle;
}

MaintenanceModel::MaintenanceModel(double period, double jitter_fraction, double failure_rate)
    : period_(period), jitter_fraction_(jitter_fraction), failure_rate_(failure_rate) {
    if (!(period_ > 0.0) || !std::isfinite(period_))
        throw ValidationError("MaintenanceModel: period T must be positive");
    if (!(jitter_fraction_ >= 0.0) || !(jitter_fraction_ < 1.0))
        throw ValidationError("MaintenanceModel: jitter fraction must lie in [0, 1)");
    if (!(failure_rate_ > 0.0) || !std::isfinite(failure_rate_))
        throw ValidationError("MaintenanceModel: failure rate lambda must be positive");
}

Cycle MaintenanceModel::sample(RngStream& rng) const {
    // Draw order is part of the reproducibility contract: jitter first,
    // then the failure time.
    const double jitter = rng.uniform(-jitter_fraction_ * period_, jitter_fraction_ * period_);
    const double failure_time = rng.exponential(failure_rate_);
    const double length = period_ + jitter;
    const double handoff = std::min(failure_time, length);

    Cycle cycle;
    cycle.length = length;
    if (handoff >= length) {
        cycle.segments = {{1, length}};
    } else if (handoff <= 0.0) {
        cycle.segments = {{2, length}};
    } else {
        cycle.segments = {{1, handoff}, {2, length - handoff}};
    }
    return cycle;
}

std::string MaintenanceModel::describe() const {
    std::ostringstream out;
    out << "maintenance model (T=" << period_ << ", delta=" << jitter_fraction_
        << ", lambda=" << failure_rate_ << ")";
    return out.str();
}

FiniteSupportModel::FiniteSupportModel(std::vector<std::pair<double, Cycle>> atoms)
    : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ValidationError("FiniteSupportModel: needs at least one cycle");
    double total = 0.0;
    for (const auto& [p, cycle] : atoms_) {
        if (!(p > 0.0)) throw ValidationError("FiniteSupportModel: probabilities must be positive");
        if (cycle.segments.empty()) throw ValidationError("FiniteSupportModel: cycles need segments");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ValidationError("FiniteSupportModel: probabilities must sum to 1");
}

Cycle FiniteSupportModel::sample(RngStream& rng) const {
    const double u = rng.uniform01();
    double cumulative = 0.0;
    for (const auto& [p, cycle] : atoms_) {
        cumulative += p;
        if (u < cumulative) return cycle;
    }
    return atoms_.back().second;
}

std::optional<double> FiniteSupportModel::length_bound() const {
    double bound = 0.0;
    for (const auto& [p, cycle] : atoms_) bound = std::max(bound, cycle.length);
    return bound;
}

std::string FiniteSupportModel::describe() const {
    return "finite-support model (" + std::to_string(atoms_.size()) + " cycles)";
}

std::unique_ptr<FiniteSupportModel> make_periodic_model(Cycle cycle) {
    std::vector<std::pair<double, Cycle>> atoms;
    atoms.emplace_back(1.0, std::move(cycle));
    return std::make_unique<FiniteSupportModel>(std::move(atoms));
}

UniformHandoffModel::UniformHandoffModel(double mode1_min_duration) : mode1_min_(mode1_min_duration) {
    if (!(mode1_min_ > 0.0) || !std::isfinite(mode1_min_))
        throw ValidationError("UniformHandoffModel: minimum mode-1 duration must be positive");
}

Cycle UniformHandoffModel::sample(RngStream& rng) const {
    const double length = mode1_min_ + 1.0;
    const double handoff = rng.uniform(mode1_min_, length);
    Cycle cycle;
    cycle.length = length;
    if (handoff >= length) {
        cycle.segments = {{1, length}};
    } else {
        cycle.segments = {{1, handoff}, {2, length - handoff}};
    }
    return cycle;
}

std::string UniformHandoffModel::describe() const {
    std::ostringstream out;
    out << "uniform-handoff model (mode 1 for h~U[" << mode1_min_ << ", " << mode1_min_ + 1.0
        << "], cycle length " << mode1_min_ + 1.0 << ")";
    return out.str();
}

const char* to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Asserted: return "asserted";
        case CheckStatus::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

bool AssumptionReport::theorem_hypotheses_met() const {
    return even_or_positive.ok() && bounded_cycles.ok() && bounded_modes.ok() &&
           (invertible_modes.status == CheckStatus::NotApplicable || invertible_modes.ok());
}

AssumptionReport check_assumptions(const SwitchedSystem& system, const CycleModel& model, int degree,
                                   PositivityAssertion assertion) {
    AssumptionReport report;

    // A1: even degree or positive system.
    if (degree % 2 == 0) {
        report.even_or_positive = {CheckStatus::Pass, "degree " + std::to_string(degree) + " is even"};
    } else if (assertion == PositivityAssertion::UserAssertedPositive) {
        report.even_or_positive = {CheckStatus::Asserted, "positivity asserted by the caller"};
    } else if (system.time_kind() == TimeKind::Continuous && system.all_metzler()) {
        report.even_or_positive = {CheckStatus::Pass, "all mode matrices are Metzler"};
    } else if (system.time_kind() == TimeKind::Discrete && system.all_nonnegative()) {
        report.even_or_positive = {CheckStatus::Pass, "all mode matrices are entrywise nonnegative"};
    } else {
        const char* condition = system.time_kind() == TimeKind::Continuous
                                    ? "not all mode matrices are Metzler"
                                    : "not all mode matrices are entrywise nonnegative";
        report.even_or_positive = {
            CheckStatus::Fail, "degree " + std::to_string(degree) + " is odd and " + condition +
                                   "; the matrix test is sufficient but not necessary, so a system "
                                   "known to be positive can be asserted with --assert-positive"};
    }

    // A2: essentially bounded cycle lengths.
    if (auto bound = model.length_bound()) {
        std::ostringstream detail;
        detail << "cycle length bound " << *bound << " declared";
        report.bounded_cycles = {CheckStatus::Pass, detail.str()};
    } else {
        report.bounded_cycles = {CheckStatus::Fail, "model declares no essential cycle-length bound"};
    }

    // A3: bounded mode set. Finitely many finite matrices always qualify;
    // finiteness is enforced at construction, so report the witness norm.
    {
        std::ostringstream detail;
        detail << system.mode_count() << " modes, max matrix 1-norm " << system.max_mode_norm();
        report.bounded_modes = {CheckStatus::Pass, detail.str()};
    }

    // A4: invertible modes with bounded inverses (discrete time only).
    if (system.time_kind() == TimeKind::Discrete) {
        const double rcond = system.min_reciprocal_condition();
        std::ostringstream detail;
        detail << "min reciprocal condition number " << rcond;
        report.invertible_modes = {rcond > 1e-12 ? CheckStatus::Pass : CheckStatus::Fail, detail.str()};
    } else {
        report.invertible_modes = {CheckStatus::NotApplicable, "continuous time"};
    }

    return report;
}

}  // namespace regenstab
