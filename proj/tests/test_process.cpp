#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "regenstab/process.hpp"

using namespace regenstab;

namespace {

Eigen::Matrix2d averaging_mode() {
    Eigen::Matrix2d A;
    A << 0.5, 0.5, 0.5, 0.5;
    return A;
}

Eigen::Matrix2d rotation_mode() {
    Eigen::Matrix2d A;
    A << 0.0, 1.0, -1.0, 0.0;
    return A;
}

}  // namespace

TEST_CASE("switched system validation") {
    CHECK_THROWS_AS(SwitchedSystem(TimeKind::Continuous, {}), ValidationError);
    CHECK_THROWS_AS(SwitchedSystem(TimeKind::Continuous, {Eigen::MatrixXd::Zero(2, 3)}),
                    ValidationError);
    CHECK_THROWS_AS(
        SwitchedSystem(TimeKind::Continuous,
                       {Eigen::MatrixXd(Eigen::Matrix2d::Zero()), Eigen::MatrixXd(Eigen::Matrix3d::Zero())}),
        ValidationError);
    Eigen::MatrixXd bad(2, 2);
    bad << 0.0, std::nan(""), 0.0, 0.0;
    CHECK_THROWS_AS(SwitchedSystem(TimeKind::Continuous, {bad}), ValidationError);

    const SwitchedSystem system(TimeKind::Continuous, {averaging_mode(), rotation_mode()});
    CHECK(system.dimension() == 2);
    CHECK(system.mode_count() == 2);
    CHECK_THROWS_AS(system.mode_matrix(0), ValidationError);
    CHECK_THROWS_AS(system.mode_matrix(3), ValidationError);
}

TEST_CASE("metzler and nonnegativity checks") {
    const SwitchedSystem metzler(TimeKind::Continuous,
                                 {averaging_mode(), Eigen::MatrixXd(Eigen::Matrix2d::Identity())});
    CHECK(metzler.all_metzler());

    // The rotation mode has a negative off-diagonal entry.
    const SwitchedSystem mixed(TimeKind::Continuous, {averaging_mode(), rotation_mode()});
    CHECK_FALSE(mixed.all_metzler());
    CHECK_FALSE(mixed.all_nonnegative());
}

TEST_CASE("cycle validation") {
    const Cycle cycle = make_cycle({{1, 0.3}, {2, 0.7}});
    CHECK(cycle.length == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_cycle({}), ValidationError);
    CHECK_THROWS_AS(make_cycle({{1, 0.0}}), ValidationError);
    CHECK_THROWS_AS(make_cycle({{1, -1.0}}), ValidationError);

    validate_cycle(cycle, TimeKind::Continuous);
    CHECK_THROWS_AS(validate_cycle(cycle, TimeKind::Discrete), ValidationError);
    validate_cycle(make_cycle({{1, 2.0}, {2, 1.0}}), TimeKind::Discrete);
}

TEST_CASE("maintenance model parameter validation") {
    CHECK_THROWS_AS(MaintenanceModel(0.0, 0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(MaintenanceModel(1.0, 1.5, 1.0), ValidationError);
    CHECK_THROWS_AS(MaintenanceModel(1.0, -0.1, 1.0), ValidationError);
    CHECK_THROWS_AS(MaintenanceModel(1.0, 0.1, 0.0), ValidationError);
    const MaintenanceModel model(1.25, 0.1, 1.0);
    CHECK(*model.length_bound() == doctest::Approx(1.375));
}

TEST_CASE("maintenance sampling is deterministic given the draws") {
    // With zero jitter the cycle length is exactly T and the handoff is the
    // exponential draw, reproduced here from an identical stream.
    const double T = 1.0, lambda = 0.8;
    const MaintenanceModel model(T, 0.0, lambda);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream model_rng(99, s), replica(99, s);
        (void)replica.uniform(-0.0, 0.0);
        const double failure = replica.exponential(lambda);
        const Cycle cycle = model.sample(model_rng);
        CHECK(cycle.length == T);
        if (failure >= T) {
            REQUIRE(cycle.segments.size() == 1);
            CHECK(cycle.segments[0].mode == 1);
            CHECK(cycle.segments[0].duration == T);
        } else {
            REQUIRE(cycle.segments.size() == 2);
            CHECK(cycle.segments[0].mode == 1);
            CHECK(cycle.segments[0].duration == failure);
            CHECK(cycle.segments[1].mode == 2);
            CHECK(cycle.segments[1].duration == doctest::Approx(T - failure).epsilon(1e-15));
        }
    }
}

TEST_CASE("maintenance sampling with a negligible failure rate") {
    const MaintenanceModel model(2.0, 0.0, 1e-12);
    for (std::uint64_t s = 0; s < 100; ++s) {
        RngStream rng(7, s);
        const Cycle cycle = model.sample(rng);
        REQUIRE(cycle.segments.size() == 1);
        CHECK(cycle.segments[0].mode == 1);
        CHECK(cycle.segments[0].duration == 2.0);
    }
}

TEST_CASE("maintenance segment durations sum to the cycle length") {
    const MaintenanceModel model(1.25, 0.1, 1.0);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        RngStream rng(3, s);
        const Cycle cycle = model.sample(rng);
        double total = 0.0;
        for (const auto& seg : cycle.segments) {
            CHECK(seg.duration > 0.0);
            total += seg.duration;
        }
        CHECK(std::abs(total - cycle.length) <=
              2.0 * std::numeric_limits<double>::epsilon() * cycle.length);
        CHECK(cycle.length <= *model.length_bound() + 1e-12);
    }
}

TEST_CASE("maintenance cycle length has mean T") {
    const double T = 1.25, delta = 0.1;
    const MaintenanceModel model(T, delta, 1.0);
    const long N = 200000;
    double sum = 0.0;
    for (long i = 0; i < N; ++i) {
        RngStream rng(41, static_cast<std::uint64_t>(i));
        sum += model.sample(rng).length;
    }
    const double mean = sum / static_cast<double>(N);
    // Uniform jitter on [-dT, dT] has standard deviation dT/sqrt(3).
    const double se = delta * T / std::sqrt(3.0) / std::sqrt(static_cast<double>(N));
    CHECK(std::abs(mean - T) <= 3.0 * se);
}

TEST_CASE("probability of a failure segment matches the scalar integral") {
    // P(failure) = 1 - E[e^{-lambda R}] with R ~ U[0.9T, 1.1T]:
    // E[e^{-lambda R}] = (e^{-0.9 lambda T} - e^{-1.1 lambda T}) / (0.2 lambda T).
    const double T = 1.25, lambda = 1.0;
    const MaintenanceModel model(T, 0.1, lambda);
    const long N = 1000000;
    long failures = 0;
    for (long i = 0; i < N; ++i) {
        RngStream rng(42, static_cast<std::uint64_t>(i));
        if (model.sample(rng).segments.size() == 2) ++failures;
    }
    const double p_expected =
        1.0 - (std::exp(-0.9 * lambda * T) - std::exp(-1.1 * lambda * T)) / (0.2 * lambda * T);
    const double p_hat = static_cast<double>(failures) / static_cast<double>(N);
    const double se = std::sqrt(p_expected * (1.0 - p_expected) / static_cast<double>(N));
    CHECK(std::abs(p_hat - p_expected) <= 3.0 * se);
}

TEST_CASE("no-failure probability conditioned on the cycle length") {
    // Within each R bin, compare the empirical no-failure rate against the
    // exact conditional mean of e^{-lambda R} over the observed draws, which
    // is a binomial comparison by the independence of jitter and failure.
    const double T = 1.25, lambda = 1.0, delta = 0.1;
    const MaintenanceModel model(T, delta, lambda);
    const long N = 200000;
    const int bins = 10;
    std::vector<long> count(bins, 0), no_failure(bins, 0);
    std::vector<double> p_sum(bins, 0.0);
    const double lo = (1.0 - delta) * T, hi = (1.0 + delta) * T;
    for (long i = 0; i < N; ++i) {
        RngStream rng(43, static_cast<std::uint64_t>(i));
        const Cycle cycle = model.sample(rng);
        int b = static_cast<int>((cycle.length - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++count[b];
        p_sum[b] += std::exp(-lambda * cycle.length);
        if (cycle.segments.size() == 1) ++no_failure[b];
    }
    for (int b = 0; b < bins; ++b) {
        REQUIRE(count[b] > 1000);
        const double p_bar = p_sum[b] / static_cast<double>(count[b]);
        const double p_hat = static_cast<double>(no_failure[b]) / static_cast<double>(count[b]);
        const double se = std::sqrt(p_bar * (1.0 - p_bar) / static_cast<double>(count[b]));
        CHECK(std::abs(p_hat - p_bar) <= 3.5 * se);
    }
}

TEST_CASE("sample_cycle enforces the declared length bound") {
    struct LyingModel : CycleModel {
        Cycle sample(RngStream&) const override { return make_cycle({{1, 2.0}}); }
        std::optional<double> length_bound() const override { return 1.0; }
        std::string describe() const override { return "lying model"; }
    };
    LyingModel model;
    RngStream rng(1, 0);
    CHECK_THROWS_AS(sample_cycle(model, rng), ModelViolation);
}

TEST_CASE("finite support model validation and frequencies") {
    const Cycle a = make_cycle({{1, 1.0}});
    const Cycle b = make_cycle({{2, 2.0}});
    CHECK_THROWS_AS(FiniteSupportModel({}), ValidationError);
    CHECK_THROWS_AS(FiniteSupportModel({{0.5, a}, {0.6, b}}), ValidationError);
    CHECK_THROWS_AS(FiniteSupportModel({{-0.5, a}, {1.5, b}}), ValidationError);

    const FiniteSupportModel model({{0.3, a}, {0.7, b}});
    CHECK(*model.length_bound() == doctest::Approx(2.0));
    const long N = 100000;
    long hits = 0;
    for (long i = 0; i < N; ++i) {
        RngStream rng(44, static_cast<std::uint64_t>(i));
        if (model.sample(rng).segments[0].mode == 1) ++hits;
    }
    const double p_hat = static_cast<double>(hits) / static_cast<double>(N);
    const double se = std::sqrt(0.3 * 0.7 / static_cast<double>(N));
    CHECK(std::abs(p_hat - 0.3) <= 3.0 * se);
}

TEST_CASE("uniform handoff cycles always have the fixed total length") {
    const double T = 1.0;
    const UniformHandoffModel model(T);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        RngStream rng(45, s);
        const Cycle cycle = model.sample(rng);
        CHECK(cycle.length == T + 1.0);
        double total = 0.0;
        for (const auto& seg : cycle.segments) total += seg.duration;
        CHECK(std::abs(total - (T + 1.0)) <= 4.0 * std::numeric_limits<double>::epsilon());
        CHECK(cycle.segments[0].mode == 1);
        CHECK(cycle.segments[0].duration >= T);
    }
}

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(123, 5), b(123, 5), c(123, 6);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double ua = a.uniform01(), ub = b.uniform01(), uc = c.uniform01();
        all_equal = all_equal && (ua == ub);
        any_diff = any_diff || (ua != uc);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("assumption checks") {
    const SwitchedSystem mixed(TimeKind::Continuous, {averaging_mode(), rotation_mode()});
    const SwitchedSystem metzler(TimeKind::Continuous,
                                 {averaging_mode(), Eigen::MatrixXd(Eigen::Matrix2d::Identity())});
    const MaintenanceModel model(1.25, 0.1, 1.0);

    SUBCASE("A1 passes for even degrees") {
        const auto report = check_assumptions(mixed, model, 2, PositivityAssertion::None);
        CHECK(report.even_or_positive.status == CheckStatus::Pass);
        CHECK(report.theorem_hypotheses_met());
    }
    SUBCASE("A1 passes via the Metzler test for odd degrees") {
        const auto report = check_assumptions(metzler, model, 3, PositivityAssertion::MetzlerCheck);
        CHECK(report.even_or_positive.status == CheckStatus::Pass);
    }
    SUBCASE("A1 fails for odd degree on a non-Metzler system, naming the escape hatch") {
        const auto report = check_assumptions(mixed, model, 3, PositivityAssertion::None);
        CHECK(report.even_or_positive.status == CheckStatus::Fail);
        CHECK(report.even_or_positive.detail.find("assert") != std::string::npos);
        CHECK_FALSE(report.theorem_hypotheses_met());
    }
    SUBCASE("A1 can be asserted by the user") {
        const auto report =
            check_assumptions(mixed, model, 3, PositivityAssertion::UserAssertedPositive);
        CHECK(report.even_or_positive.status == CheckStatus::Asserted);
        CHECK(report.theorem_hypotheses_met());
    }
    SUBCASE("A2 fails for models without a declared bound") {
        struct UnboundedModel : CycleModel {
            Cycle sample(RngStream& rng) const override {
                return make_cycle({{1, 1.0 + rng.exponential(1.0)}});
            }
            std::optional<double> length_bound() const override { return std::nullopt; }
            std::string describe() const override { return "unbounded model"; }
        };
        UnboundedModel unbounded;
        const auto report = check_assumptions(mixed, unbounded, 2, PositivityAssertion::None);
        CHECK(report.bounded_cycles.status == CheckStatus::Fail);
        CHECK_FALSE(report.theorem_hypotheses_met());
    }
    SUBCASE("A4 applies only in discrete time") {
        const auto continuous = check_assumptions(mixed, model, 2, PositivityAssertion::None);
        CHECK(continuous.invertible_modes.status == CheckStatus::NotApplicable);

        Eigen::MatrixXd singular(2, 2);
        singular << 1.0, 1.0, 1.0, 1.0;
        const SwitchedSystem bad(TimeKind::Discrete, {singular});
        const FiniteSupportModel periodic({{1.0, make_cycle({{1, 1.0}})}});
        const auto report = check_assumptions(bad, periodic, 2, PositivityAssertion::None);
        CHECK(report.invertible_modes.status == CheckStatus::Fail);

        const SwitchedSystem good(TimeKind::Discrete,
                                  {Eigen::MatrixXd(0.5 * Eigen::Matrix2d::Identity())});
        const auto ok = check_assumptions(good, periodic, 2, PositivityAssertion::None);
        CHECK(ok.invertible_modes.status == CheckStatus::Pass);
    }
}
