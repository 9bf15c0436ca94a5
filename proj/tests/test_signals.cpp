#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "allostasis/signals.hpp"

using namespace allostasis;

TEST(CortisolDelta, Examples) {
    EXPECT_NEAR(cortisol_delta(0.5, 0.5, 0.005), 0.0, 1e-12);
    EXPECT_NEAR(cortisol_delta(1.0, 0.0, 0.005), 0.005, 1e-12);
    EXPECT_NEAR(cortisol_delta(0.0, 1.0, 0.005), -0.005, 1e-12);
}

TEST(CortisolDelta, MeanErrorCountsDeficitsOnly) {
    AgentState a;
    a.set_point(DriveId::Energy) = 0.7;
    a.drive(DriveId::Energy) = 0.9;  // surplus
    a.set_point(DriveId::Socialness) = 0.8;
    a.drive(DriveId::Socialness) = 0.6;  // deficit 0.2
    EXPECT_NEAR(mean_drive_error(a), 0.1, 1e-12);
}

TEST(CortisolOnAggression, Examples) {
    EXPECT_NEAR(cortisol_on_aggression(0.2, 0.4, 0.3), 0.32, 1e-12);
    EXPECT_DOUBLE_EQ(cortisol_on_aggression(0.95, 1.0, 0.3), 1.0);
    EXPECT_DOUBLE_EQ(cortisol_on_aggression(0.2, 0.0, 0.3), 0.2);
}

TEST(AllostaticSetpoint, Examples) {
    EXPECT_NEAR(allostatic_setpoint_step(0.7, 0.005, 2.0, 0.001, 0.7), 0.69, 1e-12);
    EXPECT_NEAR(allostatic_setpoint_step(0.6, 0.0, 2.0, 0.001, 0.7), 0.6001, 1e-12);
    EXPECT_DOUBLE_EQ(allostatic_setpoint_step(0.5, 0.01, 2.0, 0.001, 0.7), 0.5);
}

TEST(AllostaticSetpoint, FallingCRaisesSetPoint) {
    EXPECT_GT(allostatic_setpoint_step(0.7, -0.005, 2.0, 0.001, 0.7), 0.7);
    EXPECT_DOUBLE_EQ(allostatic_setpoint_step(0.99, -0.01, 2.0, 0.001, 0.7), 1.0);
}

TEST(AllostaticSetpoint, DriftConvergesToBaseline) {
    for (double start : {0.5, 0.6, 0.83, 1.0}) {
        double i = start;
        for (int t = 0; t < 20000; ++t) i = allostatic_setpoint_step(i, 0.0, 2.0, 0.001, 0.7);
        EXPECT_LT(std::abs(i - 0.7), 1e-6) << "start " << start;
    }
    // Geometric: the gap shrinks by exactly (1 - gamma) per step.
    const double i1 = allostatic_setpoint_step(0.9, 0.0, 2.0, 0.001, 0.7);
    EXPECT_NEAR(i1 - 0.7, 0.2 * 0.999, 1e-12);
}

TEST(Oxytocin, DepositExamples) {
    EXPECT_NEAR(oxytocin_deposit(0.3, 0.5, 0.2), 0.40, 1e-12);
    EXPECT_NEAR(oxytocin_deposit(0.3, 0.5, 0.1), 0.35, 1e-12);
    EXPECT_DOUBLE_EQ(oxytocin_deposit(1.0, 1.0, 0.2), 1.0);
}

TEST(Oxytocin, DecayExamples) {
    EXPECT_NEAR(oxytocin_decay(0.5), 0.49, 1e-12);
    EXPECT_DOUBLE_EQ(oxytocin_decay(0.005), 0.0);
    EXPECT_DOUBLE_EQ(oxytocin_decay(0.0), 0.0);
}

TEST(StressThreshold, Examples) {
    EXPECT_NEAR(stress_threshold(0.65, 0.5, 0.5, 15.0, 0.65), 0.75, 1e-12);
    EXPECT_NEAR(stress_threshold(0.0, 0.5, 0.5, 15.0, 0.65), 0.50003, 1e-4);
    EXPECT_NEAR(stress_threshold(1.0, 0.5, 0.5, 15.0, 0.65), 0.99737, 1e-4);
}

TEST(StressThreshold, MatchesClosedFormOracle) {
    // Independent oracle: the logistic written as a tanh.
    for (int i = 0; i <= 100; ++i) {
        const double o = i / 100.0;
        const double oracle = 0.5 + 0.5 * 0.5 * (1.0 + std::tanh(0.5 * 15.0 * (o - 0.65)));
        EXPECT_NEAR(stress_threshold(o, 0.5, 0.5, 15.0, 0.65), oracle, 1e-12);
    }
}

TEST(StressThreshold, StrictlyIncreasingAndAboveBase) {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double th = stress_threshold(i / 1000.0, 0.5, 0.5, 15.0, 0.65);
        EXPECT_GT(th, 0.5);
        EXPECT_LT(th, 1.0);
        EXPECT_GT(th, prev);
        prev = th;
    }
}

TEST(IsStressed, Examples) {
    EXPECT_TRUE(is_stressed(0.5, 0.5));
    EXPECT_FALSE(is_stressed(0.49, 0.5));
    for (double th : {0.5, 0.75, 1.0}) EXPECT_TRUE(is_stressed(1.0, th));
}

TEST(SignalBounds, RandomSequencesStayInUnitInterval) {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double c = 0.0, o = 0.0, i = 0.7;
    for (int t = 0; t < 100000; ++t) {
        const double dc = cortisol_delta(u(gen), u(gen), 0.005);
        c = apply_cortisol_delta(c, dc);
        if (u(gen) < 0.05) c = cortisol_on_aggression(c, 2.0 * u(gen), 0.3);
        i = allostatic_setpoint_step(i, dc, 2.0, 0.001, 0.7);
        o = oxytocin_decay(o);
        if (u(gen) < 0.3) o = oxytocin_deposit(o, 2.0 * u(gen), u(gen) < 0.5 ? 0.2 : 0.1);
        ASSERT_GE(c, 0.0);
        ASSERT_LE(c, 1.0);
        ASSERT_GE(o, 0.0);
        ASSERT_LE(o, 1.0);
        ASSERT_GE(i, 0.5);
        ASSERT_LE(i, 1.0);
    }
}
