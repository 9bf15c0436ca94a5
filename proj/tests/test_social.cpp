#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "allostasis/rng.hpp"
#include "allostasis/social.hpp"

using namespace allostasis;

TEST(EqualisedRank, Examples) {
    EXPECT_NEAR(equalised_rank(0.8, 0.0, true), 0.8, 1e-12);
    EXPECT_NEAR(equalised_rank(0.8, 1.0, true), 0.5, 1e-12);
    EXPECT_NEAR(equalised_rank(0.8, 0.5, true), 0.65, 1e-12);
    EXPECT_DOUBLE_EQ(equalised_rank(0.8, 1.0, false), 0.8);
}

TEST(PartnerValue, Examples) {
    EXPECT_NEAR(partner_value(1.0, 0.0, 0.0, true), 1.0, 1e-12);
    for (double o : {0.0, 0.3, 1.0}) EXPECT_NEAR(partner_value(0.5, 0.5, o, true), 0.0, 1e-12);
    EXPECT_NEAR(partner_value(1.0, 0.0, 1.0, true), 0.0, 1e-12);
}

TEST(PartnerValue, AntisymmetricAtEqualO) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = u(gen), q = u(gen), o = u(gen);
        EXPECT_NEAR(partner_value(r, q, o, true), -partner_value(q, r, o, true), 1e-12);
    }
}

TEST(PartnerValue, ZeroORecoversRawRankDifference) {
    for (int a = 1; a <= 6; ++a)
        for (int b = 1; b <= 6; ++b) {
            const double ra = normalised_rank(a, 6), rb = normalised_rank(b, 6);
            EXPECT_EQ(partner_value(ra, rb, 0.0, true), ra - rb);
        }
}

TEST(PartnerValue, MagnitudeNonIncreasingInO) {
    for (int a = 1; a <= 6; ++a)
        for (int b = 1; b <= 6; ++b) {
            double prev = 2.0;
            for (int k = 0; k <= 100; ++k) {
                const double v = std::abs(partner_value(normalised_rank(a, 6), normalised_rank(b, 6), k / 100.0, true));
                EXPECT_LE(v, prev + 1e-15);
                prev = v;
            }
        }
}

TEST(PartnerValue, LogisticMapIsMonotoneToo) {
    EqualisationMap sigma{true, true, 15.0, 0.65};
    double prev = 2.0;
    for (int k = 0; k <= 100; ++k) {
        const double v = std::abs(partner_value(1.0, 0.0, k / 100.0, sigma));
        EXPECT_LE(v, prev + 1e-15);
        prev = v;
    }
}

TEST(SelectPartner, PicksLowestRankedByBruteForce) {
    const std::vector<Candidate> visible{{3, 0.2}, {4, 0.6}};
    const auto p = select_partner(1.0, 0.0, visible, EqualisationMap{true});
    ASSERT_TRUE(p);
    EXPECT_EQ(p->target_id, 3u);
    EXPECT_NEAR(p->value, 0.8, 1e-12);
}

TEST(SelectPartner, EmptyVisibleSet) {
    EXPECT_FALSE(select_partner(1.0, 0.0, std::vector<Candidate>{}, EqualisationMap{true}));
}

TEST(SelectPartner, TieGoesToLowestIdUnderPermutation) {
    std::vector<Candidate> visible{{5, 0.2}, {2, 0.2}, {7, 0.6}, {4, 0.2}};
    std::sort(visible.begin(), visible.end(), [](auto& a, auto& b) { return a.id < b.id; });
    do {
        const auto p = select_partner(0.8, 0.3, visible, EqualisationMap{true});
        ASSERT_TRUE(p);
        EXPECT_EQ(p->target_id, 2u);
    } while (std::next_permutation(visible.begin(), visible.end(), [](auto& a, auto& b) { return a.id < b.id; }));
}

TEST(AggressionProbability, Examples) {
    EXPECT_NEAR(aggression_probability(0.9, true, 4.0), 0.4, 1e-12);
    for (double v : {-1.0, 0.0, 0.5, 1.0}) EXPECT_EQ(aggression_probability(v, false, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(aggression_probability(0.0, true, 4.0), 1.0);
}

TEST(ResolveSocialAction, Examples) {
    const PartnerEvaluation target{9, 0.9};
    EXPECT_EQ(resolve_social_action(1, true, target, 0.3, 0.39, 4.0).kind, SocialKind::Aggression);
    EXPECT_EQ(resolve_social_action(1, true, target, 0.3, 0.41, 4.0).kind, SocialKind::Groom);
    for (double u : {0.0, 0.2, 0.99}) EXPECT_EQ(resolve_social_action(1, false, target, 0.3, u, 4.0).kind, SocialKind::Groom);
    const auto a = resolve_social_action(1, true, target, 0.3, 0.1, 4.0);
    EXPECT_EQ(a.actor, 1u);
    EXPECT_EQ(a.target, 9u);
    EXPECT_DOUBLE_EQ(a.intensity, 0.3);
}

TEST(ResolveSocialAction, AggressionFrequencyMatchesProbability) {
    Rng rng(2024);
    const PartnerEvaluation target{1, 0.9};
    int aggressions = 0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i)
        if (resolve_social_action(0, true, target, 0.5, rng.uniform(), 4.0).kind == SocialKind::Aggression) ++aggressions;
    EXPECT_NEAR(static_cast<double>(aggressions) / n, 0.4, 0.02);
}
