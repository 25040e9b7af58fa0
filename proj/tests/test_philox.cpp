#include "regret_lab/philox.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace regret_lab;

TEST(Philox, KnownAnswerZero) {
    constexpr auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
    static_assert(out[0] == 0x6627e8d5u);
    EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UnitRange) {
    EXPECT_EQ(bits_to_unit(0), 0.0);
    EXPECT_LT(bits_to_unit(~std::uint64_t{0}), 1.0);
    EXPECT_GT(bits_to_unit(~std::uint64_t{0}), 1.0 - 1e-15);
}

TEST(KeyedUniforms, PureFunctionOfKey) {
    const KeyedUniforms a(42);
    const KeyedUniforms b(42);
    EXPECT_EQ(a.uniform(3, 17, Channel::reward), b.uniform(3, 17, Channel::reward));
    EXPECT_NE(a.uniform(3, 17, Channel::reward), a.uniform(3, 17, Channel::agent));
    EXPECT_NE(a.uniform(3, 17, Channel::reward), a.uniform(4, 17, Channel::reward));
    EXPECT_NE(a.uniform(3, 17, Channel::reward), a.uniform(3, 18, Channel::reward));
    EXPECT_NE(a.uniform(3, 17, Channel::reward), KeyedUniforms(43).uniform(3, 17, Channel::reward));
}

TEST(KeyedUniforms, MomentsLookUniform) {
    const KeyedUniforms u(7);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    int bins[10] = {};
    for (int t = 0; t < n; ++t) {
        const double x = u.uniform(0, static_cast<std::uint64_t>(t), Channel::transition);
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
        sum += x;
        sq += x * x;
        ++bins[static_cast<int>(x * 10)];
    }
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.005);
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
    EXPECT_LT(chi2, 27.88);  // 99.9% quantile, 9 dof
}

TEST(PhiloxStream, UrbgInterface) {
    PhiloxStream s(5, 9);
    std::uniform_int_distribution<int> dist(0, 9);
    std::set<int> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(dist(s));
    EXPECT_EQ(seen.size(), 10u);

    PhiloxStream x(5, 9);
    PhiloxStream y(5, 9);
    PhiloxStream z(5, 10);
    for (int i = 0; i < 5; ++i) {
        const auto vx = x();
        EXPECT_EQ(vx, y());
        EXPECT_NE(vx, z());
    }
}
