#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "photongate/rng.hpp"

using namespace photongate;

TEST(EventRng, SequenceIsAFunctionOfSeedStreamAndKey) {
    EventRng a(7, Stream::Emission, 123);
    EventRng b(7, Stream::Emission, 123);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(EventRng, StreamsAndKeysDiffer) {
    EventRng base(7, Stream::Emission, 123);
    EventRng other_stream(7, Stream::Gate, 123);
    EventRng other_key(7, Stream::Emission, 124);
    EventRng other_seed(8, Stream::Emission, 123);
    const auto x = base.next();
    EXPECT_NE(x, other_stream.next());
    EXPECT_NE(x, other_key.next());
    EXPECT_NE(x, other_seed.next());
}

TEST(EventRng, UniformInUnitInterval) {
    EventRng r(1, Stream::Detection, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(EventRng, ExponentialMean) {
    const int n = 200000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        EventRng r(3, Stream::Emission, static_cast<std::uint64_t>(i));
        const double x = r.exponential(625.0);
        ASSERT_GE(x, 0.0);
        sum += x;
    }
    EXPECT_NEAR(sum / n, 625.0, 4 * 625.0 / std::sqrt(n));
}

TEST(EventRng, NormalMoments) {
    EventRng r(5, Stream::Detection, 9);
    const int n = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s1 / n, 0.0, 4 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(EventRng, DeriveSeedIsBasePlusIndex) {
    EXPECT_EQ(derive_seed(10, 0), 10u);
    EXPECT_EQ(derive_seed(10, 3), 13u);
}
