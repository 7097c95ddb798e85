#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sdlab/core/math.hpp"
#include "sdlab/core/parallel.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"

using namespace sdlab;

// Known-answer vectors published with the Random123 library (kat_vectors).
TEST(Philox, KnownAnswerZero) {
    const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RngStream, SameSeedAndIndexReproduce) {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
    RngStream c(42, 7), d(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(c.normal(), d.normal());
}

TEST(RngStream, DistinctIndicesDiffer) {
    RngStream a(42, 0), b(42, 1), c(43, 0);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a(), y = b(), z = c();
        same_ab += x == y;
        same_ac += x == z;
    }
    EXPECT_EQ(same_ab, 0);
    EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, SubstreamsAreDeterministicAndDistinct) {
    RngStream base(9, 3);
    EXPECT_EQ(base.substream(5).index(), base.substream(5).index());
    EXPECT_NE(base.substream(5).index(), base.substream(6).index());
}

TEST(RngStream, UniformAndNormalMoments) {
    RngStream r(1, 0);
    const int m = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < m; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        su2 += u * u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / m, 0.5, 4 * std::sqrt(1.0 / 12 / m));
    EXPECT_NEAR(su2 / m, 1.0 / 3, 4 * std::sqrt(4.0 / 45 / m));
    EXPECT_NEAR(sn / m, 0.0, 4 / std::sqrt(m));
    EXPECT_NEAR(sn2 / m, 1.0, 4 * std::sqrt(2.0 / m));
}

TEST(Math, UnitBallVolumes) {
    EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-14);
    EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-14);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
    EXPECT_NEAR(unit_ball_volume(0), 1.0, 1e-14);
}

TEST(Math, SubsetsAndBinomials) {
    int count = 0;
    for_each_subset(6, 3, [&](const std::vector<int>& s) {
        ASSERT_EQ(s.size(), 3u);
        ASSERT_LT(s[0], s[1]);
        ASSERT_LT(s[1], s[2]);
        ++count;
    });
    EXPECT_EQ(count, 20);
    EXPECT_EQ(binomial(30, 6), 593775.0);
}

TEST(Math, GaussLegendreIntegratesPolynomialsExactly) {
    const auto [x, w] = gauss_legendre(8);
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 14);
    EXPECT_NEAR(s, 2.0 / 15.0, 1e-14);
    EXPECT_NEAR(integrate_gl([](double t) { return std::sin(t); }, 0, std::numbers::pi, 4), 2.0, 1e-12);
}

TEST(Math, DkwAndWilson) {
    EXPECT_NEAR(dkw_epsilon(20000, 0.01), std::sqrt(std::log(200.0) / 40000.0), 1e-15);
    const auto [lo, hi] = wilson_interval(50, 100);
    EXPECT_LT(lo, 0.5);
    EXPECT_GT(hi, 0.5);
    EXPECT_NEAR(0.5 * (lo + hi), 0.5, 1e-12);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(Matrix, EnforcesCaps) {
    EXPECT_THROW(Matrix(Mat::Zero(7, 2)), DimensionError);
    EXPECT_THROW(Matrix(Mat::Zero(2, 31)), DimensionError);
    Mat bad = Mat::Zero(2, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(Matrix{bad}, DimensionError);
    EXPECT_NO_THROW(Matrix(Mat::Zero(6, 30)));
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
    auto run = [](int workers) {
        std::vector<double> out(257);
        parallel_for(out.size(), workers, [&](std::size_t i) {
            RngStream r(5, i);
            out[i] = r.normal();
        });
        return out;
    };
    EXPECT_EQ(run(1), run(4));
}
