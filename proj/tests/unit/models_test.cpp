#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sdlab/geometry/realize.hpp"
#include "sdlab/models/density.hpp"

using namespace sdlab;
using namespace sdlab::geometry;
using namespace sdlab::models;
using sdlab::rearrangement::GridFunction;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return Vec::Constant(1, a); }

Body box2(double x0, double x1, double y0, double y1) {
    return Body::vpolytope({v2(x0, y0), v2(x1, y0), v2(x1, y1), v2(x0, y1)});
}

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    const double ne = double(a.size()) * b.size() / (a.size() + b.size());
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2 * (k % 2 ? 1 : -1) * std::exp(-2.0 * k * k * lam * lam);
    return std::clamp(p, 0.0, 1.0);
}

} // namespace

TEST(Rearranged, UnitSquareGoesToDiskOfAreaOne) {
    const Density r = rearranged(Density::uniform(box2(0, 1, 0, 1)));
    const auto* u = r.as<UniformOnBody>();
    ASSERT_NE(u, nullptr);
    const auto* ball = u->body.as<EuclideanBall>();
    ASSERT_NE(ball, nullptr);
    EXPECT_NEAR(ball->radius, 1 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_LT(ball->center.norm(), 1e-300);
    EXPECT_NEAR(r.sup_bound(), 1.0, 1e-12);
}

TEST(Rearranged, CenteredBallIsFixed) {
    const Density r = rearranged(Density::uniform(Body::ball(Vec::Zero(2), 1.0)));
    EXPECT_NEAR(r.as<UniformOnBody>()->body.as<EuclideanBall>()->radius, 1.0, 1e-14);
}

TEST(Rearranged, GaussianIsRecentered) {
    const Density g = Density::truncated_gaussian(2, 0.5, v2(1, -2));
    const Density r = rearranged(g);
    EXPECT_EQ(r.as<TruncatedGaussian>()->center, Vec::Zero(2));
    EXPECT_EQ(r.sup_bound(), g.sup_bound());
    EXPECT_NEAR(r(v2(0.1, 0.2)), g(v2(1.1, -1.8)), 1e-15);
}

TEST(Rearranged, GridIndicatorOfUnitIntervalIsCentered) {
    const double h = 0.01;
    const auto g = GridFunction::sample(1, 301, h, [](const Vec& c) { return c(0) > -1e-9 && c(0) < 0.995 ? 1.0 : 0.0; });
    ASSERT_NEAR(g.mass(), 1.0, 1e-12);
    const Density r = rearranged(Density::grid(g));
    const auto& gr = r.as<GridDensity>()->grid;
    // support is cells -50..49: [-0.505, 0.495), one cell away from [-1/2, 1/2]
    for (std::size_t i = 0; i < gr.size(); ++i) {
        const int o = gr.offset(i)[0];
        EXPECT_EQ(gr[i], (o >= -50 && o <= 49) ? 1.0 : 0.0) << o;
    }
}

TEST(Rearranged, GridIsEquimeasurableAndKeepsSupBound) {
    RngStream rng(1, 0);
    std::vector<double> v(15 * 15);
    for (auto& x : v) x = rng.uniform() < 0.4 ? rng.uniform(0, 3) : 0.0;
    GridFunction g(2, 15, 0.1, v);
    const double s = g.mass();
    for (auto& x : v) x /= s;
    const Density f = Density::grid(GridFunction(2, 15, 0.1, v));
    const Density r = rearranged(f);
    auto a = f.as<GridDensity>()->grid.values(), b = r.as<GridDensity>()->grid.values();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(f.sup_bound(), r.sup_bound());
}

TEST(Rearranged, PointMassThrows) {
    EXPECT_THROW(rearranged(Density::point_mass(v2(0, 0))), HypothesisError);
}

TEST(BallRadius, Examples) {
    EXPECT_NEAR(ball_radius(Body::ball(Vec::Zero(3), 1.0)), 1.0, 1e-14);
    EXPECT_NEAR(ball_radius(box2(0, 1, 0, 1)), 1 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(ball_radius(box2(-1, 1, -1, 1)), 2 / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_THROW(ball_radius(Body::vpolytope({v2(0, 0), v2(1, 1)})), DegenerateError);
}

TEST(Density, ValidationAndNormalization) {
    EXPECT_THROW(Density::grid(GridFunction(1, 3, 1.0, {0.5, 0.5, 0.5})), DimensionError);
    // thin diagonal strip: area 1e-5 in a bounding box of area ~0.5
    const double w = 1e-5 / std::sqrt(2.0);
    EXPECT_THROW(Density::uniform(Body::vpolytope({v2(0, 0), v2(w, -w), v2(1 + w, 1 - w), v2(1, 1)})),
                 DegenerateError);
    // 1-D truncated gaussian integrates to one (independent quadrature)
    const Density g = Density::truncated_gaussian(1, 0.7);
    const double q = integrate_gl([&](double x) { return g(v1(x)); }, -5.6, 5.6, 200);
    EXPECT_NEAR(q, 1.0, 1e-12);
    EXPECT_NEAR(g.sup_bound(), 1 / (0.7 * std::sqrt(2 * std::numbers::pi)) / g.as<TruncatedGaussian>()->mass, 1e-15);
    const Density g2 = Density::truncated_gaussian(2, 0.45);
    EXPECT_LE(g2.sup_bound(), 1.0);
}

TEST(SamplePoint, UniformIntervalMean) {
    const Density f = Density::uniform(Body::vpolytope({v1(-0.5), v1(0.5)}));
    RngStream rng(2, 0);
    const int m = 100000;
    double s = 0;
    for (int i = 0; i < m; ++i) {
        const double x = f.sample(rng)(0);
        ASSERT_GE(x, -0.5);
        ASSERT_LE(x, 0.5);
        s += x;
    }
    EXPECT_NEAR(s / m, 0.0, 4 * std::sqrt(1.0 / 12) / std::sqrt(double(m)));
}

TEST(SamplePoint, UniformDiskSquaredRadius) {
    const Density f = Density::uniform(Body::ball(Vec::Zero(2), 1.0));
    RngStream rng(3, 0);
    const int m = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < m; ++i) {
        const double r2 = f.sample(rng).squaredNorm();
        s += r2;
        s2 += r2 * r2;
    }
    const double mean = s / m, se = std::sqrt((s2 / m - mean * mean) / m);
    EXPECT_NEAR(mean, 0.5, 4 * se);
}

TEST(SamplePoint, GridCellFrequencies) {
    const Density f = Density::grid(GridFunction(1, 3, 1.0, {0.0, 0.25, 0.75}));
    RngStream rng(4, 0);
    const int m = 100000;
    int neg = 0;
    for (int i = 0; i < m; ++i) {
        const double x = f.sample(rng)(0);
        ASSERT_GE(x, -0.5);
        ASSERT_LT(x, 1.5);
        neg += x < 0.5;
    }
    // cells [-1/2, 1/2) and [1/2, 3/2) carry 0.25 and 0.75
    EXPECT_NEAR(double(neg) / m, 0.25, 4 * std::sqrt(0.25 * 0.75 / m));
}

TEST(SampleMatrix, UnitVolumeBallColumns) {
    const std::vector<Density> fs(3, Density::uniform_unit_volume_ball(2));
    RngStream rng(5, 0);
    for (int t = 0; t < 1000; ++t) {
        const Matrix Z = sample_matrix(fs, rng);
        ASSERT_EQ(Z.n(), 2);
        ASSERT_EQ(Z.N(), 3);
        for (int i = 0; i < 3; ++i) ASSERT_LE(Z.column(i).norm(), 1 / std::sqrt(std::numbers::pi) + 1e-15);
    }
}

TEST(SampleMatrix, MixedColumnsAreUncorrelated) {
    const std::vector<Density> fs = {Density::uniform(box2(-0.5, 0.5, -0.5, 0.5)), Density::truncated_gaussian(2, 0.5)};
    RngStream rng(6, 0);
    const int m = 50000;
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (int t = 0; t < m; ++t) {
        const Matrix X = sample_matrix(fs, rng);
        const double a = X.data()(0, 0), b = X.data()(0, 1);
        sx += a, sy += b, sxy += a * b, sxx += a * a, syy += b * b;
    }
    const double cov = sxy / m - sx / m * sy / m;
    const double corr = cov / std::sqrt((sxx / m - sx * sx / m / m) * (syy / m - sy * sy / m / m));
    EXPECT_LT(std::abs(corr), 4 / std::sqrt(double(m)));
}

TEST(SampleMatrix, SameSeedSameMatrix) {
    const std::vector<Density> fs = {Density::uniform(box2(0, 1, 0, 2)), Density::truncated_gaussian(2, 0.5)};
    RngStream a(7, 3), b(7, 3);
    for (int t = 0; t < 100; ++t) EXPECT_EQ(sample_matrix(fs, a).data(), sample_matrix(fs, b).data());
}

TEST(SamplePoint, RejectionMatchesDirectOnDisk) {
    // the disk as a support-function oracle is sampled by rejection
    const Body oracle = realize(Matrix(Mat::Identity(2, 2)), CoefficientSet::lq_ball(2, 2.0));
    const Density rej = Density::uniform(oracle);
    const Density direct = Density::uniform(Body::ball(Vec::Zero(2), 1.0));
    EXPECT_NEAR(rej.acceptance(), std::numbers::pi / 4, 1e-6);
    for (int run = 0; run < 20; ++run) {
        RngStream r1(8, 2 * run), r2(8, 2 * run + 1);
        std::vector<double> a, b;
        for (int i = 0; i < 2000; ++i) {
            a.push_back(rej.sample(r1).norm());
            b.push_back(direct.sample(r2).norm());
        }
        EXPECT_GT(ks_pvalue(a, b), 0.001) << "run " << run;
    }
}
