#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "sdlab/rearrangement/grid_function.hpp"
#include "sdlab/rearrangement/peakedness.hpp"
#include "sdlab/rearrangement/step_function.hpp"

using namespace sdlab;
using namespace sdlab::rearrangement;
using sdlab::geometry::Body;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

GridFunction random_grid(RngStream& rng, int n, int cells, double density = 0.5) {
    std::size_t size = 1;
    for (int k = 0; k < n; ++k) size *= static_cast<std::size_t>(cells);
    std::vector<double> v(size);
    for (auto& x : v) x = rng.uniform() < density ? std::floor(rng.uniform(1, 5)) : 0.0;
    return GridFunction(n, cells, 0.1, v);
}

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

StepFunction1D random_density(RngStream& rng) { return random_step_density(rng); }

Body interval(double a) { return Body::vpolytope({v1(-a), v1(a)}); }

// Midpoint rule on a square grid, independent of the polygon clipping path.
double brute_bll2(const std::vector<StepFunction1D>& fs, const std::vector<Vec>& us, double R, int cells) {
    const double h = 2 * R / cells;
    double s = 0.0;
    for (int i = 0; i < cells; ++i)
        for (int j = 0; j < cells; ++j) {
            const Vec x = v2(-R + (i + 0.5) * h, -R + (j + 0.5) * h);
            double p = 1.0;
            for (std::size_t k = 0; k < fs.size() && p > 0; ++k) p *= fs[k](us[k].dot(x));
            s += p;
        }
    return s * h * h;
}

} // namespace

TEST(Sdr, OffCenterIntervalGoesToCenteredInterval) {
    const auto g = GridFunction::sample(1, 401, 0.01, [](const Vec& c) { return c(0) > 0.7 && c(0) < 1.7 ? 1.0 : 0.0; });
    ASSERT_NEAR(g.mass(), 1.0, 1e-12);
    const auto r = sdr(g);
    // 100 cells, ties between +-50 go to the lower index
    for (std::size_t i = 0; i < r.size(); ++i) {
        const int o = r.offset(i)[0];
        EXPECT_EQ(r[i], o >= -50 && o <= 49 ? 1.0 : 0.0) << o;
    }
}

TEST(Sdr, RadialDecreasingIsFixed) {
    // values depend on the integer squared radius so that ties are exact
    const GridFunction z2(2, 31, 0.1, std::vector<double>(31 * 31, 0.0));
    std::vector<double> v(z2.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-0.01 * double(z2.sq_radius(i)));
    const auto g = z2.with_values(v);
    EXPECT_EQ(sdr(g).values(), g.values());
    const GridFunction z3(3, 9, 0.2, std::vector<double>(9 * 9 * 9, 0.0));
    std::vector<double> w(z3.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (1.0 + double(z3.sq_radius(i)));
    EXPECT_EQ(sdr(z3.with_values(w)).values(), w);
}

TEST(Sdr, TwoValuedBlobKeepsNorms) {
    const auto g = GridFunction::sample(2, 41, 0.05, [](const Vec& c) {
        if ((c - v2(0.4, -0.3)).norm() < 0.3) return 2.0;
        return std::abs(c(0) + 0.5) < 0.2 && std::abs(c(1) - 0.6) < 0.3 ? 1.0 : 0.0;
    });
    const auto r = sdr(g);
    EXPECT_EQ(sorted(r.values()), sorted(g.values()));
    EXPECT_NEAR(r.lp_norm(1), g.lp_norm(1), 1e-13 * g.lp_norm(1));
    EXPECT_NEAR(r.lp_norm(2), g.lp_norm(2), 1e-13 * g.lp_norm(2));
}

TEST(Sdr, IdempotentAndEquimeasurable) {
    RngStream rng(11, 0);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 3;
        const auto g = random_grid(rng, n, n == 3 ? 7 : 15);
        const auto r = sdr(g);
        EXPECT_EQ(sdr(r).values(), r.values());
        EXPECT_EQ(sorted(r.values()), sorted(g.values()));
    }
}

TEST(Steiner, RadialDecreasingIsFixed) {
    const auto g = GridFunction::sample(2, 21, 0.1, [](const Vec& c) { return std::exp(-2 * c.squaredNorm()); });
    EXPECT_EQ(steiner_symmetral(g, 0).values(), g.values());
    EXPECT_EQ(steiner_symmetral(g, 1).values(), g.values());
}

TEST(Steiner, OffCenterSquareIsRecentered) {
    const int cells = 21;
    GridFunction g(2, cells, 1.0, std::vector<double>(cells * cells, 0.0));
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto o = g.offset(i);
        v[i] = o[0] >= 4 && o[0] <= 8 && o[1] >= -6 && o[1] <= -2 ? 1.0 : 0.0;
    }
    const auto s = steiner_symmetral(g.with_values(v), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto o = s.offset(i);
        EXPECT_EQ(s[i], o[0] >= -2 && o[0] <= 2 && o[1] >= -6 && o[1] <= -2 ? 1.0 : 0.0);
    }
}

TEST(Steiner, PreservesEveryLineMultiset) {
    RngStream rng(12, 0);
    for (int t = 0; t < 20; ++t) {
        const auto g = random_grid(rng, 3, 7);
        for (int axis = 0; axis < 3; ++axis) {
            const auto s = steiner_symmetral(g, axis);
            EXPECT_NEAR(s.mass(), g.mass(), 1e-12 * g.mass());
            EXPECT_NEAR(s.lp_norm(2), g.lp_norm(2), 1e-12 * g.lp_norm(2));
            // group cells by the two coordinates off the axis
            std::map<std::pair<int, int>, std::vector<double>> a, b;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto o = g.offset(i);
                const std::pair<int, int> key{o[(axis + 1) % 3], o[(axis + 2) % 3]};
                a[key].push_back(g[i]);
                b[key].push_back(s[i]);
            }
            for (auto& [key, vals] : a) EXPECT_EQ(sorted(vals), sorted(b[key]));
        }
    }
}

TEST(Steiner, NeverIncreasesDistanceToRearrangement) {
    RngStream rng(13, 0);
    int rotation_increases = 0;
    for (int t = 0; t < 500; ++t) {
        const auto g = random_grid(rng, 2, 15, rng.uniform(0.1, 0.9));
        const auto target = sdr(g);
        const double d0 = g.l1_distance(target);
        for (int axis = 0; axis < 2; ++axis)
            EXPECT_LE(steiner_symmetral(g, axis).l1_distance(target), d0 + 1e-12 * g.mass()) << t;
        if (rotated_symmetral(g, std::numbers::pi / 4).l1_distance(target) > d0 + 1e-12 * g.mass()) ++rotation_increases;
    }
    // rotations are strip permutations too, so they contract as well
    EXPECT_EQ(rotation_increases, 0);
}

TEST(Steiner, RotatedSymmetralIsAPermutation) {
    RngStream rng(14, 0);
    const auto g = random_grid(rng, 2, 25);
    for (double th : {0.3, std::numbers::pi / 4, 1.2}) EXPECT_EQ(sorted(rotated_symmetral(g, th).values()), sorted(g.values()));
    EXPECT_EQ(rotated_symmetral(g, 0.0).values(), steiner_symmetral(g, 0).values());
    EXPECT_EQ(rotated_symmetral(g, std::numbers::pi / 2).values(), steiner_symmetral(g, 1).values());
    EXPECT_THROW(rotated_symmetral(random_grid(rng, 3, 5), 0.1), DimensionError);
}

TEST(Iterate, AlreadyRearrangedStopsImmediately) {
    const auto g = sdr(GridFunction::sample(2, 15, 0.1, [](const Vec& c) { return c(0) > 0 ? 1.0 : 0.0; }));
    const auto r = iterate_symmetrizations(g, {SymmetrizationStep::along(0)}, 1e-12, 10);
    ASSERT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.history[0], 0.0);
    EXPECT_TRUE(r.converged);
}

TEST(Iterate, OffCenterDiskAxisOnly) {
    const auto g = GridFunction::sample(2, 129, 2.0 / 129, [](const Vec& c) { return (c - v2(0.3, -0.2)).norm() < 0.4 ? 1.0 : 0.0; });
    const double tol = 0.02 * g.mass();
    const auto r = iterate_symmetrizations(g, {SymmetrizationStep::along(0), SymmetrizationStep::along(1)}, tol, 200);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.history.size(), 201u);
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1] + 1e-12);
    // frozen from a direct run: two axis steps suffice
    EXPECT_EQ(r.history.size(), 3u);
    EXPECT_LT(r.history.back(), tol);
}

TEST(Iterate, RotationsBeatAxisOnlyOnRandomBlob) {
    RngStream rng(15, 0);
    const auto g = random_grid(rng, 2, 65, 0.3);
    const std::vector<SymmetrizationStep> axes = {SymmetrizationStep::along(0), SymmetrizationStep::along(1)};
    const std::vector<SymmetrizationStep> mixed = {SymmetrizationStep::along(0), SymmetrizationStep::direction(std::numbers::pi / 4),
                                                   SymmetrizationStep::along(1),
                                                   SymmetrizationStep::direction(3 * std::numbers::pi / 4)};
    const auto a = iterate_symmetrizations(g, axes, 0.0, 40);
    const auto b = iterate_symmetrizations(g, mixed, 0.0, 40);
    EXPECT_FALSE(a.converged);
    EXPECT_LT(b.history.back(), a.history.back());
}

TEST(GridFile, RoundTripIsExact) {
    RngStream rng(16, 0);
    std::vector<double> v(7 * 7);
    for (auto& x : v) x = rng.uniform() * std::pow(10.0, rng.uniform(-20, 20));
    const GridFunction g(2, 7, 0.1 / 3, v);
    std::stringstream ss;
    g.write(ss);
    const auto r = GridFunction::read(ss);
    EXPECT_EQ(r.dim(), 2);
    EXPECT_EQ(r.cells(), 7);
    EXPECT_EQ(r.h(), g.h());
    EXPECT_EQ(r.values(), g.values());
}

TEST(StepFunction, RearrangementExample) {
    const StepFunction1D f({0.0, 0.25, 1.0, 1.5}, {2.0, 0.0, 1.0});
    const auto r = f.rearranged();
    EXPECT_EQ(r.breaks(), (std::vector<double>{-0.375, -0.125, 0.125, 0.375}));
    EXPECT_EQ(r.values(), (std::vector<double>{1.0, 2.0, 1.0}));
    EXPECT_TRUE(r.is_symmetric_decreasing());
    EXPECT_FALSE(f.is_symmetric_decreasing());
    EXPECT_EQ(r.integral(), f.integral());
}

TEST(StepFunction, MergesAndTrims) {
    const StepFunction1D f({-2, -1, 0, 1, 2, 3}, {0, 1, 1, 3, 0});
    EXPECT_EQ(f.breaks(), (std::vector<double>{-1, 1, 2}));
    EXPECT_EQ(f.values(), (std::vector<double>{1, 3}));
    EXPECT_EQ(f(0.5), 1.0);
    EXPECT_EQ(f(1.0), 3.0);
    EXPECT_EQ(f(2.0), 0.0);
    EXPECT_THROW(StepFunction1D({0, 0}, {1}), DimensionError);
}

TEST(Bll, TranslatedIntervalsOnTheLine) {
    const auto f = StepFunction1D::indicator(0, 1);
    const auto r = bll_check({f, f}, {v1(1), v1(1)});
    EXPECT_NEAR(r.lhs, 1.0, 1e-15);
    EXPECT_NEAR(r.rhs, 1.0, 1e-15);
    // different offsets: overlap 1/2 before, 1 after rearranging
    const auto s = bll_check({f, StepFunction1D::indicator(0.5, 1.5)}, {v1(1), v1(1)});
    EXPECT_NEAR(s.lhs, 0.5, 1e-15);
    EXPECT_NEAR(s.rhs, 1.0, 1e-15);
}

TEST(Bll, SymmetricDecreasingGivesEquality) {
    const StepFunction1D f({-1, -0.5, 0.5, 1}, {1, 3, 1});
    const auto g = StepFunction1D::indicator(-0.7, 0.7);
    const auto r = bll_check({f, g, f}, {v2(1, 0), v2(0, 1), v2(1, 1)});
    EXPECT_NEAR(r.lhs, r.rhs, r.error);
    EXPECT_GT(r.error, 0.0);
}

TEST(Bll, PlanarMatchesBruteForceGrid) {
    RngStream rng(17, 0);
    for (int t = 0; t < 5; ++t) {
        std::vector<StepFunction1D> fs;
        for (int i = 0; i < 3; ++i) {
            const double a = rng.uniform(-1, 0.5);
            fs.push_back(StepFunction1D({a, a + 0.3, a + rng.uniform(0.5, 1.0)}, {2.0, 1.0}));
        }
        const std::vector<Vec> us = {v2(1, 0), v2(0, 1), v2(1, 1)};
        const auto r = bll_check(fs, us);
        // midpoint error is O(h * perimeter) with h = 6/3000
        EXPECT_NEAR(r.lhs, brute_bll2(fs, us, 3.0, 3000), 2e-2 * std::max(r.lhs, 0.1)) << t;
    }
}

TEST(Bll, RandomOffCenterIndicatorsInThePlane) {
    RngStream rng(18, 0);
    int strict = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<GridFunction> fs;
        for (int i = 0; i < 3; ++i) {
            const double a = rng.uniform(-0.8, 0.4), w = rng.uniform(0.1, 0.5);
            fs.push_back(GridFunction::sample(1, 401, 1.0 / 200, [&](const Vec& c) { return c(0) > a && c(0) < a + w ? 1.0 : 0.0; }));
        }
        const auto r = bll_check(fs, {v2(1, 0), v2(0, 1), v2(1, 1)});
        EXPECT_LE(r.lhs, r.rhs + r.error) << t;
        EXPECT_LT(r.error, 0.01 * r.rhs);
        strict += r.lhs < r.rhs - r.error;
    }
    EXPECT_GT(strict, 50);
}

TEST(Bll, SpaceCubeAndDiagonalSlab) {
    const auto f = StepFunction1D::indicator(-0.5, 0.5);
    const auto cube = bll_check({f, f, f}, {unit(3, 0), unit(3, 1), unit(3, 2)});
    EXPECT_NEAR(cube.lhs, 1.0, 1e-12 + cube.error);
    const Vec d = (Vec(3) << 1, 1, 1).finished();
    const auto slab = bll_check({f, f, f, f}, {unit(3, 0), unit(3, 1), unit(3, 2), d});
    // independent oracle: Monte Carlo over the cube
    RngStream rng(19, 0);
    const int m = 1000000;
    int in = 0;
    for (int i = 0; i < m; ++i) in += std::abs(rng.uniform(-0.5, 0.5) + rng.uniform(-0.5, 0.5) + rng.uniform(-0.5, 0.5)) < 0.5;
    const double p = double(in) / m, se = std::sqrt(p * (1 - p) / m);
    EXPECT_NEAR(slab.lhs, p, 4 * se + slab.error);
    EXPECT_LT(slab.error, 1e-6);
    EXPECT_NEAR(slab.lhs, slab.rhs, slab.error);
}

TEST(Bll, SpaceRandomIntervals) {
    RngStream rng(20, 0);
    for (int t = 0; t < 10; ++t) {
        std::vector<StepFunction1D> fs;
        for (int i = 0; i < 4; ++i) {
            const double a = rng.uniform(-1, 0.5);
            fs.push_back(StepFunction1D::indicator(a, a + rng.uniform(0.3, 1.0)));
        }
        const auto r = bll_check(fs, {unit(3, 0), unit(3, 1), unit(3, 2), (Vec(3) << 1, -1, 1).finished()});
        EXPECT_LE(r.lhs, r.rhs + r.error) << t;
    }
}

TEST(Bll, Errors) {
    const auto f = StepFunction1D::indicator(0, 1);
    EXPECT_THROW(bll_check({f}, {Vec::Ones(4)}), DimensionError);
    EXPECT_THROW(bll_check({f, f}, {v2(1, 0), v2(2, 0)}), DegenerateError);
    EXPECT_THROW(bll_check({f, f}, {v2(1, 0)}), DimensionError);
}

TEST(Peakedness, EqualFunctionsHaveZeroMargins) {
    RngStream rng(21, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < 10; ++i) bodies.push_back(random_symmetric_polygon(rng));
    const auto f = BoxFunction::tensor(BoxFunction::from_steps(random_density(rng)), BoxFunction::from_steps(random_density(rng)));
    const auto r = peakedness_compare(f, f, bodies);
    EXPECT_TRUE(r.consistent);
    for (double m : r.margins) EXPECT_EQ(m, 0.0);
}

TEST(Peakedness, IntervalExampleClosedForm) {
    const auto f1 = BoxFunction::indicator(v1(-0.5), v1(0.5));
    const auto f2 = BoxFunction::indicator(v1(-1), v1(1), 0.5);
    std::vector<Body> bodies;
    const std::vector<double> as = {0.1, 0.25, 0.5, 0.8, 1.0, 1.7};
    for (double a : as) bodies.push_back(interval(a));
    const auto r = peakedness_compare(f1, f2, bodies);
    for (std::size_t i = 0; i < as.size(); ++i)
        EXPECT_NEAR(r.margins[i], std::min(2 * as[i], 1.0) - std::min(as[i], 1.0), 1e-15);
    EXPECT_TRUE(r.consistent);
    // the reverse comparison fails
    EXPECT_FALSE(peakedness_compare(f2, f1, bodies).consistent);
    EXPECT_EQ(peakedness_margin_1d(f1, f2), 0.0);
    EXPECT_NEAR(peakedness_margin_1d(f2, f1), -0.5, 1e-15);
}

TEST(Peakedness, DensityOverload) {
    const auto f1 = models::Density::uniform(interval(0.5));
    const auto f2 = models::Density::uniform(interval(1.0));
    const auto r = peakedness_compare(f1, f2, {interval(0.3)});
    EXPECT_NEAR(r.margins[0], 0.3, 1e-15);
    EXPECT_THROW(peakedness_compare(models::Density::truncated_gaussian(1, 1.0), f2, {interval(0.3)}), UnsupportedError);
}

TEST(Peakedness, Hypotheses) {
    const auto f1 = BoxFunction::unit_cube(2);
    const auto f2 = BoxFunction::indicator(v2(-1, -1), v2(1, 1), 0.25);
    const Body off = Body::vpolytope({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
    EXPECT_THROW(peakedness_compare(f1, f2, {off}), HypothesisError);
    EXPECT_THROW(peakedness_compare(f1, BoxFunction::indicator(v2(-1, -1), v2(1, 1)), {}), HypothesisError);
    EXPECT_TRUE(peakedness_compare(f1, f2, {Body::ball(Vec::Zero(2), 0.6)}).consistent);
}

TEST(Peakedness, CubeDominationOnRandomPolygons) {
    RngStream rng(22, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < 50; ++i) bodies.push_back(random_symmetric_polygon(rng));
    for (int t = 0; t < 10; ++t) {
        const auto r = cube_domination_check({random_density(rng), random_density(rng)}, bodies);
        EXPECT_TRUE(r.consistent) << t << " " << r.min_margin;
    }
    EXPECT_THROW(cube_domination_check({StepFunction1D::indicator(0, 0.5, 2.0)}, bodies), HypothesisError);
}

TEST(Peakedness, ProductOfRearrangementsIsMorePeaked) {
    RngStream rng(23, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < 50; ++i) bodies.push_back(random_symmetric_polygon(rng));
    for (int t = 0; t < 10; ++t) {
        const auto a = random_density(rng), b = random_density(rng);
        const auto prod = BoxFunction::tensor(BoxFunction::from_steps(a), BoxFunction::from_steps(b));
        const auto star = BoxFunction::tensor(BoxFunction::from_steps(a.rearranged()), BoxFunction::from_steps(b.rearranged()));
        EXPECT_TRUE(peakedness_compare(star, prod, bodies).consistent) << t;
    }
}

TEST(Peakedness, SpaceMeasureAgainstMonteCarlo) {
    const auto f = BoxFunction::indicator(Vec::Constant(3, -0.5), Vec::Constant(3, 0.5));
    const Body K = Body::ball(Vec::Zero(3), 0.6);
    const auto e = f.measure(K);
    RngStream rng(24, 0);
    const int m = 1000000;
    int in = 0;
    for (int i = 0; i < m; ++i) {
        const Vec x = (Vec(3) << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)).finished();
        in += x.norm() <= 0.6;
    }
    const double p = double(in) / m, se = std::sqrt(p * (1 - p) / m);
    EXPECT_NEAR(e.value, p, 4 * se + 3 * e.error);
    EXPECT_GT(e.error, 0.0) << e.value;
}

TEST(Kanter, EqualFactorsGiveZeroMargins) {
    RngStream rng(25, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < 10; ++i) bodies.push_back(random_symmetric_polygon(rng));
    const auto f1 = BoxFunction::indicator(v1(-0.5), v1(0.5));
    const auto r = kanter_check(f1, f1, f1, bodies);
    for (double m : r.margins) EXPECT_EQ(m, 0.0);
}

TEST(Kanter, IntervalFactorsOnRandomPolygons) {
    RngStream rng(26, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < 50; ++i) bodies.push_back(random_symmetric_polygon(rng));
    const auto f1 = BoxFunction::indicator(v1(-0.5), v1(0.5));
    const auto f2 = BoxFunction::indicator(v1(-1), v1(1), 0.5);
    EXPECT_TRUE(kanter_check(f1, f2, f1, bodies).consistent);
    // triangle density on [-1, 1] as a 201-step staircase
    const auto tri = GridFunction::sample(1, 201, 0.01, [](const Vec& c) { return std::max(0.0, 1 - std::abs(c(0))); });
    const auto ft = BoxFunction::from_grid(tri);
    ASSERT_TRUE(ft.is_unimodal());
    const auto r = kanter_check(f1, f2, ft, bodies);
    EXPECT_TRUE(r.consistent) << r.min_margin;
}

TEST(Kanter, HypothesesAndDimensions) {
    const auto f1 = BoxFunction::indicator(v1(-0.5), v1(0.5));
    const auto f2 = BoxFunction::indicator(v1(-1), v1(1), 0.5);
    const std::vector<Body> bodies = {Body::ball(Vec::Zero(2), 0.7)};
    EXPECT_THROW(kanter_check(f2, f1, f1, bodies), HypothesisError);
    EXPECT_THROW(kanter_check(f1, f2, BoxFunction::indicator(v1(0), v1(1)), bodies), HypothesisError);
    const auto sq = BoxFunction::unit_cube(2);
    EXPECT_THROW(kanter_check(f1, f2, BoxFunction::unit_cube(3), bodies), DimensionError);
    EXPECT_TRUE(sq.is_unimodal());
}
