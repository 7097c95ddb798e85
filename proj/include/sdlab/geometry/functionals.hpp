#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/body.hpp"
#include "sdlab/geometry/radial_measure.hpp"
#include "sdlab/geometry/sphere_grid.hpp"

namespace sdlab::geometry {

/// Budget and random stream for Monte Carlo paths. The stream is copied on
/// use, so calls with equal options reproduce each other.
struct MonteCarlo {
    std::size_t samples = 200000;
    RngStream rng{0x5D1AB0C0FFEEull, 0};
};

namespace detail {

inline std::string fmt_vec(const Vec& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v(i));
    }
    return s + ")";
}

/// Axis-aligned box containing the body: from the support function when
/// available, else the bounding ball's box.
inline std::pair<Vec, Vec> bounding_box(const Body& b) {
    const int n = b.dim();
    Vec lo(n), hi(n);
    if (b.has_support()) {
        for (int i = 0; i < n; ++i) {
            hi(i) = b.support(unit(n, i));
            lo(i) = -b.support(-unit(n, i));
        }
    } else {
        const double R = b.bounding_radius();
        lo.setConstant(-R);
        hi.setConstant(R);
    }
    return {lo, hi};
}

/// Hit-or-miss estimate of the volume of {x in box : inside(x)}.
template <class Inside>
Estimate box_hit_or_miss(const Vec& lo, const Vec& hi, Inside&& inside, const MonteCarlo& mc) {
    const int n = static_cast<int>(lo.size());
    const double box = (hi - lo).prod();
    if (!(box > 0)) return {0.0, 0.0, true};
    RngStream rng = mc.rng;
    std::size_t hits = 0;
    Vec x(n);
    for (std::size_t s = 0; s < mc.samples; ++s) {
        for (int i = 0; i < n; ++i) x(i) = rng.uniform(lo(i), hi(i));
        if (inside(x)) ++hits;
    }
    const double m = static_cast<double>(mc.samples), p = hits / m;
    return {box * p, box * std::sqrt(p * (1.0 - p) / m), false};
}

/// Uniform point in the ball B(0, R) of R^n.
inline Vec uniform_in_ball(int n, double R, RngStream& rng) {
    Vec x(n);
    double norm;
    do {
        for (int i = 0; i < n; ++i) x(i) = rng.normal();
        norm = x.norm();
    } while (norm == 0.0);
    return x * (R * std::pow(rng.uniform(), 1.0 / n) / norm);
}

/// Circumscribed polygon of a planar support function from k directions.
inline double circumscribed_area(const Body& b, int k) {
    std::vector<double> h(static_cast<std::size_t>(k));
    std::vector<Point2> u(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double t = 2.0 * std::numbers::pi * i / k;
        u[i] = Point2(std::cos(t), std::sin(t));
        Vec w(2);
        w << u[i].x(), u[i].y();
        h[i] = b.support(w);
    }
    Polygon p;
    for (int i = 0; i < k; ++i) {
        const int j = (i + 1) % k;
        Eigen::Matrix2d a;
        a << u[i].x(), u[i].y(), u[j].x(), u[j].y();
        p.push_back(a.inverse() * Point2(h[i], h[j]));
    }
    return polygon_area(p);
}

/// (1/2) int rho(theta)^2 d theta, composite Gauss-Legendre with `panels`.
inline double radial_area(const std::function<double(const Vec&)>& rho, int panels) {
    return integrate_gl(
        [&](double t) {
            Vec u(2);
            u << std::cos(t), std::sin(t);
            const double r = rho(u);
            return 0.5 * r * r;
        },
        0.0, 2.0 * std::numbers::pi, panels);
}

} // namespace detail

/// Distance from the origin to the boundary along the unit direction u, for
/// bodies with the origin in their interior.
inline double radial_function(const Body& b, const Vec& u) {
    if (auto m = b.as<MembershipOracle>(); m && m->radial) return m->radial(u);
    if (auto ball = b.as<EuclideanBall>()) {
        const double cu = ball->center.dot(u), c2 = ball->center.squaredNorm();
        return cu + std::sqrt(std::max(0.0, cu * cu - c2 + ball->radius * ball->radius));
    }
    if (auto bi = b.as<BallIntersection>()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : bi->centers) {
            const double cu = c.dot(u), c2 = c.squaredNorm();
            best = std::min(best, cu + std::sqrt(std::max(0.0, cu * cu - c2 + bi->radius * bi->radius)));
        }
        return best;
    }
    if (auto h = b.as<HPolytope>()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : h->normals) {
            const double au = a.dot(u);
            if (au > 0) best = std::min(best, 1.0 / au);
        }
        return best;
    }
    if (b.is_polytope() && !b.as<Zonotope>()) {
        const auto& hull = b.hull();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : hull.facets()) {
            const double nu = f.normal.dot(u);
            if (nu > 0) best = std::min(best, f.offset / nu);
        }
        return best;
    }
    if (auto z = b.as<Zonotope>()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [v, hv] : b.zonotope_facets()) {
            const double vu = std::abs(v.dot(u));
            if (vu > 0) best = std::min(best, hv / vu);
        }
        (void)z;
        return best;
    }
    // bisection on membership
    double lo = 0.0, hi = b.bounding_radius() * (1.0 + 1e-9) + 1e-300;
    if (b.contains(hi * u, 0.0)) return hi;
    for (int it = 0; it < 80 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (b.contains(mid * u, 0.0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Lebesgue volume. Exact for polytopes, zonotopes (determinant expansion),
/// balls and planar ball intersections; deterministic quadrature with a
/// refinement error estimate for planar oracle bodies; Monte Carlo
/// membership otherwise.
inline Estimate volume(const Body& b, const MonteCarlo& mc = {}) {
    const int n = b.dim();
    if (auto ball = b.as<EuclideanBall>()) return {unit_ball_volume(n) * std::pow(ball->radius, n)};
    if (auto z = b.as<Zonotope>()) {
        const int N = static_cast<int>(z->generators.size());
        if (N < n) return {0.0, 0.0, true};
        double sum = 0.0;
        Mat m(n, n);
        for_each_subset(N, n, [&](const std::vector<int>& S) {
            for (int k = 0; k < n; ++k) m.col(k) = z->generators[S[k]];
            sum += std::abs(m.determinant());
        });
        const double v = std::ldexp(sum, n);
        return {v, 0.0, v == 0.0};
    }
    if (b.is_polytope()) {
        const auto& h = b.hull();
        return {h.volume(), 0.0, !h.full_dimensional()};
    }
    if (auto bi = b.as<BallIntersection>()) {
        if (n == 1) {
            const double hi = b.support(Vec::Constant(1, 1.0)), lo = -b.support(Vec::Constant(1, -1.0));
            return {std::max(0.0, hi - lo), 0.0, hi <= lo};
        }
        if (n == 2) {
            const auto* a = b.arcs();
            return {a->empty ? 0.0 : a->area(), 0.0, a->empty};
        }
        if (bi->centers.size() == 1) return {unit_ball_volume(n) * std::pow(bi->radius, n)};
    }
    if (n == 1) {
        if (b.has_support()) {
            const double hi = b.support(Vec::Constant(1, 1.0)), lo = -b.support(Vec::Constant(1, -1.0));
            return {std::max(0.0, hi - lo), 0.0, hi <= lo};
        }
    }
    if (n == 2) {
        if (auto m = b.as<MembershipOracle>(); m && m->radial) {
            const double fine = detail::radial_area(m->radial, 2048);
            const double coarse = detail::radial_area(m->radial, 1024);
            return {fine, std::abs(fine - coarse)};
        }
        if (b.as<SupportOracle>()) {
            const double fine = detail::circumscribed_area(b, 8192);
            const double coarse = detail::circumscribed_area(b, 4096);
            return {fine, std::abs(fine - coarse)};
        }
    }
    // Monte Carlo membership
    const double R = b.bounding_radius();
    if (!std::isfinite(R)) throw DimensionError("volume of a body without a finite bounding radius");
    if (b.has_support()) {
        auto [lo, hi] = detail::bounding_box(b);
        return detail::box_hit_or_miss(lo, hi, [&](const Vec& x) { return b.contains(x, 0.0); }, mc);
    }
    RngStream rng = mc.rng;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < mc.samples; ++s)
        if (b.contains(detail::uniform_in_ball(n, R, rng), 0.0)) ++hits;
    const double m = static_cast<double>(mc.samples), p = hits / m, vb = unit_ball_volume(n) * std::pow(R, n);
    return {vb * p, vb * std::sqrt(p * (1.0 - p) / m)};
}

/// Estimates V_j(B) by a least-squares fit of the Steiner polynomial
/// eps -> V_n(B + eps B) sampled by Monte Carlo at 2n+2 radii, with the
/// leading coefficient fixed at omega_n. The error is the standard error of
/// the fitted coefficient, computed from the per-sample linear functional.
inline Estimate intrinsic_volume_steiner_fit(const Body& b, int j, const MonteCarlo& mc = {}) {
    const int n = b.dim();
    if (j < 1 || j > n) throw DimensionError("intrinsic volume index j outside [1, n]");
    if (!b.has_support()) throw UnsupportedError("Steiner fit needs a support function");
    auto [lo, hi] = detail::bounding_box(b);
    const double width = (hi - lo).maxCoeff();
    const double eps_max = std::max(0.5 * width, 1e-12);
    const int K = 2 * n + 2;
    std::vector<double> eps(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) eps[k] = eps_max * (k + 1) / K;
    Vec blo = lo.array() - eps_max, bhi = hi.array() + eps_max;
    const double box = (bhi - blo).prod();
    // unknowns c_0..c_{n-1} of sum_i c_i eps^i
    Mat A(K, n);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i) A(k, i) = std::pow(eps[k], i);
    const Mat pinv = (A.transpose() * A).ldlt().solve(A.transpose());
    const int row = n - j;
    const Vec w = pinv.row(row).transpose();
    Vec offset(K);
    for (int k = 0; k < K; ++k) offset(k) = unit_ball_volume(n) * std::pow(eps[k], n);
    RngStream rng = mc.rng;
    double sum = 0.0, sum2 = 0.0;
    Vec x(n);
    for (std::size_t s = 0; s < mc.samples; ++s) {
        for (int i = 0; i < n; ++i) x(i) = rng.uniform(blo(i), bhi(i));
        const double d = std::max(0.0, b.support_gap(x));
        double z = 0.0;
        for (int k = 0; k < K; ++k)
            if (d <= eps[k]) z += w(k);
        z *= box;
        sum += z;
        sum2 += z * z;
    }
    const double m = static_cast<double>(mc.samples);
    const double mean = sum / m, var = std::max(0.0, sum2 / m - mean * mean);
    const double coef = mean - w.dot(offset);
    const double scale = unit_ball_volume(n - j);
    return {coef / scale, std::sqrt(var / m) / scale};
}

/// Intrinsic volume V_j(B), 1 <= j <= n. Closed forms where available
/// (balls, zonotopes, j >= n-2 for polytopes, planar perimeters), otherwise
/// the Steiner-polynomial fit.
inline Estimate intrinsic_volume(const Body& b, int j, const MonteCarlo& mc = {}) {
    const int n = b.dim();
    if (j < 1 || j > n)
        throw DimensionError("intrinsic volume index j=" + std::to_string(j) + " outside [1, " +
                             std::to_string(n) + "]");
    if (j == n) return volume(b, mc);
    if (auto ball = b.as<EuclideanBall>())
        return {binomial(n, j) * unit_ball_volume(n) / unit_ball_volume(n - j) * std::pow(ball->radius, j)};
    if (auto z = b.as<Zonotope>()) {
        // V_j(sum [-x_i, x_i]) = 2^j sum_{|S|=j} vol_j(X_S)
        const int N = static_cast<int>(z->generators.size());
        double sum = 0.0;
        Mat m(n, j);
        for_each_subset(N, j, [&](const std::vector<int>& S) {
            for (int k = 0; k < j; ++k) m.col(k) = z->generators[S[k]];
            sum += std::sqrt(std::max(0.0, (m.transpose() * m).determinant()));
        });
        return {std::ldexp(sum, j)};
    }
    if (b.is_polytope()) {
        const double v = b.hull().intrinsic_volume(j);
        if (!std::isnan(v)) return {v};
    }
    if (n == 2 && j == 1) {
        if (const auto* a = b.arcs()) return {a->empty ? 0.0 : 0.5 * a->perimeter()};
        if (b.has_support()) {
            // V_1 = (1/2) int_0^{2pi} h(theta) d theta; trapezoid on the periodic integrand
            auto trap = [&](int k) {
                double s = 0.0;
                Vec u(2);
                for (int i = 0; i < k; ++i) {
                    const double t = 2.0 * std::numbers::pi * i / k;
                    u << std::cos(t), std::sin(t);
                    s += b.support(u);
                }
                return 0.5 * s * 2.0 * std::numbers::pi / k;
            };
            const double fine = trap(8192), coarse = trap(4096);
            return {fine, std::abs(fine - coarse)};
        }
    }
    return intrinsic_volume_steiner_fit(b, j, mc);
}

/// Mean width 2 * average of h over the sphere grid.
inline double mean_width_grid(const Body& b, int grid = 0) {
    const auto dirs = sphere_grid(b.dim(), grid);
    double s = 0.0;
    for (const auto& u : dirs) s += b.support(u);
    return 2.0 * s / static_cast<double>(dirs.size());
}

/// Mean width. Uses w = 2 omega_{n-1} V_1 / (n omega_n) when V_1 is exact
/// (balls, zonotopes, polytopes with n <= 3, planar disk intersections),
/// otherwise the sphere-grid average.
inline double mean_width(const Body& b, int grid = 0) {
    const int n = b.dim();
    const bool exact = b.as<EuclideanBall>() || b.as<Zonotope>() || (b.is_polytope() && n <= 3) ||
                       (b.as<BallIntersection>() && n == 2);
    if (!exact || n == 1) return mean_width_grid(b, grid);
    return 2.0 * unit_ball_volume(n - 1) * intrinsic_volume(b, 1).value / (n * unit_ball_volume(n));
}

/// max over the sphere grid of |h_1 - h_2|; a lower bound for the Hausdorff
/// distance that converges as the grid is refined.
inline double hausdorff_distance(const Body& a, const Body& b, int grid = 0) {
    if (a.dim() != b.dim()) throw DimensionError("Hausdorff distance of bodies of different dimension");
    double best = 0.0;
    for (const auto& u : sphere_grid(a.dim(), grid)) best = std::max(best, std::abs(a.support(u) - b.support(u)));
    return best;
}

/// Diameter: exact for polytopes, zonotopes (N <= 24) and balls; otherwise
/// max over the sphere grid of h(u) + h(-u).
inline double diameter(const Body& b, int grid = 0) {
    if (auto c = b.as<SymmetricCrossHull>()) {
        double r = 0.0;
        for (const auto& g : c->generators) r = std::max(r, g.norm());
        return 2.0 * r;
    }
    if (auto ball = b.as<EuclideanBall>()) return 2.0 * ball->radius;
    if (auto z = b.as<Zonotope>(); z && z->generators.size() <= 24) {
        const int N = static_cast<int>(z->generators.size());
        double best = 0.0;
        for (long s = 0; s < (1L << (N - 1)); ++s) {
            Vec p = z->generators[N - 1];
            for (int i = 0; i + 1 < N; ++i) p += ((s >> i) & 1 ? -1.0 : 1.0) * z->generators[i];
            best = std::max(best, p.norm());
        }
        return 2.0 * best;
    }
    if (b.as<VPolytope>() || b.as<HPolytope>()) {
        const auto& h = b.hull();
        const auto idx = h.vertex_indices();
        double best = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t k = i + 1; k < idx.size(); ++k)
                best = std::max(best, (h.points()[idx[i]] - h.points()[idx[k]]).norm());
        return best;
    }
    double best = 0.0;
    for (const auto& u : sphere_grid(b.dim(), grid)) best = std::max(best, b.support(u) + b.support(-u));
    return best;
}

/// Throws unless the origin is an interior point: probes h(+-e_i) > 0 and
/// membership of the origin.
inline void require_origin_interior(const Body& b) {
    const int n = b.dim();
    const double scale = std::max(1e-300, b.bounding_radius());
    if (b.has_support()) {
        for (int i = 0; i < n; ++i)
            for (double s : {1.0, -1.0}) {
                const Vec u = s * unit(n, i);
                if (!(b.support(u) > 1e-12 * scale))
                    throw DegenerateError("origin is not interior: support in direction " + detail::fmt_vec(u) +
                                          " is " + std::to_string(b.support(u)));
            }
    }
    if (!b.contains(Vec::Zero(n), 0.0))
        throw DegenerateError("origin is not interior: the origin is not in the body");
}

/// Polar body {y : <x, y> <= 1 for all x in B}.
///
/// Balls about the origin map to balls, polytopes to their dual H- or
/// V-representation; everything else to a membership oracle
/// {y : h_B(y) <= 1} with radial function 1/h_B.
inline Body polar(const Body& b) {
    require_origin_interior(b);
    const int n = b.dim();
    if (auto ball = b.as<EuclideanBall>(); ball && ball->center.norm() == 0.0)
        return Body::ball(Vec::Zero(n), 1.0 / ball->radius);
    if (auto v = b.as<VPolytope>()) return Body::hpolytope(v->vertices);
    if (auto c = b.as<SymmetricCrossHull>()) {
        std::vector<Vec> normals;
        for (const auto& g : c->generators) {
            normals.push_back(g);
            normals.push_back(-g);
        }
        return Body::hpolytope(std::move(normals));
    }
    if (auto h = b.as<HPolytope>()) return Body::vpolytope(h->normals);
    if (auto z = b.as<Zonotope>(); z && (n == 2 || z->generators.size() <= 12)) {
        // {y : sum |<x_i, y>| <= 1} has facet normals sum s_i x_i.
        const int N = static_cast<int>(z->generators.size());
        std::vector<Vec> normals;
        if (n == 2) {
            for (const auto& p : *b.polygon()) normals.push_back((Vec(2) << p.x(), p.y()).finished());
        } else {
            for (long s = 0; s < (1L << N); ++s) {
                Vec p = Vec::Zero(n);
                for (int i = 0; i < N; ++i) p += ((s >> i) & 1 ? -1.0 : 1.0) * z->generators[i];
                normals.push_back(p);
            }
        }
        return Body::hpolytope(std::move(normals));
    }
    if (!b.has_support()) throw UnsupportedError("polar of a " + b.kind_name() + " without support function");
    // Certified inradius about the origin: h >= min over grid minus R * covering radius.
    const auto dirs = sphere_grid(n, n == 2 ? 4096 : default_sphere_grid_size(n));
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) hmin = std::min(hmin, b.support(u));
    const double R = b.bounding_radius();
    const double cover = n == 2 ? std::numbers::pi / static_cast<double>(dirs.size())
                                : 2.0 * std::pow(unit_sphere_area(n) / dirs.size(), 1.0 / (n - 1));
    double inradius = hmin - R * cover;
    if (!(inradius > 0)) inradius = 0.5 * hmin;
    MembershipOracle m;
    m.dim = n;
    m.bounding_radius = 1.0 / inradius;
    m.contains = [b](const Vec& y) { return b.support(y) <= 1.0; };
    m.radial = [b](const Vec& u) { return 1.0 / b.support(u); };
    m.support = [b](const Vec& u) {
        const double len = u.norm();
        if (len == 0.0) return 0.0;
        return len / radial_function(b, u / len);
    };
    m.label = "polar of " + b.kind_name();
    return Body::membership_oracle(std::move(m));
}

namespace detail {

/// nu-measure of the triangle conv{0, a, b}, signed by orientation.
inline double fan_triangle_measure(const RadialMeasure& nu, const Point2& a, const Point2& b) {
    const double cr = a.x() * b.y() - a.y() * b.x();
    const double len = (b - a).norm();
    if (len == 0.0 || cr == 0.0) return 0.0;
    const double d = std::abs(cr) / len; // distance from origin to line ab
    const double ta = std::atan2(a.y(), a.x());
    const double delta = std::atan2(cr, a.dot(b));
    // foot of the perpendicular
    const Point2 e = (b - a) / len;
    const Point2 foot = a - e * a.dot(e);
    const double phi = std::atan2(foot.y(), foot.x());
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / (std::numbers::pi / 32))));
    const double val = integrate_gl(
        [&](double t) { return nu.radial_mass(d / std::cos(t - phi)); }, ta, ta + delta, panels);
    return val;
}

} // namespace detail

/// nu(B). Lebesgue: volume. n = 1: closed form on the interval. n = 2:
/// deterministic quadrature (exact fan decomposition for polygons, radial
/// integral for star bodies about the origin, tensor grid otherwise). n >= 3:
/// importance sampling from the normalized measure.
inline Estimate measure(const RadialMeasure& nu, const Body& b, const MonteCarlo& mc = {}) {
    const int n = b.dim();
    if (nu.dim() != n) throw DimensionError("measure and body dimensions differ");
    if (nu.kind() == RadialMeasure::Kind::lebesgue) return volume(b, mc);
    if (!std::isfinite(b.bounding_radius())) throw DimensionError("measure of an unbounded body");
    if (n == 1) {
        const double hi = b.support(Vec::Constant(1, 1.0)), lo = -b.support(Vec::Constant(1, -1.0));
        return {nu.interval_mass(lo, hi)};
    }
    if (n == 2) {
        if (const Polygon* p = b.polygon()) {
            if (p->empty()) return {0.0, 0.0, true};
            double s = 0.0;
            for (std::size_t i = 0; i < p->size(); ++i)
                s += detail::fan_triangle_measure(nu, (*p)[i], (*p)[(i + 1) % p->size()]);
            return {s};
        }
        if (auto ball = b.as<EuclideanBall>(); ball && ball->center.norm() == 0.0)
            return {2.0 * std::numbers::pi * nu.radial_mass(ball->radius)};
        const bool star = b.contains(Vec::Zero(2), 0.0) &&
                          (b.as<MembershipOracle>() ? static_cast<bool>(b.as<MembershipOracle>()->radial) : true);
        if (star && b.has_support() && b.support(unit(2, 0)) > 0 && b.support(-unit(2, 0)) > 0 &&
            b.support(unit(2, 1)) > 0 && b.support(-unit(2, 1)) > 0) {
            auto integral = [&](int panels) {
                return integrate_gl(
                    [&](double t) {
                        Vec u(2);
                        u << std::cos(t), std::sin(t);
                        return nu.radial_mass(radial_function(b, u));
                    },
                    0.0, 2.0 * std::numbers::pi, panels);
            };
            const double fine = integral(2048), coarse = integral(1024);
            return {fine, std::abs(fine - coarse)};
        }
        if (auto m = b.as<MembershipOracle>(); m && m->radial && star) {
            auto integral = [&](int panels) {
                return integrate_gl(
                    [&](double t) {
                        Vec u(2);
                        u << std::cos(t), std::sin(t);
                        return nu.radial_mass(m->radial(u));
                    },
                    0.0, 2.0 * std::numbers::pi, panels);
            };
            const double fine = integral(2048), coarse = integral(1024);
            return {fine, std::abs(fine - coarse)};
        }
        // tensor-grid midpoint rule on the bounding box
        auto [lo, hi] = detail::bounding_box(b);
        auto grid = [&](int k) {
            const double hx = (hi(0) - lo(0)) / k, hy = (hi(1) - lo(1)) / k;
            double s = 0.0;
            Vec x(2);
            for (int i = 0; i < k; ++i)
                for (int l = 0; l < k; ++l) {
                    x << lo(0) + (i + 0.5) * hx, lo(1) + (l + 0.5) * hy;
                    if (b.contains(x, 0.0)) s += nu.density(x.norm());
                }
            return s * hx * hy;
        };
        const double fine = grid(1024), coarse = grid(512);
        return {fine, std::abs(fine - coarse)};
    }
    RngStream rng = mc.rng;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < mc.samples; ++s)
        if (b.contains(nu.sample(rng), 0.0)) ++hits;
    const double m = static_cast<double>(mc.samples), p = hits / m, total = nu.total_mass();
    return {total * p, total * std::sqrt(p * (1.0 - p) / m)};
}

} // namespace sdlab::geometry
