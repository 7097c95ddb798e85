#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/geometry/body.hpp"
#include "sdlab/geometry/coefficient_set.hpp"
#include "sdlab/geometry/functionals.hpp"
#include "sdlab/geometry/sphere_grid.hpp"
#include "sdlab/models/density.hpp"

namespace sdlab::dominance {

struct LlnMode {
    enum class Kind { hull, zp, orlicz };
    Kind kind = Kind::hull;
    double p = 1.0;
    geometry::Psi psi;

    static LlnMode hull() { return {}; }
    static LlnMode zp(double p) {
        if (!(p >= 1.0)) throw DimensionError("Z_p needs p >= 1, got p=" + std::to_string(p));
        LlnMode m;
        m.kind = Kind::zp;
        m.p = p;
        return m;
    }
    static LlnMode orlicz(geometry::Psi psi) {
        psi.validate();
        LlnMode m;
        m.kind = Kind::orlicz;
        m.psi = psi;
        return m;
    }
};

namespace detail {

// int phi(<x, y>) dx / V(K) over K for unit y, where K is a ball or a planar
// polytope; phi may have a kink at 0 only.
template <class Phi>
double pushforward_mean(const geometry::Body& K, const Vec& y, Phi&& phi) {
    const int n = K.dim();
    if (auto b = K.as<geometry::EuclideanBall>()) {
        const double c = b->center.dot(y), R = b->radius;
        const double norm = unit_ball_volume(n - 1) / (unit_ball_volume(n) * std::pow(R, n));
        auto g = [&](double s) {
            const double t = R * R - (s - c) * (s - c);
            return t > 0 ? norm * std::pow(t, 0.5 * (n - 1)) * phi(s) : 0.0;
        };
        std::vector<double> br = {c - R, c + R};
        if (0.0 > c - R && 0.0 < c + R) br.insert(br.begin() + 1, 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            // substitute s = c + R sin(t) to remove the endpoint singularity of the chord
            const double t0 = std::asin(std::clamp((br[i] - c) / R, -1.0, 1.0));
            const double t1 = std::asin(std::clamp((br[i + 1] - c) / R, -1.0, 1.0));
            s += integrate_gl([&](double t) { return g(c + R * std::sin(t)) * R * std::cos(t); }, t0, t1, 64);
        }
        return s;
    }
    const geometry::Polygon* poly = K.polygon();
    if (!poly || poly->size() < 3)
        throw UnsupportedError("population support functions need a ball or a planar polytope, got " + K.kind_name());
    const geometry::Point2 u(y(0), y(1)), w(-y(1), y(0));
    const double area = geometry::polygon_area(*poly);
    auto chord = [&](double s) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        const std::size_t m = poly->size();
        for (std::size_t i = 0; i < m; ++i) {
            const auto& a = (*poly)[i];
            const auto& b = (*poly)[(i + 1) % m];
            const double da = a.dot(u) - s, db = b.dot(u) - s;
            if ((da <= 0 && db >= 0) || (da >= 0 && db <= 0)) {
                const geometry::Point2 p = da == db ? a : geometry::Point2(a + (b - a) * (da / (da - db)));
                lo = std::min(lo, p.dot(w));
                hi = std::max(hi, p.dot(w));
                if (da == db) {
                    lo = std::min(lo, b.dot(w));
                    hi = std::max(hi, b.dot(w));
                }
            }
        }
        return hi > lo ? hi - lo : 0.0;
    };
    std::vector<double> br;
    for (const auto& v : *poly) br.push_back(v.dot(u));
    br.push_back(0.0);
    std::sort(br.begin(), br.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        if (br[i + 1] <= br[i]) continue;
        s += integrate_gl([&](double t) { return chord(t) * phi(t); }, br[i], br[i + 1], 8);
    }
    return s / area;
}

// Largest lambda with mean(psi(|s| / lambda)) >= 1, by bisection on a
// decreasing function of lambda.
template <class Mean>
double orlicz_gauge(Mean&& mean, double scale) {
    double hi = std::max(scale, 1e-300);
    while (mean(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (mean(lo) <= 1.0 && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// h(Z_p(K), y) for unit y: (int_K |<x, y>|^p dx / V(K))^{1/p}.
inline double population_zp_support(const geometry::Body& K, const Vec& y, double p) {
    return std::pow(detail::pushforward_mean(K, y, [p](double s) { return std::pow(std::abs(s), p); }), 1.0 / p);
}

/// h(Z_psi(K), y) for unit y: inf{lambda : int_K psi(|<x, y>| / lambda) / V(K) <= 1}.
inline double population_orlicz_support(const geometry::Body& K, const Vec& y, const geometry::Psi& psi) {
    return detail::orlicz_gauge(
        [&](double lam) { return detail::pushforward_mean(K, y, [&](double s) { return psi(std::abs(s) / lam); }); },
        K.bounding_radius());
}

/// One sample path of X_1, X_2, ... uniform on K; entry k is the distance at
/// N = schedule[k]: the Hausdorff distance of conv{X_1..X_N} to K (hull), or
/// the sup over the sphere grid of |h(Z_{p,N}) - h(Z_p(K))| (zp, orlicz).
inline std::vector<double> lln_convergence(const geometry::Body& K, const LlnMode& mode, const std::vector<int>& schedule,
                                           const RngStream& rng, int grid = 0) {
    std::vector<double> out;
    if (schedule.empty()) return out;
    int maxN = 0;
    for (int N : schedule) {
        if (N < 1) throw DimensionError("LLN schedule entries must be >= 1");
        maxN = std::max(maxN, N);
    }
    const auto f = models::Density::uniform(K);
    RngStream r = rng;
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(maxN));
    for (int i = 0; i < maxN; ++i) pts.push_back(f.sample(r));
    if (mode.kind == LlnMode::Kind::hull) {
        for (int N : schedule) {
            std::vector<Vec> pre(pts.begin(), pts.begin() + N);
            out.push_back(geometry::hausdorff_distance(geometry::Body::vpolytope(std::move(pre)), K, grid));
        }
        return out;
    }
    const auto dirs = geometry::sphere_grid(K.dim(), grid == 0 ? 256 : grid);
    std::vector<double> target;
    for (const auto& y : dirs)
        target.push_back(mode.kind == LlnMode::Kind::zp ? population_zp_support(K, y, mode.p)
                                                        : population_orlicz_support(K, y, mode.psi));
    std::vector<double> s;
    for (int N : schedule) {
        double worst = 0.0;
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            s.clear();
            for (int i = 0; i < N; ++i) s.push_back(std::abs(pts[static_cast<std::size_t>(i)].dot(dirs[d])));
            double h;
            if (mode.kind == LlnMode::Kind::zp) {
                double acc = 0.0;
                for (double x : s) acc += std::pow(x, mode.p);
                h = std::pow(acc / N, 1.0 / mode.p);
            } else {
                h = detail::orlicz_gauge(
                    [&](double lam) {
                        double acc = 0.0;
                        for (double x : s) acc += mode.psi(x / lam);
                        return acc / N;
                    },
                    K.bounding_radius());
            }
            worst = std::max(worst, std::abs(h - target[d]));
        }
        out.push_back(worst);
    }
    return out;
}

} // namespace sdlab::dominance
