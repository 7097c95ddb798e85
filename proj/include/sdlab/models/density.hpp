#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/functionals.hpp"
#include "sdlab/rearrangement/grid_function.hpp"

namespace sdlab::models {

using geometry::Body;
using rearrangement::GridFunction;

/// (V_n(K) / omega_n)^{1/n}, the radius of the ball with the volume of K.
inline double ball_radius(const Body& K) {
    const auto v = geometry::volume(K);
    if (v.degenerate || !(v.value > 0.0)) throw DegenerateError("ball_radius needs a body with positive volume");
    return std::pow(v.value / unit_ball_volume(K.dim()), 1.0 / K.dim());
}

/// Radius of the Euclidean ball of volume one.
inline double unit_volume_ball_radius(int n) { return std::pow(unit_ball_volume(n), -1.0 / n); }

struct UniformOnBody {
    Body body;
    double volume = 0.0;
    /// Fraction of bounding-box proposals that land in the body (1 for balls).
    double acceptance = 1.0;
    Vec lo, hi;
};

/// Gaussian N(center, sigma^2 I) conditioned on |x - center| <= radius.
struct TruncatedGaussian {
    double sigma = 1.0;
    double radius = 8.0;
    Vec center;
    double mass = 1.0;
};

struct GridDensity {
    GridFunction grid;
    std::shared_ptr<const std::vector<double>> cdf;
};

/// Degenerate law concentrated at a point.
struct PointMass {
    Vec point;
};

/// A probability law on R^n with a certified bound on its density.
class Density {
public:
    using Variant = std::variant<UniformOnBody, TruncatedGaussian, GridDensity, PointMass>;

    static Density uniform(const Body& K) {
        UniformOnBody u{K, 0.0, 1.0, {}, {}};
        const auto v = geometry::volume(K);
        if (v.degenerate || !(v.value > 0.0))
            throw DegenerateError("uniform density on a body with zero volume (" + K.kind_name() + ")");
        u.volume = v.value;
        if (!K.as<geometry::EuclideanBall>()) {
            auto [lo, hi] = geometry::detail::bounding_box(K);
            u.lo = lo;
            u.hi = hi;
            u.acceptance = v.value / (hi - lo).prod();
            if (u.acceptance < 1e-4)
                throw DegenerateError("rejection sampler acceptance " + std::to_string(u.acceptance) +
                                      " below 1e-4 for " + K.kind_name());
        }
        return Density(K.dim(), u, 1.0 / v.value);
    }

    /// Uniform on the centered ball of volume one.
    static Density uniform_unit_volume_ball(int n) {
        return uniform(Body::ball(Vec::Zero(n), unit_volume_ball_radius(n)));
    }

    static Density truncated_gaussian(int n, double sigma, Vec center = {}, double radius_factor = 8.0) {
        if (n < 1 || n > kMaxDim) throw DimensionError("gaussian dimension outside [1, 6]");
        if (!(sigma > 0.0)) throw DimensionError("gaussian sigma must be positive");
        if (center.size() == 0) center = Vec::Zero(n);
        if (center.size() != n) throw DimensionError("gaussian center has wrong dimension");
        const double R = radius_factor * sigma;
        const double mass = boost::math::gamma_p(0.5 * n, 0.5 * R * R / (sigma * sigma));
        const double peak = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * n) / mass;
        return Density(n, TruncatedGaussian{sigma, R, std::move(center), mass}, peak);
    }

    static Density grid(GridFunction g) {
        const double m = g.mass();
        if (std::abs(m - 1.0) > 1e-6)
            throw DimensionError("grid density has mass " + std::to_string(m) + ", expected 1 within 1e-6");
        auto cdf = std::make_shared<std::vector<double>>(g.size());
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) (*cdf)[i] = s += g[i];
        for (auto& c : *cdf) c /= s;
        const double sup = g.max_value();
        const int n = g.dim();
        return Density(n, GridDensity{std::move(g), std::move(cdf)}, sup);
    }

    static Density point_mass(Vec p) {
        const int n = static_cast<int>(p.size());
        return Density(n, PointMass{std::move(p)}, std::numeric_limits<double>::infinity());
    }

    int dim() const noexcept { return n_; }
    /// Certified upper bound on the density; infinite for point masses.
    double sup_bound() const noexcept { return sup_; }
    const Variant& variant() const noexcept { return v_; }
    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&v_);
    }
    bool degenerate() const noexcept { return as<PointMass>() != nullptr; }

    /// Rejection-sampler acceptance rate (1 for exact samplers).
    double acceptance() const noexcept {
        if (auto u = as<UniformOnBody>()) return u->acceptance;
        return 1.0;
    }

    std::string name() const {
        char buf[96];
        if (auto u = as<UniformOnBody>()) return "uniform(" + u->body.kind_name() + ")";
        if (auto g = as<TruncatedGaussian>()) {
            std::snprintf(buf, sizeof buf, "gaussian(sigma=%.6g)", g->sigma);
            return buf;
        }
        if (auto g = as<GridDensity>()) {
            std::snprintf(buf, sizeof buf, "grid(n=%d,cells=%d,h=%.6g)", g->grid.dim(), g->grid.cells(), g->grid.h());
            return buf;
        }
        return "point";
    }

    double operator()(const Vec& x) const {
        if (x.size() != n_) throw DimensionError("density evaluated at a point of wrong dimension");
        if (auto u = as<UniformOnBody>()) return u->body.contains(x, 0.0) ? 1.0 / u->volume : 0.0;
        if (auto g = as<TruncatedGaussian>()) {
            const double r2 = (x - g->center).squaredNorm();
            if (r2 > g->radius * g->radius) return 0.0;
            return sup_ * std::exp(-0.5 * r2 / (g->sigma * g->sigma));
        }
        if (auto g = as<GridDensity>()) return g->grid.value_at(x);
        throw HypothesisError("a point mass has no density");
    }

    Vec sample(RngStream& rng) const {
        if (auto u = as<UniformOnBody>()) return sample_uniform(*u, rng);
        if (auto g = as<TruncatedGaussian>()) {
            Vec z(n_);
            const double lim = g->radius * g->radius;
            for (;;) {
                for (int i = 0; i < n_; ++i) z(i) = g->sigma * rng.normal();
                if (z.squaredNorm() <= lim) return g->center + z;
            }
        }
        if (auto g = as<GridDensity>()) {
            const auto& cdf = *g->cdf;
            const double u = rng.uniform();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            if (it == cdf.end()) --it;
            // skip trailing zero-mass cells that share the last cdf value
            std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
            while (g->grid[idx] == 0.0 && idx > 0) --idx;
            Vec x = g->grid.center(idx);
            for (int i = 0; i < n_; ++i) x(i) += g->grid.h() * (rng.uniform() - 0.5);
            return x;
        }
        return std::get<PointMass>(v_).point;
    }

private:
    Density(int n, Variant v, double sup) : n_(n), v_(std::move(v)), sup_(sup) {}

    Vec sample_uniform(const UniformOnBody& u, RngStream& rng) const {
        if (auto b = u.body.as<geometry::EuclideanBall>()) {
            Vec d(n_);
            double r2;
            do {
                for (int i = 0; i < n_; ++i) d(i) = rng.normal();
                r2 = d.squaredNorm();
            } while (r2 == 0.0);
            const double r = b->radius * std::pow(rng.uniform_open(), 1.0 / n_);
            return b->center + (r / std::sqrt(r2)) * d;
        }
        Vec x(n_);
        for (;;) {
            for (int i = 0; i < n_; ++i) x(i) = rng.uniform(u.lo(i), u.hi(i));
            if (u.body.contains(x, 0.0)) return x;
        }
    }

    int n_;
    Variant v_;
    double sup_;
};

/// Symmetric decreasing rearrangement of a density. Uniform densities go to
/// the uniform density on the centered ball of equal volume, gaussians are
/// recentered, and grid densities use the grid rearrangement. The sup bound
/// is carried over unchanged.
inline Density rearranged(const Density& f) {
    if (auto u = f.as<UniformOnBody>()) {
        const int n = f.dim();
        const double r = std::pow(u->volume / unit_ball_volume(n), 1.0 / n);
        return Density::uniform(Body::ball(Vec::Zero(n), r));
    }
    if (auto g = f.as<TruncatedGaussian>())
        return Density::truncated_gaussian(f.dim(), g->sigma, Vec::Zero(f.dim()), g->radius / g->sigma);
    if (auto g = f.as<GridDensity>()) return Density::grid(rearrangement::sdr(g->grid));
    throw HypothesisError("a point mass has no symmetric decreasing rearrangement");
}

inline Vec sample_point(const Density& f, RngStream& rng) { return f.sample(rng); }

/// Matrix whose column i is drawn from fs[i].
inline Matrix sample_matrix(const std::vector<Density>& fs, RngStream& rng) {
    if (fs.empty()) throw DimensionError("sample_matrix needs at least one density");
    const int n = fs.front().dim();
    Mat X(n, static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].dim() != n) throw DimensionError("densities of different dimensions in one matrix");
        X.col(static_cast<Eigen::Index>(i)) = fs[i].sample(rng);
    }
    return Matrix(std::move(X));
}

} // namespace sdlab::models
