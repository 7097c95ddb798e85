#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"

namespace sdlab::geometry {

/// A measure on R^n with radial density psi(|x|).
///
/// lebesgue: psi = 1. gaussian(sigma): the normalized N(0, sigma^2 I)
/// density. inverse_power: psi(r) = (1 + r^2)^{-(n+1)/2}, unnormalized, total
/// mass pi^{(n+1)/2} / Gamma((n+1)/2).
///
/// All three densities are -1/(n+1)-concave: psi^{-1/(n+1)} is constant,
/// exp(r^2 / (2 sigma^2 (n+1))) up to a factor, and sqrt(1 + r^2)
/// respectively, each convex on R^n. `concavity_probe` spot-checks this.
class RadialMeasure {
public:
    enum class Kind { lebesgue, gaussian, inverse_power };

    static RadialMeasure lebesgue(int n) { return RadialMeasure(Kind::lebesgue, n, 1.0); }
    static RadialMeasure gaussian(int n, double sigma = 1.0) {
        if (!(sigma > 0)) throw DimensionError("gaussian measure needs sigma > 0");
        return RadialMeasure(Kind::gaussian, n, sigma);
    }
    static RadialMeasure inverse_power(int n) { return RadialMeasure(Kind::inverse_power, n, 1.0); }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return n_; }
    double sigma() const noexcept { return sigma_; }

    std::string name() const {
        switch (kind_) {
        case Kind::lebesgue: return "lebesgue";
        case Kind::gaussian: return "gaussian(" + std::to_string(sigma_) + ")";
        case Kind::inverse_power: return "inverse_power";
        }
        return "?";
    }

    double density(double r) const {
        switch (kind_) {
        case Kind::lebesgue: return 1.0;
        case Kind::gaussian:
            return std::exp(-0.5 * r * r / (sigma_ * sigma_)) /
                   std::pow(2.0 * std::numbers::pi * sigma_ * sigma_, 0.5 * n_);
        case Kind::inverse_power: return std::pow(1.0 + r * r, -0.5 * (n_ + 1));
        }
        return 0.0;
    }

    /// int_0^R psi(r) r^{n-1} dr, so that the measure of a star body with
    /// radial function rho is the surface integral of radial_mass(rho(u)).
    double radial_mass(double R) const {
        if (R <= 0) return 0.0;
        const double half = 0.5 * n_;
        switch (kind_) {
        case Kind::lebesgue: return std::pow(R, n_) / n_;
        case Kind::gaussian: {
            const double x = 0.5 * R * R / (sigma_ * sigma_);
            return std::tgamma(half) * boost::math::gamma_p(half, x) /
                   (2.0 * std::pow(std::numbers::pi, half));
        }
        case Kind::inverse_power: {
            // substitute r = tan t: int_0^{atan R} sin^{n-1} t dt
            if (std::isinf(R)) return 0.5 * boost::math::beta(half, 0.5);
            const double s2 = R * R / (1.0 + R * R);
            return 0.5 * boost::math::beta(half, 0.5, s2);
        }
        }
        return 0.0;
    }

    /// Total mass (infinite for Lebesgue measure).
    double total_mass() const {
        switch (kind_) {
        case Kind::lebesgue: return std::numeric_limits<double>::infinity();
        case Kind::gaussian: return 1.0;
        case Kind::inverse_power:
            return std::pow(std::numbers::pi, 0.5 * (n_ + 1)) / std::tgamma(0.5 * (n_ + 1));
        }
        return 0.0;
    }

    /// Draw from the normalized measure (not available for Lebesgue).
    Vec sample(RngStream& rng) const {
        Vec x(n_);
        for (int i = 0; i < n_; ++i) x(i) = rng.normal();
        switch (kind_) {
        case Kind::lebesgue: throw UnsupportedError("cannot sample from Lebesgue measure");
        case Kind::gaussian: return sigma_ * x;
        case Kind::inverse_power: {
            // multivariate t with one degree of freedom
            double g;
            do g = rng.normal();
            while (g == 0.0);
            return x / std::abs(g);
        }
        }
        return x;
    }

    /// Measure of the interval [a, b] when n = 1.
    double interval_mass(double a, double b) const {
        if (n_ != 1) throw DimensionError("interval_mass needs n = 1");
        if (b <= a) return 0.0;
        switch (kind_) {
        case Kind::lebesgue: return b - a;
        case Kind::gaussian:
            return 0.5 * (std::erf(b / (std::numbers::sqrt2 * sigma_)) -
                          std::erf(a / (std::numbers::sqrt2 * sigma_)));
        case Kind::inverse_power: return std::atan(b) - std::atan(a);
        }
        return 0.0;
    }

    /// Midpoint-convexity check of psi^{-1/(n+1)} along random segments;
    /// returns the largest violation found (<= 0 up to rounding when concave).
    double concavity_probe(RngStream& rng, int trials = 1000) const {
        double worst = -std::numeric_limits<double>::infinity();
        auto g = [&](const Vec& x) { return std::pow(density(x.norm()), -1.0 / (n_ + 1)); };
        for (int t = 0; t < trials; ++t) {
            Vec a(n_), b(n_);
            for (int i = 0; i < n_; ++i) {
                a(i) = 3.0 * rng.normal();
                b(i) = 3.0 * rng.normal();
            }
            const double ga = g(a), gb = g(b), gm = g(0.5 * (a + b));
            worst = std::max(worst, (gm - 0.5 * (ga + gb)) / std::max(1.0, 0.5 * (ga + gb)));
        }
        return worst;
    }

private:
    RadialMeasure(Kind k, int n, double sigma) : kind_(k), n_(n), sigma_(sigma) {
        if (n < 1 || n > kMaxDim) throw DimensionError("radial measure dimension outside [1, 6]");
    }

    Kind kind_;
    int n_;
    double sigma_;
};

} // namespace sdlab::geometry
