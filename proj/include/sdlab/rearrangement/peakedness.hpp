#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/body.hpp"
#include "sdlab/geometry/functionals.hpp"
#include "sdlab/geometry/polygon.hpp"
#include "sdlab/models/density.hpp"
#include "sdlab/rearrangement/grid_function.hpp"
#include "sdlab/rearrangement/step_function.hpp"

namespace sdlab::rearrangement {

using geometry::Body;

struct Box {
    Vec lo, hi;
    double value = 0.0;
};

/// Nonnegative function on R^n (n <= 3) that is constant on finitely many
/// disjoint axis-parallel boxes and zero elsewhere.
class BoxFunction {
public:
    BoxFunction(int n, std::vector<Box> boxes) : n_(n), boxes_(std::move(boxes)) {
        if (n < 1 || n > 3) throw DimensionError("box functions support n <= 3, got n=" + std::to_string(n));
        for (const auto& b : boxes_) {
            if (b.lo.size() != n || b.hi.size() != n) throw DimensionError("box of wrong dimension");
            if (!(b.value >= 0.0)) throw DimensionError("box function values must be >= 0");
            for (int i = 0; i < n; ++i)
                if (!(b.lo(i) < b.hi(i))) throw DimensionError("box with empty side");
        }
    }

    static BoxFunction indicator(Vec lo, Vec hi, double value = 1.0) {
        const int n = static_cast<int>(lo.size());
        return BoxFunction(n, {Box{std::move(lo), std::move(hi), value}});
    }

    /// Indicator of the centered unit cube [-1/2, 1/2]^m.
    static BoxFunction unit_cube(int m) { return indicator(Vec::Constant(m, -0.5), Vec::Constant(m, 0.5)); }

    static BoxFunction from_steps(const StepFunction1D& f) {
        std::vector<Box> bs;
        for (std::size_t i = 0; i < f.values().size(); ++i)
            if (f.values()[i] > 0.0)
                bs.push_back({Vec::Constant(1, f.breaks()[i]), Vec::Constant(1, f.breaks()[i + 1]), f.values()[i]});
        return BoxFunction(1, std::move(bs));
    }

    static BoxFunction from_grid(const GridFunction& g) {
        std::vector<Box> bs;
        // edges from integer offsets so that neighbours share breakpoints exactly
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i] > 0.0) {
                const auto o = g.offset(i);
                Vec lo(g.dim()), hi(g.dim());
                for (int k = 0; k < g.dim(); ++k) {
                    lo(k) = (o[static_cast<std::size_t>(k)] - 0.5) * g.h();
                    hi(k) = (o[static_cast<std::size_t>(k)] + 0.5) * g.h();
                }
                bs.push_back({lo, hi, g[i]});
            }
        return BoxFunction(g.dim(), std::move(bs));
    }

    /// (x, y) -> a(x) b(y).
    static BoxFunction tensor(const BoxFunction& a, const BoxFunction& b) {
        const int n = a.dim() + b.dim();
        if (n > 3) throw DimensionError("tensor product of dimension " + std::to_string(n) + " exceeds 3");
        std::vector<Box> bs;
        for (const auto& p : a.boxes())
            for (const auto& q : b.boxes()) {
                Vec lo(n), hi(n);
                lo << p.lo, q.lo;
                hi << p.hi, q.hi;
                bs.push_back({lo, hi, p.value * q.value});
            }
        return BoxFunction(n, std::move(bs));
    }

    int dim() const noexcept { return n_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }

    double operator()(const Vec& x) const {
        for (const auto& b : boxes_)
            if ((x.array() >= b.lo.array()).all() && (x.array() < b.hi.array()).all()) return b.value;
        return 0.0;
    }

    double mass() const {
        double s = 0.0;
        for (const auto& b : boxes_) s += b.value * (b.hi - b.lo).prod();
        return s;
    }

    double sup() const {
        double s = 0.0;
        for (const auto& b : boxes_) s = std::max(s, b.value);
        return s;
    }

    /// Integral over K. Exact in dimension 1 and for planar polytopes; other
    /// cases use midpoint supersampling of boxes that meet the boundary of K;
    /// the error is the larger of |Q_{2s} - Q_s| and the volume of sub-cells
    /// whose corners are not all on one side of the boundary.
    Estimate measure(const Body& K, int supersample = 8) const {
        if (K.dim() != n_) throw DimensionError("body and function dimensions differ");
        if (n_ == 1) {
            const double a = -K.support(Vec::Constant(1, -1.0)), b = K.support(Vec::Constant(1, 1.0));
            double s = 0.0;
            for (const auto& x : boxes_) {
                const double len = std::min(b, x.hi(0)) - std::max(a, x.lo(0));
                if (len > 0) s += x.value * len;
            }
            return {s, 0.0};
        }
        if (const auto* poly = K.polygon()) {
            double s = 0.0;
            for (const auto& x : boxes_)
                s += x.value * geometry::polygon_area(
                                   geometry::clip_convex(geometry::axis_box(x.lo(0), x.hi(0), x.lo(1), x.hi(1)), *poly));
            return {s, 0.0};
        }
        Vec klo(n_), khi(n_);
        for (int i = 0; i < n_; ++i) {
            khi(i) = K.support(unit(n_, i));
            klo(i) = -K.support(-unit(n_, i));
        }
        double s = 0.0, err = 0.0;
        for (const auto& x : boxes_) {
            if ((x.hi.array() <= klo.array()).any() || (x.lo.array() >= khi.array()).any()) continue;
            const double vol = (x.hi - x.lo).prod();
            bool all_in = true;
            for (int c = 0; c < (1 << n_) && all_in; ++c) {
                Vec p(n_);
                for (int i = 0; i < n_; ++i) p(i) = (c >> i) & 1 ? x.hi(i) : x.lo(i);
                all_in = K.contains(p, 0.0);
            }
            if (all_in) {
                s += x.value * vol;
                continue;
            }
            const double q1 = fraction_inside(K, x, supersample), q2 = fraction_inside(K, x, 2 * supersample);
            s += x.value * vol * q2;
            err += x.value * vol * std::max(std::abs(q2 - q1), straddling_fraction(K, x, 2 * supersample));
        }
        return {s, err};
    }

    bool is_even(double tol = 1e-12) const {
        for (const auto& x : boxes_) {
            const Vec c = -0.5 * (x.lo + x.hi);
            if ((*this)(c) != x.value) return false;
            // the mirrored box must carry the same value throughout
            const Vec lo = -x.hi, hi = -x.lo;
            for (int k = 0; k < (1 << n_); ++k) {
                Vec p(n_);
                for (int i = 0; i < n_; ++i) {
                    const double in = tol * std::max(1.0, hi(i) - lo(i));
                    p(i) = (k >> i) & 1 ? hi(i) - in : lo(i) + in;
                }
                if ((*this)(p) != x.value) return false;
            }
        }
        return true;
    }

    /// Even with convex superlevel sets. Decided exactly in dimension 1; in
    /// higher dimension only centered single boxes are recognized.
    bool is_unimodal() const {
        if (n_ == 1) {
            std::vector<Box> bs = boxes_;
            std::sort(bs.begin(), bs.end(), [](const Box& a, const Box& b) { return a.lo(0) < b.lo(0); });
            std::vector<double> br, v;
            for (const auto& b : bs) {
                if (!br.empty() && b.lo(0) > br.back()) v.push_back(0.0), br.push_back(b.lo(0));
                if (br.empty()) br.push_back(b.lo(0));
                v.push_back(b.value);
                br.push_back(b.hi(0));
            }
            if (v.empty()) return true;
            return StepFunction1D(br, v).is_symmetric_decreasing();
        }
        return boxes_.size() == 1 && (boxes_[0].lo + boxes_[0].hi).norm() == 0.0;
    }

private:
    static double fraction_inside(const Body& K, const Box& x, int s) {
        const int n = static_cast<int>(x.lo.size());
        long total = 1;
        for (int i = 0; i < n; ++i) total *= s;
        long in = 0;
        Vec p(n);
        for (long k = 0; k < total; ++k) {
            long r = k;
            for (int i = 0; i < n; ++i) {
                const long j = r % s;
                r /= s;
                p(i) = x.lo(i) + (x.hi(i) - x.lo(i)) * (static_cast<double>(j) + 0.5) / s;
            }
            in += K.contains(p, 0.0);
        }
        return static_cast<double>(in) / static_cast<double>(total);
    }

    static double straddling_fraction(const Body& K, const Box& x, int s) {
        const int n = static_cast<int>(x.lo.size());
        const int c = s + 1;
        long corners = 1, cells = 1;
        for (int i = 0; i < n; ++i) corners *= c, cells *= s;
        std::vector<char> in(static_cast<std::size_t>(corners));
        Vec p(n);
        for (long k = 0; k < corners; ++k) {
            long r = k;
            for (int i = 0; i < n; ++i) {
                p(i) = x.lo(i) + (x.hi(i) - x.lo(i)) * static_cast<double>(r % c) / s;
                r /= c;
            }
            in[static_cast<std::size_t>(k)] = K.contains(p, 0.0);
        }
        long mixed = 0;
        for (long k = 0; k < cells; ++k) {
            long r = k, base = 0, stride = 1;
            for (int i = 0; i < n; ++i) {
                base += (r % s) * stride;
                r /= s;
                stride *= c;
            }
            int count = 0;
            for (int m = 0; m < (1 << n); ++m) {
                long off = 0, st = 1;
                for (int i = 0; i < n; ++i) {
                    off += ((m >> i) & 1) * st;
                    st *= c;
                }
                count += in[static_cast<std::size_t>(base + off)];
            }
            mixed += count != 0 && count != (1 << n);
        }
        return static_cast<double>(mixed) / static_cast<double>(cells);
    }

    int n_;
    std::vector<Box> boxes_;
};

/// Box representation of a density when one exists: uniform densities on
/// axis-parallel boxes and grid densities.
inline BoxFunction to_box_function(const models::Density& f) {
    if (auto g = f.as<models::GridDensity>()) return BoxFunction::from_grid(g->grid);
    if (auto u = f.as<models::UniformOnBody>()) {
        const int n = f.dim();
        Vec lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            hi(i) = u->body.support(unit(n, i));
            lo(i) = -u->body.support(-unit(n, i));
        }
        const double box = (hi - lo).prod();
        if (std::abs(box - u->volume) <= 1e-12 * box) return BoxFunction::indicator(lo, hi, 1.0 / u->volume);
    }
    throw UnsupportedError("density " + f.name() + " has no box representation");
}

/// Throws HypothesisError unless K is origin-symmetric (checked on a
/// direction grid to relative 1e-9).
inline void require_symmetric(const Body& K) {
    const int n = K.dim();
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
    } else if (n == 2) {
        for (int k = 0; k < 64; ++k) {
            const double t = std::numbers::pi * (k + 0.37) / 64;
            dirs.push_back((Vec(2) << std::cos(t), std::sin(t)).finished());
        }
    } else {
        for (int k = 0; k < 128; ++k) {
            const double z = 1.0 - (k + 0.5) / 128, r = std::sqrt(1 - z * z), t = 2.399963229728653 * k;
            Vec u = Vec::Zero(n);
            u(0) = r * std::cos(t), u(1) = r * std::sin(t), u(2) = z;
            dirs.push_back(u);
        }
    }
    for (const auto& u : dirs) {
        const double a = K.support(u), b = K.support(-u);
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))
            throw HypothesisError("peakedness needs symmetric bodies; " + K.kind_name() + " is not origin-symmetric");
    }
}

struct PeakednessReport {
    /// mu1(K) - mu2(K) per body.
    std::vector<double> margins;
    std::vector<double> errors;
    double min_margin = 0.0;
    /// No margin below -3 error.
    bool consistent = true;
};

/// Compares f1 and f2 on symmetric convex bodies: f1 is more peaked than f2
/// when every margin f1(K) - f2(K) is nonnegative.
inline PeakednessReport peakedness_compare(const BoxFunction& f1, const BoxFunction& f2,
                                           const std::vector<Body>& bodies, int supersample = 8) {
    if (f1.dim() != f2.dim()) throw DimensionError("peakedness_compare of functions on different spaces");
    const double m1 = f1.mass(), m2 = f2.mass();
    if (std::abs(m1 - m2) > 1e-9 * std::max(m1, m2))
        throw HypothesisError("peakedness_compare needs equal total masses, got " + std::to_string(m1) + " and " +
                              std::to_string(m2));
    PeakednessReport r;
    r.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& K : bodies) {
        require_symmetric(K);
        const auto a = f1.measure(K, supersample), b = f2.measure(K, supersample);
        const double err = std::max(a.error + b.error, 1e-12 * m1);
        const double margin = a.value - b.value;
        r.margins.push_back(margin);
        r.errors.push_back(err);
        r.min_margin = std::min(r.min_margin, margin);
        if (margin < -3.0 * err) r.consistent = false;
    }
    return r;
}

inline PeakednessReport peakedness_compare(const models::Density& f1, const models::Density& f2,
                                           const std::vector<Body>& bodies, int supersample = 8) {
    return peakedness_compare(to_box_function(f1), to_box_function(f2), bodies, supersample);
}

/// f1 more peaked than f2 in dimension 1, decided exactly: the margin on
/// [-a, a] is piecewise linear in a with kinks at the breakpoints.
inline double peakedness_margin_1d(const BoxFunction& f1, const BoxFunction& f2) {
    if (f1.dim() != 1 || f2.dim() != 1) throw DimensionError("exact 1-D peakedness needs 1-D functions");
    std::vector<double> as{0.0};
    for (const auto* f : {&f1, &f2})
        for (const auto& b : f->boxes()) as.push_back(std::abs(b.lo(0))), as.push_back(std::abs(b.hi(0)));
    auto mass_in = [](const BoxFunction& f, double a) {
        double s = 0.0;
        for (const auto& b : f.boxes()) {
            const double len = std::min(a, b.hi(0)) - std::max(-a, b.lo(0));
            if (len > 0) s += b.value * len;
        }
        return s;
    };
    double worst = std::numeric_limits<double>::infinity();
    for (double a : as) worst = std::min(worst, mass_in(f1, a) - mass_in(f2, a));
    return worst;
}

/// Kanter's product property: if f1 is more peaked than f2 and f is
/// unimodal, then f1 (x) f is more peaked than f2 (x) f. The hypotheses are
/// checked (exactly in dimension 1, otherwise on `pre_bodies`) and violations
/// throw HypothesisError; the report covers the product on `bodies`.
inline PeakednessReport kanter_check(const BoxFunction& f1, const BoxFunction& f2, const BoxFunction& f,
                                     const std::vector<Body>& bodies, const std::vector<Body>& pre_bodies = {},
                                     int supersample = 8) {
    if (!f.is_unimodal()) throw HypothesisError("kanter_check needs a unimodal (even, quasi-concave) f");
    if (f1.dim() == 1) {
        if (peakedness_margin_1d(f1, f2) < -1e-12 * std::max(1.0, f1.mass()))
            throw HypothesisError("kanter_check needs f1 more peaked than f2");
    } else if (!peakedness_compare(f1, f2, pre_bodies, supersample).consistent) {
        throw HypothesisError("kanter_check needs f1 more peaked than f2");
    }
    return peakedness_compare(BoxFunction::tensor(f1, f), BoxFunction::tensor(f2, f), bodies, supersample);
}

inline PeakednessReport kanter_check(const models::Density& f1, const models::Density& f2, const models::Density& f,
                                     const std::vector<Body>& bodies, const std::vector<Body>& pre_bodies = {},
                                     int supersample = 8) {
    return kanter_check(to_box_function(f1), to_box_function(f2), to_box_function(f), bodies, pre_bodies, supersample);
}

/// Cube domination: for 1-D densities with sup <= 1, the indicator of
/// [-1/2, 1/2]^m is more peaked than the product of their rearrangements.
inline PeakednessReport cube_domination_check(const std::vector<StepFunction1D>& fs, const std::vector<Body>& bodies,
                                              int supersample = 8) {
    if (fs.empty() || fs.size() > 3) throw DimensionError("cube domination supports 1 to 3 factors");
    BoxFunction prod = BoxFunction::from_steps(fs.front().rearranged());
    for (const auto& f : fs) {
        if (f.sup() > 1.0) throw HypothesisError("cube domination needs densities bounded by 1");
        if (std::abs(f.integral() - 1.0) > 1e-9) throw HypothesisError("cube domination needs probability densities");
    }
    for (std::size_t i = 1; i < fs.size(); ++i) prod = BoxFunction::tensor(prod, BoxFunction::from_steps(fs[i].rearranged()));
    return peakedness_compare(BoxFunction::unit_cube(static_cast<int>(fs.size())), prod, bodies, supersample);
}

/// conv{±p_1, ..., ±p_k} for k random points with radii in [0.1, 1.5].
inline Body random_symmetric_polygon(RngStream& rng, int k = 4) {
    std::vector<Vec> g;
    for (int i = 0; i < k; ++i) {
        const double r = rng.uniform(0.1, 1.5), t = rng.uniform(0.0, std::numbers::pi);
        g.push_back((Vec(2) << r * std::cos(t), r * std::sin(t)).finished());
    }
    return Body::cross_hull(std::move(g));
}

} // namespace sdlab::rearrangement
