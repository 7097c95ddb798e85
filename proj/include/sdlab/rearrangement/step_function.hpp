#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/polygon.hpp"
#include "sdlab/rearrangement/grid_function.hpp"

namespace sdlab::rearrangement {

/// Nonnegative step function on R: value v_i on [b_i, b_{i+1}), zero outside
/// [b_0, b_k). Adjacent pieces with equal values are merged.
class StepFunction1D {
public:
    StepFunction1D() = default;

    StepFunction1D(std::vector<double> breaks, std::vector<double> values) {
        if (breaks.size() != values.size() + 1) throw DimensionError("step function needs one more break than values");
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            if (!(breaks[i] < breaks[i + 1])) throw DimensionError("step function breaks must increase strictly");
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw DimensionError("step function values must be finite and >= 0");
        // merge equal neighbours and drop zero pieces at the ends
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!v_.empty() && v_.back() == values[i]) {
                b_.back() = breaks[i + 1];
                continue;
            }
            if (b_.empty()) b_.push_back(breaks[i]);
            v_.push_back(values[i]);
            b_.push_back(breaks[i + 1]);
        }
        while (!v_.empty() && v_.back() == 0.0) {
            v_.pop_back();
            b_.pop_back();
        }
        std::size_t lead = 0;
        while (lead < v_.size() && v_[lead] == 0.0) ++lead;
        v_.erase(v_.begin(), v_.begin() + static_cast<std::ptrdiff_t>(lead));
        b_.erase(b_.begin(), b_.begin() + static_cast<std::ptrdiff_t>(lead));
        if (v_.empty()) b_.clear();
    }

    static StepFunction1D indicator(double a, double b, double value = 1.0) { return {{a, b}, {value}}; }

    static StepFunction1D from_grid(const GridFunction& g) {
        if (g.dim() != 1) throw DimensionError("step function from a grid of dimension " + std::to_string(g.dim()));
        std::vector<double> br(g.size() + 1);
        for (std::size_t i = 0; i <= g.size(); ++i) br[i] = (static_cast<double>(i) - g.mid() - 0.5) * g.h();
        return {std::move(br), g.values()};
    }

    const std::vector<double>& breaks() const noexcept { return b_; }
    const std::vector<double>& values() const noexcept { return v_; }
    bool empty() const noexcept { return v_.empty(); }

    double operator()(double x) const {
        if (v_.empty() || x < b_.front() || x >= b_.back()) return 0.0;
        const auto it = std::upper_bound(b_.begin(), b_.end(), x);
        return v_[static_cast<std::size_t>(it - b_.begin()) - 1];
    }

    double integral() const {
        double s = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) s += v_[i] * (b_[i + 1] - b_[i]);
        return s;
    }

    /// Integral over [a, b].
    double mass_in(double a, double b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            const double lo = std::max(a, b_[i]), hi = std::min(b, b_[i + 1]);
            if (hi > lo) s += v_[i] * (hi - lo);
        }
        return s;
    }

    double sup() const { return v_.empty() ? 0.0 : *std::max_element(v_.begin(), v_.end()); }

    bool is_even(double tol = 1e-12) const {
        if (v_.empty()) return true;
        const std::size_t k = v_.size();
        for (std::size_t i = 0; i <= k; ++i)
            if (std::abs(b_[i] + b_[k - i]) > tol * std::max(1.0, std::abs(b_[i]))) return false;
        for (std::size_t i = 0; i < k; ++i)
            if (v_[i] != v_[k - 1 - i]) return false;
        return true;
    }

    /// Even and nonincreasing in |x|.
    bool is_symmetric_decreasing() const {
        if (!is_even()) return false;
        const std::size_t k = v_.size();
        for (std::size_t i = 0; i + 1 < (k + 1) / 2; ++i)
            if (v_[i] > v_[i + 1]) return false;
        return true;
    }

    /// The symmetric decreasing rearrangement: level sets become centered
    /// intervals of the same length.
    StepFunction1D rearranged() const {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (v_[i] > 0.0) order.push_back(i);
        if (order.empty()) return {};
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v_[a] > v_[b]; });
        std::vector<double> half{0.0}, vals;
        for (auto i : order) {
            half.push_back(half.back() + 0.5 * (b_[i + 1] - b_[i]));
            vals.push_back(v_[i]);
        }
        const std::size_t k = vals.size();
        std::vector<double> br, out;
        for (std::size_t j = k; j >= 1; --j) br.push_back(-half[j]);
        for (std::size_t j = 1; j <= k; ++j) br.push_back(half[j]);
        for (std::size_t j = k; j >= 2; --j) out.push_back(vals[j - 1]);
        out.push_back(vals[0]);
        for (std::size_t j = 2; j <= k; ++j) out.push_back(vals[j - 1]);
        return {std::move(br), std::move(out)};
    }

private:
    std::vector<double> b_, v_;
};

/// Random probability density on R with one to four steps, sup <= 1.
inline StepFunction1D random_step_density(RngStream& rng) {
    const int k = 1 + static_cast<int>(rng.below(4));
    std::vector<double> br{rng.uniform(-2, 0)}, v;
    for (int i = 0; i < k; ++i) {
        br.push_back(br.back() + rng.uniform(0.2, 1.0));
        v.push_back(rng.uniform(0.1, 1.0));
    }
    StepFunction1D f(br, v);
    const double m = f.integral();
    if (f.sup() / m > 1.0) {
        // stretch the support until the normalized sup drops below 1
        const double s = 1.01 * f.sup() / m;
        for (auto& b : br) b *= s;
        f = StepFunction1D(br, v);
    }
    for (auto& x : v) x /= f.integral();
    return StepFunction1D(br, v);
}

struct BllResult {
    double lhs = 0.0;
    double rhs = 0.0;
    /// Bound on the numerical error of lhs and rhs.
    double error = 0.0;
};

namespace detail {

// Integral over the convex polygon P of prod_{c >= k} f_c(<x, u_c>).
inline double integrate_polygon(const geometry::Polygon& P, const std::vector<const StepFunction1D*>& fs,
                                const std::vector<geometry::Point2>& us, std::size_t k, double& abs_sum) {
    if (P.size() < 3) return 0.0;
    if (k == fs.size()) {
        const double a = geometry::polygon_area(P);
        abs_sum += std::abs(a);
        return a;
    }
    const auto& f = *fs[k];
    const auto& u = us[k];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : P) {
        const double s = u.dot(p);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const auto& b = f.breaks();
    const auto& v = f.values();
    double total = 0.0;
    if (v.empty()) return 0.0;
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        0, std::upper_bound(b.begin(), b.end(), lo) - b.begin() - 1));
    for (; i < v.size() && b[i] < hi; ++i) {
        if (v[i] == 0.0 || b[i + 1] <= lo) continue;
        geometry::Polygon Q = P;
        if (b[i] > lo) Q = geometry::clip_halfplane(Q, -u, -b[i]);
        if (b[i + 1] < hi) Q = geometry::clip_halfplane(Q, u, b[i + 1]);
        total += v[i] * integrate_polygon(Q, fs, us, k + 1, abs_sum);
    }
    return total;
}

// Exact integral over R^N, N in {1, 2}, of prod f_i(<x, u_i>); abs_sum
// accumulates magnitudes for the rounding bound.
inline double bll_integral(const std::vector<StepFunction1D>& fs, const std::vector<Vec>& us, int N,
                           double& abs_sum) {
    double factor = 1.0;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (us[i].norm() == 0.0)
            factor *= fs[i](0.0);
        else
            active.push_back(i);
    }
    if (factor == 0.0) return 0.0;
    if (N == 1) {
        if (active.empty()) throw DegenerateError("directions must span R^N for a finite integral");
        std::vector<double> br;
        for (auto i : active)
            for (double b : fs[i].breaks()) br.push_back(b / us[i](0));
        std::sort(br.begin(), br.end());
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < br.size(); ++k) {
            const double len = br[k + 1] - br[k];
            if (len <= 0.0) continue;
            const double mid = 0.5 * (br[k] + br[k + 1]);
            double prod = 1.0;
            for (auto i : active) prod *= fs[i](mid * us[i](0));
            s += prod * len;
            abs_sum += std::abs(prod * len);
        }
        return factor * s;
    }
    // N = 2: parallelogram cells of the best-conditioned pair, clipped by the rest
    std::size_t a = 0, b = 0;
    double best = 0.0;
    for (std::size_t p = 0; p < active.size(); ++p)
        for (std::size_t q = p + 1; q < active.size(); ++q) {
            const Vec& ua = us[active[p]];
            const Vec& ub = us[active[q]];
            const double d = std::abs(ua(0) * ub(1) - ua(1) * ub(0)) / (ua.norm() * ub.norm());
            if (d > best) {
                best = d;
                a = active[p];
                b = active[q];
            }
        }
    if (best < 1e-12) throw DegenerateError("directions must span R^N for a finite integral");
    Eigen::Matrix2d A;
    A << us[a](0), us[a](1), us[b](0), us[b](1);
    const Eigen::Matrix2d Ai = A.inverse();
    const bool flip = A.determinant() < 0;
    std::vector<const StepFunction1D*> rest;
    std::vector<geometry::Point2> rest_u;
    for (auto i : active)
        if (i != a && i != b) {
            rest.push_back(&fs[i]);
            rest_u.emplace_back(us[i](0), us[i](1));
        }
    const auto& fa = fs[a];
    const auto& fb = fs[b];
    double total = 0.0;
    for (std::size_t i = 0; i < fa.values().size(); ++i) {
        if (fa.values()[i] == 0.0) continue;
        const double s0 = fa.breaks()[i], s1 = fa.breaks()[i + 1];
        for (std::size_t j = 0; j < fb.values().size(); ++j) {
            if (fb.values()[j] == 0.0) continue;
            const double t0 = fb.breaks()[j], t1 = fb.breaks()[j + 1];
            geometry::Polygon P = {Ai * geometry::Point2(s0, t0), Ai * geometry::Point2(s1, t0),
                                   Ai * geometry::Point2(s1, t1), Ai * geometry::Point2(s0, t1)};
            if (flip) std::reverse(P.begin(), P.end());
            total += fa.values()[i] * fb.values()[j] * integrate_polygon(P, rest, rest_u, 0, abs_sum);
        }
    }
    return factor * total;
}

// N = 3: Gauss-Legendre over x_k of the exact planar integral of the slice.
inline Estimate bll_integral3(const std::vector<StepFunction1D>& fs, const std::vector<Vec>& us, double& abs_sum) {
    // outer axis k such that the projections onto the other two coordinates span R^2
    int k = -1;
    for (int c = 2; c >= 0 && k < 0; --c) {
        Mat P(2, static_cast<Eigen::Index>(us.size()));
        for (std::size_t i = 0; i < us.size(); ++i) {
            int r = 0;
            for (int d = 0; d < 3; ++d)
                if (d != c) P(r++, static_cast<Eigen::Index>(i)) = us[i](d);
        }
        if (Eigen::FullPivLU<Mat>(P).rank() == 2) k = c;
    }
    Mat U(3, static_cast<Eigen::Index>(us.size()));
    for (std::size_t i = 0; i < us.size(); ++i) U.col(static_cast<Eigen::Index>(i)) = us[i];
    if (k < 0 || Eigen::FullPivLU<Mat>(U).rank() < 3) throw DegenerateError("directions must span R^N for a finite integral");
    // range of x_k over the support: vertices of a parallelepiped from three independent directions
    std::vector<std::size_t> basis;
    for (std::size_t i = 0; i < us.size() && basis.size() < 3; ++i) {
        Mat B(3, static_cast<Eigen::Index>(basis.size() + 1));
        for (std::size_t j = 0; j < basis.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = us[basis[j]];
        B.col(static_cast<Eigen::Index>(basis.size())) = us[i];
        if (Eigen::FullPivLU<Mat>(B).rank() == static_cast<Eigen::Index>(basis.size() + 1)) basis.push_back(i);
    }
    Eigen::Matrix3d A;
    for (int r = 0; r < 3; ++r) A.row(r) = us[basis[static_cast<std::size_t>(r)]].transpose();
    const Eigen::Matrix3d Ai = A.inverse();
    double tlo = std::numeric_limits<double>::infinity(), thi = -tlo;
    for (int corner = 0; corner < 8; ++corner) {
        Eigen::Vector3d s;
        for (int r = 0; r < 3; ++r) {
            const auto& f = fs[basis[static_cast<std::size_t>(r)]];
            if (f.empty()) return {0.0, 0.0};
            s(r) = (corner >> r) & 1 ? f.breaks().back() : f.breaks().front();
        }
        const double t = (Ai * s)(k);
        tlo = std::min(tlo, t);
        thi = std::max(thi, t);
    }
    auto slice = [&](double t) {
        std::vector<StepFunction1D> g;
        std::vector<Vec> v;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            std::vector<double> br = fs[i].breaks();
            for (auto& x : br) x -= t * us[i](k);
            g.emplace_back(fs[i].empty() ? StepFunction1D() : StepFunction1D(std::move(br), fs[i].values()));
            Vec w(2);
            int r = 0;
            for (int d = 0; d < 3; ++d)
                if (d != k) w(r++) = us[i](d);
            v.push_back(w);
        }
        double dummy = 0.0;
        return bll_integral(g, v, 2, dummy);
    };
    auto quad = [&](int panels) {
        double s = 0.0;
        const double w = (thi - tlo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double a = tlo + p * w;
            s += integrate_gl(slice, a, a + w, 1, 4);
        }
        return s;
    };
    const double coarse = quad(64), fine = quad(128);
    abs_sum += std::abs(fine);
    return {fine, std::abs(fine - coarse)};
}

} // namespace detail

/// Rogers/Brascamp-Lieb-Luttinger comparison for 1-D step functions:
/// lhs = int_{R^N} prod f_i(<x, u_i>) dx and rhs with every f_i replaced by
/// its symmetric decreasing rearrangement. For N <= 2 both integrals are
/// exact (piecewise-constant integrand over polygons); for N = 3 the outer
/// coordinate uses composite Gauss-Legendre and the error is the difference
/// between 64 and 128 panels.
inline BllResult bll_check(const std::vector<StepFunction1D>& fs, const std::vector<Vec>& us) {
    if (fs.size() != us.size()) throw DimensionError("bll_check needs one direction per function");
    if (fs.empty() || fs.size() > 4) throw DimensionError("bll_check supports 1 to 4 functions");
    const int N = static_cast<int>(us.front().size());
    if (N < 1 || N > 3) throw DimensionError("bll_check supports N <= 3, got N=" + std::to_string(N));
    for (const auto& u : us)
        if (u.size() != N) throw DimensionError("directions of unequal dimension");
    std::vector<StepFunction1D> star;
    for (const auto& f : fs) star.push_back(f.rearranged());
    double abs_sum = 0.0;
    BllResult r;
    if (N <= 2) {
        r.lhs = detail::bll_integral(fs, us, N, abs_sum);
        r.rhs = detail::bll_integral(star, us, N, abs_sum);
        r.error = 64 * std::numeric_limits<double>::epsilon() * abs_sum;
    } else {
        const auto l = detail::bll_integral3(fs, us, abs_sum);
        const auto s = detail::bll_integral3(star, us, abs_sum);
        r.lhs = l.value;
        r.rhs = s.value;
        r.error = l.error + s.error + 64 * std::numeric_limits<double>::epsilon() * abs_sum;
    }
    return r;
}

inline BllResult bll_check(const std::vector<GridFunction>& fs, const std::vector<Vec>& us) {
    std::vector<StepFunction1D> s;
    for (const auto& g : fs) s.push_back(StepFunction1D::from_grid(g));
    return bll_check(s, us);
}

} // namespace sdlab::rearrangement
