#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/convex_hull.hpp"

namespace sdlab::geometry {

/// Young-type function psi on [0, inf) used by Orlicz balls.
///
/// power(p): x^p. exp_shift(p): e^{-p} (e^x - 1), whose Orlicz ball polar
/// yields the empirical level sets of the logarithmic Laplace transform.
struct Psi {
    enum class Kind { power, exp_shift };
    Kind kind = Kind::power;
    double p = 1.0;

    static Psi power(double p) { return {Kind::power, p}; }
    static Psi exp_shift(double p) { return {Kind::exp_shift, p}; }

    double operator()(double x) const {
        return kind == Kind::power ? std::pow(x, p) : std::exp(-p) * std::expm1(x);
    }

    std::string name() const {
        return (kind == Kind::power ? "power(" : "exp_shift(") + std::to_string(p) + ")";
    }

    /// Throws unless psi(0) = 0 and psi is strictly increasing.
    void validate() const {
        if (!(p > 0) || !std::isfinite(p))
            throw DimensionError("Orlicz psi not strictly increasing from psi(0)=0: parameter " +
                                 std::to_string(p) + " must be positive");
    }
};

/// The convex coefficient set C in R^N of the random body XC.
///
/// Values are immutable and cheap to copy (shared state).
class CoefficientSet {
public:
    enum class Kind {
        simplex,
        simplex_with_origin,
        cross_polytope,
        cube,
        lq_ball,
        orlicz_ball_polar,
        generic_v,
        m_combination
    };

    static CoefficientSet simplex(int N) { return make(Kind::simplex, N, false, false); }
    static CoefficientSet simplex_with_origin(int N) {
        return make(Kind::simplex_with_origin, N, false, false);
    }
    static CoefficientSet cross_polytope(int N) { return make(Kind::cross_polytope, N, true, true); }
    static CoefficientSet cube(int N) { return make(Kind::cube, N, true, true); }

    /// B_q^N, 1 <= q <= inf (q = infinity() for the cube norm ball).
    static CoefficientSet lq_ball(int N, double q) {
        if (!(q >= 1.0)) throw DimensionError("l_q ball requires q >= 1");
        auto c = make(Kind::lq_ball, N, true, true);
        c.d_->q = q;
        return c;
    }

    /// Polar of B_{psi,N} = {t : (1/N) sum psi(|t_i|) <= threshold}.
    static CoefficientSet orlicz_ball_polar(int N, Psi psi, double threshold = 1.0) {
        psi.validate();
        if (!(threshold > 0)) throw DimensionError("Orlicz threshold must be positive");
        auto c = make(Kind::orlicz_ball_polar, N, true, true);
        c.d_->psi = psi;
        c.d_->threshold = threshold;
        return c;
    }

    /// conv(vertices). Symmetry and unconditionality are detected from the
    /// vertex list (closure under negation / coordinate sign changes).
    static CoefficientSet generic_v(std::vector<Vec> vertices) {
        if (vertices.empty()) throw DimensionError("GenericV needs at least one vertex");
        const int N = static_cast<int>(vertices.front().size());
        for (const auto& v : vertices)
            if (v.size() != N) throw DimensionError("GenericV vertices of unequal length");
        auto has = [&](const Vec& x) {
            for (const auto& v : vertices)
                if ((v - x).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, x.norm())) return true;
            return false;
        };
        bool sym = true, uncond = true;
        for (const auto& v : vertices) {
            if (!has(-v)) sym = false;
            for (int i = 0; i < N && uncond; ++i) {
                Vec w = v;
                w(i) = -w(i);
                if (!has(w)) uncond = false;
            }
        }
        auto c = make(Kind::generic_v, N, sym, uncond && sym);
        c.d_->vertices = std::move(vertices);
        return c;
    }

    /// Coefficient set of the M-combination of the part sets: the set of
    /// concatenated vectors (a_1 c_1, ..., a_m c_m) with a in M, c_i in part i.
    static CoefficientSet m_combination(const CoefficientSet& M, std::vector<CoefficientSet> parts) {
        if (static_cast<int>(parts.size()) != M.dim())
            throw DimensionError("M-combination: M has dimension " + std::to_string(M.dim()) +
                                 " but " + std::to_string(parts.size()) + " parts were given");
        int N = 0;
        bool sym = M.symmetric(), uncond = M.unconditional();
        for (const auto& p : parts) {
            N += p.dim();
            sym = sym && p.symmetric();
            uncond = uncond && p.unconditional();
        }
        auto c = make(Kind::m_combination, N, sym, uncond);
        c.d_->M = std::make_shared<CoefficientSet>(M);
        c.d_->parts = std::move(parts);
        return c;
    }

    Kind kind() const noexcept { return d_->kind; }
    int dim() const noexcept { return d_->N; }
    bool symmetric() const noexcept { return d_->symmetric; }
    bool unconditional() const noexcept { return d_->unconditional; }
    double q() const noexcept { return d_->q; }
    const Psi& psi() const noexcept { return d_->psi; }
    double threshold() const noexcept { return d_->threshold; }
    const std::vector<Vec>& generic_vertices() const noexcept { return d_->vertices; }
    const CoefficientSet& M() const { return *d_->M; }
    const std::vector<CoefficientSet>& parts() const noexcept { return d_->parts; }

    std::string name() const {
        switch (kind()) {
        case Kind::simplex: return "simplex";
        case Kind::simplex_with_origin: return "simplex_with_origin";
        case Kind::cross_polytope: return "cross_polytope";
        case Kind::cube: return "cube";
        case Kind::lq_ball: return "lq_ball";
        case Kind::orlicz_ball_polar: return "orlicz_ball_polar";
        case Kind::generic_v: return "generic_v";
        case Kind::m_combination: return "m_combination";
        }
        return "?";
    }

    /// True when C lies in the closed positive orthant.
    bool positive_orthant() const {
        switch (kind()) {
        case Kind::simplex:
        case Kind::simplex_with_origin: return true;
        case Kind::generic_v:
            for (const auto& v : d_->vertices)
                if (v.minCoeff() < 0) return false;
            return true;
        case Kind::m_combination:
            if (!M().positive_orthant()) return false;
            for (const auto& p : parts())
                if (!p.positive_orthant()) return false;
            return true;
        default: return false;
        }
    }

    /// Support function h_C(v) = sup over c in C of <c, v>.
    double support(const Vec& v) const {
        check_dim(v);
        switch (kind()) {
        case Kind::simplex: return v.maxCoeff();
        case Kind::simplex_with_origin: return std::max(0.0, v.maxCoeff());
        case Kind::cross_polytope: return v.lpNorm<Eigen::Infinity>();
        case Kind::cube: return v.lpNorm<1>();
        case Kind::lq_ball: return dual_lq_norm(v, d_->q);
        case Kind::orlicz_ball_polar: return orlicz_norm(v);
        case Kind::generic_v: {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& c : d_->vertices) best = std::max(best, c.dot(v));
            return best;
        }
        case Kind::m_combination: return m_support(v);
        }
        return 0.0;
    }

    /// Vertex list when C is a polytope with a manageable number of vertices.
    std::optional<std::vector<Vec>> vertices() const {
        const int N = dim();
        std::vector<Vec> out;
        switch (kind()) {
        case Kind::simplex:
            for (int i = 0; i < N; ++i) out.push_back(unit(N, i));
            return out;
        case Kind::simplex_with_origin:
            out.push_back(Vec::Zero(N));
            for (int i = 0; i < N; ++i) out.push_back(unit(N, i));
            return out;
        case Kind::cross_polytope:
            for (int i = 0; i < N; ++i) {
                out.push_back(unit(N, i));
                out.push_back(-unit(N, i));
            }
            return out;
        case Kind::cube:
            if (N > 16) return std::nullopt;
            for (long s = 0; s < (1L << N); ++s) {
                Vec v(N);
                for (int i = 0; i < N; ++i) v(i) = (s >> i) & 1 ? -1.0 : 1.0;
                out.push_back(v);
            }
            return out;
        case Kind::lq_ball:
            if (d_->q == 1.0) return cross_polytope(N).vertices();
            if (std::isinf(d_->q)) return cube(N).vertices();
            return std::nullopt;
        case Kind::generic_v: return d_->vertices;
        default: return std::nullopt;
        }
    }

    /// Gauge (Minkowski functional) of C at y; +inf when y is not in any
    /// dilate. Available for the kinds whose gauge has a closed form.
    double gauge(const Vec& y) const {
        check_dim(y);
        const double inf = std::numeric_limits<double>::infinity();
        switch (kind()) {
        case Kind::simplex_with_origin: return y.minCoeff() < 0 ? inf : y.sum();
        case Kind::cross_polytope: return y.lpNorm<1>();
        case Kind::cube: return y.lpNorm<Eigen::Infinity>();
        case Kind::lq_ball: return lq_norm(y, d_->q);
        case Kind::generic_v: {
            const auto& h = hull();
            if (!h.full_dimensional() || !h.contains(Vec::Zero(dim()), -1e-12))
                throw UnsupportedError("gauge of a GenericV set without the origin in its interior");
            double g = 0.0;
            for (const auto& f : h.facets()) g = std::max(g, f.normal.dot(y) / f.offset);
            return g;
        }
        default:
            throw UnsupportedError("gauge not available for coefficient set " + name());
        }
    }

    /// Membership test, tolerance relative to max(1, |y|).
    bool contains(const Vec& y, double tol = 1e-9) const {
        check_dim(y);
        const double t = tol * std::max(1.0, y.norm());
        switch (kind()) {
        case Kind::simplex: return y.minCoeff() >= -t && std::abs(y.sum() - 1.0) <= t;
        case Kind::generic_v: {
            const auto& h = hull();
            return h.contains(y, tol);
        }
        case Kind::m_combination: return m_contains(y, tol);
        default: return gauge(y) <= 1.0 + t;
        }
    }

private:
    struct Data {
        Kind kind = Kind::simplex;
        int N = 0;
        bool symmetric = false;
        bool unconditional = false;
        double q = 2.0;
        Psi psi;
        double threshold = 1.0;
        std::vector<Vec> vertices;
        std::shared_ptr<CoefficientSet> M;
        std::vector<CoefficientSet> parts;
        mutable std::once_flag hull_once;
        mutable std::unique_ptr<ConvexHull> hull;
    };

    static CoefficientSet make(Kind k, int N, bool sym, bool uncond) {
        if (N < 1) throw DimensionError("coefficient set dimension must be positive");
        CoefficientSet c;
        c.d_ = std::make_shared<Data>();
        c.d_->kind = k;
        c.d_->N = N;
        c.d_->symmetric = sym;
        c.d_->unconditional = uncond;
        return c;
    }

    void check_dim(const Vec& v) const {
        if (v.size() != dim())
            throw DimensionError("vector of length " + std::to_string(v.size()) +
                                 " for coefficient set of dimension " + std::to_string(dim()));
    }

    const ConvexHull& hull() const {
        std::call_once(d_->hull_once, [this] { d_->hull = std::make_unique<ConvexHull>(d_->vertices); });
        return *d_->hull;
    }

    static double lq_norm(const Vec& y, double q) {
        if (std::isinf(q)) return y.lpNorm<Eigen::Infinity>();
        if (q == 1.0) return y.lpNorm<1>();
        if (q == 2.0) return y.norm();
        const double m = y.lpNorm<Eigen::Infinity>();
        if (m == 0.0) return 0.0;
        double s = 0.0;
        for (int i = 0; i < y.size(); ++i) s += std::pow(std::abs(y(i)) / m, q);
        return m * std::pow(s, 1.0 / q);
    }

    static double dual_lq_norm(const Vec& v, double q) {
        if (q == 1.0) return v.lpNorm<Eigen::Infinity>();
        if (std::isinf(q)) return v.lpNorm<1>();
        return lq_norm(v, q / (q - 1.0));
    }

    // inf{lambda > 0 : (1/N) sum psi(|v_i| / lambda) <= threshold}
    double orlicz_norm(const Vec& v) const {
        const double m = v.lpNorm<Eigen::Infinity>();
        if (m == 0.0) return 0.0;
        const Psi& psi = d_->psi;
        const double N = dim(), th = d_->threshold;
        auto excess = [&](double lambda) {
            double s = 0.0;
            for (int i = 0; i < v.size(); ++i) s += psi(std::abs(v(i)) / lambda);
            return s / N - th;
        };
        double lo = m * 1e-3, hi = m;
        while (excess(hi) > 0) hi *= 2.0;
        while (excess(lo) <= 0) lo *= 0.5;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) > 0 ? lo : hi) = mid;
        }
        return hi;
    }

    // h of the M-combination: sup over a in M of sum_i a_i^+ h_i(v_i) + a_i^- h_i(-v_i).
    double m_support(const Vec& v) const {
        const auto& ps = parts();
        const int m = static_cast<int>(ps.size());
        Vec plus(m), minus(m);
        for (int i = 0, off = 0; i < m; off += ps[i].dim(), ++i) {
            const Vec vi = v.segment(off, ps[i].dim());
            plus(i) = ps[i].support(vi);
            minus(i) = ps[i].support(-vi);
        }
        if (M().positive_orthant()) return M().support(plus);
        if (M().unconditional()) return M().support(plus.cwiseMax(minus));
        if (auto verts = M().vertices()) {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& a : *verts) {
                double s = 0.0;
                for (int i = 0; i < m; ++i) s += a(i) >= 0 ? a(i) * plus(i) : -a(i) * minus(i);
                best = std::max(best, s);
            }
            return best;
        }
        throw UnsupportedError("M-combination support needs M in the positive orthant, "
                               "unconditional, or given by vertices");
    }

    // y in the M-combination iff there is a in M with y_i in a_i C_i for all i.
    // Supported for M in the positive orthant or M unconditional with
    // symmetric parts; then only a >= 0 matters.
    bool m_contains(const Vec& y, double tol) const {
        const auto& ps = parts();
        const int m = static_cast<int>(ps.size());
        if (!(M().positive_orthant() || (M().unconditional() && symmetric_parts())))
            throw UnsupportedError("M-combination membership needs M in the positive orthant "
                                   "or unconditional with symmetric parts");
        const double inf = std::numeric_limits<double>::infinity();
        Vec lo(m), hi(m);
        for (int i = 0, off = 0; i < m; off += ps[i].dim(), ++i) {
            const Vec yi = y.segment(off, ps[i].dim());
            const double t = tol * std::max(1.0, yi.norm());
            if (ps[i].kind() == Kind::simplex) {
                if (yi.minCoeff() < -t) return false;
                lo(i) = hi(i) = yi.sum();
            } else {
                lo(i) = ps[i].gauge(yi);
                hi(i) = inf;
                if (std::isinf(lo(i))) return false;
            }
        }
        const CoefficientSet& Mset = M();
        auto slack = [&](double x) { return tol * std::max(1.0, std::abs(x)); };
        for (int i = 0; i < m; ++i)
            if (hi(i) < lo(i) - slack(lo(i))) return false;
        if (Mset.kind() == Kind::generic_v && Mset.generic_vertices().size() == 1) {
            const Vec& a = Mset.generic_vertices().front();
            for (int i = 0; i < m; ++i)
                if (a(i) < lo(i) - slack(lo(i)) || a(i) > hi(i) + slack(a(i))) return false;
            return true;
        }
        if (Mset.unconditional()) return Mset.gauge(lo) <= 1.0 + tol;
        const bool free_scale = (hi.array() == inf).any();
        if (Mset.kind() == Kind::simplex_with_origin || (Mset.kind() == Kind::simplex && free_scale))
            return lo.sum() <= 1.0 + tol;
        if (Mset.kind() == Kind::simplex) return std::abs(lo.sum() - 1.0) <= tol;
        throw UnsupportedError("M-combination membership not available for M = " + Mset.name());
    }

    bool symmetric_parts() const {
        for (const auto& p : parts())
            if (!p.symmetric()) return false;
        return true;
    }

    std::shared_ptr<Data> d_;
};

} // namespace sdlab::geometry
