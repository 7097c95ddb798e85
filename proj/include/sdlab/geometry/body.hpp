#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/convex_hull.hpp"
#include "sdlab/geometry/disk_intersection.hpp"
#include "sdlab/geometry/polygon.hpp"
#include "sdlab/geometry/sphere_grid.hpp"

namespace sdlab::geometry {

/// conv(vertices).
struct VPolytope {
    std::vector<Vec> vertices;
};

/// conv{+-x_i}.
struct SymmetricCrossHull {
    std::vector<Vec> generators;
};

/// sum_i [-x_i, x_i].
struct Zonotope {
    std::vector<Vec> generators;
};

/// {y : <a_i, y> <= 1 for all i}; bounded by construction.
struct HPolytope {
    std::vector<Vec> normals;
};

/// intersection of B(c_i, r).
struct BallIntersection {
    std::vector<Vec> centers;
    double radius = 0.0;
};

struct EuclideanBall {
    Vec center;
    double radius = 0.0;
};

/// Convex body known through its support function.
struct SupportOracle {
    int dim = 0;
    std::function<double(const Vec&)> h;
    double bounding_radius = 0.0;
    std::string label;
};

/// Body known through a membership test (origin-star-shaped when `radial`
/// is given: radial(u) is the distance to the boundary along unit u).
/// `support` is optional.
struct MembershipOracle {
    int dim = 0;
    std::function<bool(const Vec&)> contains;
    double bounding_radius = 0.0;
    std::function<double(const Vec&)> radial;
    std::function<double(const Vec&)> support;
    std::string label;
};

/// An immutable convex set in R^n under one of several representations.
///
/// Derived data (hulls, polygons, arc boundaries, cached support values) is
/// computed on first use behind std::call_once, so a Body may be shared
/// between threads.
class Body {
public:
    using Shape = std::variant<VPolytope, SymmetricCrossHull, Zonotope, HPolytope, BallIntersection,
                               EuclideanBall, SupportOracle, MembershipOracle>;

    static Body vpolytope(std::vector<Vec> vertices) {
        if (vertices.empty()) throw DimensionError("VPolytope vertex list is empty");
        const int n = check_points(vertices, "VPolytope");
        return Body(VPolytope{std::move(vertices)}, n);
    }

    static Body cross_hull(std::vector<Vec> generators) {
        if (generators.empty()) throw DimensionError("SymmetricCrossHull needs generators");
        const int n = check_points(generators, "SymmetricCrossHull");
        return Body(SymmetricCrossHull{std::move(generators)}, n);
    }

    static Body zonotope(std::vector<Vec> generators) {
        if (generators.empty()) throw DimensionError("Zonotope needs generators");
        const int n = check_points(generators, "Zonotope");
        return Body(Zonotope{std::move(generators)}, n);
    }

    /// {y : <a_i, y> <= 1}; throws when the set is unbounded.
    static Body hpolytope(std::vector<Vec> normals) {
        if (normals.empty()) throw DimensionError("HPolytope needs normals");
        const int n = check_points(normals, "HPolytope");
        Body b(HPolytope{std::move(normals)}, n);
        b.hull(); // validates boundedness
        return b;
    }

    static Body ball_intersection(std::vector<Vec> centers, double r) {
        if (centers.empty()) throw DimensionError("BallIntersection needs centers");
        if (!(r > 0)) throw DimensionError("BallIntersection radius must be positive");
        const int n = check_points(centers, "BallIntersection");
        return Body(BallIntersection{std::move(centers), r}, n);
    }

    static Body ball(Vec center, double r) {
        if (!(r >= 0)) throw DimensionError("ball radius must be nonnegative");
        const int n = static_cast<int>(center.size());
        check_dim(n);
        return Body(EuclideanBall{std::move(center), r}, n);
    }

    static Body support_oracle(int n, std::function<double(const Vec&)> h, double bounding_radius,
                               std::string label = "support oracle") {
        check_dim(n);
        if (!(bounding_radius >= 0) || !std::isfinite(bounding_radius))
            throw DimensionError("support oracle without a finite bounding radius");
        return Body(SupportOracle{n, std::move(h), bounding_radius, std::move(label)}, n);
    }

    static Body membership_oracle(MembershipOracle m) {
        check_dim(m.dim);
        if (!(m.bounding_radius >= 0) || !std::isfinite(m.bounding_radius))
            throw DimensionError("membership oracle without a finite bounding radius");
        const int n = m.dim;
        return Body(std::move(m), n);
    }

    int dim() const noexcept { return d_->n; }
    const Shape& shape() const noexcept { return d_->shape; }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&d_->shape);
    }

    std::string kind_name() const {
        static const char* names[] = {"VPolytope", "SymmetricCrossHull", "Zonotope",      "HPolytope",
                                      "BallIntersection", "EuclideanBall", "SupportOracle",
                                      "MembershipOracle"};
        return names[d_->shape.index()];
    }

    /// True for the representations with an exact vertex/facet description.
    bool is_polytope() const noexcept {
        return as<VPolytope>() || as<SymmetricCrossHull>() || as<HPolytope>() || as<Zonotope>();
    }

    bool has_support() const noexcept {
        if (auto m = as<MembershipOracle>()) return static_cast<bool>(m->support);
        if (auto b = as<BallIntersection>()) return dim() <= 2 || b->centers.size() == 1;
        return true;
    }

    /// Support function at u (u need not be unit; h is positively homogeneous).
    double support(const Vec& u) const {
        if (u.size() != dim()) throw DimensionError("support direction has wrong dimension");
        return std::visit([&](const auto& s) { return support_impl(s, u); }, d_->shape);
    }

    bool contains(const Vec& x, double tol = 1e-9) const {
        if (x.size() != dim()) throw DimensionError("point has wrong dimension");
        return std::visit([&](const auto& s) { return contains_impl(s, x, tol); }, d_->shape);
    }

    /// Radius of a centered ball containing the body.
    double bounding_radius() const {
        return std::visit([&](const auto& s) { return bounding_impl(s); }, d_->shape);
    }

    /// Convex hull for VPolytope, SymmetricCrossHull and HPolytope, and for
    /// Zonotopes with at most 16 generators.
    const ConvexHull& hull() const {
        std::call_once(d_->hull_once, [this] { d_->hull = std::make_unique<ConvexHull>(hull_points()); });
        return *d_->hull;
    }

    /// Counter-clockwise boundary polygon of a planar polytope body.
    const Polygon* polygon() const {
        if (dim() != 2 || !is_polytope()) return nullptr;
        std::call_once(d_->polygon_once, [this] { d_->polygon = make_polygon(); });
        return &d_->polygon;
    }

    /// Exact arc boundary of a planar ball intersection.
    const ArcPolygon* arcs() const {
        auto b = as<BallIntersection>();
        if (!b || dim() != 2) return nullptr;
        std::call_once(d_->arcs_once, [this, b] {
            std::vector<Point2> cs;
            for (const auto& c : b->centers) cs.emplace_back(c(0), c(1));
            d_->arcs = disk_intersection(cs, b->radius);
        });
        return &d_->arcs;
    }

    /// Facet description {x : |<v_S, x>| <= h(v_S)} of a full-dimensional
    /// zonotope, v_S normal to an (n-1)-subset of generators.
    const std::vector<std::pair<Vec, double>>& zonotope_facets() const {
        auto z = as<Zonotope>();
        if (!z) throw UnsupportedError("zonotope_facets on a " + kind_name());
        std::call_once(d_->zfacets_once, [this, z] {
            const int n = dim(), N = static_cast<int>(z->generators.size());
            std::vector<std::pair<Vec, double>> out;
            if (n == 1) {
                Vec e = Vec::Constant(1, 1.0);
                out.emplace_back(e, support(e));
            } else {
                for_each_subset(N, n - 1, [&](const std::vector<int>& S) {
                    Mat d(n - 1, n);
                    for (int k = 0; k < n - 1; ++k) d.row(k) = z->generators[S[k]].transpose();
                    Eigen::FullPivLU<Mat> lu(d);
                    lu.setThreshold(1e-12);
                    if (lu.rank() < n - 1) return;
                    Vec v = lu.kernel().col(0);
                    v /= v.norm();
                    out.emplace_back(v, support(v));
                });
            }
            d_->zfacets = std::move(out);
        });
        return d_->zfacets;
    }

    /// max over unit u of <u, x> - h(u); positive iff x lies outside, and then
    /// equal to the Euclidean distance from x to the body.
    double support_gap(const Vec& x) const {
        if (auto b = as<EuclideanBall>()) return (x - b->center).norm() - b->radius;
        if (is_polytope()) return polytope_gap(x);
        const auto& g = support_grid();
        const int n = dim();
        std::size_t best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g.dirs.size(); ++k) {
            const double v = g.dirs[k].dot(x) - g.values[k];
            if (v > best_val) {
                best_val = v;
                best = k;
            }
        }
        if (n == 1) return best_val;
        Vec u = g.dirs[best];
        double step = g.spacing;
        auto f = [&](const Vec& w) { return w.dot(x) - support(w); };
        double fu = f(u);
        // pattern search on the sphere around the best grid direction
        Mat basis = tangent_basis(u);
        // the gap error is quadratic in the direction error
        while (step > 1e-6) {
            bool improved = false;
            for (int k = 0; k < n - 1 && !improved; ++k) {
                for (double s : {step, -step}) {
                    Vec w = u + s * basis.col(k);
                    w /= w.norm();
                    const double fw = f(w);
                    if (fw > fu) {
                        u = w;
                        fu = fw;
                        improved = true;
                        basis = tangent_basis(u);
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        return std::max(fu, best_val);
    }

private:
    double polytope_gap(const Vec& x) const {
        const ConvexHull& h = hull();
        if (h.full_dimensional()) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& f : h.facets()) worst = std::max(worst, f.normal.dot(x) - f.offset);
            if (worst <= 0.0) return worst;
        }
        std::vector<Vec> verts;
        for (int i : h.vertex_indices()) verts.push_back(h.points()[static_cast<std::size_t>(i)]);
        return distance_to_hull(verts, x);
    }

    struct SupportGrid {
        std::vector<Vec> dirs;
        std::vector<double> values;
        double spacing = 0.0;
    };

    struct Data {
        Shape shape;
        int n = 0;
        mutable std::once_flag hull_once, polygon_once, arcs_once, zfacets_once, grid_once;
        mutable std::unique_ptr<ConvexHull> hull;
        mutable Polygon polygon;
        mutable ArcPolygon arcs;
        mutable std::vector<std::pair<Vec, double>> zfacets;
        mutable SupportGrid grid;
    };

    Body(Shape s, int n) : d_(std::make_shared<Data>()) {
        d_->shape = std::move(s);
        d_->n = n;
    }

    static void check_dim(int n) {
        if (n < 1 || n > kMaxDim) throw DimensionError("body dimension outside [1, 6]");
    }

    static int check_points(const std::vector<Vec>& pts, const char* what) {
        const int n = static_cast<int>(pts.front().size());
        check_dim(n);
        for (const auto& p : pts) {
            if (p.size() != n) throw DimensionError(std::string(what) + " points of unequal dimension");
            if (!p.allFinite()) throw DimensionError(std::string(what) + " point is not finite");
        }
        return n;
    }

    static Mat tangent_basis(const Vec& u) {
        const int n = static_cast<int>(u.size());
        Mat m(n, n);
        m.col(0) = u;
        for (int k = 1; k < n; ++k) m.col(k) = unit(n, k - 1);
        Eigen::HouseholderQR<Mat> qr(m);
        Mat q = qr.householderQ();
        return q.rightCols(n - 1);
    }

    const SupportGrid& support_grid() const {
        std::call_once(d_->grid_once, [this] {
            const int n = dim();
            const int count = n == 2 ? 256 : n == 3 ? 1024 : 4096;
            SupportGrid g;
            g.dirs = sphere_grid(n, count);
            for (const auto& u : g.dirs) g.values.push_back(support(u));
            g.spacing = n == 2 ? 2.0 * std::numbers::pi / count
                               : 2.0 * std::pow(unit_sphere_area(n) / count, 1.0 / (n - 1));
            d_->grid = std::move(g);
        });
        return d_->grid;
    }

    std::vector<Vec> hull_points() const {
        if (auto v = as<VPolytope>()) return v->vertices;
        if (auto c = as<SymmetricCrossHull>()) {
            std::vector<Vec> pts;
            for (const auto& g : c->generators) {
                pts.push_back(g);
                pts.push_back(-g);
            }
            return pts;
        }
        if (auto h = as<HPolytope>()) {
            // Vertices of {<a_i, y> <= 1} are w / b over facets (w, b) of conv{a_i}.
            ConvexHull dual(h->normals);
            if (!dual.full_dimensional())
                throw DegenerateError("HPolytope is unbounded (normals do not span)");
            std::vector<Vec> pts;
            for (const auto& f : dual.facets()) {
                if (!(f.offset > 1e-12 * std::max(1.0, dual.scale())))
                    throw DegenerateError("HPolytope is unbounded (origin not interior to conv of normals)");
                pts.push_back(f.normal / f.offset);
            }
            return pts;
        }
        if (auto z = as<Zonotope>()) {
            const int N = static_cast<int>(z->generators.size());
            if (N > 16) throw UnsupportedError("zonotope hull limited to 16 generators");
            std::vector<Vec> pts;
            for (long s = 0; s < (1L << N); ++s) {
                Vec p = Vec::Zero(dim());
                for (int i = 0; i < N; ++i) p += ((s >> i) & 1 ? -1.0 : 1.0) * z->generators[i];
                pts.push_back(p);
            }
            return pts;
        }
        throw UnsupportedError("no convex hull for a " + kind_name());
    }

    Polygon make_polygon() const {
        Polygon out;
        if (auto z = as<Zonotope>()) {
            // Walk the generators sorted by angle, each oriented into the upper half-plane.
            std::vector<Point2> g;
            Point2 start(0, 0);
            for (const auto& v : z->generators) {
                Point2 p(v(0), v(1));
                if (p.y() < 0 || (p.y() == 0 && p.x() < 0)) p = -p;
                if (p.norm() == 0) continue;
                g.push_back(p);
                start -= p;
            }
            std::sort(g.begin(), g.end(), [](const Point2& a, const Point2& b) {
                return std::atan2(a.y(), a.x()) < std::atan2(b.y(), b.x());
            });
            Point2 cur = start;
            for (const auto& p : g) {
                out.push_back(cur);
                cur += 2.0 * p;
            }
            for (const auto& p : g) {
                out.push_back(cur);
                cur -= 2.0 * p;
            }
            if (std::abs(polygon_area(out)) == 0.0) out.clear();
            return out;
        }
        const auto& h = hull();
        if (!h.full_dimensional()) return out;
        for (int i : h.ring()) out.emplace_back(h.points()[i](0), h.points()[i](1));
        return out;
    }

    // ---- support ----
    double support_impl(const VPolytope& s, const Vec& u) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : s.vertices) best = std::max(best, v.dot(u));
        return best;
    }
    double support_impl(const SymmetricCrossHull& s, const Vec& u) const {
        double best = 0.0;
        for (const auto& g : s.generators) best = std::max(best, std::abs(g.dot(u)));
        return best;
    }
    double support_impl(const Zonotope& s, const Vec& u) const {
        double sum = 0.0;
        for (const auto& g : s.generators) sum += std::abs(g.dot(u));
        return sum;
    }
    double support_impl(const HPolytope&, const Vec& u) const { return hull().support(u); }
    double support_impl(const BallIntersection& s, const Vec& u) const {
        if (s.centers.size() == 1) return s.centers[0].dot(u) + s.radius * u.norm();
        if (dim() == 1) {
            double hi = std::numeric_limits<double>::infinity(), lo = -hi;
            for (const auto& c : s.centers) {
                hi = std::min(hi, c(0) + s.radius);
                lo = std::max(lo, c(0) - s.radius);
            }
            return std::max(u(0) * hi, u(0) * lo);
        }
        if (dim() == 2) {
            const auto* a = arcs();
            if (a->empty) throw DegenerateError("support of an empty ball intersection");
            return a->support(Point2(u(0), u(1)));
        }
        throw UnsupportedError("support of a ball intersection in dimension >= 3");
    }
    double support_impl(const EuclideanBall& s, const Vec& u) const {
        return s.center.dot(u) + s.radius * u.norm();
    }
    double support_impl(const SupportOracle& s, const Vec& u) const { return s.h(u); }
    double support_impl(const MembershipOracle& s, const Vec& u) const {
        if (!s.support) throw UnsupportedError("membership oracle '" + s.label + "' has no support function");
        return s.support(u);
    }

    // ---- membership ----
    bool contains_impl(const VPolytope&, const Vec& x, double tol) const { return hull().contains(x, tol); }
    bool contains_impl(const SymmetricCrossHull&, const Vec& x, double tol) const {
        return hull().contains(x, tol);
    }
    bool contains_impl(const HPolytope& s, const Vec& x, double tol) const {
        for (const auto& a : s.normals)
            if (a.dot(x) > 1.0 + tol) return false;
        return true;
    }
    bool contains_impl(const Zonotope& s, const Vec& x, double tol) const {
        if (dim() == 2) {
            const Polygon* p = polygon();
            if (p->empty()) return false;
            const double t = tol * std::max(1.0, bounding_radius());
            for (std::size_t i = 0; i < p->size(); ++i) {
                const Point2 a = (*p)[i], b = (*p)[(i + 1) % p->size()];
                const Point2 e = b - a;
                if (e.norm() == 0) continue;
                if ((e.x() * (x(1) - a.y()) - e.y() * (x(0) - a.x())) / e.norm() < -t) return false;
            }
            return true;
        }
        const auto& f = zonotope_facets();
        (void)s;
        const double t = tol * std::max(1.0, bounding_radius());
        for (const auto& [v, hv] : f)
            if (std::abs(v.dot(x)) > hv + t) return false;
        return !f.empty() || dim() == 1;
    }
    bool contains_impl(const BallIntersection& s, const Vec& x, double tol) const {
        const double lim = s.radius * (1.0 + tol);
        for (const auto& c : s.centers)
            if ((x - c).norm() > lim) return false;
        return true;
    }
    bool contains_impl(const EuclideanBall& s, const Vec& x, double tol) const {
        return (x - s.center).norm() <= s.radius + tol * std::max(1.0, s.radius);
    }
    bool contains_impl(const SupportOracle& s, const Vec& x, double tol) const {
        const double t = tol * std::max(1.0, s.bounding_radius);
        if (x.norm() > s.bounding_radius + t) return false;
        return support_gap(x) <= t;
    }
    bool contains_impl(const MembershipOracle& s, const Vec& x, double) const { return s.contains(x); }

    // ---- bounding radius ----
    static double max_norm(const std::vector<Vec>& pts) {
        double r = 0.0;
        for (const auto& p : pts) r = std::max(r, p.norm());
        return r;
    }
    double bounding_impl(const VPolytope& s) const { return max_norm(s.vertices); }
    double bounding_impl(const SymmetricCrossHull& s) const { return max_norm(s.generators); }
    double bounding_impl(const Zonotope& s) const {
        double r = 0.0;
        for (const auto& g : s.generators) r += g.norm();
        return r;
    }
    double bounding_impl(const HPolytope&) const { return max_norm(hull().points()); }
    double bounding_impl(const BallIntersection& s) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : s.centers) best = std::min(best, c.norm() + s.radius);
        return best;
    }
    double bounding_impl(const EuclideanBall& s) const { return s.center.norm() + s.radius; }
    double bounding_impl(const SupportOracle& s) const { return s.bounding_radius; }
    double bounding_impl(const MembershipOracle& s) const { return s.bounding_radius; }

    std::shared_ptr<Data> d_;
};

} // namespace sdlab::geometry
