#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"

namespace sdlab::geometry {

/// A simplicial boundary piece of a full-dimensional hull: n point indices
/// spanning a hyperplane {x : <normal, x> = offset} with unit outward normal.
struct Facet {
    std::vector<int> vertices; // sorted
    Vec normal;
    double offset = 0.0;
};

/// Convex hull of a finite point set in R^n, n <= 6.
///
/// n = 1 and n = 2 use direct methods (min/max, monotone chain); n >= 3 uses
/// incremental beneath-beyond with floating-point orientation tests. When an
/// insertion produces a numerically flat facet the construction restarts once
/// on a copy of the input moved by a fixed, seed-independent perturbation of
/// relative size 1e-10 (`perturbed()` reports this).
///
/// Lower-dimensional inputs are handled in their affine hull: `volume()` is 0
/// and the remaining measures are taken from the hull inside that subspace.
class ConvexHull {
public:
    explicit ConvexHull(std::vector<Vec> points) : points_(std::move(points)) {
        if (points_.empty()) throw DegenerateError("convex hull of an empty point set");
        dim_ = static_cast<int>(points_.front().size());
        if (dim_ < 1 || dim_ > kMaxDim) throw DimensionError("hull dimension outside [1, 6]");
        for (const auto& p : points_) {
            if (p.size() != dim_) throw DimensionError("hull points of unequal dimension");
            if (!p.allFinite()) throw DimensionError("hull point with non-finite coordinate");
        }
        build();
    }

    int dim() const noexcept { return dim_; }
    int affine_dim() const noexcept { return affine_dim_; }
    bool full_dimensional() const noexcept { return affine_dim_ == dim_; }
    bool perturbed() const noexcept { return perturbed_; }
    double scale() const noexcept { return scale_; }
    const std::vector<Vec>& points() const noexcept { return points_; }
    const std::vector<Facet>& facets() const noexcept { return facets_; }
    const Vec& interior_point() const noexcept { return interior_; }

    /// Counter-clockwise vertex indices (n = 2, full-dimensional only).
    const std::vector<int>& ring() const noexcept { return ring_; }

    /// Indices of the input points that are hull vertices.
    std::vector<int> vertex_indices() const {
        if (!full_dimensional()) {
            if (!sub_) return {anchor_};
            return sub_->vertex_indices();
        }
        if (dim_ == 2) {
            auto r = ring_;
            std::sort(r.begin(), r.end());
            return r;
        }
        std::vector<int> out;
        for (const auto& f : facets_) out.insert(out.end(), f.vertices.begin(), f.vertices.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    double volume() const { return full_dimensional() ? volume_ : 0.0; }

    /// (n-1)-dimensional boundary measure. A flat body of dimension n-1 counts
    /// both sides, so that half of it is still V_{n-1}.
    double surface_area() const {
        if (full_dimensional()) return surface_;
        if (affine_dim_ == dim_ - 1 && sub_) return 2.0 * sub_->volume();
        if (affine_dim_ == 0 && dim_ == 1) return 2.0;
        return 0.0;
    }

    /// Intrinsic volume V_j when it is available in closed form from the
    /// boundary: j = n, n-1, n-2 of the hull inside its affine span.
    /// Returns NaN when the formula does not apply.
    double intrinsic_volume(int j) const {
        if (j < 0 || j > dim_) return std::nan("");
        if (j == 0) return 1.0;
        if (!full_dimensional()) {
            if (j > affine_dim_) return 0.0;
            if (!sub_) return 0.0;
            return sub_->intrinsic_volume(j);
        }
        if (j == dim_) return volume_;
        if (j == dim_ - 1) return 0.5 * surface_;
        if (j == dim_ - 2) return ridge_angle_sum();
        return std::nan("");
    }

    bool contains(const Vec& x, double tol = 1e-9) const {
        const double t = tol * std::max(1.0, scale_);
        if (!full_dimensional()) {
            const Vec d = x - origin_;
            if (!sub_) return d.norm() <= t;
            const Vec coords = basis_.transpose() * d;
            if ((d - basis_ * coords).norm() > t) return false;
            return sub_->contains(coords, tol);
        }
        for (const auto& f : facets_)
            if (f.normal.dot(x) > f.offset + t) return false;
        return true;
    }

    /// max over hull points of <u, p>.
    double support(const Vec& u) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : points_) best = std::max(best, u.dot(p));
        return best;
    }

private:
    void build() {
        scale_ = 0.0;
        for (const auto& p : points_) scale_ = std::max(scale_, (p - points_.front()).norm());
        interior_ = Vec::Zero(dim_);
        if (scale_ == 0.0) {
            affine_dim_ = 0;
            origin_ = points_.front();
            interior_ = origin_;
            return;
        }
        if (dim_ == 1) return build_1d();
        if (!select_affine_basis()) return build_degenerate();
        if (dim_ == 2) return build_2d();
        if (!build_nd(points_)) {
            std::vector<Vec> moved = points_;
            RngStream jitter(0x9E3779B97F4A7C15ull, 0);
            for (auto& p : moved)
                for (int d = 0; d < dim_; ++d) p(d) += 1e-10 * scale_ * jitter.uniform(-1.0, 1.0);
            perturbed_ = true;
            if (!build_nd(moved))
                throw DegenerateError("convex hull construction failed after perturbation");
        }
        finish_nd();
    }

    void build_1d() {
        int lo = 0, hi = 0;
        for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
            if (points_[i](0) < points_[lo](0)) lo = i;
            if (points_[i](0) > points_[hi](0)) hi = i;
        }
        affine_dim_ = 1;
        facets_.push_back({{lo}, Vec::Constant(1, -1.0), -points_[lo](0)});
        facets_.push_back({{hi}, Vec::Constant(1, 1.0), points_[hi](0)});
        volume_ = points_[hi](0) - points_[lo](0);
        surface_ = 2.0;
        interior_ = Vec::Constant(1, 0.5 * (points_[lo](0) + points_[hi](0)));
    }

    // Greedy affine basis from the input; sets affine_dim_, basis_, origin_,
    // simplex_. Returns true when the points span R^n.
    bool select_affine_basis() {
        anchor_ = 0;
        for (int i = 1; i < static_cast<int>(points_.size()); ++i)
            if (std::lexicographical_compare(points_[i].data(), points_[i].data() + dim_,
                                             points_[anchor_].data(),
                                             points_[anchor_].data() + dim_))
                anchor_ = i;
        origin_ = points_[anchor_];
        simplex_ = {anchor_};
        std::vector<Vec> q;
        for (int k = 0; k < dim_; ++k) {
            int best = -1;
            double best_res = 0.0;
            Vec best_vec;
            for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
                Vec r = points_[i] - origin_;
                for (const auto& b : q) r -= b.dot(r) * b;
                // second pass for numerical orthogonality
                for (const auto& b : q) r -= b.dot(r) * b;
                const double rn = r.norm();
                if (rn > best_res) {
                    best_res = rn;
                    best = i;
                    best_vec = r;
                }
            }
            if (best < 0 || best_res <= 1e-9 * scale_) break;
            q.push_back(best_vec / best_res);
            simplex_.push_back(best);
        }
        affine_dim_ = static_cast<int>(q.size());
        basis_ = Mat(dim_, affine_dim_);
        for (int k = 0; k < affine_dim_; ++k) basis_.col(k) = q[static_cast<std::size_t>(k)];
        return affine_dim_ == dim_;
    }

    void build_degenerate() {
        if (affine_dim_ == 0) {
            interior_ = origin_;
            return;
        }
        std::vector<Vec> local;
        local.reserve(points_.size());
        for (const auto& p : points_) local.push_back(basis_.transpose() * (p - origin_));
        sub_ = std::make_shared<ConvexHull>(std::move(local));
        interior_ = origin_ + basis_ * sub_->interior_point();
    }

    void build_2d() {
        std::vector<int> idx(points_.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            const auto &p = points_[a], &q = points_[b];
            return p(0) < q(0) || (p(0) == q(0) && (p(1) < q(1) || (p(1) == q(1) && a < b)));
        });
        auto cross = [&](int o, int a, int b) {
            const auto &po = points_[o], &pa = points_[a], &pb = points_[b];
            return (pa(0) - po(0)) * (pb(1) - po(1)) - (pa(1) - po(1)) * (pb(0) - po(0));
        };
        std::vector<int> hull(2 * idx.size());
        std::size_t k = 0;
        for (int i : idx) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], i) <= 0) --k;
            hull[k++] = i;
        }
        for (std::size_t t = idx.size() - 1, lower = k + 1; t-- > 0;) {
            const int i = idx[t];
            while (k >= lower && cross(hull[k - 2], hull[k - 1], i) <= 0) --k;
            hull[k++] = i;
        }
        hull.resize(k - 1);
        ring_ = hull;
        double area = 0.0, perim = 0.0;
        Vec centroid = Vec::Zero(2);
        for (std::size_t i = 0; i < ring_.size(); ++i) {
            const Vec& a = points_[ring_[i]];
            const Vec& b = points_[ring_[(i + 1) % ring_.size()]];
            area += a(0) * b(1) - a(1) * b(0);
            const Vec e = b - a;
            const double len = e.norm();
            perim += len;
            Vec nrm(2);
            nrm << e(1) / len, -e(0) / len;
            std::vector<int> verts = {ring_[i], ring_[(i + 1) % ring_.size()]};
            std::sort(verts.begin(), verts.end());
            facets_.push_back({verts, nrm, nrm.dot(a)});
            centroid += a;
        }
        volume_ = 0.5 * area;
        surface_ = perim;
        interior_ = centroid / static_cast<double>(ring_.size());
    }

    // Unit normal of the hyperplane through the given points, or an empty
    // vector when they are numerically affinely dependent.
    Vec hyperplane_normal(const std::vector<Vec>& pts, const std::vector<int>& verts) const {
        const int n = dim_;
        Mat d(n - 1, n);
        double scale = 1.0;
        for (int k = 1; k < n; ++k) {
            d.row(k - 1) = (pts[verts[k]] - pts[verts[0]]).transpose();
            scale *= d.row(k - 1).norm();
        }
        Vec nrm(n);
        if (n == 3) {
            const Eigen::Vector3d a = d.row(0).transpose(), b = d.row(1).transpose();
            nrm = a.cross(b);
        } else {
            for (int i = 0; i < n; ++i) {
                Mat minor(n - 1, n - 1);
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor.col(cc++) = d.col(c);
                }
                nrm(i) = ((i % 2) ? -1.0 : 1.0) * minor.determinant();
            }
        }
        const double len = nrm.norm();
        if (!(len > 1e-11 * scale)) return Vec();
        return nrm / len;
    }

    bool make_facet(const std::vector<Vec>& pts, std::vector<int> verts, Facet& out) const {
        std::sort(verts.begin(), verts.end());
        Vec nrm = hyperplane_normal(pts, verts);
        if (nrm.size() == 0) return false;
        double off = nrm.dot(pts[verts[0]]);
        if (nrm.dot(interior_) > off) {
            nrm = -nrm;
            off = -off;
        }
        out = {std::move(verts), std::move(nrm), off};
        return true;
    }

    bool build_nd(const std::vector<Vec>& pts) {
        facets_.clear();
        interior_ = Vec::Zero(dim_);
        for (int i : simplex_) interior_ += pts[i];
        interior_ /= static_cast<double>(simplex_.size());
        for (int omit = 0; omit <= dim_; ++omit) {
            std::vector<int> verts;
            for (int k = 0; k <= dim_; ++k)
                if (k != omit) verts.push_back(simplex_[k]);
            Facet f;
            if (!make_facet(pts, verts, f)) return false;
            facets_.push_back(std::move(f));
        }
        const double eps = 1e-11 * scale_;
        std::vector<char> used(pts.size(), 0);
        for (int i : simplex_) used[i] = 1;
        for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
            if (used[p]) continue;
            std::vector<char> visible(facets_.size(), 0);
            bool any = false;
            for (std::size_t f = 0; f < facets_.size(); ++f)
                if (facets_[f].normal.dot(pts[p]) - facets_[f].offset > eps) visible[f] = any = 1;
            if (!any) continue;
            std::map<std::vector<int>, int> ridge_count;
            for (std::size_t f = 0; f < facets_.size(); ++f) {
                if (!visible[f]) continue;
                const auto& v = facets_[f].vertices;
                for (int omit = 0; omit < dim_; ++omit) {
                    std::vector<int> ridge;
                    ridge.reserve(v.size() - 1);
                    for (int k = 0; k < dim_; ++k)
                        if (k != omit) ridge.push_back(v[k]);
                    ++ridge_count[ridge];
                }
            }
            std::vector<Facet> next;
            next.reserve(facets_.size() + ridge_count.size());
            for (std::size_t f = 0; f < facets_.size(); ++f)
                if (!visible[f]) next.push_back(std::move(facets_[f]));
            for (const auto& [ridge, count] : ridge_count) {
                if (count != 1) continue;
                auto verts = ridge;
                verts.push_back(p);
                Facet f;
                if (!make_facet(pts, verts, f)) return false;
                next.push_back(std::move(f));
            }
            facets_ = std::move(next);
        }
        return true;
    }

    void finish_nd() {
        const auto& pts = points_;
        double vol = 0.0, surf = 0.0;
        const double nfact = factorial(dim_), n1fact = factorial(dim_ - 1);
        for (auto& f : facets_) {
            // Normals and offsets were computed on possibly perturbed points;
            // recompute offsets on the true points for membership tests.
            double off = -std::numeric_limits<double>::infinity();
            for (int v : f.vertices) off = std::max(off, f.normal.dot(pts[v]));
            f.offset = off;
            Mat d(dim_, dim_);
            for (int k = 0; k < dim_; ++k) d.col(k) = pts[f.vertices[k]] - interior_;
            vol += std::abs(d.determinant()) / nfact;
            Mat e(dim_, dim_ - 1);
            for (int k = 1; k < dim_; ++k) e.col(k - 1) = pts[f.vertices[k]] - pts[f.vertices[0]];
            surf += std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / n1fact;
        }
        volume_ = vol;
        surface_ = surf;
    }

    // Sum over (n-2)-faces of the triangulated boundary of
    // vol_{n-2}(ridge) * (angle between adjacent facet normals) / (2 pi).
    double ridge_angle_sum() const {
        if (dim_ == 2) return 1.0;
        std::map<std::vector<int>, std::vector<const Facet*>> ridges;
        for (const auto& f : facets_) {
            for (int omit = 0; omit < dim_; ++omit) {
                std::vector<int> r;
                for (int k = 0; k < dim_; ++k)
                    if (k != omit) r.push_back(f.vertices[k]);
                ridges[r].push_back(&f);
            }
        }
        double total = 0.0;
        const double fact = factorial(dim_ - 2);
        for (const auto& [r, fs] : ridges) {
            if (fs.size() != 2) continue;
            // chord form; acos loses half the digits near coplanar facets
            const double chord = (fs[0]->normal - fs[1]->normal).norm();
            const double angle = 2.0 * std::asin(std::min(1.0, 0.5 * chord));
            if (angle == 0.0) continue;
            double vol = 1.0;
            if (dim_ > 2) {
                Mat e(dim_, dim_ - 2);
                for (int k = 1; k < dim_ - 1; ++k) e.col(k - 1) = points_[r[k]] - points_[r[0]];
                vol = dim_ == 3 ? e.col(0).norm()
                                : std::sqrt(std::max(0.0, (e.transpose() * e).determinant())) / fact;
            }
            total += vol * angle / (2.0 * std::numbers::pi);
        }
        return total;
    }

    std::vector<Vec> points_;
    int dim_ = 0;
    int affine_dim_ = 0;
    bool perturbed_ = false;
    double scale_ = 0.0;
    std::vector<Facet> facets_;
    std::vector<int> ring_;
    std::vector<int> simplex_;
    int anchor_ = 0;
    Vec interior_;
    Vec origin_;
    Mat basis_;
    std::shared_ptr<ConvexHull> sub_;
    double volume_ = 0.0;
    double surface_ = 0.0;
};

/// Euclidean distance from x to conv(pts) by Wolfe's minimum-norm-point
/// algorithm on the translated points pts - x.
inline double distance_to_hull(const std::vector<Vec>& pts, const Vec& x) {
    const std::size_t m = pts.size();
    if (m == 0) throw DegenerateError("distance to the hull of no points");
    std::vector<Vec> p(m);
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        p[i] = pts[i] - x;
        scale = std::max(scale, p[i].squaredNorm());
    }
    const double tol = 1e-12 * std::max(scale, 1e-300);
    std::size_t first = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (p[i].squaredNorm() < p[first].squaredNorm()) first = i;
    std::vector<std::size_t> S{first};
    std::vector<double> lambda{1.0};
    Vec y = p[first];
    for (int major = 0; major < 1000; ++major) {
        std::size_t j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double v = p[i].dot(y);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        if (y.squaredNorm() - best <= tol) break;
        if (std::find(S.begin(), S.end(), j) != S.end()) break;
        S.push_back(j);
        lambda.push_back(0.0);
        for (int minor = 0; minor < 1000; ++minor) {
            // affine minimum-norm point of the current corral
            const int k = static_cast<int>(S.size());
            Mat A = Mat::Zero(k + 1, k + 1);
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < k; ++b) A(a, b) = p[S[a]].dot(p[S[b]]);
                A(a, k) = A(k, a) = 1.0;
            }
            Vec rhs = Vec::Zero(k + 1);
            rhs(k) = 1.0;
            const Vec sol = A.colPivHouseholderQr().solve(rhs);
            bool interior = true;
            for (int a = 0; a < k; ++a) interior = interior && sol(a) > 1e-14;
            if (interior) {
                for (int a = 0; a < k; ++a) lambda[a] = sol(a);
                break;
            }
            double theta = 1.0;
            for (int a = 0; a < k; ++a)
                if (sol(a) <= 1e-14 && lambda[a] - sol(a) > 0) theta = std::min(theta, lambda[a] / (lambda[a] - sol(a)));
            std::vector<std::size_t> S2;
            std::vector<double> l2;
            for (int a = 0; a < k; ++a) {
                const double l = lambda[a] + theta * (sol(a) - lambda[a]);
                if (l > 1e-14) {
                    S2.push_back(S[a]);
                    l2.push_back(l);
                }
            }
            if (S2.empty()) {
                S2.push_back(S[0]);
                l2.push_back(1.0);
            }
            S = std::move(S2);
            lambda = std::move(l2);
        }
        const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
        y.setZero();
        for (std::size_t a = 0; a < S.size(); ++a) y += (lambda[a] / total) * p[S[a]];
    }
    return y.norm();
}

} // namespace sdlab::geometry
