#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace sdlab::geometry {

using Point2 = Eigen::Vector2d;

/// Convex polygon as a counter-clockwise vertex list.
using Polygon = std::vector<Point2>;

inline double polygon_area(const Polygon& p) {
    double a = 0.0;
    for (std::size_t i = 0, n = p.size(); i < n; ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % n];
        a += u.x() * v.y() - u.y() * v.x();
    }
    return 0.5 * a;
}

inline double polygon_perimeter(const Polygon& p) {
    double s = 0.0;
    for (std::size_t i = 0, n = p.size(); i < n; ++i) s += (p[(i + 1) % n] - p[i]).norm();
    return s;
}

/// p intersected with the half-plane {x : <a, x> <= b} (Sutherland-Hodgman).
inline Polygon clip_halfplane(const Polygon& p, const Point2& a, double b) {
    Polygon out;
    const std::size_t n = p.size();
    if (n == 0) return out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& s = p[i];
        const Point2& e = p[(i + 1) % n];
        const double ds = a.dot(s) - b, de = a.dot(e) - b;
        if (ds <= 0) out.push_back(s);
        if ((ds < 0 && de > 0) || (ds > 0 && de < 0)) out.push_back(s + (e - s) * (ds / (ds - de)));
    }
    return out;
}

/// Intersection of p with the convex counter-clockwise polygon q.
inline Polygon clip_convex(Polygon p, const Polygon& q) {
    for (std::size_t i = 0, n = q.size(); i < n && !p.empty(); ++i) {
        const Point2 e = q[(i + 1) % n] - q[i];
        const Point2 outward(e.y(), -e.x());
        p = clip_halfplane(p, outward, outward.dot(q[i]));
    }
    return p;
}

inline Polygon axis_box(double x0, double x1, double y0, double y1) {
    return {Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)};
}

} // namespace sdlab::geometry
