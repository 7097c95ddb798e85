#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sdlab/geometry/polygon.hpp"

namespace sdlab::geometry {

/// One boundary arc of an intersection of equal disks: the part of the circle
/// around `center` with polar angle in [from, to] (counter-clockwise).
struct Arc {
    Point2 center;
    double from = 0.0;
    double to = 0.0;
};

/// Boundary of the intersection of the disks B(c_i, r), as circular arcs.
struct ArcPolygon {
    double radius = 0.0;
    std::vector<Arc> arcs;
    bool empty = false; // true when the disks have no common point

    /// Area from Green's theorem along the arcs.
    double area() const {
        double a = 0.0;
        for (const auto& arc : arcs) {
            const double r = radius, c0 = arc.center.x(), c1 = arc.center.y();
            a += r * r * (arc.to - arc.from) +
                 r * (c0 * (std::sin(arc.to) - std::sin(arc.from)) +
                      c1 * (std::cos(arc.from) - std::cos(arc.to)));
        }
        return 0.5 * a;
    }

    double perimeter() const {
        double p = 0.0;
        for (const auto& arc : arcs) p += radius * (arc.to - arc.from);
        return p;
    }

    /// Support function: max over arcs of <c, u> + r cos(t - phi_u) on [from, to].
    double support(const Point2& u) const {
        const double phi = std::atan2(u.y(), u.x()), len = u.norm();
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& arc : arcs) {
            double shifted = phi;
            while (shifted < arc.from) shifted += 2.0 * std::numbers::pi;
            while (shifted >= arc.from + 2.0 * std::numbers::pi) shifted -= 2.0 * std::numbers::pi;
            double c;
            if (shifted <= arc.to)
                c = 1.0;
            else
                c = std::max(std::cos(arc.from - phi), std::cos(arc.to - phi));
            best = std::max(best, arc.center.dot(u) + radius * len * c);
        }
        return best;
    }
};

/// Exact boundary of the intersection of the disks B(c_i, r) in the plane.
///
/// On circle i the points inside disk j form an arc of half-width
/// acos(|c_j - c_i| / 2r) around the direction of c_j - c_i; intersecting
/// these arcs (each shorter than pi) gives a single arc per circle.
inline ArcPolygon disk_intersection(const std::vector<Point2>& centers_in, double r) {
    ArcPolygon out;
    out.radius = r;
    std::vector<Point2> centers;
    double scale = r;
    for (const auto& c : centers_in) scale = std::max(scale, c.norm());
    for (const auto& c : centers_in) {
        bool dup = false;
        for (const auto& d : centers)
            if ((c - d).norm() <= 1e-14 * scale) dup = true;
        if (!dup) centers.push_back(c);
    }
    const double two_pi = 2.0 * std::numbers::pi;
    if (centers.size() == 1) {
        out.arcs.push_back({centers[0], 0.0, two_pi});
        return out;
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
        double lo = 0.0, hi = 0.0;
        bool first = true, empty_arc = false;
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (j == i) continue;
            const Point2 d = centers[j] - centers[i];
            const double dist = d.norm();
            if (dist > 2.0 * r) {
                out.empty = true;
                out.arcs.clear();
                return out;
            }
            const double half = std::acos(std::min(1.0, dist / (2.0 * r)));
            const double mid = std::atan2(d.y(), d.x());
            double a = mid - half, b = mid + half;
            if (first) {
                lo = a;
                hi = b;
                first = false;
                continue;
            }
            while (a <= lo - std::numbers::pi) {
                a += two_pi;
                b += two_pi;
            }
            while (a > lo + std::numbers::pi) {
                a -= two_pi;
                b -= two_pi;
            }
            lo = std::max(lo, a);
            hi = std::min(hi, b);
            if (lo >= hi) {
                empty_arc = true;
                break;
            }
        }
        if (!empty_arc && hi > lo) out.arcs.push_back({centers[i], lo, hi});
    }
    if (out.arcs.empty()) out.empty = true;
    return out;
}

} // namespace sdlab::geometry
