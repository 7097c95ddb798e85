#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/types.hpp"

namespace sdlab::rearrangement {

/// Nonnegative piecewise-constant function on a centered grid in R^n, n <= 3.
///
/// The grid has an odd number of cells per axis; cell i along an axis covers
/// [(i - mid - 1/2) h, (i - mid + 1/2) h) with mid = cells / 2. Values are
/// stored row-major with axis 0 varying slowest.
class GridFunction {
public:
    GridFunction(int n, int cells, double h, std::vector<double> values)
        : n_(n), cells_(cells), h_(h), v_(std::move(values)) {
        if (n < 1 || n > 3) throw DimensionError("grid dimension " + std::to_string(n) + " outside [1, 3]");
        if (cells < 1 || cells % 2 == 0)
            throw DimensionError("cells per axis must be odd, got " + std::to_string(cells));
        if (!(h > 0.0) || !std::isfinite(h)) throw DimensionError("cell width must be positive");
        std::size_t expect = 1;
        for (int k = 0; k < n; ++k) expect *= static_cast<std::size_t>(cells);
        if (v_.size() != expect)
            throw DimensionError("grid expects " + std::to_string(expect) + " values, got " +
                                 std::to_string(v_.size()));
        for (double x : v_)
            if (!(x >= 0.0) || !std::isfinite(x)) throw DimensionError("grid values must be finite and >= 0");
    }

    /// Grid whose cell values are f(cell center).
    template <class F>
    static GridFunction sample(int n, int cells, double h, F&& f) {
        std::size_t size = 1;
        for (int k = 0; k < n; ++k) size *= static_cast<std::size_t>(cells);
        GridFunction g(n, cells, h, std::vector<double>(size, 0.0));
        for (std::size_t i = 0; i < size; ++i) g.v_[i] = f(g.center(i));
        for (double x : g.v_)
            if (!(x >= 0.0) || !std::isfinite(x)) throw DimensionError("grid values must be finite and >= 0");
        return g;
    }

    int dim() const noexcept { return n_; }
    int cells() const noexcept { return cells_; }
    int mid() const noexcept { return cells_ / 2; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return v_.size(); }
    const std::vector<double>& values() const noexcept { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }
    double cell_volume() const { return std::pow(h_, n_); }

    std::array<int, 3> multi(std::size_t idx) const {
        std::array<int, 3> m{0, 0, 0};
        for (int k = n_ - 1; k >= 0; --k) {
            m[static_cast<std::size_t>(k)] = static_cast<int>(idx % static_cast<std::size_t>(cells_));
            idx /= static_cast<std::size_t>(cells_);
        }
        return m;
    }

    std::size_t index(const std::array<int, 3>& m) const {
        std::size_t idx = 0;
        for (int k = 0; k < n_; ++k) idx = idx * static_cast<std::size_t>(cells_) + static_cast<std::size_t>(m[k]);
        return idx;
    }

    /// Integer offsets (i_k - mid) of a cell.
    std::array<int, 3> offset(std::size_t idx) const {
        auto m = multi(idx);
        for (int k = 0; k < n_; ++k) m[static_cast<std::size_t>(k)] -= mid();
        return m;
    }

    /// Squared distance of the cell center to the origin, in units of h^2.
    long long sq_radius(std::size_t idx) const {
        const auto o = offset(idx);
        long long s = 0;
        for (int k = 0; k < n_; ++k) s += static_cast<long long>(o[k]) * o[k];
        return s;
    }

    Vec center(std::size_t idx) const {
        const auto o = offset(idx);
        Vec c(n_);
        for (int k = 0; k < n_; ++k) c(k) = o[k] * h_;
        return c;
    }

    std::optional<std::size_t> cell_of(const Vec& x) const {
        if (x.size() != n_) throw DimensionError("grid point has wrong dimension");
        std::array<int, 3> m{0, 0, 0};
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const double i = std::floor(x[k] / h_ + 0.5) + mid();
            if (!(i >= 0) || i >= cells_) return std::nullopt;
            m[static_cast<std::size_t>(k)] = static_cast<int>(i);
        }
        return index(m);
    }

    double value_at(const Vec& x) const {
        const auto c = cell_of(x);
        return c ? v_[*c] : 0.0;
    }

    double mass() const { return cell_volume() * std::accumulate(v_.begin(), v_.end(), 0.0); }

    double max_value() const { return v_.empty() ? 0.0 : *std::max_element(v_.begin(), v_.end()); }

    double lp_norm(double p) const {
        if (std::isinf(p)) return max_value();
        double s = 0.0;
        for (double x : v_) s += std::pow(x, p);
        return std::pow(cell_volume() * s, 1.0 / p);
    }

    double l1_distance(const GridFunction& o) const {
        require_same_grid(o);
        double s = 0.0;
        for (std::size_t i = 0; i < v_.size(); ++i) s += std::abs(v_[i] - o.v_[i]);
        return cell_volume() * s;
    }

    GridFunction with_values(std::vector<double> v) const { return GridFunction(n_, cells_, h_, std::move(v)); }

    void require_same_grid(const GridFunction& o) const {
        if (o.n_ != n_ || o.cells_ != cells_ || o.h_ != h_) throw DimensionError("grid functions on different grids");
    }

    /// Header "n cells h" followed by row-major values, all with 17
    /// significant digits so that reading back is exact.
    void write(std::ostream& os) const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", h_);
        os << n_ << ' ' << cells_ << ' ' << buf << '\n';
        const std::size_t row = static_cast<std::size_t>(cells_);
        for (std::size_t i = 0; i < v_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v_[i]);
            os << buf << ((i + 1) % row == 0 ? '\n' : ' ');
        }
    }

    static GridFunction read(std::istream& is) {
        int n = 0, cells = 0;
        std::string hs;
        if (!(is >> n >> cells >> hs)) throw Error("grid file: bad header, expected \"n cells h\"");
        std::size_t size = 1;
        for (int k = 0; k < n && k < 3; ++k) size *= static_cast<std::size_t>(std::max(cells, 0));
        std::vector<double> v;
        v.reserve(size);
        std::string tok;
        while (is >> tok) v.push_back(parse(tok));
        return GridFunction(n, cells, parse(hs), std::move(v));
    }

private:
    static double parse(const std::string& s) {
        char* end = nullptr;
        const double x = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) throw Error("grid file: cannot parse number '" + s + "'");
        return x;
    }

    int n_, cells_;
    double h_;
    std::vector<double> v_;
};

namespace detail {

// Sort `values` descending and write them to `cells` in the given order.
inline void assign_sorted(std::vector<double>& out, const std::vector<double>& in,
                          const std::vector<std::size_t>& cells) {
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (auto c : cells) vals.push_back(in[c]);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    for (std::size_t k = 0; k < cells.size(); ++k) out[cells[k]] = vals[k];
}

} // namespace detail

/// Symmetric decreasing rearrangement on the grid: values in descending order
/// go to cells in ascending distance of the center to the origin, ties broken
/// by ascending cell index.
inline GridFunction sdr(const GridFunction& g) {
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<long long> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = g.sq_radius(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return r[a] != r[b] ? r[a] < r[b] : a < b;
    });
    std::vector<double> out(g.size());
    detail::assign_sorted(out, g.values(), order);
    return g.with_values(std::move(out));
}

/// One-dimensional sdr applied to every grid line parallel to `axis`.
inline GridFunction steiner_symmetral(const GridFunction& g, int axis) {
    if (axis < 0 || axis >= g.dim()) throw DimensionError("symmetrization axis outside [0, n)");
    const int c = g.cells(), mid = g.mid();
    std::vector<int> line_order(static_cast<std::size_t>(c));
    std::iota(line_order.begin(), line_order.end(), 0);
    std::stable_sort(line_order.begin(), line_order.end(),
                     [&](int a, int b) { return std::abs(a - mid) < std::abs(b - mid); });
    std::vector<double> out(g.size());
    std::vector<std::size_t> cells(static_cast<std::size_t>(c));
    for (std::size_t base = 0; base < g.size(); ++base) {
        auto m = g.multi(base);
        if (m[static_cast<std::size_t>(axis)] != 0) continue;
        for (int k = 0; k < c; ++k) {
            m[static_cast<std::size_t>(axis)] = line_order[static_cast<std::size_t>(k)];
            cells[static_cast<std::size_t>(k)] = g.index(m);
        }
        detail::assign_sorted(out, g.values(), cells);
    }
    return g.with_values(std::move(out));
}

/// Planar symmetrization along the direction (cos theta, sin theta).
///
/// Cells are grouped into strips of width h by the rounded offset of their
/// centers along the normal direction; inside a strip, values are reassigned
/// in descending order by ascending distance to the origin (ties by index).
/// The result is a permutation of the input, so it is exactly equimeasurable.
/// For theta = 0 or pi/2 it coincides with the axis symmetral.
inline GridFunction rotated_symmetral(const GridFunction& g, double theta) {
    if (g.dim() != 2) throw DimensionError("rotated symmetrization needs a planar grid");
    const double px = -std::sin(theta), py = std::cos(theta);
    std::vector<std::pair<long long, std::size_t>> keyed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto o = g.offset(i);
        keyed[i] = {std::llround(o[0] * px + o[1] * py), i};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<double> out(g.size());
    std::vector<std::size_t> cells;
    for (std::size_t s = 0; s < keyed.size();) {
        std::size_t e = s;
        cells.clear();
        while (e < keyed.size() && keyed[e].first == keyed[s].first) cells.push_back(keyed[e++].second);
        std::sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
            const long long ra = g.sq_radius(a), rb = g.sq_radius(b);
            return ra != rb ? ra < rb : a < b;
        });
        detail::assign_sorted(out, g.values(), cells);
        s = e;
    }
    return g.with_values(std::move(out));
}

/// One step of a symmetrization schedule.
struct SymmetrizationStep {
    bool rotated = false;
    int axis = 0;
    double theta = 0.0;

    static SymmetrizationStep along(int axis) { return {false, axis, 0.0}; }
    static SymmetrizationStep direction(double theta) { return {true, 0, theta}; }

    GridFunction apply(const GridFunction& g) const {
        return rotated ? rotated_symmetral(g, theta) : steiner_symmetral(g, axis);
    }
};

struct SymmetrizationResult {
    GridFunction final;
    /// L1 distance to sdr(g): history[0] for the input, history[k] after step k.
    std::vector<double> history;
    /// rotated[k] is true when step k used a non-axis direction.
    std::vector<bool> rotated;
    bool converged = false;
};

/// Applies the schedule cyclically until the L1 distance to sdr(g) drops
/// below tol or max_iter steps have run.
inline SymmetrizationResult iterate_symmetrizations(const GridFunction& g,
                                                    const std::vector<SymmetrizationStep>& schedule,
                                                    double tol, int max_iter) {
    if (schedule.empty()) throw DimensionError("symmetrization schedule is empty");
    const GridFunction target = sdr(g);
    SymmetrizationResult res{g, {g.l1_distance(target)}, {false}, false};
    for (int k = 0; res.history.back() >= tol && k < max_iter; ++k) {
        const auto& step = schedule[static_cast<std::size_t>(k) % schedule.size()];
        res.final = step.apply(res.final);
        res.history.push_back(res.final.l1_distance(target));
        res.rotated.push_back(step.rotated);
    }
    res.converged = res.history.back() < tol;
    return res;
}

} // namespace sdlab::rearrangement
