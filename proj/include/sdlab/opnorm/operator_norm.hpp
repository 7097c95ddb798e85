#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "sdlab/core/error.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"

namespace sdlab::opnorm {

/// An N-dimensional normed space E: either l_q^N or the space whose unit ball
/// is the convex hull of a symmetric vertex list.
class NormedSpace {
public:
    enum class Kind { lq, vball };

    static NormedSpace lq(int N, double q) {
        if (N < 1 || N > kMaxColumns) throw DimensionError("normed space dimension outside [1, 30]");
        if (!(q >= 1.0)) throw DimensionError("l_q needs q >= 1, got " + std::to_string(q));
        NormedSpace e;
        e.kind_ = Kind::lq;
        e.N_ = N;
        e.q_ = q;
        return e;
    }
    static NormedSpace l1(int N) { return lq(N, 1.0); }
    static NormedSpace l2(int N) { return lq(N, 2.0); }
    static NormedSpace linf(int N) { return lq(N, std::numeric_limits<double>::infinity()); }

    static NormedSpace vball(std::vector<Vec> vertices) {
        if (vertices.empty()) throw DimensionError("vertex ball needs vertices");
        const int N = static_cast<int>(vertices.front().size());
        Mat V(N, static_cast<Eigen::Index>(vertices.size()));
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (vertices[i].size() != N) throw DimensionError("vertex ball vertices of unequal dimension");
            V.col(static_cast<Eigen::Index>(i)) = vertices[i];
        }
        if (Eigen::FullPivLU<Mat>(V).rank() < N) throw DegenerateError("vertex ball vertices do not span R^N");
        for (const auto& v : vertices) {
            bool found = false;
            for (const auto& w : vertices) found = found || (v + w).norm() <= 1e-12 * std::max(1.0, v.norm());
            if (!found) throw HypothesisError("vertex ball list is not symmetric");
        }
        NormedSpace e;
        e.kind_ = Kind::vball;
        e.N_ = N;
        e.vertices_ = std::move(vertices);
        return e;
    }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return N_; }
    double q() const noexcept { return q_; }
    const std::vector<Vec>& vertices() const noexcept { return vertices_; }

    /// True when operator_norm uses the multi-start search.
    bool heuristic() const noexcept { return kind_ == Kind::lq && q_ != 1.0 && q_ != 2.0 && !std::isinf(q_); }

    std::string name() const {
        if (kind_ == Kind::vball) return "vball(" + std::to_string(vertices_.size()) + ")";
        if (std::isinf(q_)) return "Linf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "L%g", q_);
        return buf;
    }

private:
    NormedSpace() = default;
    Kind kind_ = Kind::lq;
    int N_ = 1;
    double q_ = 2.0;
    std::vector<Vec> vertices_;
};

/// Largest N for which the l_inf norm enumerates sign vectors.
inline constexpr int kMaxSignColumns = 24;

struct OperatorNorm {
    double value = 0.0;
    /// Set for l_q with q outside {1, 2, inf}: a lower bound found by search.
    bool heuristic = false;
};

namespace detail {

inline double lq_norm(const Vec& c, double q) {
    if (std::isinf(q)) return c.cwiseAbs().maxCoeff();
    return std::pow(c.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

// Maximizer of <g, c> over the l_q ball.
inline Vec lq_dual_direction(const Vec& g, double q) {
    const double qs = q / (q - 1.0);
    Vec c = g.cwiseSign().cwiseProduct(g.cwiseAbs().array().pow(qs - 1.0).matrix());
    const double nc = lq_norm(c, q);
    return nc > 0 ? Vec(c / nc) : c;
}

inline double lq_search(const Mat& X, double q) {
    const int N = static_cast<int>(X.cols());
    RngStream rng(0x0A7E5EA2C4ull, static_cast<std::uint64_t>(N));
    const Mat G = X.transpose() * X;
    double best = 0.0;
    Vec c(N);
    for (int start = 0; start < 32; ++start) {
        for (int i = 0; i < N; ++i) c(i) = rng.normal();
        c /= lq_norm(c, q);
        // ascent by linear maximization: ||Xc|| is convex, so each step cannot decrease it
        double prev = -1.0;
        for (int it = 0; it < 500; ++it) {
            const double val = (X * c).norm();
            if (val <= prev * (1.0 + 1e-14)) break;
            prev = val;
            const Vec g = G * c;
            if (g.norm() == 0.0) break;
            c = lq_dual_direction(g, q);
        }
        best = std::max(best, (X * c).norm());
    }
    for (int k = 0; k < 10000; ++k) {
        for (int i = 0; i < N; ++i) c(i) = rng.normal();
        best = std::max(best, (X * c).norm() / lq_norm(c, q));
    }
    return best;
}

} // namespace detail

/// ||X : E -> l_2^n||, the largest ||X c||_2 over the unit ball of E.
inline OperatorNorm operator_norm_ex(const Matrix& X, const NormedSpace& E) {
    const Mat& A = X.data();
    const int N = X.N();
    if (E.dim() != N)
        throw DimensionError("normed space of dimension " + std::to_string(E.dim()) + " for a matrix with " +
                             std::to_string(N) + " columns");
    if (E.kind() == NormedSpace::Kind::vball) {
        double best = 0.0;
        for (const auto& v : E.vertices()) best = std::max(best, (A * v).norm());
        return {best, false};
    }
    const double q = E.q();
    if (q == 1.0) return {A.colwise().norm().maxCoeff(), false};
    if (q == 2.0) return {Eigen::JacobiSVD<Mat>(A).singularValues()(0), false};
    if (std::isinf(q)) {
        if (N > kMaxSignColumns)
            throw DimensionError("sign enumeration cap 24 exceeded: N=" + std::to_string(N));
        // Gray-code walk over the 2^{N-1} sign vectors with s_0 = +1
        Vec v = A.rowwise().sum();
        std::vector<int> s(static_cast<std::size_t>(N), 1);
        double best = v.norm();
        const long count = 1L << (N - 1);
        for (long k = 1; k < count; ++k) {
            const int j = 1 + __builtin_ctzl(static_cast<unsigned long>(k));
            v -= 2.0 * s[static_cast<std::size_t>(j)] * A.col(j);
            s[static_cast<std::size_t>(j)] = -s[static_cast<std::size_t>(j)];
            best = std::max(best, v.norm());
        }
        return {best, false};
    }
    return {detail::lq_search(A, q), true};
}

inline double operator_norm(const Matrix& X, const NormedSpace& E) { return operator_norm_ex(X, E).value; }

} // namespace sdlab::opnorm
