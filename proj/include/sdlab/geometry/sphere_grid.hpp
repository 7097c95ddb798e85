#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/types.hpp"

namespace sdlab::geometry {

/// Default number of sphere directions for grid-based functionals.
inline int default_sphere_grid_size(int n) { return n <= 3 ? 2048 : 8192; }

/// Deterministic, nearly uniform direction set on S^{n-1}.
///
/// n = 1: {+1, -1}. n = 2: equally spaced angles. n = 3: Fibonacci lattice.
/// n >= 4: Halton points pushed through the normal quantile and normalized.
/// Averages over the grid approximate the normalized surface measure.
inline std::vector<Vec> sphere_grid(int n, int count = 0) {
    if (n < 1 || n > kMaxDim) throw DimensionError("sphere grid dimension outside [1, 6]");
    if (count <= 0) count = default_sphere_grid_size(n);
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    dirs.reserve(static_cast<std::size_t>(count));
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * k / count;
            Vec u(2);
            u << std::cos(t), std::sin(t);
            dirs.push_back(u);
        }
        return dirs;
    }
    if (n == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double t = golden * k;
            Vec u(3);
            u << r * std::cos(t), r * std::sin(t), z;
            dirs.push_back(u);
        }
        return dirs;
    }
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13};
    for (int k = 1; k <= count; ++k) {
        Vec u(n);
        for (int d = 0; d < n; ++d) {
            double f = 1.0, r = 0.0;
            for (int i = k; i > 0; i /= primes[d]) {
                f /= primes[d];
                r += f * (i % primes[d]);
            }
            u(d) = normal_quantile(r);
        }
        dirs.push_back(u / u.norm());
    }
    return dirs;
}

} // namespace sdlab::geometry
