#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/geometry/body.hpp"
#include "sdlab/geometry/coefficient_set.hpp"

namespace sdlab::geometry {

/// The random body XC = {sum_i c_i x_i : c in C}.
///
/// Simplex -> VPolytope of the columns (plus the origin for
/// SimplexWithOrigin); CrossPolytope -> SymmetricCrossHull; Cube -> Zonotope;
/// GenericV -> VPolytope of X c over the vertices c of C; everything else ->
/// SupportOracle with h(u) = h_C(X^T u), which for the l_q ball is the dual
/// l_p norm and for the Orlicz ball polar is the Orlicz norm of X^T u.
inline Body realize(const Matrix& X, const CoefficientSet& C) {
    if (C.dim() != X.N())
        throw DimensionError("coefficient set has dimension " + std::to_string(C.dim()) +
                             " but the matrix has " + std::to_string(X.N()) + " columns");
    const int n = X.n(), N = X.N();
    std::vector<Vec> cols;
    cols.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) cols.push_back(X.column(i));
    using K = CoefficientSet::Kind;
    switch (C.kind()) {
    case K::simplex: return Body::vpolytope(std::move(cols));
    case K::simplex_with_origin:
        cols.push_back(Vec::Zero(n));
        return Body::vpolytope(std::move(cols));
    case K::cross_polytope: return Body::cross_hull(std::move(cols));
    case K::cube: return Body::zonotope(std::move(cols));
    case K::generic_v: {
        std::vector<Vec> pts;
        for (const auto& c : C.generic_vertices()) pts.push_back(X.data() * c);
        return Body::vpolytope(std::move(pts));
    }
    default: break;
    }
    // |c_i| <= max(h_C(e_i), h_C(-e_i)) bounds |Xc| by a weighted column sum.
    double R = 0.0;
    for (int i = 0; i < N; ++i) {
        const double ci = std::max(C.support(unit(N, i)), C.support(-unit(N, i)));
        R += std::abs(ci) * cols[i].norm();
    }
    const Mat Xt = X.data().transpose();
    return Body::support_oracle(
        n, [C, Xt](const Vec& u) { return C.support(Xt * u); }, R, "X" + C.name());
}

} // namespace sdlab::geometry
