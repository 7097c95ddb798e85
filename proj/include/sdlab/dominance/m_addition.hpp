#pragma once

#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/dominance/empirical.hpp"
#include "sdlab/dominance/ensemble.hpp"

namespace sdlab::dominance {

/// How each random body is formed from its points: conv{X_i} or conv{+-X_i}.
enum class PartShape { hull, symmetric_hull };

/// Coefficient set of K_{N1} (+)_M L_{N2} for the block matrix [X1 X2].
inline CoefficientSet m_addition_set(const CoefficientSet& M, int N1, int N2, PartShape shape) {
    if (M.dim() != 2) throw DimensionError("M must lie in R^2, got dimension " + std::to_string(M.dim()));
    const bool sym = shape == PartShape::symmetric_hull;
    if (!M.positive_orthant() && !(sym && M.unconditional()))
        throw HypothesisError("invalid M: it must lie in the positive orthant, or be unconditional with symmetric parts");
    auto part = [&](int N) { return sym ? CoefficientSet::cross_polytope(N) : CoefficientSet::simplex(N); };
    return CoefficientSet::m_combination(M, {part(N1), part(N2)});
}

/// V_j(K_{N1} (+)_M L_{N2}) for N1 columns from fK and N2 from fL.
inline EmpiricalDistribution m_addition_sample(const Density& fK, const Density& fL, const CoefficientSet& M, int N1,
                                               int N2, int j, std::size_t m, const RngStream& rng,
                                               PartShape shape = PartShape::hull, int workers = 1,
                                               Ensemble e = Ensemble::X) {
    if (fK.dim() != fL.dim()) throw DimensionError("M-addition of bodies in different dimensions");
    std::vector<Density> fs(static_cast<std::size_t>(N1), fK);
    fs.insert(fs.end(), static_cast<std::size_t>(N2), fL);
    const auto C = m_addition_set(M, N1, N2, shape);
    const auto spec = j == fK.dim() ? FunctionalSpec::volume(C) : FunctionalSpec::intrinsic(j, C);
    return run_ensemble(fs, e, spec, m, rng, workers);
}

struct MAdditionExperiment {
    EmpiricalDistribution x, balls;
    DominanceReport report;
};

/// Compares V_j(K_{N1} (+)_M L_{N2}) with the same construction from the
/// centered balls of volumes V(K) and V(L); the claim is that the former is
/// stochastically larger.
inline MAdditionExperiment m_addition_experiment(const Density& fK, const Density& fL, const CoefficientSet& M, int N1,
                                                 int N2, int j, std::size_t m, double delta, const RngStream& rng,
                                                 PartShape shape = PartShape::hull, int workers = 1) {
    auto x = m_addition_sample(fK, fL, M, N1, N2, j, m, rng.substream(0), shape, workers, Ensemble::X);
    auto b = m_addition_sample(fK, fL, M, N1, N2, j, m, rng.substream(1), shape, workers, Ensemble::Xstar);
    auto rep = check_dominance(x, b, Direction::a_ge_b, delta);
    return {std::move(x), std::move(b), std::move(rep)};
}

} // namespace sdlab::dominance
