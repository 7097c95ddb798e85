#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/parallel.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/dominance/empirical.hpp"
#include "sdlab/geometry/coefficient_set.hpp"
#include "sdlab/geometry/functionals.hpp"
#include "sdlab/geometry/radial_measure.hpp"
#include "sdlab/geometry/realize.hpp"
#include "sdlab/models/density.hpp"
#include "sdlab/opnorm/operator_norm.hpp"

namespace sdlab::dominance {

using geometry::Body;
using geometry::CoefficientSet;
using geometry::RadialMeasure;
using models::Density;
using opnorm::NormedSpace;

/// A functional of the random body built from a sample matrix X.
struct FunctionalSpec {
    enum class Kind { volume, intrinsic, diameter, mean_width, polar_measure, operator_norm };
    enum class Construct { realize, ball_intersection };

    Kind kind = Kind::volume;
    int j = 0;
    std::optional<RadialMeasure> nu;
    std::optional<NormedSpace> E;
    Construct construct = Construct::realize;
    std::optional<CoefficientSet> C;
    double radius = 1.0;
    /// Budget for Monte Carlo inside a replica (oracle-body volumes).
    std::size_t inner_samples = 100000;

    static FunctionalSpec volume(CoefficientSet C) { return make(Kind::volume, std::move(C)); }
    static FunctionalSpec intrinsic(int j, CoefficientSet C) {
        auto s = make(Kind::intrinsic, std::move(C));
        s.j = j;
        return s;
    }
    static FunctionalSpec diameter(CoefficientSet C) { return make(Kind::diameter, std::move(C)); }
    static FunctionalSpec mean_width(CoefficientSet C) { return make(Kind::mean_width, std::move(C)); }
    static FunctionalSpec polar_measure(RadialMeasure nu, CoefficientSet C) {
        auto s = make(Kind::polar_measure, std::move(C));
        s.nu = std::move(nu);
        return s;
    }
    static FunctionalSpec operator_norm(NormedSpace E) {
        FunctionalSpec s;
        s.kind = Kind::operator_norm;
        s.E = std::move(E);
        return s;
    }
    /// kind in {volume, intrinsic, diameter, mean_width} of the intersection
    /// of the balls of radius r about the columns.
    static FunctionalSpec ball_intersection(Kind kind, double r, int j = 0) {
        if (kind == Kind::polar_measure || kind == Kind::operator_norm)
            throw DimensionError("ball intersections support volume, intrinsic, diameter and mean_width");
        FunctionalSpec s;
        s.kind = kind;
        s.j = j;
        s.construct = Construct::ball_intersection;
        s.radius = r;
        return s;
    }

    std::string name() const {
        std::string k;
        switch (kind) {
        case Kind::volume: k = "volume"; break;
        case Kind::intrinsic: k = "V" + std::to_string(j); break;
        case Kind::diameter: k = "diameter"; break;
        case Kind::mean_width: k = "mean_width"; break;
        case Kind::polar_measure: k = "polar_" + nu->name(); break;
        case Kind::operator_norm: return "opnorm_" + E->name();
        }
        if (construct == Construct::ball_intersection) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "(ball_intersection r=%.6g)", radius);
            return k + buf;
        }
        return k + "(" + C->name() + ")";
    }

    /// Larger values are "better" for X: the claimed order of survival
    /// functions between X and its rearranged/ball counterpart.
    Direction natural_direction() const {
        if (kind == Kind::polar_measure || construct == Construct::ball_intersection) return Direction::a_le_b;
        return Direction::a_ge_b;
    }

    void validate(int n, int N) const {
        if (kind == Kind::operator_norm) {
            if (!E) throw DimensionError("operator_norm functional without a normed space");
            if (E->dim() != N) throw DimensionError("normed space dimension differs from N");
            return;
        }
        if (construct == Construct::realize) {
            if (!C) throw DimensionError("functional without a coefficient set");
            if (C->dim() != N)
                throw DimensionError("coefficient set dimension " + std::to_string(C->dim()) + " differs from N=" +
                                     std::to_string(N));
        } else if (!(radius > 0)) {
            throw DimensionError("ball intersection radius must be positive");
        }
        if (kind == Kind::intrinsic && (j < 1 || j > n))
            throw DimensionError("intrinsic volume index j=" + std::to_string(j) + " outside [1, " +
                                 std::to_string(n) + "]");
        if (kind == Kind::polar_measure) {
            if (!nu) throw DimensionError("polar_measure functional without a measure");
            if (nu->dim() != n) throw DimensionError("measure dimension differs from n");
            if (!C->symmetric()) throw HypothesisError("polar_measure requires a symmetric coefficient set, got " + C->name());
        }
    }

    Body body(const Matrix& X) const {
        if (construct == Construct::ball_intersection) {
            std::vector<Vec> cols;
            for (int i = 0; i < X.N(); ++i) cols.push_back(X.column(i));
            return Body::ball_intersection(std::move(cols), radius);
        }
        return geometry::realize(X, *C);
    }

    /// Value with its numerical error (0 for exact evaluations).
    Estimate evaluate(const Matrix& X, const RngStream& inner) const {
        if (kind == Kind::operator_norm) return {opnorm::operator_norm(X, *E)};
        const Body K = body(X);
        const geometry::MonteCarlo mc{inner_samples, inner};
        switch (kind) {
        case Kind::volume: return geometry::volume(K, mc);
        case Kind::intrinsic: return geometry::intrinsic_volume(K, j, mc);
        case Kind::diameter: return {geometry::diameter(K)};
        case Kind::mean_width: return {geometry::mean_width(K)};
        case Kind::polar_measure: return geometry::measure(*nu, geometry::polar(K), mc);
        default: break;
        }
        throw UnsupportedError("functional kind");
    }

private:
    static FunctionalSpec make(Kind k, CoefficientSet C) {
        FunctionalSpec s;
        s.kind = k;
        s.C = std::move(C);
        return s;
    }
};

enum class Ensemble { X, Xstar, Z };

inline const char* ensemble_name(Ensemble e) {
    switch (e) {
    case Ensemble::X: return "X";
    case Ensemble::Xstar: return "Xstar";
    case Ensemble::Z: return "Z";
    }
    return "?";
}

/// Throws HypothesisError naming the first column whose density bound
/// exceeds 1, which the Z comparison requires.
inline void require_unit_sup(const std::vector<Density>& fs) {
    for (std::size_t i = 0; i < fs.size(); ++i)
        if (fs[i].sup_bound() > 1.0 + 1e-12)
            throw HypothesisError("Z ensemble requires density bounds <= 1; column " + std::to_string(i) + " (" +
                                  fs[i].name() + ") has bound " + std::to_string(fs[i].sup_bound()));
}

/// Column laws of an ensemble: fs itself, their rearrangements, or uniform
/// laws on the centered ball of volume one.
inline std::vector<Density> ensemble_densities(const std::vector<Density>& fs, Ensemble e) {
    if (fs.empty()) throw DimensionError("ensemble needs at least one density");
    std::vector<Density> out;
    switch (e) {
    case Ensemble::X: return fs;
    case Ensemble::Xstar:
        for (const auto& f : fs) out.push_back(models::rearranged(f));
        return out;
    case Ensemble::Z:
        require_unit_sup(fs);
        for (const auto& f : fs) out.push_back(Density::uniform_unit_volume_ball(f.dim()));
        return out;
    }
    return out;
}

/// m independent replicas of the functional. Replica i draws its matrix from
/// rng.substream(i), so the result does not depend on `workers`.
inline EmpiricalDistribution run_ensemble(const std::vector<Density>& fs, Ensemble e, const FunctionalSpec& spec,
                                          std::size_t m, const RngStream& rng, int workers = 1) {
    const auto ds = ensemble_densities(fs, e);
    const int n = ds.front().dim(), N = static_cast<int>(ds.size());
    spec.validate(n, N);
    std::vector<double> vals(m), errs(m);
    parallel_for(m, workers, [&](std::size_t i) {
        RngStream r = rng.substream(i);
        const Matrix X = models::sample_matrix(ds, r);
        const auto est = spec.evaluate(X, r.substream(1));
        vals[i] = est.value;
        errs[i] = est.error;
    });
    double sys = 0.0;
    for (double x : errs) sys = std::max(sys, x);
    char salt[160];
    std::snprintf(salt, sizeof salt, "%s|%s|n=%d|N=%d|m=%zu|seed=%llu|index=%llu", ensemble_name(e), spec.name().c_str(),
                  n, N, m, static_cast<unsigned long long>(rng.seed()), static_cast<unsigned long long>(rng.index()));
    std::string config = salt;
    for (const auto& f : fs) config += "|" + f.name();
    return EmpiricalDistribution(std::move(vals), digest_of({}, config), 3.0 * sys);
}

/// X against X*, and X against Z when the theorem covers it.
struct DominanceExperiment {
    EmpiricalDistribution x, xstar;
    std::optional<EmpiricalDistribution> z;
    DominanceReport x_vs_xstar;
    std::optional<DominanceReport> x_vs_z;
    /// Why the Z comparison was skipped or is outside the theorem, if so.
    std::string z_note;
};

/// The X-vs-Z comparison is covered for unconditional C (or operator norms
/// and ball intersections) with all density bounds <= 1.
inline std::string z_coverage_note(const std::vector<Density>& fs, const FunctionalSpec& spec) {
    for (const auto& f : fs)
        if (f.sup_bound() > 1.0 + 1e-12) return "density bound exceeds 1";
    if (spec.construct == FunctionalSpec::Construct::realize && spec.kind != FunctionalSpec::Kind::operator_norm &&
        !spec.C->unconditional())
        return "coefficient set " + spec.C->name() + " is not unconditional";
    return {};
}

inline DominanceExperiment dominance_experiment(const std::vector<Density>& fs, const FunctionalSpec& spec,
                                                std::size_t m, double delta, const RngStream& rng, int workers = 1,
                                                bool force_z = false) {
    const Direction dir = spec.natural_direction();
    auto x = run_ensemble(fs, Ensemble::X, spec, m, rng.substream(0), workers);
    auto xs = run_ensemble(fs, Ensemble::Xstar, spec, m, rng.substream(1), workers);
    auto rep = check_dominance(x, xs, dir, delta);
    DominanceExperiment out{std::move(x), std::move(xs), std::nullopt, std::move(rep), std::nullopt, {}};
    out.z_note = z_coverage_note(fs, spec);
    bool sup_ok = true;
    for (const auto& f : fs) sup_ok = sup_ok && f.sup_bound() <= 1.0 + 1e-12;
    if (sup_ok && (out.z_note.empty() || force_z)) {
        out.z = run_ensemble(fs, Ensemble::Z, spec, m, rng.substream(2), workers);
        out.x_vs_z = check_dominance(out.x, *out.z, dir, delta);
    }
    return out;
}

struct MeanComparison {
    double mean_a = 0.0, mean_b = 0.0;
    /// sqrt(se_a^2 + se_b^2).
    double pooled_stderr = 0.0;
    /// mean_a - mean_b oriented like `direction`.
    double difference = 0.0;
    bool consistent = true;
};

/// Expectation form of a dominance claim: consistent unless the oriented
/// difference of means is below -k pooled standard errors.
inline MeanComparison compare_means(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                                    Direction dir = Direction::a_ge_b, double k = 3.0) {
    MeanComparison c;
    c.mean_a = a.mean();
    c.mean_b = b.mean();
    c.pooled_stderr = std::hypot(a.stderr_mean(), b.stderr_mean());
    c.difference = (dir == Direction::a_ge_b ? 1.0 : -1.0) * (c.mean_a - c.mean_b);
    c.consistent = c.difference >= -k * c.pooled_stderr;
    return c;
}

} // namespace sdlab::dominance
