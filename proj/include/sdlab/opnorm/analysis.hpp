#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/QR>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"
#include "sdlab/core/parallel.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/core/types.hpp"
#include "sdlab/dominance/ensemble.hpp"
#include "sdlab/models/density.hpp"
#include "sdlab/opnorm/operator_norm.hpp"

namespace sdlab::opnorm {

using models::Density;

/// ||X : E -> l_2^n|| for X against X* and Z; the claim is that X is
/// stochastically largest (its lower tail is the lightest).
inline dominance::DominanceExperiment op_norm_dominance(const std::vector<Density>& fs, const NormedSpace& E,
                                                        std::size_t m, double delta, const RngStream& rng,
                                                        int workers = 1) {
    return dominance::dominance_experiment(fs, dominance::FunctionalSpec::operator_norm(E), m, delta, rng, workers);
}

struct SmallBallRow {
    double eps = 0.0;
    /// NaN when no X ensemble was requested.
    double p_x = std::numeric_limits<double>::quiet_NaN();
    double p_z = 0.0;
    /// Reference or bound curve at eps (NaN if none).
    double bound = std::numeric_limits<double>::quiet_NaN();
    /// Wilson 95% interval for p_z.
    double wilson_lo = 0.0, wilson_hi = 1.0;
    std::size_t hits_z = 0;
};

struct SmallBallCurve {
    std::vector<SmallBallRow> rows;
    /// Least-squares slope of log p_z against log eps over resolvable rows
    /// (at least 20 hits and p_z < 1); NaN with fewer than two such rows.
    double slope = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_eps(const std::vector<double>& eps) {
    if (eps.empty()) throw DimensionError("epsilon grid is empty");
    for (double e : eps)
        if (!(e > 0.0 && e <= 1.0)) throw DimensionError("epsilon grid outside (0, 1]: " + std::to_string(e));
}

inline double loglog_slope(const std::vector<SmallBallRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& r : rows) {
        if (r.hits_z < 20 || r.p_z >= 1.0) continue;
        const double x = std::log(r.eps), y = std::log(r.p_z);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++k;
    }
    if (k < 2) return std::numeric_limits<double>::quiet_NaN();
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

} // namespace detail

/// Empirical P(||Z : E -> l_2^n|| <= eps sqrt(N)) for Z with columns
/// uniform on the centered ball of volume one. With fs, the same for X. The
/// reference curve (c eps)^{nN-1} is added when c is given.
inline SmallBallCurve small_ball_curve(int n, int N, const NormedSpace& E, const std::vector<double>& eps,
                                       std::size_t m, const RngStream& rng, const std::vector<Density>& fs = {},
                                       double c = std::numeric_limits<double>::quiet_NaN(), int workers = 1) {
    detail::check_eps(eps);
    if (E.dim() != N) throw DimensionError("normed space dimension differs from N");
    if (!fs.empty() && (static_cast<int>(fs.size()) != N || fs.front().dim() != n))
        throw DimensionError("small-ball densities must be N densities on R^n");
    const std::vector<Density> zs(static_cast<std::size_t>(N), Density::uniform_unit_volume_ball(n));
    std::vector<double> nz(m), nx(fs.empty() ? 0 : m);
    parallel_for(m, workers, [&](std::size_t i) {
        RngStream r = rng.substream(i);
        nz[i] = operator_norm(models::sample_matrix(zs, r), E);
        if (!fs.empty()) nx[i] = operator_norm(models::sample_matrix(fs, r), E);
    });
    std::sort(nz.begin(), nz.end());
    std::sort(nx.begin(), nx.end());
    SmallBallCurve out;
    for (double e : eps) {
        SmallBallRow row;
        row.eps = e;
        const double t = e * std::sqrt(static_cast<double>(N));
        row.hits_z = static_cast<std::size_t>(std::upper_bound(nz.begin(), nz.end(), t) - nz.begin());
        row.p_z = static_cast<double>(row.hits_z) / static_cast<double>(m);
        std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(row.hits_z, m);
        if (!fs.empty())
            row.p_x = static_cast<double>(std::upper_bound(nx.begin(), nx.end(), t) - nx.begin()) / static_cast<double>(m);
        if (!std::isnan(c)) row.bound = std::pow(c * e, n * N - 1);
        out.rows.push_back(row);
    }
    out.slope = detail::loglog_slope(out.rows);
    return out;
}

/// (2 sqrt(pi e) eps)^k.
inline double marginal_bound(double eps, int k) {
    return std::pow(2.0 * std::sqrt(std::numbers::pi * std::numbers::e) * eps, k);
}

struct MarginalSmallBall {
    /// p_x, p_z, bound per eps; the Wilson interval is for p_x.
    std::vector<SmallBallRow> rows;
    /// DKW half-width at (m, delta).
    double dkw = 0.0;
    /// p_x <= p_z + 2 dkw and p_z <= bound + 2 dkw on every row.
    bool x_below_cube = true;
    bool cube_below_bound = true;
};

/// For x with independent coordinates x_j ~ fs[j] and z uniform on the cube
/// [-1/2, 1/2]^N, and a fresh uniformly random k-dimensional subspace E per
/// replica, estimates P(||P_E x|| <= eps sqrt(k)) and P(||P_E z|| <= eps sqrt(k)).
inline MarginalSmallBall marginal_small_ball(int N, int k, const std::vector<double>& eps, const std::vector<Density>& fs,
                                             std::size_t m, const RngStream& rng, double delta = 0.01,
                                             int workers = 1) {
    detail::check_eps(eps);
    if (k < 1 || k > N) throw DimensionError("subspace dimension k must be in [1, N]");
    if (static_cast<int>(fs.size()) != N) throw DimensionError("marginal_small_ball needs N one-dimensional densities");
    for (const auto& f : fs) {
        if (f.dim() != 1) throw DimensionError("marginal_small_ball needs one-dimensional densities");
        if (f.sup_bound() > 1.0 + 1e-12)
            throw HypothesisError("marginal_small_ball needs density bounds <= 1; " + f.name() + " has " +
                                  std::to_string(f.sup_bound()));
    }
    std::vector<double> px(m), pz(m);
    parallel_for(m, workers, [&](std::size_t i) {
        RngStream r = rng.substream(i);
        Mat G(N, k);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < k; ++b) G(a, b) = r.normal();
        const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ() * Mat::Identity(N, k);
        Vec x(N), z(N);
        for (int a = 0; a < N; ++a) {
            x(a) = fs[static_cast<std::size_t>(a)].sample(r)(0);
            z(a) = r.uniform() - 0.5;
        }
        px[i] = (Q.transpose() * x).norm();
        pz[i] = (Q.transpose() * z).norm();
    });
    std::sort(px.begin(), px.end());
    std::sort(pz.begin(), pz.end());
    MarginalSmallBall out;
    out.dkw = dkw_epsilon(m, delta);
    for (double e : eps) {
        SmallBallRow row;
        row.eps = e;
        const double t = e * std::sqrt(static_cast<double>(k));
        const auto hx = static_cast<std::size_t>(std::upper_bound(px.begin(), px.end(), t) - px.begin());
        row.hits_z = static_cast<std::size_t>(std::upper_bound(pz.begin(), pz.end(), t) - pz.begin());
        row.p_x = static_cast<double>(hx) / static_cast<double>(m);
        row.p_z = static_cast<double>(row.hits_z) / static_cast<double>(m);
        row.bound = marginal_bound(e, k);
        std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(hx, m);
        out.x_below_cube = out.x_below_cube && row.p_x <= row.p_z + 2.0 * out.dkw;
        out.cube_below_bound = out.cube_below_bound && row.p_z <= row.bound + 2.0 * out.dkw;
        out.rows.push_back(row);
    }
    return out;
}

struct NegativeMoment {
    /// (E ||Z||^{-(nN-1)})^{1/(nN-1)} for the spectral norm.
    Estimate moment;
    /// moment * sqrt(N) / e, the constant that would make the bound tight.
    double fitted_c1 = 0.0;
};

/// Reported only: the heavy negative moment has infinite variance at the
/// critical order, so the error is a plain sample standard error.
inline NegativeMoment negative_moment_report(int n, int N, std::size_t m, const RngStream& rng) {
    const int q = n * N - 1;
    if (q < 1 || q > 8) throw DimensionError("negative moment report needs 1 <= nN-1 <= 8");
    const std::vector<Density> zs(static_cast<std::size_t>(N), Density::uniform_unit_volume_ball(n));
    const auto E = NormedSpace::l2(N);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        RngStream r = rng.substream(i);
        const double v = std::pow(operator_norm(models::sample_matrix(zs, r), E), -q);
        s += v;
        s2 += v * v;
    }
    const double mean = s / m, se = std::sqrt(std::max(0.0, s2 / m - mean * mean) / m);
    const double val = std::pow(mean, 1.0 / q);
    NegativeMoment out;
    out.moment = {val, val / q * se / mean};
    out.fitted_c1 = val * std::sqrt(static_cast<double>(N)) / std::numbers::e;
    return out;
}

struct VolumeRatio {
    /// V_d(C)^{1/d} for the unit ball C of ||. : E -> l_2^n|| in R^{nN}, d = nN.
    Estimate root_volume;
    /// root_volume * sqrt(N).
    double scaled = 0.0;
};

/// Reported only: V_d(C) = omega_d E[||theta||^{-d}] for theta uniform on the
/// unit sphere of R^{nN}.
inline VolumeRatio volume_ratio_report(int n, const NormedSpace& E, std::size_t m, const RngStream& rng) {
    const int N = E.dim(), d = n * N;
    if (n > 4 || N > 4) throw DimensionError("volume ratio report supports n, N <= 4");
    double s = 0.0, s2 = 0.0;
    Mat T(n, N);
    for (std::size_t i = 0; i < m; ++i) {
        RngStream r = rng.substream(i);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < N; ++b) T(a, b) = r.normal();
        T /= T.norm();
        const double v = std::pow(operator_norm(Matrix(T), E), -d);
        s += v;
        s2 += v * v;
    }
    const double mean = s / m, se = std::sqrt(std::max(0.0, s2 / m - mean * mean) / m);
    const double vol = unit_ball_volume(d) * mean;
    const double root = std::pow(vol, 1.0 / d);
    VolumeRatio out;
    out.root_volume = {root, root / d * se / mean};
    out.scaled = root * std::sqrt(static_cast<double>(N));
    return out;
}

} // namespace sdlab::opnorm
