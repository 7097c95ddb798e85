#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/math.hpp"

namespace sdlab::dominance {

/// 64-bit FNV-1a over the bytes of a double sequence, in hex.
inline std::string digest_of(const std::vector<double>& v, const std::string& salt = {}) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto eat = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ull;
    };
    for (char c : salt) eat(static_cast<unsigned char>(c));
    for (double x : v) {
        unsigned char b[sizeof(double)];
        std::memcpy(b, &x, sizeof b);
        for (auto c : b) eat(c);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Sorted sample of a real random variable.
class EmpiricalDistribution {
public:
    /// `systematic` bounds the error of each sample value from inner
    /// numerical evaluation (0 when the functional is exact).
    EmpiricalDistribution(std::vector<double> values, std::string config_digest = {}, double systematic = 0.0)
        : v_(std::move(values)), config_(std::move(config_digest)), systematic_(systematic) {
        if (v_.size() < 100)
            throw DimensionError("empirical distribution needs at least 100 samples, got " + std::to_string(v_.size()));
        for (double x : v_)
            if (std::isnan(x)) throw DimensionError("empirical distribution with NaN sample");
        std::sort(v_.begin(), v_.end());
    }

    const std::vector<double>& values() const noexcept { return v_; }
    std::size_t size() const noexcept { return v_.size(); }
    const std::string& config_digest() const noexcept { return config_; }
    double systematic() const noexcept { return systematic_; }
    /// Digest of the sorted sample and the config digest.
    std::string digest() const { return digest_of(v_, config_); }

    double mean() const {
        double s = 0.0;
        for (double x : v_) s += x;
        return s / static_cast<double>(v_.size());
    }

    /// Standard error of the mean.
    double stderr_mean() const {
        const double m = mean();
        double s = 0.0;
        for (double x : v_) s += (x - m) * (x - m);
        const double n = static_cast<double>(v_.size());
        return std::sqrt(s / (n - 1.0) / n);
    }

    /// Fraction of samples > a.
    double survival(double a) const {
        const auto it = std::upper_bound(v_.begin(), v_.end(), a);
        return static_cast<double>(v_.end() - it) / static_cast<double>(v_.size());
    }

    /// Fraction of samples <= a.
    double cdf(double a) const { return 1.0 - survival(a); }

private:
    std::vector<double> v_;
    std::string config_;
    double systematic_;
};

enum class Direction {
    /// P(A > a) >= P(B > a) for all a.
    a_ge_b,
    /// P(A > a) <= P(B > a) for all a.
    a_le_b
};

enum class Verdict { consistent, violated, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

inline const char* direction_name(Direction d) { return d == Direction::a_ge_b ? "A>=B" : "A<=B"; }

struct DominanceReport {
    std::vector<double> alpha;
    std::vector<double> survival_a, survival_b;
    /// Oriented so that the claimed order means margin >= 0.
    std::vector<double> margin;
    /// DKW half-width sqrt(ln(2/delta) / (2m)) for the smaller sample.
    double epsilon = 0.0;
    double delta = 0.01;
    /// Systematic band in functional units (inner numerical error).
    double systematic = 0.0;
    Direction direction = Direction::a_ge_b;
    Verdict verdict = Verdict::consistent;
    /// Grid points with margin < -2 epsilon even after the systematic shift.
    std::vector<double> violated_at;
    double min_margin = 0.0;
    std::size_t m_a = 0, m_b = 0;
};

/// Merged quantile grid of both samples, at most `max_points` points.
inline std::vector<double> merged_quantile_grid(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                                                std::size_t max_points = 512) {
    std::vector<double> all;
    all.reserve(a.size() + b.size());
    std::merge(a.values().begin(), a.values().end(), b.values().begin(), b.values().end(), std::back_inserter(all));
    all.erase(std::unique(all.begin(), all.end()), all.end());
    if (all.size() <= max_points) return all;
    std::vector<double> g;
    g.reserve(max_points);
    for (std::size_t k = 0; k < max_points; ++k) {
        const auto idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(all.size() - 1) / static_cast<double>(max_points - 1)));
        if (g.empty() || all[idx] != g.back()) g.push_back(all[idx]);
    }
    return g;
}

/// Compares survival functions on the merged quantile grid. A crossing of
/// more than 2 epsilon is "violated" if it survives shifting both curves by
/// the systematic band in the favourable direction, and "inconclusive"
/// otherwise.
inline DominanceReport check_dominance(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                                       Direction dir, double delta = 0.01) {
    if (!(delta > 0.0 && delta < 1.0)) throw DimensionError("delta must be in (0, 1)");
    DominanceReport r;
    r.delta = delta;
    r.direction = dir;
    r.m_a = a.size();
    r.m_b = b.size();
    r.epsilon = dkw_epsilon(std::min(a.size(), b.size()), delta);
    r.systematic = std::max(a.systematic(), b.systematic());
    r.alpha = merged_quantile_grid(a, b);
    const double s = r.systematic;
    const double sign = dir == Direction::a_ge_b ? 1.0 : -1.0;
    r.min_margin = std::numeric_limits<double>::infinity();
    bool crossing = false;
    for (double al : r.alpha) {
        const double sa = a.survival(al), sb = b.survival(al);
        const double m = sign * (sa - sb);
        r.survival_a.push_back(sa);
        r.survival_b.push_back(sb);
        r.margin.push_back(m);
        r.min_margin = std::min(r.min_margin, m);
        if (m < -2.0 * r.epsilon) {
            crossing = true;
            // most favourable placement of the curves within the systematic band
            const double shifted = dir == Direction::a_ge_b ? a.survival(al - s) - b.survival(al + s)
                                                            : b.survival(al - s) - a.survival(al + s);
            if (shifted < -2.0 * r.epsilon) r.violated_at.push_back(al);
        }
    }
    if (!r.violated_at.empty())
        r.verdict = Verdict::violated;
    else if (crossing)
        r.verdict = Verdict::inconclusive;
    return r;
}

} // namespace sdlab::dominance
