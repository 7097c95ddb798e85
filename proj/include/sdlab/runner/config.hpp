#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "sdlab/core/error.hpp"
#include "sdlab/dominance/ensemble.hpp"
#include "sdlab/dominance/lln.hpp"
#include "sdlab/dominance/m_addition.hpp"
#include "sdlab/geometry/body.hpp"
#include "sdlab/geometry/coefficient_set.hpp"
#include "sdlab/geometry/radial_measure.hpp"
#include "sdlab/models/density.hpp"
#include "sdlab/opnorm/operator_norm.hpp"

namespace sdlab::runner {

using geometry::Body;
using geometry::CoefficientSet;
using models::Density;

enum class ExperimentKind { dominance, lln, rearrangement, bll, kanter, opnorm, smallball, maddition };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::dominance: return "dominance";
    case ExperimentKind::lln: return "lln";
    case ExperimentKind::rearrangement: return "rearrangement";
    case ExperimentKind::bll: return "bll";
    case ExperimentKind::kanter: return "kanter";
    case ExperimentKind::opnorm: return "opnorm";
    case ExperimentKind::smallball: return "smallball";
    case ExperimentKind::maddition: return "maddition";
    }
    return "?";
}

/// How a dominance claim is tested: survival functions or means.
enum class TestKind { distribution, mean };
enum class CompareZ { automatic, always, never };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::dominance;
    std::string name;
    std::uint64_t seed = 0;
    int n = 0, N = 0;
    std::size_t m = 0;
    double delta = 0.01;
    int workers = 1;
    std::string output;

    // dominance, opnorm, smallball
    std::vector<Density> densities;
    std::optional<CoefficientSet> coefficients;
    std::optional<dominance::FunctionalSpec> functional;
    std::optional<opnorm::NormedSpace> norm;
    bool reversed = false;
    TestKind test = TestKind::distribution;
    CompareZ compare_z = CompareZ::automatic;

    // lln
    std::optional<Body> body;
    dominance::LlnMode lln_mode;
    std::vector<int> schedule;
    int seeds = 1;
    int grid = 0;
    double tolerance = 0.02;
    double min_fraction = 0.9;

    // rearrangement
    int cells = 129;
    double extent = 2.0;
    bool alternating = true;
    int max_iter = 200;

    // bll
    int instances = 100;
    int functions = 3;
    double h = 0.005;

    // kanter
    int polygons = 50;
    int trials = 10;
    int polygon_points = 4;

    // smallball
    bool marginal = true;
    std::vector<int> ks;
    std::vector<double> eps;
    double c = std::numeric_limits<double>::quiet_NaN();

    // maddition
    std::optional<Density> density_k, density_l;
    int N1 = 0, N2 = 0, j = 0;
    dominance::PartShape shape = dominance::PartShape::hull;

    /// The parsed document, in file order, for the report.
    nlohmann::ordered_json echo;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return config.has_value(); }
};

namespace detail {

inline nlohmann::ordered_json to_json(const YAML::Node& node) {
    if (node.IsMap()) {
        nlohmann::ordered_json o = nlohmann::ordered_json::object();
        for (const auto& kv : node) o[kv.first.as<std::string>()] = to_json(kv.second);
        return o;
    }
    if (node.IsSequence()) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& e : node) a.push_back(to_json(e));
        return a;
    }
    if (!node.IsScalar()) return nullptr;
    const std::string s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc() && p == s.data() + s.size()) return i;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size() && std::isfinite(d)) return d;
    if (s == "true") return true;
    if (s == "false") return false;
    return s;
}

// Collects every problem instead of stopping at the first one.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back(path.empty() ? msg : path + ": " + msg); }

    static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

    void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
        for (const auto& kv : map) {
            const auto k = kv.first.as<std::string>();
            if (!allowed.count(k)) fail(join(path, k), "unknown key");
        }
    }

    template <class T>
    std::optional<T> get(const YAML::Node& map, const std::string& key, const std::string& path, bool required = false) {
        const YAML::Node v = map[key];
        if (!v) {
            if (required) fail(join(path, key), "required");
            return std::nullopt;
        }
        return convert<T>(v, join(path, key));
    }

    template <class T>
    std::optional<T> convert(const YAML::Node& v, const std::string& path) {
        if (!v.IsScalar()) {
            fail(path, "expected a scalar");
            return std::nullopt;
        }
        try {
            if constexpr (std::is_same_v<T, std::uint64_t>) {
                const auto& s = v.Scalar();
                std::uint64_t x = 0;
                auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
                if (ec != std::errc() || p != s.data() + s.size()) throw YAML::Exception(v.Mark(), "bad integer");
                return x;
            } else {
                return v.as<T>();
            }
        } catch (const YAML::Exception&) {
            fail(path, "cannot read '" + v.Scalar() + "' as " + type_name<T>());
            return std::nullopt;
        }
    }

    template <class T>
    std::optional<std::vector<T>> list(const YAML::Node& map, const std::string& key, const std::string& path,
                                       bool required = false) {
        const YAML::Node v = map[key];
        const auto p = join(path, key);
        if (!v) {
            if (required) fail(p, "required");
            return std::nullopt;
        }
        if (!v.IsSequence()) {
            fail(p, "expected a list");
            return std::nullopt;
        }
        std::vector<T> out;
        bool ok = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto x = convert<T>(v[i], p + "[" + std::to_string(i) + "]");
            if (x) out.push_back(*x);
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return out;
    }

    std::optional<Vec> vec(const YAML::Node& node, const std::string& path) {
        if (!node.IsSequence() || node.size() == 0) {
            fail(path, "expected a non-empty list of numbers");
            return std::nullopt;
        }
        Vec x(static_cast<int>(node.size()));
        for (std::size_t i = 0; i < node.size(); ++i) {
            auto v = convert<double>(node[i], path + "[" + std::to_string(i) + "]");
            if (!v) return std::nullopt;
            x(static_cast<int>(i)) = *v;
        }
        return x;
    }

    std::optional<std::vector<Vec>> points(const YAML::Node& node, const std::string& path) {
        if (!node.IsSequence() || node.size() == 0) {
            fail(path, "expected a non-empty list of points");
            return std::nullopt;
        }
        std::vector<Vec> out;
        for (std::size_t i = 0; i < node.size(); ++i) {
            auto v = vec(node[i], path + "[" + std::to_string(i) + "]");
            if (!v) return std::nullopt;
            if (!out.empty() && v->size() != out.front().size()) {
                fail(path, "points of different dimensions");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        return out;
    }

    // Runs a library constructor and records its exception as a config error.
    template <class F>
    auto attempt(const std::string& path, F&& f) -> std::optional<decltype(f())> {
        try {
            return f();
        } catch (const Error& e) {
            fail(path, e.what());
        }
        return std::nullopt;
    }

private:
    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else return "a string";
    }
};

inline Vec polar_point(double r, double t) { return (Vec(2) << r * std::cos(t), r * std::sin(t)).finished(); }

inline std::optional<Body> parse_body(Reader& rd, const YAML::Node& node, const std::string& path) {
    std::string shape;
    YAML::Node map;
    if (node.IsScalar()) {
        shape = node.Scalar();
    } else if (node.IsMap()) {
        rd.check_keys(node, path, {"shape", "side", "radius", "area", "center", "vertices", "lo", "hi", "dim"});
        auto s = rd.get<std::string>(node, "shape", path, true);
        if (!s) return std::nullopt;
        shape = *s;
        map = node;
    } else {
        rd.fail(path, "expected a body name or a map");
        return std::nullopt;
    }
    auto num = [&](const char* key, double def) {
        if (!map) return def;
        return rd.get<double>(map, key, path).value_or(def);
    };
    std::optional<Vec> center;
    if (map && map["center"]) center = rd.vec(map["center"], Reader::join(path, "center"));
    auto shifted = [&](std::vector<Vec> vs) {
        if (center && center->size() == vs.front().size())
            for (auto& v : vs) v += *center;
        else if (center)
            rd.fail(Reader::join(path, "center"), "dimension differs from the body");
        return vs;
    };
    const int dim = map ? rd.get<int>(map, "dim", path).value_or(0) : 0;
    if (shape == "square" || shape == "cube") {
        const int d = shape == "square" ? 2 : dim;
        if (d < 1 || d > kMaxDim) {
            rd.fail(path, "cube needs dim in [1, " + std::to_string(kMaxDim) + "]");
            return std::nullopt;
        }
        const double a = 0.5 * num("side", 1.0);
        std::vector<Vec> vs;
        for (int s = 0; s < (1 << d); ++s) {
            Vec v(d);
            for (int i = 0; i < d; ++i) v(i) = (s >> i) & 1 ? a : -a;
            vs.push_back(v);
        }
        return rd.attempt(path, [&] { return Body::vpolytope(shifted(std::move(vs))); });
    }
    if (shape == "triangle") {
        // equilateral with the given area, centroid at the center
        const double area = num("area", 1.0);
        const double side = std::sqrt(4.0 * area / std::sqrt(3.0)), R = side / std::sqrt(3.0);
        std::vector<Vec> vs;
        for (int i = 0; i < 3; ++i) vs.push_back(polar_point(R, std::numbers::pi / 2 + 2 * std::numbers::pi * i / 3));
        return rd.attempt(path, [&] { return Body::vpolytope(shifted(std::move(vs))); });
    }
    if (shape == "disk" || shape == "ball") {
        const int d = shape == "disk" ? 2 : dim;
        if (d < 1 || d > kMaxDim) {
            rd.fail(path, "ball needs dim in [1, " + std::to_string(kMaxDim) + "]");
            return std::nullopt;
        }
        Vec c = Vec::Zero(d);
        if (center && center->size() == d) c = *center;
        else if (center) rd.fail(Reader::join(path, "center"), "dimension differs from the body");
        const double r = num("radius", 1.0);
        return rd.attempt(path, [&] { return Body::ball(c, r); });
    }
    if (shape == "polytope") {
        if (!map || !map["vertices"]) {
            rd.fail(path, "polytope needs vertices");
            return std::nullopt;
        }
        auto vs = rd.points(map["vertices"], Reader::join(path, "vertices"));
        if (!vs) return std::nullopt;
        return rd.attempt(path, [&] { return Body::vpolytope(shifted(std::move(*vs))); });
    }
    if (shape == "box") {
        if (!map || !map["lo"] || !map["hi"]) {
            rd.fail(path, "box needs lo and hi");
            return std::nullopt;
        }
        auto lo = rd.vec(map["lo"], Reader::join(path, "lo")), hi = rd.vec(map["hi"], Reader::join(path, "hi"));
        if (!lo || !hi) return std::nullopt;
        if (lo->size() != hi->size() || lo->size() > kMaxDim || ((*hi - *lo).array() <= 0).any()) {
            rd.fail(path, "box needs lo < hi of equal dimension <= " + std::to_string(kMaxDim));
            return std::nullopt;
        }
        const int d = static_cast<int>(lo->size());
        std::vector<Vec> vs;
        for (int s = 0; s < (1 << d); ++s) {
            Vec v(d);
            for (int i = 0; i < d; ++i) v(i) = (s >> i) & 1 ? (*hi)(i) : (*lo)(i);
            vs.push_back(v);
        }
        return rd.attempt(path, [&] { return Body::vpolytope(shifted(std::move(vs))); });
    }
    rd.fail(path, "unknown body shape '" + shape + "'");
    return std::nullopt;
}

inline std::optional<Density> parse_density(Reader& rd, const YAML::Node& node, const std::string& path, int n) {
    if (node.IsScalar()) {
        if (node.Scalar() == "unit_ball") return rd.attempt(path, [&] { return Density::uniform_unit_volume_ball(n); });
        auto b = parse_body(rd, node, path);
        if (!b) return std::nullopt;
        return rd.attempt(path, [&] { return Density::uniform(*b); });
    }
    if (!node.IsMap()) {
        rd.fail(path, "expected a density name or a map");
        return std::nullopt;
    }
    rd.check_keys(node, path, {"kind", "body", "sigma", "center", "radius_factor", "point"});
    const std::string kind = rd.get<std::string>(node, "kind", path).value_or(node["body"] ? "uniform" : "");
    if (kind == "uniform") {
        if (!node["body"]) {
            rd.fail(path, "uniform density needs a body");
            return std::nullopt;
        }
        auto b = parse_body(rd, node["body"], Reader::join(path, "body"));
        if (!b) return std::nullopt;
        return rd.attempt(path, [&] { return Density::uniform(*b); });
    }
    if (kind == "unit_ball") return rd.attempt(path, [&] { return Density::uniform_unit_volume_ball(n); });
    if (kind == "gaussian") {
        auto sigma = rd.get<double>(node, "sigma", path, true);
        const double rf = rd.get<double>(node, "radius_factor", path).value_or(8.0);
        Vec c;
        if (node["center"]) {
            auto v = rd.vec(node["center"], Reader::join(path, "center"));
            if (!v) return std::nullopt;
            c = *v;
        }
        if (!sigma) return std::nullopt;
        return rd.attempt(path, [&] { return Density::truncated_gaussian(n, *sigma, c, rf); });
    }
    if (kind == "point") {
        if (!node["point"]) {
            rd.fail(path, "point mass needs a point");
            return std::nullopt;
        }
        auto p = rd.vec(node["point"], Reader::join(path, "point"));
        if (!p) return std::nullopt;
        return Density::point_mass(*p);
    }
    rd.fail(path, kind.empty() ? "density needs a kind or a body" : "unknown density kind '" + kind + "'");
    return std::nullopt;
}

inline std::optional<geometry::Psi> parse_psi(Reader& rd, const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) {
        rd.fail(path, "expected {kind, p}");
        return std::nullopt;
    }
    rd.check_keys(node, path, {"kind", "p"});
    auto kind = rd.get<std::string>(node, "kind", path, true);
    auto p = rd.get<double>(node, "p", path, true);
    if (!kind || !p) return std::nullopt;
    std::optional<geometry::Psi> psi;
    if (*kind == "power") psi = geometry::Psi::power(*p);
    else if (*kind == "exp_shift") psi = geometry::Psi::exp_shift(*p);
    else {
        rd.fail(path, "unknown psi kind '" + *kind + "'");
        return std::nullopt;
    }
    if (!rd.attempt(path, [&] { psi->validate(); return true; })) return std::nullopt;
    return psi;
}

inline std::optional<CoefficientSet> parse_coefficients(Reader& rd, const YAML::Node& node, const std::string& path, int N) {
    std::string kind;
    if (node.IsScalar()) {
        kind = node.Scalar();
    } else if (node.IsMap()) {
        rd.check_keys(node, path, {"kind", "q", "psi", "threshold", "vertices"});
        kind = rd.get<std::string>(node, "kind", path, true).value_or("");
    } else {
        rd.fail(path, "expected a coefficient set name or a map");
        return std::nullopt;
    }
    if (kind == "vertices") {
        if (!node["vertices"]) {
            rd.fail(path, "vertex coefficient set needs vertices");
            return std::nullopt;
        }
        auto vs = rd.points(node["vertices"], Reader::join(path, "vertices"));
        if (!vs) return std::nullopt;
        return rd.attempt(path, [&] { return CoefficientSet::generic_v(*vs); });
    }
    if (N < 1) {
        rd.fail(path, "coefficient set needs N >= 1");
        return std::nullopt;
    }
    if (kind == "simplex") return rd.attempt(path, [&] { return CoefficientSet::simplex(N); });
    if (kind == "simplex_with_origin") return rd.attempt(path, [&] { return CoefficientSet::simplex_with_origin(N); });
    if (kind == "cross_polytope") return rd.attempt(path, [&] { return CoefficientSet::cross_polytope(N); });
    if (kind == "cube") return rd.attempt(path, [&] { return CoefficientSet::cube(N); });
    if (kind == "lq_ball") {
        auto q = node.IsMap() ? rd.get<double>(node, "q", path, true) : std::nullopt;
        if (!q) {
            if (!node.IsMap()) rd.fail(path, "lq_ball needs q");
            return std::nullopt;
        }
        return rd.attempt(path, [&] { return CoefficientSet::lq_ball(N, *q); });
    }
    if (kind == "orlicz_polar") {
        if (!node.IsMap() || !node["psi"]) {
            rd.fail(path, "orlicz_polar needs psi");
            return std::nullopt;
        }
        auto psi = parse_psi(rd, node["psi"], Reader::join(path, "psi"));
        const double t = rd.get<double>(node, "threshold", path).value_or(1.0);
        if (!psi) return std::nullopt;
        return rd.attempt(path, [&] { return CoefficientSet::orlicz_ball_polar(N, *psi, t); });
    }
    rd.fail(path, "unknown coefficient set '" + kind + "'");
    return std::nullopt;
}

inline std::optional<geometry::RadialMeasure> parse_measure(Reader& rd, const YAML::Node& node, const std::string& path,
                                                            int n) {
    std::string kind;
    double sigma = 1.0;
    if (node.IsScalar()) {
        kind = node.Scalar();
    } else if (node.IsMap()) {
        rd.check_keys(node, path, {"kind", "sigma"});
        kind = rd.get<std::string>(node, "kind", path, true).value_or("");
        sigma = rd.get<double>(node, "sigma", path).value_or(1.0);
    }
    if (kind == "lebesgue") return rd.attempt(path, [&] { return geometry::RadialMeasure::lebesgue(n); });
    if (kind == "gaussian") return rd.attempt(path, [&] { return geometry::RadialMeasure::gaussian(n, sigma); });
    if (kind == "inverse_power") return rd.attempt(path, [&] { return geometry::RadialMeasure::inverse_power(n); });
    rd.fail(path, "unknown measure '" + kind + "'");
    return std::nullopt;
}

inline std::optional<dominance::FunctionalSpec::Kind> functional_kind(const std::string& s) {
    using K = dominance::FunctionalSpec::Kind;
    if (s == "volume") return K::volume;
    if (s == "intrinsic") return K::intrinsic;
    if (s == "diameter") return K::diameter;
    if (s == "mean_width") return K::mean_width;
    if (s == "polar_measure") return K::polar_measure;
    return std::nullopt;
}

inline std::optional<dominance::FunctionalSpec> parse_functional(Reader& rd, const YAML::Node& node,
                                                                 const std::string& path, const ExperimentConfig& c) {
    using dominance::FunctionalSpec;
    std::string kind;
    YAML::Node map;
    if (node.IsScalar()) {
        kind = node.Scalar();
    } else if (node.IsMap()) {
        rd.check_keys(node, path, {"kind", "j", "measure", "of", "radius", "inner_samples"});
        kind = rd.get<std::string>(node, "kind", path, true).value_or("");
        map = node;
    } else {
        rd.fail(path, "expected a functional name or a map");
        return std::nullopt;
    }
    const int j = map ? rd.get<int>(map, "j", path).value_or(0) : 0;
    std::optional<FunctionalSpec> spec;
    if (kind == "ball_intersection") {
        const std::string of = map ? rd.get<std::string>(map, "of", path).value_or("volume") : "volume";
        const double r = map ? rd.get<double>(map, "radius", path).value_or(1.0) : 1.0;
        auto k = functional_kind(of);
        if (!k || *k == FunctionalSpec::Kind::polar_measure) {
            rd.fail(Reader::join(path, "of"), "ball intersections support volume, intrinsic, diameter, mean_width");
            return std::nullopt;
        }
        spec = rd.attempt(path, [&] { return FunctionalSpec::ball_intersection(*k, r, j); });
    } else {
        auto k = functional_kind(kind);
        if (!k) {
            rd.fail(path, "unknown functional '" + kind + "'");
            return std::nullopt;
        }
        if (!c.coefficients) {
            rd.fail("coefficients", "required for functional '" + kind + "'");
            return std::nullopt;
        }
        const auto& C = *c.coefficients;
        switch (*k) {
        case FunctionalSpec::Kind::volume: spec = FunctionalSpec::volume(C); break;
        case FunctionalSpec::Kind::intrinsic: spec = FunctionalSpec::intrinsic(j, C); break;
        case FunctionalSpec::Kind::diameter: spec = FunctionalSpec::diameter(C); break;
        case FunctionalSpec::Kind::mean_width: spec = FunctionalSpec::mean_width(C); break;
        case FunctionalSpec::Kind::polar_measure: {
            if (!map || !map["measure"]) {
                rd.fail(path, "polar_measure needs a measure");
                return std::nullopt;
            }
            auto nu = parse_measure(rd, map["measure"], Reader::join(path, "measure"), c.n);
            if (!nu) return std::nullopt;
            spec = FunctionalSpec::polar_measure(*nu, C);
            break;
        }
        default: break;
        }
    }
    if (!spec) return std::nullopt;
    if (map && map["inner_samples"]) {
        auto s = rd.get<std::size_t>(map, "inner_samples", path);
        if (s && *s >= 100) spec->inner_samples = *s;
        else if (s) rd.fail(Reader::join(path, "inner_samples"), "must be >= 100");
    }
    return spec;
}

inline std::optional<opnorm::NormedSpace> parse_norm(Reader& rd, const YAML::Node& node, const std::string& path, int N) {
    using opnorm::NormedSpace;
    std::string kind;
    if (node.IsScalar()) {
        kind = node.Scalar();
    } else if (node.IsMap()) {
        rd.check_keys(node, path, {"kind", "q", "vertices"});
        kind = rd.get<std::string>(node, "kind", path, true).value_or("");
    } else {
        rd.fail(path, "expected a norm name or a map");
        return std::nullopt;
    }
    if (kind == "vball") {
        if (!node.IsMap() || !node["vertices"]) {
            rd.fail(path, "vball needs vertices");
            return std::nullopt;
        }
        auto vs = rd.points(node["vertices"], Reader::join(path, "vertices"));
        if (!vs) return std::nullopt;
        return rd.attempt(path, [&] { return NormedSpace::vball(*vs); });
    }
    if (N < 1) {
        rd.fail(path, "normed space needs N >= 1");
        return std::nullopt;
    }
    if (kind == "L1") return NormedSpace::l1(N);
    if (kind == "L2") return NormedSpace::l2(N);
    if (kind == "Linf") {
        if (N > opnorm::kMaxSignColumns) {
            rd.fail(path, "sign enumeration cap " + std::to_string(opnorm::kMaxSignColumns) + " exceeded: N=" +
                              std::to_string(N));
            return std::nullopt;
        }
        return NormedSpace::linf(N);
    }
    if (kind == "lq") {
        auto q = node.IsMap() ? rd.get<double>(node, "q", path, true) : std::nullopt;
        if (!q) {
            if (!node.IsMap()) rd.fail(path, "lq needs q");
            return std::nullopt;
        }
        return rd.attempt(path, [&] { return NormedSpace::lq(N, *q); });
    }
    rd.fail(path, "unknown norm '" + kind + "'");
    return std::nullopt;
}

// density (replicated N times) or densities (one per column).
inline void parse_columns(Reader& rd, const YAML::Node& root, ExperimentConfig& c, int count, int dim) {
    if (root["density"] && root["densities"]) {
        rd.fail("densities", "give either density or densities, not both");
        return;
    }
    if (root["density"]) {
        if (auto d = parse_density(rd, root["density"], "density", dim)) c.densities.assign(static_cast<std::size_t>(count), *d);
    } else if (root["densities"]) {
        const auto node = root["densities"];
        if (!node.IsSequence()) {
            rd.fail("densities", "expected a list");
            return;
        }
        if (static_cast<int>(node.size()) != count)
            rd.fail("densities", "has " + std::to_string(node.size()) + " entries, expected N=" + std::to_string(count));
        for (std::size_t i = 0; i < node.size(); ++i)
            if (auto d = parse_density(rd, node[i], "densities[" + std::to_string(i) + "]", dim)) c.densities.push_back(*d);
    } else {
        rd.fail("density", "required");
        return;
    }
    for (std::size_t i = 0; i < c.densities.size(); ++i)
        if (c.densities[i].dim() != dim)
            rd.fail(root["density"] ? "density" : "densities[" + std::to_string(i) + "]",
                    "dimension " + std::to_string(c.densities[i].dim()) + " differs from n=" + std::to_string(dim));
}

inline void parse_direction_and_test(Reader& rd, const YAML::Node& root, ExperimentConfig& c) {
    const auto dir = rd.get<std::string>(root, "direction", "").value_or("natural");
    if (dir == "reversed") c.reversed = true;
    else if (dir != "natural") rd.fail("direction", "expected natural or reversed");
    const auto test = rd.get<std::string>(root, "test", "").value_or("distribution");
    if (test == "mean") c.test = TestKind::mean;
    else if (test != "distribution") rd.fail("test", "expected distribution or mean");
    const auto z = rd.get<std::string>(root, "compare_z", "").value_or("auto");
    if (z == "always") c.compare_z = CompareZ::always;
    else if (z == "never") c.compare_z = CompareZ::never;
    else if (z != "auto") rd.fail("compare_z", "expected auto, always or never");
}

inline void require_positive(Reader& rd, const char* key, double v) {
    if (!(v > 0)) rd.fail(key, "must be positive");
}

} // namespace detail

/// Parses and validates a YAML experiment description. Every problem found
/// is returned; the config is present only when there are none.
inline ParseResult parse_config(const std::string& text) {
    ParseResult res;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        res.errors.push_back(std::string("malformed YAML: ") + e.what());
        return res;
    }
    if (!root.IsMap()) {
        res.errors.push_back("config must be a map of keys");
        return res;
    }
    detail::Reader rd;
    ExperimentConfig c;
    c.echo = detail::to_json(root);

    static const std::set<std::string> common = {"experiment", "name", "description", "seed", "m", "delta", "workers", "output"};
    auto allowed = [&](std::initializer_list<const char*> extra) {
        std::set<std::string> s = common;
        for (const char* k : extra) s.insert(k);
        return s;
    };

    const auto kind = rd.get<std::string>(root, "experiment", "", true);
    c.name = rd.get<std::string>(root, "name", "").value_or("");
    if (root["seed"]) {
        if (auto s = rd.get<std::uint64_t>(root, "seed", "")) c.seed = *s;
    } else {
        rd.fail("", "seed required");
    }
    c.delta = rd.get<double>(root, "delta", "").value_or(0.01);
    if (!(c.delta > 0 && c.delta < 1)) rd.fail("delta", "must be in (0, 1)");
    c.workers = rd.get<int>(root, "workers", "").value_or(1);
    if (c.workers < 1) rd.fail("workers", "must be >= 1");
    c.output = rd.get<std::string>(root, "output", "").value_or("");
    auto need_m = [&] {
        if (auto m = rd.get<std::size_t>(root, "m", "", true)) {
            c.m = *m;
            if (c.m < 100) rd.fail("m", "must be >= 100");
        }
    };
    auto need_dim = [&](const char* key, int& out, int lo, int hi) {
        if (auto v = rd.get<int>(root, key, "", true)) {
            out = *v;
            if (out < lo || out > hi)
                rd.fail(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(out));
        }
    };

    if (!kind) {
        res.errors = std::move(rd.errors);
        return res;
    }
    const std::string& k = *kind;
    if (k == "dominance" || k == "opnorm") {
        c.kind = k == "dominance" ? ExperimentKind::dominance : ExperimentKind::opnorm;
        if (c.kind == ExperimentKind::dominance)
            rd.check_keys(root, "", allowed({"n", "N", "density", "densities", "coefficients", "functional", "direction",
                                             "test", "compare_z"}));
        else
            rd.check_keys(root, "", allowed({"n", "N", "density", "densities", "norm", "direction", "test", "compare_z"}));
        need_dim("n", c.n, 1, kMaxDim);
        need_dim("N", c.N, 1, 64);
        need_m();
        detail::parse_direction_and_test(rd, root, c);
        if (c.n >= 1 && c.n <= kMaxDim && c.N >= 1) detail::parse_columns(rd, root, c, c.N, c.n);
        if (c.kind == ExperimentKind::dominance) {
            const auto fn = root["functional"];
            const bool balls = fn && fn.IsMap() && fn["kind"] && fn["kind"].IsScalar() &&
                               fn["kind"].Scalar() == "ball_intersection";
            if (root["coefficients"]) {
                if (balls) rd.fail("coefficients", "not used by ball intersections");
                else c.coefficients = detail::parse_coefficients(rd, root["coefficients"], "coefficients", c.N);
            } else if (!balls) {
                rd.fail("coefficients", "required");
            }
            if (c.coefficients && c.coefficients->dim() != c.N)
                rd.fail("coefficients", "dimension " + std::to_string(c.coefficients->dim()) + " differs from N=" +
                                            std::to_string(c.N));
            if (!fn) rd.fail("functional", "required");
            else if (balls || c.coefficients) c.functional = detail::parse_functional(rd, fn, "functional", c);
        } else {
            if (!root["norm"]) rd.fail("norm", "required");
            else if (auto E = detail::parse_norm(rd, root["norm"], "norm", c.N)) {
                c.norm = *E;
                if (E->dim() != c.N)
                    rd.fail("norm", "dimension " + std::to_string(E->dim()) + " differs from N=" + std::to_string(c.N));
                else
                    c.functional = dominance::FunctionalSpec::operator_norm(*E);
            }
        }
        if (c.functional && c.n >= 1 && c.n <= kMaxDim && c.N >= 1)
            rd.attempt("functional", [&] { c.functional->validate(c.n, c.N); return true; });
    } else if (k == "lln") {
        c.kind = ExperimentKind::lln;
        rd.check_keys(root, "", allowed({"body", "mode", "schedule", "seeds", "grid", "tolerance", "min_fraction"}));
        if (!root["body"]) rd.fail("body", "required");
        else c.body = detail::parse_body(rd, root["body"], "body");
        if (c.body) c.n = c.body->dim();
        if (root["mode"]) {
            const auto node = root["mode"];
            std::string mk = node.IsScalar() ? node.Scalar() : "";
            if (node.IsMap()) {
                rd.check_keys(node, "mode", {"kind", "p", "psi"});
                mk = rd.get<std::string>(node, "kind", "mode", true).value_or("");
            }
            if (mk == "hull") c.lln_mode = dominance::LlnMode::hull();
            else if (mk == "zp") {
                const double p = node.IsMap() ? rd.get<double>(node, "p", "mode").value_or(2.0) : 2.0;
                rd.attempt("mode", [&] { c.lln_mode = dominance::LlnMode::zp(p); return true; });
            } else if (mk == "orlicz") {
                if (!node.IsMap() || !node["psi"]) rd.fail("mode", "orlicz needs psi");
                else if (auto psi = detail::parse_psi(rd, node["psi"], "mode.psi")) c.lln_mode = dominance::LlnMode::orlicz(*psi);
            } else {
                rd.fail("mode", "expected hull, zp or orlicz");
            }
        }
        if (auto s = rd.list<int>(root, "schedule", "", true)) {
            c.schedule = *s;
            if (c.schedule.empty()) rd.fail("schedule", "must not be empty");
            for (int N : c.schedule)
                if (N < 1) rd.fail("schedule", "entries must be >= 1");
        }
        c.seeds = rd.get<int>(root, "seeds", "").value_or(1);
        if (c.seeds < 1) rd.fail("seeds", "must be >= 1");
        c.grid = rd.get<int>(root, "grid", "").value_or(0);
        if (c.grid < 0) rd.fail("grid", "must be >= 0");
        c.tolerance = rd.get<double>(root, "tolerance", "").value_or(0.02);
        detail::require_positive(rd, "tolerance", c.tolerance);
        c.min_fraction = rd.get<double>(root, "min_fraction", "").value_or(0.9);
        if (!(c.min_fraction > 0 && c.min_fraction <= 1)) rd.fail("min_fraction", "must be in (0, 1]");
    } else if (k == "rearrangement") {
        c.kind = ExperimentKind::rearrangement;
        rd.check_keys(root, "", allowed({"initial", "cells", "extent", "schedule", "tolerance", "max_iter"}));
        if (!root["initial"]) rd.fail("initial", "required");
        else c.body = detail::parse_body(rd, root["initial"], "initial");
        if (c.body) {
            c.n = c.body->dim();
            if (c.n > 3) rd.fail("initial", "grid functions support dimensions 1 to 3");
        }
        c.cells = rd.get<int>(root, "cells", "").value_or(129);
        if (c.cells < 1 || c.cells % 2 == 0) rd.fail("cells", "must be odd and positive");
        c.extent = rd.get<double>(root, "extent", "").value_or(2.0);
        detail::require_positive(rd, "extent", c.extent);
        const auto s = rd.get<std::string>(root, "schedule", "").value_or("alternating");
        if (s == "axis") c.alternating = false;
        else if (s != "alternating") rd.fail("schedule", "expected axis or alternating");
        if (c.alternating && c.body && c.n != 2) rd.fail("schedule", "alternating rotations need a planar grid");
        c.tolerance = rd.get<double>(root, "tolerance", "").value_or(0.02);
        detail::require_positive(rd, "tolerance", c.tolerance);
        c.max_iter = rd.get<int>(root, "max_iter", "").value_or(200);
        if (c.max_iter < 1) rd.fail("max_iter", "must be >= 1");
    } else if (k == "bll") {
        c.kind = ExperimentKind::bll;
        rd.check_keys(root, "", allowed({"n", "functions", "instances", "h"}));
        need_dim("n", c.n, 1, 3);
        c.functions = rd.get<int>(root, "functions", "").value_or(3);
        if (c.functions < c.n || c.functions > 4) rd.fail("functions", "must be in [n, 4]");
        c.instances = rd.get<int>(root, "instances", "").value_or(100);
        if (c.instances < 1) rd.fail("instances", "must be >= 1");
        c.h = rd.get<double>(root, "h", "").value_or(0.005);
        if (!(c.h > 0 && c.h <= 0.1)) rd.fail("h", "must be in (0, 0.1]");
    } else if (k == "kanter") {
        c.kind = ExperimentKind::kanter;
        rd.check_keys(root, "", allowed({"polygons", "trials", "polygon_points"}));
        c.polygons = rd.get<int>(root, "polygons", "").value_or(50);
        if (c.polygons < 1) rd.fail("polygons", "must be >= 1");
        c.trials = rd.get<int>(root, "trials", "").value_or(10);
        if (c.trials < 1) rd.fail("trials", "must be >= 1");
        c.polygon_points = rd.get<int>(root, "polygon_points", "").value_or(4);
        if (c.polygon_points < 2) rd.fail("polygon_points", "must be >= 2");
    } else if (k == "smallball") {
        c.kind = ExperimentKind::smallball;
        rd.check_keys(root, "", allowed({"mode", "n", "N", "k", "eps", "density", "densities", "norm", "c"}));
        const auto mode = rd.get<std::string>(root, "mode", "").value_or("marginal");
        if (mode == "matrix") c.marginal = false;
        else if (mode != "marginal") rd.fail("mode", "expected marginal or matrix");
        need_dim("N", c.N, 1, 64);
        need_m();
        if (auto e = rd.list<double>(root, "eps", "", true)) {
            c.eps = *e;
            if (c.eps.empty()) rd.fail("eps", "must not be empty");
            for (double x : c.eps)
                if (!(x > 0 && x <= 1)) rd.fail("eps", "entries must be in (0, 1]");
        }
        if (c.marginal) {
            c.n = 1;
            if (auto ks = rd.list<int>(root, "k", "", true)) {
                c.ks = *ks;
                for (int x : c.ks)
                    if (x < 1 || x > c.N) rd.fail("k", "entries must be in [1, N]");
            }
            if (c.N >= 1) detail::parse_columns(rd, root, c, c.N, 1);
            if (root["norm"]) rd.fail("norm", "only used in matrix mode");
        } else {
            need_dim("n", c.n, 1, kMaxDim);
            if (root["k"]) rd.fail("k", "only used in marginal mode");
            if (!root["norm"]) rd.fail("norm", "required");
            else c.norm = detail::parse_norm(rd, root["norm"], "norm", c.N);
            if (c.norm && c.norm->dim() != c.N) rd.fail("norm", "dimension differs from N");
            if ((root["density"] || root["densities"]) && c.n >= 1 && c.n <= kMaxDim && c.N >= 1)
                detail::parse_columns(rd, root, c, c.N, c.n);
            if (root["c"]) c.c = rd.get<double>(root, "c", "").value_or(c.c);
        }
    } else if (k == "maddition") {
        c.kind = ExperimentKind::maddition;
        rd.check_keys(root, "", allowed({"n", "N1", "N2", "j", "density_k", "density_l", "coefficients", "shape"}));
        need_dim("n", c.n, 1, kMaxDim);
        need_dim("N1", c.N1, 1, 32);
        need_dim("N2", c.N2, 1, 32);
        need_dim("j", c.j, 1, kMaxDim);
        if (c.j > c.n) rd.fail("j", "must be <= n");
        need_m();
        for (const char* key : {"density_k", "density_l"}) {
            if (!root[key]) {
                rd.fail(key, "required");
                continue;
            }
            if (c.n < 1 || c.n > kMaxDim) continue;
            auto d = detail::parse_density(rd, root[key], key, c.n);
            if (d && d->dim() != c.n) rd.fail(key, "dimension differs from n");
            (std::string(key) == "density_k" ? c.density_k : c.density_l) = d;
        }
        const auto shape = rd.get<std::string>(root, "shape", "").value_or("hull");
        if (shape == "symmetric_hull") c.shape = dominance::PartShape::symmetric_hull;
        else if (shape != "hull") rd.fail("shape", "expected hull or symmetric_hull");
        if (!root["coefficients"]) rd.fail("coefficients", "required");
        else if (auto M = detail::parse_coefficients(rd, root["coefficients"], "coefficients", 2)) {
            c.coefficients = *M;
            if (c.N1 >= 1 && c.N2 >= 1)
                rd.attempt("coefficients", [&] { return dominance::m_addition_set(*M, c.N1, c.N2, c.shape).dim(); });
        }
    } else {
        rd.fail("experiment", "unknown kind '" + k + "'");
    }

    res.errors = std::move(rd.errors);
    if (res.errors.empty()) res.config = std::move(c);
    return res;
}

/// Reads and parses a config file; throws ConfigError with every problem.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path});
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = parse_config(ss.str());
    if (!r.ok()) throw ConfigError(std::move(r.errors));
    return std::move(*r.config);
}

} // namespace sdlab::runner
