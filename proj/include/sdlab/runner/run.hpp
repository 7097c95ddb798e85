#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "sdlab/core/error.hpp"
#include "sdlab/core/rng.hpp"
#include "sdlab/dominance/empirical.hpp"
#include "sdlab/dominance/ensemble.hpp"
#include "sdlab/dominance/lln.hpp"
#include "sdlab/dominance/m_addition.hpp"
#include "sdlab/geometry/sphere_grid.hpp"
#include "sdlab/opnorm/analysis.hpp"
#include "sdlab/rearrangement/grid_function.hpp"
#include "sdlab/rearrangement/peakedness.hpp"
#include "sdlab/rearrangement/step_function.hpp"
#include "sdlab/runner/config.hpp"
#include "sdlab/runner/report.hpp"

namespace sdlab::runner {

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers;
    /// Caps m (for quick smoke runs of large configs).
    std::optional<std::size_t> max_m;
    std::string build = "unknown";
    /// Fixed timestamp for tests; the current UTC time when empty.
    std::string timestamp;
};

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

using dominance::Direction;
using dominance::EmpiricalDistribution;

inline Json sample_summary(const EmpiricalDistribution& d) {
    return Json{{"m", d.size()},
                {"mean", number(d.mean())},
                {"stderr", number(d.stderr_mean())},
                {"systematic", number(d.systematic())},
                {"digest", d.digest()}};
}

// One dominance comparison as a check plus its survival curves.
inline void add_comparison(Report& rep, const std::string& name, const EmpiricalDistribution& a,
                           const EmpiricalDistribution& b, Direction dir, double delta, TestKind test) {
    const auto r = dominance::check_dominance(a, b, dir, delta);
    Curve cv{name, {"alpha", "survival_a", "survival_b", "margin"}, {}};
    for (std::size_t i = 0; i < r.alpha.size(); ++i) cv.rows.push_back({r.alpha[i], r.survival_a[i], r.survival_b[i], r.margin[i]});
    rep.curves.push_back(std::move(cv));
    Check c;
    c.name = name;
    c.details["direction"] = dominance::direction_name(dir);
    c.details["test"] = test == TestKind::mean ? "mean" : "distribution";
    c.details["epsilon"] = number(r.epsilon);
    c.details["delta"] = number(r.delta);
    c.details["systematic"] = number(r.systematic);
    c.details["min_margin"] = number(r.min_margin);
    c.details["violated_points"] = r.violated_at.size();
    const auto mc = dominance::compare_means(a, b, dir);
    c.details["mean_difference"] = number(mc.difference);
    c.details["pooled_stderr"] = number(mc.pooled_stderr);
    if (test == TestKind::mean) c.verdict = mc.consistent ? "consistent" : "violated";
    else c.verdict = dominance::verdict_name(r.verdict);
    rep.checks.push_back(std::move(c));
}

inline Direction flip(Direction d) { return d == Direction::a_ge_b ? Direction::a_le_b : Direction::a_ge_b; }

inline void run_dominance(const ExperimentConfig& c, Report& rep) {
    const auto& spec = *c.functional;
    const RngStream rng(c.seed, 0);
    Direction dir = spec.natural_direction();
    if (c.reversed) dir = flip(dir);
    const auto x = dominance::run_ensemble(c.densities, dominance::Ensemble::X, spec, c.m, rng.substream(0), c.workers);
    const auto xs = dominance::run_ensemble(c.densities, dominance::Ensemble::Xstar, spec, c.m, rng.substream(1), c.workers);
    rep.results["functional"] = spec.name();
    rep.results["X"] = sample_summary(x);
    rep.results["Xstar"] = sample_summary(xs);
    add_comparison(rep, "X_vs_Xstar", x, xs, dir, c.delta, c.test);
    const std::string note = dominance::z_coverage_note(c.densities, spec);
    rep.results["z_note"] = note;
    const bool run_z = c.compare_z == CompareZ::always || (c.compare_z == CompareZ::automatic && note.empty());
    if (run_z) {
        const auto z = dominance::run_ensemble(c.densities, dominance::Ensemble::Z, spec, c.m, rng.substream(2), c.workers);
        rep.results["Z"] = sample_summary(z);
        add_comparison(rep, "X_vs_Z", x, z, dir, c.delta, c.test);
    }
}

inline void run_lln(const ExperimentConfig& c, Report& rep) {
    const auto& K = *c.body;
    Curve cv{"distance", {"N", "distance", "seed"}, {}};
    int shrink = 0, below = 0;
    double h_max = 0.0;
    const bool hull = c.lln_mode.kind == dominance::LlnMode::Kind::hull;
    if (!hull) {
        for (const auto& y : geometry::sphere_grid(K.dim(), c.grid == 0 ? 256 : c.grid))
            h_max = std::max(h_max, c.lln_mode.kind == dominance::LlnMode::Kind::zp
                                        ? dominance::population_zp_support(K, y, c.lln_mode.p)
                                        : dominance::population_orlicz_support(K, y, c.lln_mode.psi));
    }
    for (int s = 0; s < c.seeds; ++s) {
        const auto d = dominance::lln_convergence(K, c.lln_mode, c.schedule, RngStream(c.seed, static_cast<std::uint64_t>(s)), c.grid);
        for (std::size_t i = 0; i < d.size(); ++i) cv.rows.push_back({double(c.schedule[i]), d[i], double(s)});
        shrink += d.back() < d.front();
        below += d.back() < c.tolerance * h_max;
    }
    rep.curves.push_back(std::move(cv));
    Check ch;
    if (hull) {
        ch.name = "distance_shrinks";
        const double frac = double(shrink) / c.seeds;
        ch.details["fraction"] = frac;
        ch.details["min_fraction"] = c.min_fraction;
        ch.verdict = frac >= c.min_fraction ? "consistent" : "violated";
    } else {
        ch.name = "sup_gap_below_tolerance";
        const double frac = double(below) / c.seeds;
        ch.details["h_max"] = number(h_max);
        ch.details["tolerance"] = c.tolerance;
        ch.details["fraction"] = frac;
        ch.details["min_fraction"] = c.min_fraction;
        ch.verdict = frac >= c.min_fraction ? "consistent" : "violated";
    }
    rep.checks.push_back(std::move(ch));
}

inline void run_rearrangement(const ExperimentConfig& c, Report& rep) {
    using namespace rearrangement;
    const auto& K = *c.body;
    const auto g = GridFunction::sample(K.dim(), c.cells, c.extent / c.cells, [&](const Vec& x) { return K.contains(x, 0.0) ? 1.0 : 0.0; });
    std::vector<SymmetrizationStep> sched;
    for (int a = 0; a < K.dim(); ++a) {
        sched.push_back(SymmetrizationStep::along(a));
        if (c.alternating) sched.push_back(SymmetrizationStep::direction((2 * a + 1) * std::numbers::pi / 4));
    }
    const double mass = g.mass();
    const auto r = iterate_symmetrizations(g, sched, c.tolerance * mass, c.max_iter);
    Curve cv{"history", {"step", "l1_distance", "rotated"}, {}};
    bool monotone = true;
    for (std::size_t k = 0; k < r.history.size(); ++k) {
        cv.rows.push_back({double(k), r.history[k], r.rotated[k] ? 1.0 : 0.0});
        if (k && r.history[k] > r.history[k - 1] + 1e-12 * mass) monotone = false;
    }
    rep.curves.push_back(std::move(cv));
    rep.results["mass"] = number(mass);
    rep.results["steps"] = r.history.size() - 1;
    rep.results["final_distance"] = number(r.history.back());
    Check conv{"converges", r.converged ? "consistent" : "violated", Json::object()};
    conv.details["target"] = number(c.tolerance * mass);
    conv.details["final_distance"] = number(r.history.back());
    conv.details["max_iter"] = c.max_iter;
    rep.checks.push_back(std::move(conv));
    rep.checks.push_back({"history_non_increasing", monotone ? "consistent" : "violated", Json::object()});
}

inline void run_bll(const ExperimentConfig& c, Report& rep) {
    using namespace rearrangement;
    RngStream rng(c.seed, 0);
    const int cells = 2 * static_cast<int>(std::ceil(1.0 / c.h)) + 1;
    Curve cv{"instances", {"instance", "lhs", "rhs", "error"}, {}};
    bool below = true, accurate = true;
    int strict = 0;
    double worst = 0.0;
    for (int t = 0; t < c.instances; ++t) {
        std::vector<GridFunction> fs;
        std::vector<Vec> us;
        for (int i = 0; i < c.functions; ++i) {
            const double a = rng.uniform(-0.8, 0.4), w = rng.uniform(0.1, 0.5);
            fs.push_back(GridFunction::sample(1, cells, c.h, [&](const Vec& x) { return x(0) > a && x(0) < a + w ? 1.0 : 0.0; }));
            Vec u(c.n);
            if (i < c.n) {
                u = unit(c.n, i);
            } else {
                for (int k = 0; k < c.n; ++k) u(k) = rng.normal();
                u.normalize();
            }
            us.push_back(u);
        }
        const auto r = bll_check(fs, us);
        cv.rows.push_back({double(t), r.lhs, r.rhs, r.error});
        below = below && r.lhs <= r.rhs + r.error;
        accurate = accurate && r.error < 0.01 * r.rhs;
        strict += r.lhs < r.rhs - r.error;
        worst = std::max(worst, r.rhs > 0 ? r.error / r.rhs : 0.0);
    }
    rep.curves.push_back(std::move(cv));
    rep.results["strict_instances"] = strict;
    rep.checks.push_back({"lhs_below_rhs", below ? "consistent" : "violated", Json::object()});
    Check acc{"quadrature_error_below_1pct", accurate ? "consistent" : "violated", Json::object()};
    acc.details["worst_relative_error"] = number(worst);
    rep.checks.push_back(std::move(acc));
}

inline Check peakedness_check(const std::string& name, const std::vector<rearrangement::PeakednessReport>& rs,
                              Curve& cv, int& row) {
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rs) {
        ok = ok && r.consistent;
        worst = std::min(worst, r.min_margin);
        for (std::size_t i = 0; i < r.margins.size(); ++i) cv.rows.push_back({double(row++), r.margins[i], r.errors[i]});
    }
    Check c{name, ok ? "consistent" : "violated", Json::object()};
    c.details["min_margin"] = number(worst);
    return c;
}

inline void run_kanter(const ExperimentConfig& c, Report& rep) {
    using namespace rearrangement;
    RngStream rng(c.seed, 0);
    std::vector<Body> bodies;
    for (int i = 0; i < c.polygons; ++i) bodies.push_back(random_symmetric_polygon(rng, c.polygon_points));
    std::vector<PeakednessReport> cube, kanter;
    for (int t = 0; t < c.trials; ++t) {
        RngStream r = rng.substream(static_cast<std::uint64_t>(t) + 1);
        cube.push_back(cube_domination_check({random_step_density(r), random_step_density(r)}, bodies));
        const auto f2 = random_step_density(r);
        const auto f = random_step_density(r).rearranged();
        kanter.push_back(kanter_check(BoxFunction::from_steps(f2.rearranged()), BoxFunction::from_steps(f2),
                                      BoxFunction::from_steps(f), bodies));
    }
    Curve cc{"cube_domination_margins", {"index", "margin", "error"}, {}}, kc{"kanter_margins", {"index", "margin", "error"}, {}};
    int a = 0, b = 0;
    rep.checks.push_back(peakedness_check("cube_domination", cube, cc, a));
    rep.checks.push_back(peakedness_check("kanter_product", kanter, kc, b));
    rep.curves.push_back(std::move(cc));
    rep.curves.push_back(std::move(kc));
}

inline void run_smallball(const ExperimentConfig& c, Report& rep) {
    const RngStream rng(c.seed, 0);
    if (c.marginal) {
        for (int k : c.ks) {
            const auto r = opnorm::marginal_small_ball(c.N, k, c.eps, c.densities, c.m, rng.substream(static_cast<std::uint64_t>(k)),
                                                      c.delta, c.workers);
            const std::string tag = "k" + std::to_string(k);
            Curve cv{"marginal_" + tag, {"eps", "p_x", "p_cube", "bound"}, {}};
            for (const auto& row : r.rows) cv.rows.push_back({row.eps, row.p_x, row.p_z, row.bound});
            rep.curves.push_back(std::move(cv));
            Check a{"cube_below_bound_" + tag, r.cube_below_bound ? "consistent" : "violated", Json::object()};
            a.details["dkw"] = number(r.dkw);
            Check b{"x_below_cube_" + tag, r.x_below_cube ? "consistent" : "violated", Json::object()};
            b.details["dkw"] = number(r.dkw);
            rep.checks.push_back(std::move(a));
            rep.checks.push_back(std::move(b));
        }
        return;
    }
    const auto r = opnorm::small_ball_curve(c.n, c.N, *c.norm, c.eps, c.m, rng, c.densities, c.c, c.workers);
    Curve cv{"small_ball", {"eps", "p_z", "p_x", "reference", "wilson_hi"}, {}};
    for (const auto& row : r.rows) cv.rows.push_back({row.eps, row.p_z, row.p_x, row.bound, row.wilson_hi});
    rep.curves.push_back(std::move(cv));
    rep.results["slope"] = number(r.slope);
    rep.results["reference_exponent"] = c.n * c.N - 1;
}

inline void run_maddition(const ExperimentConfig& c, Report& rep) {
    const auto e = dominance::m_addition_experiment(*c.density_k, *c.density_l, *c.coefficients, c.N1, c.N2, c.j, c.m,
                                                    c.delta, RngStream(c.seed, 0), c.shape, c.workers);
    rep.results["X"] = sample_summary(e.x);
    rep.results["balls"] = sample_summary(e.balls);
    add_comparison(rep, "X_vs_balls", e.x, e.balls, Direction::a_ge_b, c.delta, TestKind::distribution);
}

} // namespace detail

/// Runs a validated config; the seed and worker count may be overridden.
/// Library hypothesis and dimension errors propagate.
inline Report run_experiment(ExperimentConfig c, const RunOptions& opt = {}) {
    if (opt.seed_override) {
        c.seed = *opt.seed_override;
        c.echo["seed"] = c.seed;
    }
    if (opt.workers) c.workers = *opt.workers;
    if (opt.max_m && c.m > *opt.max_m) c.m = *opt.max_m;
    Report rep;
    rep.experiment = kind_name(c.kind);
    rep.name = c.name;
    rep.seed = c.seed;
    rep.build = opt.build;
    rep.config = c.echo;
    Json digest_src = c.echo;
    digest_src.erase("output");
    if (c.m > 0) digest_src["m_effective"] = c.m;
    rep.config_digest = dominance::digest_of({}, digest_src.dump());
    switch (c.kind) {
    case ExperimentKind::dominance:
    case ExperimentKind::opnorm: detail::run_dominance(c, rep); break;
    case ExperimentKind::lln: detail::run_lln(c, rep); break;
    case ExperimentKind::rearrangement: detail::run_rearrangement(c, rep); break;
    case ExperimentKind::bll: detail::run_bll(c, rep); break;
    case ExperimentKind::kanter: detail::run_kanter(c, rep); break;
    case ExperimentKind::smallball: detail::run_smallball(c, rep); break;
    case ExperimentKind::maddition: detail::run_maddition(c, rep); break;
    }
    if (c.m > 0) rep.results["m_effective"] = c.m;
    rep.timestamp = opt.timestamp.empty() ? utc_timestamp() : opt.timestamp;
    return rep;
}

/// Writes report.json, curves.csv and summary.txt into dir.
inline void write_artifacts(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    auto put = [&](const char* file, const std::string& text) {
        std::ofstream out(dir / file, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
    };
    put("report.json", emit_json(r));
    put("curves.csv", emit_csv(r));
    put("summary.txt", emit_text(r));
}

} // namespace sdlab::runner
