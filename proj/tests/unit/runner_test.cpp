#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "sdlab/runner/config.hpp"
#include "sdlab/runner/report.hpp"
#include "sdlab/runner/run.hpp"

using namespace sdlab;
using namespace sdlab::runner;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
experiment: dominance
seed: 42
n: 2
N: 5
m: 20000
density: {body: square}
coefficients: simplex
functional: {kind: intrinsic, j: 1}
)";

bool has_error(const ParseResult& r, const std::string& needle) {
    return std::any_of(r.errors.begin(), r.errors.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

std::string errors_of(const ParseResult& r) {
    std::string s;
    for (const auto& e : r.errors) s += e + "\n";
    return s;
}

// A thin rectangle of area 1: its hulls are far larger than those of disks.
const char* kThin = R"(
experiment: dominance
seed: 8
n: 2
N: 4
m: 2000
density: {body: {shape: box, lo: [-2, -0.125], hi: [2, 0.125]}}
coefficients: simplex
functional: {kind: intrinsic, j: 1}
)";

std::string drop_timestamp(const std::string& json) {
    std::istringstream in(json);
    std::string line, out;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SDLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sdlab_runner_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST(ParseConfig, MinimalDominanceIsValid) {
    const auto r = parse_config(kMinimal);
    ASSERT_TRUE(r.ok()) << errors_of(r);
    const auto& c = *r.config;
    EXPECT_EQ(c.kind, ExperimentKind::dominance);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.n, 2);
    EXPECT_EQ(c.N, 5);
    EXPECT_EQ(c.m, 20000u);
    EXPECT_EQ(c.densities.size(), 5u);
    EXPECT_EQ(c.coefficients->name(), geometry::CoefficientSet::simplex(5).name());
    EXPECT_EQ(c.functional->name(), dominance::FunctionalSpec::intrinsic(1, geometry::CoefficientSet::simplex(5)).name());
    EXPECT_EQ(c.echo["seed"], 42);
}

TEST(ParseConfig, MissingSeed) {
    std::string t = kMinimal;
    t.erase(t.find("seed: 42\n"), 9);
    const auto r = parse_config(t);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_error(r, "seed required")) << errors_of(r);
}

TEST(ParseConfig, SignEnumerationCap) {
    const auto r = parse_config(R"(
experiment: opnorm
seed: 1
n: 2
N: 30
m: 1000
density: unit_ball
norm: Linf
)");
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_error(r, "sign enumeration cap 24")) << errors_of(r);
}

TEST(ParseConfig, CollectsEveryError) {
    const auto r = parse_config(R"(
experiment: dominance
n: 2
N: 3
m: 10
colour: red
densities: [square, square]
coefficients: {kind: lq_ball}
functional: volume
direction: sideways
)");
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(has_error(r, "seed required"));
    EXPECT_TRUE(has_error(r, "colour: unknown key"));
    EXPECT_TRUE(has_error(r, "m: must be >= 100"));
    EXPECT_TRUE(has_error(r, "densities: has 2 entries, expected N=3"));
    EXPECT_TRUE(has_error(r, "coefficients.q: required"));
    EXPECT_TRUE(has_error(r, "direction: expected natural or reversed"));
    EXPECT_GE(r.errors.size(), 6u) << errors_of(r);
}

TEST(ParseConfig, DimensionInconsistenciesAreNamed) {
    const auto a = parse_config(R"(
experiment: dominance
seed: 1
n: 3
N: 2
m: 100
density: {body: square}
coefficients: {kind: vertices, vertices: [[1, 0, 0], [0, 1, 0]]}
functional: volume
)");
    EXPECT_TRUE(has_error(a, "density: dimension 2 differs from n=3")) << errors_of(a);
    EXPECT_TRUE(has_error(a, "coefficients: dimension 3 differs from N=2")) << errors_of(a);
    const auto b = parse_config(R"(
experiment: dominance
seed: 1
n: 2
N: 2
m: 100
density: {body: square}
coefficients: simplex
functional: {kind: intrinsic, j: 3}
)");
    EXPECT_TRUE(has_error(b, "intrinsic volume index j=3")) << errors_of(b);
}

TEST(ParseConfig, HypothesesAndUnknownNames) {
    const auto a = parse_config(R"(
experiment: dominance
seed: 1
n: 2
N: 3
m: 100
density: {body: square}
coefficients: simplex
functional: {kind: polar_measure, measure: lebesgue}
)");
    EXPECT_TRUE(has_error(a, "polar_measure requires a symmetric coefficient set")) << errors_of(a);
    const auto b = parse_config("experiment: teleport\nseed: 1\n");
    EXPECT_TRUE(has_error(b, "unknown kind 'teleport'"));
    const auto c = parse_config("seed: [1\n");
    EXPECT_TRUE(has_error(c, "malformed YAML"));
    const auto d = parse_config(R"(
experiment: maddition
seed: 1
n: 2
N1: 2
N2: 2
j: 2
m: 100
density_k: square
density_l: square
coefficients: {kind: vertices, vertices: [[1, -1], [1, 1]]}
)");
    EXPECT_TRUE(has_error(d, "invalid M")) << errors_of(d);
}

TEST(ParseConfig, EveryCookbookConfigParses) {
    int count = 0;
    for (const auto& e : fs::directory_iterator(SDLAB_COOKBOOK_DIR)) {
        if (e.path().extension() != ".yaml") continue;
        ++count;
        const auto r = parse_config(read_file(e.path()));
        EXPECT_TRUE(r.ok()) << e.path() << "\n" << errors_of(r);
    }
    EXPECT_GE(count, 8);
}

TEST(Run, CookbookRunsAtReducedM) {
    RunOptions opt;
    opt.max_m = 400;
    for (const auto& e : fs::directory_iterator(SDLAB_COOKBOOK_DIR)) {
        if (e.path().extension() != ".yaml") continue;
        const auto rep = run_experiment(load_config(e.path().string()), opt);
        EXPECT_NE(rep.verdict(), "violated") << e.path();
        EXPECT_FALSE(rep.curves.empty()) << e.path();
        EXPECT_NO_THROW(report_from_json(emit_json(rep))) << e.path();
    }
}

TEST(Run, ClaimedOrderIsConsistentAndReversedIsViolated) {
    auto c = *parse_config(kThin).config;
    const auto rep = run_experiment(c);
    EXPECT_EQ(rep.verdict(), "consistent");
    EXPECT_EQ(exit_code(rep.verdict()), 0);
    c.reversed = true;
    const auto rev = run_experiment(c);
    EXPECT_EQ(rev.verdict(), "violated");
    EXPECT_EQ(exit_code(rev.verdict()), 3);
}

TEST(Run, DeterministicAcrossRunsAndWorkers) {
    const auto c = *parse_config(kMinimal).config;
    RunOptions a, b;
    a.max_m = b.max_m = 1500;
    a.timestamp = "2000-01-01T00:00:00Z";
    b.timestamp = "2001-01-01T00:00:00Z";
    b.workers = 3;
    const auto ja = emit_json(run_experiment(c, a)), jb = emit_json(run_experiment(c, b));
    EXPECT_NE(ja, jb);
    EXPECT_EQ(drop_timestamp(ja), drop_timestamp(jb));
    RunOptions s = a;
    s.seed_override = 43;
    const auto js = run_experiment(c, s);
    EXPECT_EQ(js.seed, 43u);
    EXPECT_EQ(js.config["seed"], 43);
    EXPECT_NE(drop_timestamp(emit_json(js)), drop_timestamp(ja));
}

TEST(Run, HypothesisViolationPropagates) {
    auto c = *parse_config(R"(
experiment: dominance
seed: 1
n: 2
N: 3
m: 100
density: {kind: gaussian, sigma: 0.1}
coefficients: cube
functional: volume
compare_z: always
)").config;
    EXPECT_THROW(run_experiment(c), HypothesisError);
}

TEST(Emit, EmptyReportIsValidJson) {
    Report r;
    r.experiment = "dominance";
    r.timestamp = "t";
    const auto text = emit_json(r);
    const auto j = Json::parse(text);
    EXPECT_TRUE(j["curves"].is_array() && j["curves"].empty());
    EXPECT_TRUE(j["checks"].is_array() && j["checks"].empty());
    EXPECT_EQ(j["verdict"], "none");
    EXPECT_EQ(emit_csv(r), "curve,row,x,y1,y2,y3,y4\n");
}

TEST(Emit, JsonRoundTripIsIdentical) {
    Report r;
    r.experiment = "lln";
    r.seed = 18446744073709551615ull;
    r.checks.push_back({"c", "consistent", Json{{"x", 0.1}, {"n", 3}, {"nan", nullptr}}});
    r.curves.push_back({"k", {"a", "b"}, {{0.1, 1.0 / 3}, {1e-300, std::nan("")}, {-0.0, 1e20}}});
    r.results["pi"] = 3.141592653589793;
    r.timestamp = "2000-01-01T00:00:00Z";
    const auto a = emit_json(r);
    const auto b = emit_json(report_from_json(a));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("0.33333333333333331"), std::string::npos);
    EXPECT_NE(a.find("0.10000000000000001"), std::string::npos);
    // one timestamp field
    EXPECT_EQ(a.find("timestamp"), a.rfind("timestamp"));
}

TEST(Emit, CsvRowsMatchTheAlphaGrid) {
    auto c = *parse_config(kMinimal).config;
    c.compare_z = CompareZ::never;
    RunOptions opt;
    opt.max_m = 300;
    const auto rep = run_experiment(c, opt);
    ASSERT_EQ(rep.curves.size(), 1u);
    const auto x = dominance::run_ensemble(c.densities, dominance::Ensemble::X, *c.functional, 300, RngStream(42, 0).substream(0));
    const auto xs = dominance::run_ensemble(c.densities, dominance::Ensemble::Xstar, *c.functional, 300, RngStream(42, 0).substream(1));
    const auto grid = dominance::merged_quantile_grid(x, xs);
    const auto csv = emit_csv(rep);
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), grid.size() + 1);
    EXPECT_EQ(rep.curves[0].rows.size(), grid.size());
}

TEST(Cli, ExitCodesAndArtifacts) {
    const fs::path dir = scratch("cli");
    {
        std::ofstream(dir / "thin.yaml") << kThin;
        std::ofstream(dir / "reversed.yaml") << kThin << "direction: reversed\n";
        std::ofstream(dir / "bad.yaml") << "experiment: dominance\n";
    }
    EXPECT_EQ(run_cli("run " + (dir / "thin.yaml").string() + " --out " + (dir / "a").string()), 0);
    EXPECT_EQ(run_cli("run " + (dir / "thin.yaml").string() + " --out " + (dir / "b").string() + " --workers 2"), 0);
    EXPECT_EQ(drop_timestamp(read_file(dir / "a" / "report.json")), drop_timestamp(read_file(dir / "b" / "report.json")));
    EXPECT_EQ(read_file(dir / "a" / "curves.csv"), read_file(dir / "b" / "curves.csv"));
    EXPECT_TRUE(fs::exists(dir / "a" / "summary.txt"));
    EXPECT_EQ(run_cli("run " + (dir / "reversed.yaml").string() + " --out " + (dir / "c").string()), 3);
    EXPECT_EQ(run_cli("validate " + (dir / "bad.yaml").string()), 2);
    EXPECT_EQ(run_cli("validate " + (dir / "thin.yaml").string()), 0);
    EXPECT_EQ(run_cli("run " + (dir / "bad.yaml").string()), 2);
    EXPECT_EQ(run_cli("cookbook list"), 0);
    // default output directory from the environment
    const std::string env = "SDLAB_OUT_DIR=" + (dir / "env").string() + " ";
    const int st = std::system((env + SDLAB_CLI_PATH + " run " + (dir / "thin.yaml").string() + " > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(st), 0);
    EXPECT_TRUE(fs::exists(dir / "env" / "thin" / "report.json"));
}
