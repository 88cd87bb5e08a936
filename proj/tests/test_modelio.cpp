#include "setreach/modelio.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

using namespace setreach;
namespace fs = std::filesystem;

namespace
{

const fs::path kFixtures = SETREACH_FIXTURES;

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> valid_fixtures()
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(kFixtures))
        if (e.is_regular_file() && e.path().extension() == ".json")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<fs::path> checkable_fixtures()
{
    std::vector<fs::path> out;
    for (const auto& p : valid_fixtures())
        if (load_model(p.string()).reach().bad_set)
            out.push_back(p);
    return out;
}

struct CliResult
{
    int code;
    std::string out, err;
};

CliResult cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "setreach");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("setreach_test_" + name); }

// Library-level status, computed without going through run_model.
bool library_says_bad(const ModelFile& m)
{
    HybridConfig hc = m.hybrid_cfg;
    hc.reach.mode = Termination::BadSet;
    switch (m.kind)
    {
        case ModelKind::LinearDiscrete:
        case ModelKind::LinearContinuous: return reach(m.linear, hc.reach).status == FlowStatus::BadReached;
        case ModelKind::Hybrid: return hybrid_reach(m.hybrid, hc).status == FlowStatus::BadReached;
        case ModelKind::Nonlinear:
        {
            const NonlinearModel& nl = *m.nonlinear;
            if (nl.method == HybridizationMethod::Static)
            {
                const HybridAutomaton H = static_hybridize(nl.system(), *nl.region, nl.cells, nl.static_opts);
                return static_hybrid_reach(H, nl.X0, hc).status == FlowStatus::BadReached;
            }
            DynamicConfig dc = nl.dynamic;
            dc.reach = hc.reach;
            dc.reach.mode = Termination::Bounded;
            const DynamicResult r = dynamic_hybridize_reach(nl.system(), nl.X0, dc);
            for (const auto& s : r.pipe.segments)
                if (!is_empty(intersect(s.set, *hc.reach.bad_set)))
                    return true;
            return false;
        }
    }
    return false;
}

FlowpipeFile two_segment_pipe()
{
    FlowpipeFile f;
    f.kind = ModelKind::LinearDiscrete;
    f.dim = 2;
    f.records.push_back({0, 0, 0.0, 0.0, "", Box((Vector(2) << 0, 0).finished(), (Vector(2) << 1, 1).finished())});
    f.records.push_back({0, 1, 1.0, 1.0, "", Box((Vector(2) << 1, 0.5).finished(), (Vector(2) << 2, 1.5).finished())});
    return f;
}

std::vector<Matrix> svg_polygons(const std::string& svg)
{
    std::vector<Matrix> out;
    const std::regex poly(R"(<polygon[^>]*points="([^"]*)\")");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it)
    {
        std::vector<double> xs, ys;
        std::istringstream ss((*it)[1].str());
        std::string pt;
        while (ss >> pt)
        {
            const auto c = pt.find(',');
            xs.push_back(std::stod(pt.substr(0, c)));
            ys.push_back(std::stod(pt.substr(c + 1)));
        }
        Matrix P(2, static_cast<Eigen::Index>(xs.size()));
        for (std::size_t k = 0; k < xs.size(); ++k)
            P.col(static_cast<Eigen::Index>(k)) << xs[k], ys[k];
        out.push_back(P);
    }
    return out;
}

} // namespace

TEST(ModelParse, MinimalDiscreteModelRoundTrips)
{
    const std::string text = slurp(kFixtures / "minimal_1d.json");
    const ModelFile m = parse_model(text);
    EXPECT_EQ(m.kind, ModelKind::LinearDiscrete);
    EXPECT_EQ(m.dim(), 1);
    EXPECT_EQ(m.linear.A(0, 0), 0.9);
    EXPECT_EQ(m.reach().L, 5.0);
    EXPECT_FALSE(m.reach().bad_set);

    const RunResult r = run_model(m, text, false);
    EXPECT_EQ(r.flowpipe.records.size(), 6u);
    EXPECT_EQ(r.flowpipe.model_hash, fnv1a_hex(text));
    const std::string written = write_flowpipe(r.flowpipe);
    const FlowpipeFile back = read_flowpipe(written);
    EXPECT_TRUE(back == r.flowpipe);
    EXPECT_EQ(write_flowpipe(back), written);
}

TEST(ModelParse, DimensionErrorNamesBothFields)
{
    try
    {
        parse_model(slurp(kFixtures / "invalid" / "dim_mismatch.json"));
        FAIL();
    }
    catch (const ModelError& e)
    {
        EXPECT_EQ(e.where(), "/X0");
        const std::string msg = e.what();
        EXPECT_NE(msg.find("X0"), std::string::npos);
        EXPECT_NE(msg.find("A is 2x2"), std::string::npos);
        EXPECT_NE(msg.find("dimension 3"), std::string::npos);
    }
}

TEST(ModelParse, ErrorsArePositioned)
{
    const std::vector<std::pair<std::string, std::string>> cases{
        {"unknown_field.json", "/config/horizon"},
        {"syntax_error.json", "line 5, column 1"},
        {"bad_expression.json", "/f/0"},
        {"unknown_mode.json", "/transitions/0/target"},
        {"wrong_schema.json", "/schema"},
    };
    for (const auto& [file, where] : cases)
    {
        try
        {
            parse_model(slurp(kFixtures / "invalid" / file));
            ADD_FAILURE() << file << " parsed";
        }
        catch (const ModelError& e)
        {
            EXPECT_EQ(e.where(), where) << file << ": " << e.what();
        }
    }
}

TEST(ModelParse, RejectsInconsistentModels)
{
    const std::string head = R"({"schema": "setreach-model/1", "kind": "linear-discrete", )";
    const std::string x0 = R"("X0": {"type": "box", "lo": [0, 0], "hi": [1, 1]}, )";
    auto where = [&](const std::string& body) {
        try
        {
            parse_model(head + body + "}");
        }
        catch (const ModelError& e)
        {
            return e.where();
        }
        return std::string("(accepted)");
    };
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], )" + x0 + R"("config": {"L": 2, "r": 0})"), "/config/r");
    EXPECT_EQ(where(R"("A": [[1, 0], [0]], )" + x0 + R"("config": {"L": 2})"), "/A/1");
    EXPECT_EQ(where(R"("A": [[1, 0, 0], [0, 1, 0]], )" + x0 + R"("config": {"L": 2})"), "/A");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], "B": [[1]], "V": {"type": "box", "lo": [0], "hi": [1]}, )" + x0
                  + R"("config": {"L": 2})"),
        "/B");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], "B": [[1], [0]], )" + x0 + R"("config": {"L": 2})"), "/V");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], )" + x0 + R"("config": {"L": 2, "termination": "bad_set"})"),
        "/bad_set");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], )" + x0 + R"("config": {"L": 2, "strategy": "magic"})"),
        "/config/strategy");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], )" + x0 + R"("config": {"L": 2, "template": [[1, 0, 0]]})"),
        "/config/template");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], "X0": {"type": "box", "lo": [0, 2], "hi": [1, 1]}, "config": {"L": 2})"),
        "/X0");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], "X0": {"type": "ball"}, "config": {"L": 2})"), "/X0/type");
    EXPECT_EQ(where(R"("A": [[1, 0], [0, 1]], )" + x0 + R"("config": {"L": 2}, "extra": 1)"), "/extra");
}

TEST(ModelParse, AllFixturesLoad)
{
    for (const auto& p : valid_fixtures())
        EXPECT_NO_THROW(load_model(p.string())) << p;
}

TEST(ModelParse, ConfigIsCanonical)
{
    const ModelFile m = load_model((kFixtures / "thermostat.json").string());
    EXPECT_NE(m.config_json.find("\"jump_depth\": 20"), std::string::npos);
    EXPECT_NE(m.config_json.find("\"template\": \"axis\""), std::string::npos);
    EXPECT_EQ(m.hybrid_cfg.jump_depth, 20u);
    EXPECT_EQ(m.reach().directions->rows(), 2);
}

TEST(Flowpipe, RoundTripIsBitIdentical)
{
    std::mt19937_64 rng(11);
    for (const auto& p : valid_fixtures())
    {
        const std::string text = slurp(p);
        const RunResult r = run_model(parse_model(text), text, false);
        const std::string written = write_flowpipe(r.flowpipe);
        const FlowpipeFile back = read_flowpipe(written);
        ASSERT_TRUE(back == r.flowpipe) << p;
        EXPECT_EQ(write_flowpipe(back), written) << p;
        ASSERT_EQ(back.records.size(), r.flowpipe.records.size());
        std::normal_distribution<double> g;
        for (std::size_t i = 0; i < back.records.size(); i += 7)
        {
            Vector d(back.dim);
            for (Eigen::Index k = 0; k < d.size(); ++k)
                d(k) = g(rng);
            EXPECT_EQ(support_value(back.records[i].set, d), support_value(r.flowpipe.records[i].set, d)) << p;
        }
    }
}

TEST(Flowpipe, SetJsonRoundTrip)
{
    const std::vector<SetRep> sets{
        Box((Vector(2) << 0.1, -3).finished(), (Vector(2) << 1.0 / 3.0, 2).finished()),
        HPolytope((Matrix(3, 2) << 1, 1, -1, 0, 0, -1).finished(), (Vector(3) << 1, 0, 0).finished()),
        VPolytope((Matrix(2, 3) << 0, 1, 0, 0, 0, 1).finished()),
        Zonotope((Vector(2) << 1, 2).finished(), (Matrix(2, 2) << 0.1, 0.2, 0.3, M_PI).finished()),
        EmptySet{2},
    };
    for (const auto& s : sets)
    {
        const std::string j = set_to_json(s);
        EXPECT_EQ(set_to_json(set_from_json(j)), j);
    }
}

TEST(Flowpipe, ReaderRejectsGarbage)
{
    EXPECT_THROW(read_flowpipe("{}"), ModelError);
    EXPECT_THROW(read_flowpipe("[1, 2"), ModelError);
    std::string good = write_flowpipe(two_segment_pipe());
    std::string bad = std::regex_replace(good, std::regex("setreach-flowpipe/1"), "setreach-flowpipe/9");
    EXPECT_THROW(read_flowpipe(bad), ModelError);
}

TEST(Cli, ContractionIsSafe)
{
    const CliResult r = cli({"check", (kFixtures / "contraction.json").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("SAFE", 0), 0u) << r.out;
}

TEST(Cli, DoublingHitsBadSetAtStepTwo)
{
    const CliResult r = cli({"check", (kFixtures / "doubling.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("UNKNOWN-UNSAFE"), std::string::npos);
    EXPECT_NE(r.out.find("step 2,"), std::string::npos) << r.out;

    const ModelFile m = load_model((kFixtures / "doubling.json").string());
    const CheckResult c = check_model(m, "");
    EXPECT_EQ(c.run.flowpipe.status, FlowStatus::BadReached);
    EXPECT_EQ(c.run.flowpipe.status_step, 2u);
    EXPECT_EQ(c.run.flowpipe.records.size(), 3u);
}

TEST(Cli, CheckAgreesWithLibraryOnAllFixtures)
{
    for (const auto& p : checkable_fixtures())
    {
        const CliResult r = cli({"check", p.string()});
        const bool bad = library_says_bad(load_model(p.string()));
        EXPECT_EQ(r.code, bad ? 2 : 0) << p << ": " << r.out << r.err;
    }
}

TEST(Cli, ErrorsGoToStderr)
{
    for (const auto& e : fs::directory_iterator(kFixtures / "invalid"))
    {
        const CliResult r = cli({"check", e.path().string()});
        EXPECT_EQ(r.code, 1) << e.path();
        EXPECT_TRUE(r.out.empty());
        EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
    }
    EXPECT_EQ(cli({"check", (kFixtures / "minimal_1d.json").string()}).code, 1);
    EXPECT_EQ(cli({"check", "/nonexistent/model.json"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({"plot", "/nonexistent.json"}).code, 1);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ReachPlotSimulateFiles)
{
    const fs::path pipe = temp_file("pipe.json"), svg = temp_file("plot.svg"), traces = temp_file("traces.json");
    const std::string model = (kFixtures / "oscillator.json").string();
    ASSERT_EQ(cli({"reach", model, "-o", pipe.string()}).code, 0);
    const FlowpipeFile f = read_flowpipe(slurp(pipe));
    EXPECT_EQ(f.records.size(), 201u);
    EXPECT_EQ(f.tool_version, kToolVersion);
    EXPECT_EQ(f.model_hash, fnv1a_hex(slurp(model)));

    ASSERT_EQ(cli({"plot", pipe.string(), "--dims", "0,1", "-o", svg.string()}).code, 0);
    EXPECT_EQ(svg_polygons(slurp(svg)).size(), 201u);
    ASSERT_EQ(cli({"plot", pipe.string(), "--dims", "t,1", "-o", svg.string()}).code, 0);
    EXPECT_EQ(cli({"plot", pipe.string(), "--dims", "0,7"}).code, 1);
    EXPECT_EQ(cli({"plot", pipe.string(), "--dims", "0"}).code, 1);

    ASSERT_EQ(cli({"simulate", model, "--runs", "3", "--seed", "4", "-o", traces.string()}).code, 0);
    const std::string a = slurp(traces);
    EXPECT_NE(a.find("setreach-traces/1"), std::string::npos);
    ASSERT_EQ(cli({"simulate", model, "--runs", "3", "--seed", "4", "-o", traces.string()}).code, 0);
    EXPECT_EQ(slurp(traces), a);
    const CliResult other = cli({"simulate", model, "--runs", "3", "--seed", "5"});
    EXPECT_NE(other.out, a);
    fs::remove(pipe);
    fs::remove(svg);
    fs::remove(traces);
}

TEST(Plot, TwoSegmentsGiveTwoPolygons)
{
    const std::string svg = plot_svg(two_segment_pipe(), 0, 1);
    const auto polys = svg_polygons(svg);
    ASSERT_EQ(polys.size(), 2u);
    EXPECT_EQ(polys[1].cols(), 4);
    EXPECT_EQ(polys[1].row(0).minCoeff(), 1.0);
    EXPECT_EQ(polys[1].row(1).maxCoeff(), 1.5);
}

TEST(Plot, PolygonsAreExactProjections)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (const char* name : {"oscillator.json", "thermostat.json", "vanderpol.json", "drift_3d.json"})
    {
        const std::string text = slurp(kFixtures / name);
        const FlowpipeFile f = run_model(parse_model(text), text, false).flowpipe;
        const int j = f.dim > 1 ? 1 : -1;
        const auto polys = svg_polygons(plot_svg(f, 0, j));
        ASSERT_EQ(polys.size(), f.records.size()) << name;
        for (std::size_t r = 0; r < polys.size(); r += 5)
            for (int k = 0; k < 8; ++k)
            {
                const double a = g(rng), b = g(rng);
                const double from_svg = (a * polys[r].row(0) + b * polys[r].row(1)).maxCoeff();
                double from_set;
                if (j >= 0)
                {
                    Vector d = Vector::Zero(f.dim);
                    d(0) = a;
                    d(1) = b;
                    from_set = support_value(f.records[r].set, d);
                }
                else
                {
                    Vector d = Vector::Constant(1, a);
                    from_set = support_value(f.records[r].set, d) + std::max(b * f.records[r].t_lo, b * f.records[r].t_hi);
                }
                EXPECT_NEAR(from_svg, from_set, 1e-9 * (1 + std::abs(from_set))) << name << " record " << r;
            }
    }
}

TEST(Plot, ModesGetDistinctColors)
{
    const std::string text = slurp(kFixtures / "thermostat.json");
    const FlowpipeFile f = run_model(parse_model(text), text, false).flowpipe;
    const std::string svg = plot_svg(f, -1, 0);
    const std::regex heat(R"re(data-mode="heat" fill="([^"]+)")re"), cool(R"re(data-mode="cool" fill="([^"]+)")re");
    std::smatch mh, mc;
    ASSERT_TRUE(std::regex_search(svg, mh, heat));
    ASSERT_TRUE(std::regex_search(svg, mc, cool));
    EXPECT_NE(mh[1].str(), mc[1].str());
    EXPECT_THROW(plot_svg(f, 0, 0), std::invalid_argument);
}

// Every simulated point lies in a record of the same mode whose time interval contains it.
TEST(Simulate, TracesInsideReach)
{
    for (const auto& p : valid_fixtures())
    {
        const std::string text = slurp(p);
        const ModelFile m = parse_model(text);
        const FlowpipeFile f = run_model(m, text, false).flowpipe;
        const auto traces = simulate_model(m, 40, 1);
        ASSERT_EQ(traces.size(), 40u);
        std::size_t points = 0;
        for (const Trace& tr : traces)
            for (const TracePoint& pt : tr)
            {
                bool covered = false;
                for (const auto& rec : f.records)
                {
                    if (pt.t < rec.t_lo - 1e-9 || pt.t > rec.t_hi + 1e-9)
                        continue;
                    if (m.kind == ModelKind::Hybrid && rec.mode != pt.mode)
                        continue;
                    if (member(rec.set, pt.x, 1e-9))
                    {
                        covered = true;
                        break;
                    }
                }
                ASSERT_TRUE(covered) << p << " t " << pt.t << " x " << pt.x.transpose() << " mode " << pt.mode;
                ++points;
            }
        EXPECT_GT(points, 40u) << p;
    }
}

TEST(Simulate, SeedIsDeterministic)
{
    const ModelFile m = load_model((kFixtures / "thermostat.json").string());
    EXPECT_EQ(traces_to_json(simulate_model(m, 5, 9)), traces_to_json(simulate_model(m, 5, 9)));
    EXPECT_NE(traces_to_json(simulate_model(m, 5, 9)), traces_to_json(simulate_model(m, 5, 10)));
}

TEST(Simulate, HybridRunsSwitchBothWays)
{
    const ModelFile m = load_model((kFixtures / "thermostat.json").string());
    std::size_t early = 0, forced = 0;
    for (const Trace& tr : simulate_model(m, 200, 0))
        for (std::size_t i = 1; i < tr.size(); ++i)
            if (tr[i - 1].mode == "heat" && tr[i].mode == "cool")
                (tr[i - 1].x(0) < 22.0 - 1e-6 ? early : forced) += 1;
    EXPECT_GT(early, 0u);
    EXPECT_GT(forced, 0u);
}

TEST(Hash, Fnv1a)
{
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
