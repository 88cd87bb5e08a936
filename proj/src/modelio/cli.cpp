#include "json_util.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace setreach
{

namespace
{

// SETREACH_LOG: quiet | warn (default) | info | debug.
enum class LogLevel
{
    Quiet,
    Warn,
    Info,
    Debug
};

LogLevel log_level()
{
    const char* v = std::getenv("SETREACH_LOG");
    if (!v)
        return LogLevel::Warn;
    const std::string s = v;
    if (s == "quiet")
        return LogLevel::Quiet;
    if (s == "info")
        return LogLevel::Info;
    if (s == "debug")
        return LogLevel::Debug;
    return LogLevel::Warn;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty() || path == "-")
    {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text))
        throw std::runtime_error(path + ": cannot write file");
}

int parse_dim(const std::string& s)
{
    if (s == "t")
        return -1;
    std::size_t used = 0;
    int v = -2;
    try
    {
        v = std::stoi(s, &used);
    }
    catch (const std::exception&)
    {
    }
    if (used != s.size() || v < 0)
        throw std::invalid_argument("--dims: expected 't' or a nonnegative index, got '" + s + "'");
    return v;
}

ModelFile load(const std::string& path, std::string& text)
{
    text = read_file(path);
    try
    {
        return parse_model(text);
    }
    catch (const ModelError& e)
    {
        throw std::runtime_error(path + ": " + e.what());
    }
}

} // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Set-based reachability for linear, hybrid and nonlinear systems", "setreach"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string model_path, output, flowpipe_path, dims = "0,1";
    std::size_t runs = 10;
    std::uint64_t seed = 0;

    auto* reach_cmd = app.add_subcommand("reach", "compute the flowpipe and write it as JSON");
    reach_cmd->add_option("model", model_path, "model file")->required();
    reach_cmd->add_option("-o,--output", output, "flowpipe file (stdout when omitted)");

    auto* check_cmd = app.add_subcommand("check", "bad-set check over the horizon; exit 0 SAFE, 2 UNKNOWN-UNSAFE");
    check_cmd->add_option("model", model_path, "model file")->required();
    check_cmd->add_option("-o,--output", output, "also write the flowpipe here");

    auto* plot_cmd = app.add_subcommand("plot", "2D projection of a flowpipe as SVG");
    plot_cmd->add_option("flowpipe", flowpipe_path, "flowpipe file")->required();
    plot_cmd->add_option("--dims", dims, "two coordinates i,j (0-based; 't' for time)");
    plot_cmd->add_option("-o,--output", output, "SVG file (stdout when omitted)");

    auto* sim_cmd = app.add_subcommand("simulate", "random executions of the model as JSON traces");
    sim_cmd->add_option("model", model_path, "model file")->required();
    sim_cmd->add_option("--runs", runs, "number of runs");
    sim_cmd->add_option("--seed", seed, "random seed");
    sim_cmd->add_option("-o,--output", output, "traces file (stdout when omitted)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    const LogLevel level = log_level();
    auto warn = [&](const std::vector<std::string>& ws) {
        if (level >= LogLevel::Warn)
            for (const auto& w : ws)
                err << "warning: " << w << '\n';
    };
    const auto t0 = std::chrono::steady_clock::now();
    auto debug_time = [&](const char* what) {
        if (level >= LogLevel::Debug)
            err << "debug: " << what << " took "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    };

    try
    {
        std::string text;
        if (reach_cmd->parsed())
        {
            const ModelFile m = load(model_path, text);
            const RunResult res = run_model(m, text, false);
            debug_time("reach");
            warn(res.flowpipe.warnings);
            if (level >= LogLevel::Info)
                err << "info: status " << to_string(res.flowpipe.status) << ", " << res.flowpipe.records.size()
                    << " segments\n";
            write_output(output, write_flowpipe(res.flowpipe), out);
            return 0;
        }
        if (check_cmd->parsed())
        {
            const ModelFile m = load(model_path, text);
            const CheckResult c = check_model(m, text);
            debug_time("check");
            warn(c.run.flowpipe.warnings);
            out << c.message << '\n';
            if (!output.empty())
                write_output(output, write_flowpipe(c.run.flowpipe), out);
            return c.verdict == Verdict::Safe ? 0 : 2;
        }
        if (plot_cmd->parsed())
        {
            const auto comma = dims.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("--dims: expected i,j");
            const int i = parse_dim(dims.substr(0, comma));
            const int j = parse_dim(dims.substr(comma + 1));
            FlowpipeFile f;
            try
            {
                f = read_flowpipe(read_file(flowpipe_path));
            }
            catch (const ModelError& e)
            {
                throw std::runtime_error(flowpipe_path + ": " + e.what());
            }
            write_output(output, plot_svg(f, i, j), out);
            return 0;
        }
        if (sim_cmd->parsed())
        {
            const ModelFile m = load(model_path, text);
            const auto traces = simulate_model(m, runs, seed);
            debug_time("simulate");
            write_output(output, traces_to_json(traces), out);
            return 0;
        }
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace setreach
