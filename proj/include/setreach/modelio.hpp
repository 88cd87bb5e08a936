#ifndef SETREACH_MODELIO_HPP_
#define SETREACH_MODELIO_HPP_

#include "setreach/expr.hpp"
#include "setreach/hybridize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace setreach
{

inline constexpr const char* kModelSchema = "setreach-model/1";
inline constexpr const char* kFlowpipeSchema = "setreach-flowpipe/1";
inline constexpr const char* kTracesSchema = "setreach-traces/1";
inline constexpr const char* kToolVersion = "setreach 1.0.0";

/// Malformed or inconsistent model/flowpipe file. `where` is a JSON pointer
/// (e.g. "/modes/1/A") or "line L, column C" for syntax errors.
class ModelError : public std::runtime_error
{
    public:
        ModelError(const std::string& where, const std::string& what)
            : std::runtime_error(where + ": " + what), where_(where)
        {
        }
        const std::string& where() const { return where_; }

    private:
        std::string where_;
};

enum class ModelKind
{
    LinearDiscrete,
    LinearContinuous,
    Hybrid,
    Nonlinear
};

std::string to_string(ModelKind k);

enum class HybridizationMethod
{
    Dynamic,
    Static
};

struct NonlinearModel
{
    std::vector<std::string> variables;
    std::vector<std::string> sources; // f_i as written
    std::vector<Expr> f;
    HessianSource hessian = HessianSource::Interval;
    Vector hessian_bound; // HessianSource::Given
    SetRep X0 = EmptySet{};
    HybridizationMethod method = HybridizationMethod::Dynamic;
    std::optional<Box> region;        // static
    std::vector<std::size_t> cells;   // static
    DynamicConfig dynamic;            // dynamic (reach part unused, see ModelFile::hybrid_cfg)
    StaticHybridOptions static_opts;

    NonlinearSystem system() const;
};

struct ModelFile
{
    std::string schema = kModelSchema;
    ModelKind kind = ModelKind::LinearDiscrete;
    std::string name;
    LinearSystem linear;                    // linear kinds
    HybridAutomaton hybrid;                 // hybrid
    std::optional<NonlinearModel> nonlinear;
    HybridConfig hybrid_cfg;                // reach part is used by every kind
    std::string config_json;                // effective config block, canonical form

    const ReachConfig& reach() const { return hybrid_cfg.reach; }
    Eigen::Index dim() const;
};

/// Strict parse: unknown fields, wrong types and dimension mismatches throw ModelError.
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct FlowpipeRecord
{
    std::size_t pipe = 0; // index of the mode pipe (0 for non-hybrid kinds)
    std::size_t step = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::string mode;     // empty for non-hybrid kinds
    SetRep set = EmptySet{};
};

struct FlowpipeFile
{
    std::string schema = kFlowpipeSchema;
    ModelKind kind = ModelKind::LinearDiscrete;
    Eigen::Index dim = 0;
    FlowStatus status = FlowStatus::Completed;
    std::size_t status_step = 0;
    bool over_approx = false;
    std::vector<FlowpipeRecord> records;
    std::string model_hash;
    std::string config_json;
    std::string tool_version = kToolVersion;
    std::vector<std::string> warnings;
};

bool operator==(const FlowpipeFile& a, const FlowpipeFile& b);

/// JSON text; every number is printed with 17 significant digits.
std::string write_flowpipe(const FlowpipeFile& f);
FlowpipeFile read_flowpipe(const std::string& text);

std::string set_to_json(const SetRep& s);
SetRep set_from_json(const std::string& text);

struct RunResult
{
    FlowpipeFile flowpipe;
    bool bad_hit = false;       // some segment met the bad set
    std::size_t bad_record = 0; // first such record
    bool depth_exhausted = false; // hybrid: a jump inside the horizon was not explored
};

/**
 * Runs the model's analysis and packs the result. With `check_bad_set` the
 * run stops at the first segment meeting the model's bad set where the
 * engine supports it (linear, hybrid); nonlinear pipes are scanned after.
 */
RunResult run_model(const ModelFile& m, const std::string& model_text, bool check_bad_set);

enum class Verdict
{
    Safe,    // horizon covered, bad set never met
    Unknown  // bad set met by the over-approximation, or analysis incomplete
};

struct CheckResult
{
    Verdict verdict = Verdict::Unknown;
    RunResult run;
    std::string message;
};

/// Bad-set check over the horizon. Throws ModelError when the model has no bad set.
CheckResult check_model(const ModelFile& m, const std::string& model_text);

struct TracePoint
{
    double t = 0.0;
    Vector x;
    std::string mode; // empty for non-hybrid kinds
};

using Trace = std::vector<TracePoint>;

/**
 * Random executions over the horizon: initial states and inputs are drawn
 * from X0 and V (inputs held constant over each period r), nonlinear
 * models are integrated with RK4 at r/100. Hybrid runs take an enabled
 * transition at random, and are forced to when the invariant would break.
 */
std::vector<Trace> simulate_model(const ModelFile& m, std::size_t runs, std::uint64_t seed);

std::string traces_to_json(const std::vector<Trace>& traces);

/// SVG with one polygon per record, the projection onto dims (i, j); -1 stands for time.
std::string plot_svg(const FlowpipeFile& f, int i, int j);

/// Command-line entry point; returns the process exit code.
int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace setreach

#endif
