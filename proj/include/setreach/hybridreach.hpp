#ifndef SETREACH_HYBRIDREACH_HPP_
#define SETREACH_HYBRIDREACH_HPP_

#include "setreach/linreach.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace setreach
{

/// Flow of one mode: A x + B v + c with v in V.
struct Dynamics
{
    Matrix A;
    std::optional<Matrix> B;
    std::optional<SetRep> V;
    std::optional<Vector> c;
};

struct Mode
{
    std::string name;
    Dynamics dynamics;
    HPolytope invariant;
};

/// x -> M x + c on a jump.
struct Reset
{
    Matrix M;
    Vector c;
};

struct Transition
{
    std::size_t source = 0;
    std::size_t target = 0;
    HPolytope guard;
    std::optional<Reset> reset;
};

struct HybridAutomaton
{
    std::vector<Mode> modes;
    std::vector<Transition> transitions;
    std::size_t initial_mode = 0;
    SetRep initial = EmptySet{};
    TimeKind time_kind = TimeKind::Continuous;

    Eigen::Index dim() const { return modes.empty() ? 0 : modes.front().dynamics.A.rows(); }

    /// Throws DimensionError / std::invalid_argument on inconsistent data.
    void validate() const;
    /// Index of the mode called `name`; throws std::out_of_range.
    std::size_t mode_index(const std::string& name) const;
};

enum class Clustering
{
    TemplateHull, // one template hull per transition and contiguous run of steps
    None          // one jump per step
};

struct HybridConfig
{
    ReachConfig reach;           // L is the global horizon
    std::size_t jump_depth = 10;
    Clustering clustering = Clustering::TemplateHull;
    bool prune = false;          // skip entries contained in an earlier entry of the same mode
    std::size_t max_entries = 10000;
};

/// A step of mode_reach whose clipped segment meets a guard.
struct GuardHit
{
    std::size_t transition = 0;
    std::size_t step = 0;
    SetRep set = EmptySet{}; // clipped segment intersected with the guard
};

struct ModeReachResult
{
    Flowpipe pipe; // local times, segments clipped to the invariant
    std::vector<GuardHit> hits;
};

/**
 * Flowpipe of one mode from `entry`, each segment intersected with the
 * invariant. Stops at the first empty clipped segment or at the horizon.
 * Only the output is clipped; the recurrence itself runs unclipped.
 * Guards of the transitions leaving `mode` are tested on every clipped
 * segment. cfg.L is the local horizon.
 */
ModeReachResult mode_reach(const HybridAutomaton& H, std::size_t mode, const SetRep& entry, const ReachConfig& cfg);

/// Template hull of the union of segment-guard intersections, cut back to
/// the guard (and the invariant, when given). EmptySet if nothing hits.
SetRep cluster_hits(std::span<const SetRep> segments, const HPolytope& guard, const Template& directions,
    const HPolytope* invariant = nullptr);

SetRep apply_reset(const Transition& t, const SetRep& s, bool* over_approx = nullptr);

/// cluster_hits followed by the reset map.
SetRep guard_cross(std::span<const SetRep> segments, const Transition& t, const Template& directions);

struct ModeFlowpipe
{
    std::size_t mode = 0;
    std::size_t depth = 0;
    double entry_lo = 0.0; // global time interval of the entry set
    double entry_hi = 0.0;
    std::optional<std::size_t> parent; // jump record that created this entry
    Flowpipe pipe;                     // segment times are global
};

struct JumpRecord
{
    std::size_t from = 0; // index into HybridFlowpipe::pipes
    std::size_t transition = 0;
    std::size_t first_step = 0;
    std::size_t last_step = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    SetRep set = EmptySet{};       // before the reset
    std::optional<std::size_t> to; // child pipe, absent when not explored
};

struct HybridFlowpipe
{
    std::vector<ModeFlowpipe> pipes;
    std::vector<JumpRecord> jumps;
    FlowStatus status = FlowStatus::Completed;
    std::size_t bad_pipe = 0; // where the bad set was met, when status is bad_reached
    std::size_t bad_step = 0;
    bool over_approx = false;
    bool depth_exhausted = false; // some jump within the horizon was cut off by jump_depth
    std::vector<std::string> warnings;
};

/**
 * Worklist exploration over (mode, entry set, depth) in FIFO order. A
 * transition may fire wherever guard and invariant both hold. Entries are
 * explored up to `jump_depth` jumps; more than `max_entries` entries gives
 * status incomplete. Termination::BadSet stops at the first hit.
 */
HybridFlowpipe hybrid_reach(const HybridAutomaton& H, const HybridConfig& cfg);

} // namespace setreach

#endif
