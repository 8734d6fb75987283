#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cchm/deadline.hpp"
#include "cchm/graph.hpp"
#include "cchm/independence.hpp"
#include "cchm/scoring.hpp"
#include "cchm/simulate.hpp"

namespace cchm {

/// Orientation of a skeleton edge (lo, hi) with lo < hi.
enum class EdgeState : std::uint8_t { Forward, Backward, Bidirected };

struct Constraints {
    MixedGraph skeleton;
    TripleLists triples;
    Sepsets sepsets;
};

struct SearchState {
    std::vector<EdgeState> assignment;  // one entry per skeleton edge, canonical order
    double score = 0.0;
    bool valid = false;
};

struct CchmConfig {
    double alpha = 0.01;
    int max_sepset = 4;
    RicfOptions ricf;
    std::uint64_t seed = 0;
    double timeout_seconds = 0.0;  // <= 0: unlimited
    /// BIC differences below this are treated as score-equivalent.
    double score_epsilon = 1e-6;
    bool centred_moments = false;
    bool standardize = false;
};

/// The orientation search space over a fixed skeleton, with the validity rules
/// (ancestrality, whitelist colliders, blacklist non-colliders).
class OrientationSpace {
public:
    explicit OrientationSpace(const Constraints& constraints);

    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const MixedGraph& skeleton() const { return skeleton_; }

    MixedGraph to_graph(const std::vector<EdgeState>& assignment) const;
    void apply(MixedGraph& g, std::size_t edge, EdgeState state) const;

    /// Full check of a complete assignment.
    bool is_valid(const std::vector<EdgeState>& assignment) const;

    /// Validity of `current` (assumed valid) with edge `edge` set to `state`.
    bool change_is_valid(const MixedGraph& current, const std::vector<EdgeState>& assignment, std::size_t edge,
                         EdgeState state) const;

    void drop_blacklisted(const Triple& t);

private:
    bool arrow_at(const std::vector<EdgeState>& assignment, NodeId centre, NodeId other) const;
    bool triple_ok(const std::vector<EdgeState>& assignment, const Triple& t, bool collider) const;
    std::size_t edge_index(NodeId a, NodeId b) const;

    MixedGraph skeleton_;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<int> edge_of_;  // n*n -> edge index or -1
    std::vector<Triple> whitelist_;
    std::vector<Triple> blacklist_;
    std::vector<std::vector<std::pair<Triple, bool>>> triples_by_edge_;  // bool: whitelist
};

struct InitialState {
    SearchState state;
    std::vector<Triple> dropped;  // blacklist entries that could not be satisfied
};

InitialState initial_state(const Constraints& constraints);

/// All valid states differing from `state` in exactly one edge (unscored).
std::vector<SearchState> neighbors(const SearchState& state, const Constraints& constraints);

struct ClimbResult {
    SearchState state;
    double initial_score = 0.0;
    int steps = 0;
    bool timed_out = false;
    std::vector<Triple> dropped;
};

ClimbResult hill_climb(const Constraints& constraints, const MagScorer& scorer, const CchmConfig& config,
                       const Deadline& deadline = Deadline());

struct EffectFlip {
    NodeId a;
    NodeId b;
    EdgeState before;
    EdgeState after;
    double beta_a;
    double beta_b;
};

struct OrientResult {
    SearchState state;
    std::vector<EffectFlip> flips;
};

/// Sets the direction of every score-equivalent edge by comparing direct effects.
OrientResult orient_by_effects(const Constraints& constraints, const SearchState& state, const MagScorer& scorer,
                               const Eigen::MatrixXd& moments, double score_epsilon);

struct CchmReport {
    int variables = 0;
    long samples = 0;
    std::vector<std::string> degenerate;
    int skeleton_edges = 0;
    int whitelist = 0;
    int blacklist = 0;
    int ambiguous = 0;
    std::vector<std::string> dropped;
    double initial_score = 0.0;
    double climb_score = 0.0;
    double final_score = 0.0;
    int climb_steps = 0;
    int effect_flips = 0;
    bool timed_out = false;
    std::vector<std::string> maximality_violations;
    double seconds_constraints = 0.0;
    double seconds_climb = 0.0;
    double seconds_effects = 0.0;
    std::size_t cached_components = 0;
};

struct CchmResult {
    MixedGraph mag;
    MixedGraph pag;
    CchmReport report;
};

CchmResult cchm(const Dataset& data, const CchmConfig& config);

std::string triple_label(const MixedGraph& g, const Triple& t);

}  // namespace cchm
