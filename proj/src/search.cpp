#include "cchm/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cchm/effects.hpp"

namespace cchm {

std::string triple_label(const MixedGraph& g, const Triple& t) {
    return g.name(t.a) + "-" + g.name(t.c) + "-" + g.name(t.b);
}

OrientationSpace::OrientationSpace(const Constraints& constraints)
    : skeleton_(constraints.skeleton), edges_(constraints.skeleton.edges()) {
    const int n = skeleton_.size();
    edge_of_.assign(static_cast<std::size_t>(n) * n, -1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto [i, j] = edges_[e];
        edge_of_[static_cast<std::size_t>(i) * n + j] = static_cast<int>(e);
        edge_of_[static_cast<std::size_t>(j) * n + i] = static_cast<int>(e);
    }
    whitelist_.assign(constraints.triples.whitelist.begin(), constraints.triples.whitelist.end());
    blacklist_.assign(constraints.triples.blacklist.begin(), constraints.triples.blacklist.end());
    triples_by_edge_.resize(edges_.size());
    auto attach = [&](const Triple& t, bool collider) {
        if (!skeleton_.adjacent(t.a, t.c) || !skeleton_.adjacent(t.c, t.b) || skeleton_.adjacent(t.a, t.b)) {
            throw std::invalid_argument("constraint triple is not an unshielded triple of the skeleton");
        }
        triples_by_edge_[edge_index(t.a, t.c)].emplace_back(t, collider);
        triples_by_edge_[edge_index(t.c, t.b)].emplace_back(t, collider);
    };
    for (const Triple& t : whitelist_) attach(t, true);
    for (const Triple& t : blacklist_) attach(t, false);
}

std::size_t OrientationSpace::edge_index(NodeId a, NodeId b) const {
    const int e = edge_of_[static_cast<std::size_t>(a) * skeleton_.size() + b];
    if (e < 0) throw std::logic_error("edge_index: not a skeleton edge");
    return static_cast<std::size_t>(e);
}

void OrientationSpace::drop_blacklisted(const Triple& t) {
    blacklist_.erase(std::remove(blacklist_.begin(), blacklist_.end(), t), blacklist_.end());
    for (auto& list : triples_by_edge_) {
        list.erase(std::remove_if(list.begin(), list.end(),
                                  [&](const auto& entry) { return !entry.second && entry.first == t; }),
                   list.end());
    }
}

void OrientationSpace::apply(MixedGraph& g, std::size_t edge, EdgeState state) const {
    auto [lo, hi] = edges_[edge];
    switch (state) {
        case EdgeState::Forward: g.add_directed(lo, hi); break;
        case EdgeState::Backward: g.add_directed(hi, lo); break;
        case EdgeState::Bidirected: g.add_bidirected(lo, hi); break;
    }
}

MixedGraph OrientationSpace::to_graph(const std::vector<EdgeState>& assignment) const {
    MixedGraph g(skeleton_.names(), GraphKind::MAG);
    for (std::size_t e = 0; e < edges_.size(); ++e) apply(g, e, assignment[e]);
    return g;
}

bool OrientationSpace::arrow_at(const std::vector<EdgeState>& assignment, NodeId centre, NodeId other) const {
    const std::size_t e = edge_index(centre, other);
    const EdgeState s = assignment[e];
    if (s == EdgeState::Bidirected) return true;
    const bool centre_is_hi = edges_[e].second == centre;
    return centre_is_hi ? s == EdgeState::Forward : s == EdgeState::Backward;
}

bool OrientationSpace::triple_ok(const std::vector<EdgeState>& assignment, const Triple& t, bool collider) const {
    const bool both = arrow_at(assignment, t.c, t.a) && arrow_at(assignment, t.c, t.b);
    return collider ? both : !both;
}

bool OrientationSpace::is_valid(const std::vector<EdgeState>& assignment) const {
    if (assignment.size() != edges_.size()) return false;
    for (const Triple& t : whitelist_) {
        if (!triple_ok(assignment, t, true)) return false;
    }
    for (const Triple& t : blacklist_) {
        if (!triple_ok(assignment, t, false)) return false;
    }
    return is_ancestral(to_graph(assignment));
}

bool OrientationSpace::change_is_valid(const MixedGraph& current, const std::vector<EdgeState>& assignment,
                                       std::size_t edge, EdgeState state) const {
    std::vector<EdgeState> changed = assignment;
    changed[edge] = state;
    for (const auto& [t, collider] : triples_by_edge_[edge]) {
        if (!triple_ok(changed, t, collider)) return false;
    }
    // The graph without this edge is ancestral; check only what the new edge adds.
    MixedGraph base = current;
    auto [lo, hi] = edges_[edge];
    base.remove_edge(lo, hi);
    if (state == EdgeState::Bidirected) {
        return !ancestor_mask(base, {hi})[lo] && !ancestor_mask(base, {lo})[hi];
    }
    const NodeId from = state == EdgeState::Forward ? lo : hi;
    const NodeId to = state == EdgeState::Forward ? hi : lo;
    const auto anc_from = ancestor_mask(base, {from});
    if (anc_from[to]) return false;
    const auto desc_to = descendant_mask(base, to);
    // New ancestor pairs (a, d) with a in An(from), d in De(to) must not be spouses.
    for (NodeId a = 0; a < base.size(); ++a) {
        if (!anc_from[a]) continue;
        for (NodeId d : base.spouses(a)) {
            if (desc_to[d]) return false;
        }
    }
    return true;
}

InitialState initial_state(const Constraints& constraints) {
    OrientationSpace space(constraints);
    InitialState out;
    out.state.assignment.assign(space.edges().size(), EdgeState::Bidirected);
    auto& assignment = out.state.assignment;

    for (const Triple& t : constraints.triples.blacklist) {
        auto arrow_at_centre = [&](NodeId other) {
            MixedGraph g = space.to_graph(assignment);
            return g.mark(other, t.c) == Mark::Arrow;
        };
        if (!(arrow_at_centre(t.a) && arrow_at_centre(t.b))) continue;
        bool repaired = false;
        for (NodeId target : {t.a, t.b}) {
            auto trial = assignment;
            const NodeId lo = std::min(t.c, target);
            const std::size_t e = std::find(space.edges().begin(), space.edges().end(),
                                             std::make_pair(lo, std::max(t.c, target))) -
                                  space.edges().begin();
            trial[e] = t.c == lo ? EdgeState::Forward : EdgeState::Backward;  // c -> target
            MixedGraph g = space.to_graph(trial);
            bool whitelist_ok = true;
            for (const Triple& w : constraints.triples.whitelist) {
                if (g.mark(w.a, w.c) != Mark::Arrow || g.mark(w.b, w.c) != Mark::Arrow) whitelist_ok = false;
            }
            if (whitelist_ok && is_ancestral(g)) {
                assignment = std::move(trial);
                repaired = true;
                break;
            }
        }
        if (!repaired) out.dropped.push_back(t);
    }
    out.state.valid = true;
    return out;
}

std::vector<SearchState> neighbors(const SearchState& state, const Constraints& constraints) {
    OrientationSpace space(constraints);
    const MixedGraph current = space.to_graph(state.assignment);
    std::vector<SearchState> out;
    for (std::size_t e = 0; e < space.edges().size(); ++e) {
        for (EdgeState s : {EdgeState::Forward, EdgeState::Backward, EdgeState::Bidirected}) {
            if (s == state.assignment[e] || !space.change_is_valid(current, state.assignment, e, s)) continue;
            SearchState next{state.assignment, 0.0, true};
            next.assignment[e] = s;
            out.push_back(std::move(next));
        }
    }
    return out;
}

ClimbResult hill_climb(const Constraints& constraints, const MagScorer& scorer, const CchmConfig& config,
                       const Deadline& deadline) {
    InitialState init = initial_state(constraints);
    OrientationSpace space(constraints);
    for (const Triple& t : init.dropped) space.drop_blacklisted(t);

    ClimbResult out;
    out.dropped = init.dropped;
    out.state = init.state;
    MixedGraph current = space.to_graph(out.state.assignment);
    out.state.score = scorer.bic(current);
    out.initial_score = out.state.score;

    while (true) {
        if (deadline.expired()) {
            out.timed_out = true;
            break;
        }
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_edge = 0;
        EdgeState best_state = EdgeState::Bidirected;
        for (std::size_t e = 0; e < space.edges().size(); ++e) {
            const EdgeState was = out.state.assignment[e];
            for (EdgeState s : {EdgeState::Forward, EdgeState::Backward, EdgeState::Bidirected}) {
                if (s == was || !space.change_is_valid(current, out.state.assignment, e, s)) continue;
                space.apply(current, e, s);
                const double score = scorer.bic(current);
                space.apply(current, e, was);
                if (score < best) {
                    best = score;
                    best_edge = e;
                    best_state = s;
                }
            }
        }
        // Moves within score_epsilon are score-equivalent and left to the effect phase.
        if (!(best < out.state.score - config.score_epsilon)) break;
        out.state.assignment[best_edge] = best_state;
        space.apply(current, best_edge, best_state);
        out.state.score = best;
        ++out.steps;
    }
    out.state.valid = true;
    return out;
}

OrientResult orient_by_effects(const Constraints& constraints, const SearchState& state, const MagScorer& scorer,
                               const Eigen::MatrixXd& moments, double score_epsilon) {
    OrientationSpace space(constraints);
    OrientResult out{state, {}};
    MixedGraph current = space.to_graph(out.state.assignment);
    // Constraint entries dropped during initialisation are already satisfied-or-ignored
    // by the incoming state; drop any the state violates so checks stay consistent.
    for (const Triple& t : constraints.triples.blacklist) {
        if (current.mark(t.a, t.c) == Mark::Arrow && current.mark(t.b, t.c) == Mark::Arrow) {
            space.drop_blacklisted(t);
        }
    }
    for (std::size_t e = 0; e < space.edges().size(); ++e) {
        auto [lo, hi] = space.edges()[e];
        const EffectPair pair = orient_pair(moments, lo, hi);
        if (pair.chosen == EffectDirection::Tie) continue;
        const EdgeState target = pair.chosen == EffectDirection::AtoB ? EdgeState::Forward : EdgeState::Backward;
        const EdgeState was = out.state.assignment[e];
        if (target == was || !space.change_is_valid(current, out.state.assignment, e, target)) continue;
        space.apply(current, e, target);
        const double score = scorer.bic(current);
        if (std::abs(score - out.state.score) < score_epsilon) {
            out.state.assignment[e] = target;
            out.state.score = score;
            out.flips.push_back({lo, hi, was, target, pair.beta_a, pair.beta_b});
        } else {
            space.apply(current, e, was);
        }
    }
    return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Dataset sorted_columns(const Dataset& data) {
    std::vector<int> idx(data.names.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    std::sort(idx.begin(), idx.end(), [&](int l, int r) { return data.names[l] < data.names[r]; });
    Dataset out;
    for (int k : idx) out.names.push_back(data.names[k]);
    out.values = data.values(Eigen::all, idx);
    return out;
}

}  // namespace

CchmResult cchm(const Dataset& input, const CchmConfig& config) {
    if (input.variables() < 2) throw DegenerateInput("cchm: need at least 2 variables");
    if (input.samples() <= config.max_sepset + 3) throw DegenerateInput("cchm: need n > max_sepset + 3");
    const Deadline deadline(config.timeout_seconds);
    Dataset data = sorted_columns(input);
    if (config.standardize) data = standardize(data);

    CchmResult result;
    CchmReport& report = result.report;
    report.variables = data.variables();
    report.samples = data.samples();

    auto start = std::chrono::steady_clock::now();
    CovarianceMatrix cov = covariance(data);
    for (int d : cov.degenerate) report.degenerate.push_back(cov.names[d]);
    if (data.variables() - static_cast<int>(cov.degenerate.size()) < 2) {
        throw DegenerateInput("cchm: fewer than 2 non-degenerate variables");
    }

    FisherZTest test(cov.values, cov.samples, config.alpha);
    Constraints constraints;
    {
        SkeletonResult skel = learn_skeleton(data.names, test, config.max_sepset, cov.degenerate, deadline);
        constraints.skeleton = std::move(skel.skeleton);
        constraints.sepsets = std::move(skel.sepsets);
    }
    constraints.triples = classify_triples(constraints.skeleton, test, config.max_sepset, deadline);
    report.skeleton_edges = constraints.skeleton.num_edges();
    report.whitelist = static_cast<int>(constraints.triples.whitelist.size());
    report.blacklist = static_cast<int>(constraints.triples.blacklist.size());
    report.ambiguous = static_cast<int>(constraints.triples.ambiguous.size());
    report.seconds_constraints = seconds_since(start);

    // Degenerate variables stay isolated, so their diagonal entry only adds a
    // constant to every score; a unit value keeps the matrix positive definite.
    Eigen::MatrixXd score_cov = cov.values;
    for (int d : cov.degenerate) score_cov(d, d) = 1.0;
    MagScorer scorer(score_cov, cov.samples, config.ricf);

    start = std::chrono::steady_clock::now();
    ClimbResult climb = hill_climb(constraints, scorer, config, deadline);
    report.seconds_climb = seconds_since(start);
    report.initial_score = climb.initial_score;
    report.climb_score = climb.state.score;
    report.climb_steps = climb.steps;
    report.timed_out = climb.timed_out;
    for (const Triple& t : climb.dropped) report.dropped.push_back(triple_label(constraints.skeleton, t));

    SearchState final_state = climb.state;
    start = std::chrono::steady_clock::now();
    if (!climb.timed_out) {
        const Eigen::MatrixXd moments = second_moments(data, config.centred_moments);
        OrientResult oriented = orient_by_effects(constraints, climb.state, scorer, moments, config.score_epsilon);
        report.effect_flips = static_cast<int>(oriented.flips.size());
        final_state = std::move(oriented.state);
    }
    report.seconds_effects = seconds_since(start);
    report.final_score = final_state.score;

    OrientationSpace space(constraints);
    result.mag = space.to_graph(final_state.assignment);
    result.mag.set_kind(GraphKind::MAG);
    for (const std::string& v : validate_mag(result.mag)) report.maximality_violations.push_back(v);
    result.pag = ancestral_to_pag(result.mag);
    report.cached_components = scorer.cache().size();
    return result;
}

}  // namespace cchm
