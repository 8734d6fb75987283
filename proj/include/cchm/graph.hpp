#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cchm {

using NodeId = int;
using NodeSet = std::vector<NodeId>;

/// Endpoint mark of an edge. `None` is only used internally to mean "no edge".
enum class Mark : std::uint8_t { None = 0, Tail = 1, Arrow = 2, Circle = 3 };

enum class GraphKind { DAG, MAG, PAG, Unclassified };

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mixed graph over named nodes. Nodes are kept in lexicographic order of
/// their identifiers and addressed by their position in that order.
///
/// `mark(i, j)` is the mark at `j` on the edge between `i` and `j`, so an
/// edge i -> j has mark(j, i) == Tail and mark(i, j) == Arrow.
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(std::vector<std::string> nodes, GraphKind kind = GraphKind::Unclassified);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(NodeId i) const { return names_.at(i); }
    NodeId index_of(const std::string& name) const;

    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind kind) { kind_ = kind; }

    bool adjacent(NodeId i, NodeId j) const { return marks_[offset(i, j)] != Mark::None; }
    Mark mark(NodeId i, NodeId j) const { return marks_[offset(i, j)]; }

    /// Sets (or replaces) the edge i *-* j with the given marks at i and at j.
    void set_edge(NodeId i, NodeId j, Mark at_i, Mark at_j);
    void set_mark(NodeId i, NodeId j, Mark at_j);
    void remove_edge(NodeId i, NodeId j);
    void add_directed(NodeId from, NodeId to) { set_edge(from, to, Mark::Tail, Mark::Arrow); }
    void add_bidirected(NodeId i, NodeId j) { set_edge(i, j, Mark::Arrow, Mark::Arrow); }

    bool is_directed(NodeId from, NodeId to) const {
        return mark(to, from) == Mark::Tail && mark(from, to) == Mark::Arrow;
    }
    bool is_bidirected(NodeId i, NodeId j) const {
        return mark(i, j) == Mark::Arrow && mark(j, i) == Mark::Arrow;
    }

    NodeSet neighbors(NodeId i) const;
    NodeSet parents(NodeId i) const;
    NodeSet children(NodeId i) const;
    NodeSet spouses(NodeId i) const;

    /// All edges as (i, j) with i < j, in lexicographic order.
    std::vector<std::pair<NodeId, NodeId>> edges() const;
    int num_edges() const;

    /// Same nodes and marks; the kind tag is not compared.
    bool operator==(const MixedGraph& other) const {
        return names_ == other.names_ && marks_ == other.marks_;
    }

private:
    std::size_t offset(NodeId i, NodeId j) const {
        return static_cast<std::size_t>(i) * names_.size() + static_cast<std::size_t>(j);
    }
    void check(NodeId i) const;

    std::vector<std::string> names_;
    std::vector<Mark> marks_;
    GraphKind kind_ = GraphKind::Unclassified;
};

struct Triple {
    NodeId a;
    NodeId c;
    NodeId b;

    auto operator<=>(const Triple&) const = default;
};

/// Ancestors of `targets` (inclusive) through directed edges.
std::vector<bool> ancestor_mask(const MixedGraph& g, const NodeSet& targets);
/// Descendants of `source` (inclusive) through directed edges.
std::vector<bool> descendant_mask(const MixedGraph& g, NodeId source);

/// Directed cycle or almost-directed cycle detection. Returns true iff the
/// directed part is acyclic and no bidirected edge joins an ancestor pair.
bool is_ancestral(const MixedGraph& g);

/// Ancestrality and maximality violations, each as a readable message.
/// Maximality is checked only when the graph is ancestral.
std::vector<std::string> validate_mag(const MixedGraph& g);

/// m-separation of x and y given z (reachability formulation).
bool m_separated(const MixedGraph& g, NodeId x, NodeId y, const NodeSet& z);

/// Bidirected-connected components, each sorted, ordered by smallest member.
std::vector<NodeSet> c_components(const MixedGraph& g);

/// MAG over the observed nodes of `dag` after marginalising `latents`.
MixedGraph latent_project(const MixedGraph& dag, const NodeSet& latents);

/// True iff both MAGs induce the same set of m-separation statements.
bool markov_equivalent(const MixedGraph& m1, const MixedGraph& m2);

/// PAG of the Markov equivalence class of `mag` (no selection bias).
MixedGraph mag_to_pag(const MixedGraph& mag);

/// The same orientation procedure for an ancestral graph that may not be
/// maximal (search output is maximality-checked but not repaired).
MixedGraph ancestral_to_pag(const MixedGraph& g);

std::vector<Triple> unshielded_triples(const MixedGraph& g);

/// Same nodes and adjacencies with every endpoint set to `mark`.
MixedGraph skeleton_of(const MixedGraph& g, Mark mark = Mark::Circle);

/// Subgraph induced by `keep` (indices into g), preserving marks.
MixedGraph induced_subgraph(const MixedGraph& g, const NodeSet& keep);

}  // namespace cchm
