#include "cchm/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>

namespace cchm {

MixedGraph::MixedGraph(std::vector<std::string> nodes, GraphKind kind)
    : names_(std::move(nodes)), kind_(kind) {
    std::sort(names_.begin(), names_.end());
    if (std::adjacent_find(names_.begin(), names_.end()) != names_.end()) {
        throw GraphError("duplicate node identifier");
    }
    for (const auto& n : names_) {
        if (n.empty()) throw GraphError("empty node identifier");
    }
    marks_.assign(names_.size() * names_.size(), Mark::None);
}

NodeId MixedGraph::index_of(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw GraphError("unknown node '" + name + "'");
    return static_cast<NodeId>(it - names_.begin());
}

void MixedGraph::check(NodeId i) const {
    if (i < 0 || i >= size()) throw GraphError("node index out of range: " + std::to_string(i));
}

void MixedGraph::set_edge(NodeId i, NodeId j, Mark at_i, Mark at_j) {
    check(i);
    check(j);
    if (i == j) throw GraphError("self-loop on '" + names_[i] + "'");
    if (at_i == Mark::None || at_j == Mark::None) throw GraphError("edge marks must not be None");
    marks_[offset(j, i)] = at_i;
    marks_[offset(i, j)] = at_j;
}

void MixedGraph::set_mark(NodeId i, NodeId j, Mark at_j) {
    if (!adjacent(i, j)) throw GraphError("no edge " + names_[i] + "," + names_[j]);
    marks_[offset(i, j)] = at_j;
}

void MixedGraph::remove_edge(NodeId i, NodeId j) {
    check(i);
    check(j);
    marks_[offset(i, j)] = Mark::None;
    marks_[offset(j, i)] = Mark::None;
}

NodeSet MixedGraph::neighbors(NodeId i) const {
    NodeSet out;
    for (NodeId j = 0; j < size(); ++j) {
        if (adjacent(i, j)) out.push_back(j);
    }
    return out;
}

NodeSet MixedGraph::parents(NodeId i) const {
    NodeSet out;
    for (NodeId j = 0; j < size(); ++j) {
        if (adjacent(i, j) && is_directed(j, i)) out.push_back(j);
    }
    return out;
}

NodeSet MixedGraph::children(NodeId i) const {
    NodeSet out;
    for (NodeId j = 0; j < size(); ++j) {
        if (adjacent(i, j) && is_directed(i, j)) out.push_back(j);
    }
    return out;
}

NodeSet MixedGraph::spouses(NodeId i) const {
    NodeSet out;
    for (NodeId j = 0; j < size(); ++j) {
        if (adjacent(i, j) && is_bidirected(i, j)) out.push_back(j);
    }
    return out;
}

std::vector<std::pair<NodeId, NodeId>> MixedGraph::edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId i = 0; i < size(); ++i) {
        for (NodeId j = i + 1; j < size(); ++j) {
            if (adjacent(i, j)) out.emplace_back(i, j);
        }
    }
    return out;
}

int MixedGraph::num_edges() const {
    int count = 0;
    for (NodeId i = 0; i < size(); ++i) {
        for (NodeId j = i + 1; j < size(); ++j) count += adjacent(i, j) ? 1 : 0;
    }
    return count;
}

std::vector<bool> ancestor_mask(const MixedGraph& g, const NodeSet& targets) {
    std::vector<bool> mask(g.size(), false);
    std::vector<NodeId> stack;
    for (NodeId t : targets) {
        if (!mask[t]) {
            mask[t] = true;
            stack.push_back(t);
        }
    }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId p = 0; p < g.size(); ++p) {
            if (!mask[p] && g.adjacent(p, v) && g.is_directed(p, v)) {
                mask[p] = true;
                stack.push_back(p);
            }
        }
    }
    return mask;
}

std::vector<bool> descendant_mask(const MixedGraph& g, NodeId source) {
    std::vector<bool> mask(g.size(), false);
    std::vector<NodeId> stack{source};
    mask[source] = true;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId c = 0; c < g.size(); ++c) {
            if (!mask[c] && g.adjacent(v, c) && g.is_directed(v, c)) {
                mask[c] = true;
                stack.push_back(c);
            }
        }
    }
    return mask;
}

namespace {

// Returns the nodes of one directed cycle, or an empty vector.
NodeSet find_directed_cycle(const MixedGraph& g) {
    const int n = g.size();
    std::vector<int> color(n, 0);
    std::vector<NodeId> parent(n, -1);
    NodeSet cycle;
    std::function<bool(NodeId)> visit = [&](NodeId v) {
        color[v] = 1;
        for (NodeId c = 0; c < n; ++c) {
            if (!g.adjacent(v, c) || !g.is_directed(v, c)) continue;
            if (color[c] == 1) {
                for (NodeId u = v; u != c; u = parent[u]) cycle.push_back(u);
                cycle.push_back(c);
                std::reverse(cycle.begin(), cycle.end());
                return true;
            }
            if (color[c] == 0) {
                parent[c] = v;
                if (visit(c)) return true;
            }
        }
        color[v] = 2;
        return false;
    };
    for (NodeId v = 0; v < n; ++v) {
        if (color[v] == 0 && visit(v)) break;
    }
    return cycle;
}

std::string join_names(const MixedGraph& g, const NodeSet& nodes) {
    std::string out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k) out += ',';
        out += g.name(nodes[k]);
    }
    return out;
}

}  // namespace

bool is_ancestral(const MixedGraph& g) {
    if (!find_directed_cycle(g).empty()) return false;
    for (auto [i, j] : g.edges()) {
        if (g.mark(i, j) == Mark::Circle || g.mark(j, i) == Mark::Circle) return false;
        if (g.mark(i, j) == Mark::Tail && g.mark(j, i) == Mark::Tail) return false;
    }
    for (NodeId i = 0; i < g.size(); ++i) {
        auto desc = descendant_mask(g, i);
        for (NodeId j : g.spouses(i)) {
            if (desc[j]) return false;
        }
    }
    return true;
}

std::vector<std::string> validate_mag(const MixedGraph& g) {
    std::vector<std::string> violations;
    for (auto [i, j] : g.edges()) {
        const Mark a = g.mark(j, i);
        const Mark b = g.mark(i, j);
        if (a == Mark::Circle || b == Mark::Circle) {
            violations.push_back("circle mark on edge " + g.name(i) + "," + g.name(j));
        } else if (a == Mark::Tail && b == Mark::Tail) {
            violations.push_back("undirected edge " + g.name(i) + "," + g.name(j));
        }
    }
    if (!violations.empty()) return violations;

    NodeSet cycle = find_directed_cycle(g);
    if (!cycle.empty()) {
        violations.push_back("directed cycle " + join_names(g, cycle));
        return violations;
    }
    for (auto [i, j] : g.edges()) {
        if (!g.is_bidirected(i, j)) continue;
        for (auto [from, to] : {std::pair{i, j}, std::pair{j, i}}) {
            if (descendant_mask(g, from)[to]) {
                violations.push_back("almost-directed cycle " + g.name(from) + "->...->" + g.name(to) +
                                     "<->" + g.name(from));
            }
        }
    }
    if (!violations.empty()) return violations;

    // In an ancestral graph, non-adjacent x and y are m-separable iff they are
    // m-separated by An({x, y}) \ {x, y}.
    for (NodeId x = 0; x < g.size(); ++x) {
        for (NodeId y = x + 1; y < g.size(); ++y) {
            if (g.adjacent(x, y)) continue;
            auto anc = ancestor_mask(g, {x, y});
            NodeSet z;
            for (NodeId v = 0; v < g.size(); ++v) {
                if (anc[v] && v != x && v != y) z.push_back(v);
            }
            if (!m_separated(g, x, y, z)) {
                violations.push_back("not maximal: " + g.name(x) + "," + g.name(y) +
                                     " are non-adjacent but inseparable");
            }
        }
    }
    return violations;
}

bool m_separated(const MixedGraph& g, NodeId x, NodeId y, const NodeSet& z) {
    const int n = g.size();
    if (x < 0 || y < 0 || x >= n || y >= n) throw GraphError("invalid node in m_separated");
    if (x == y) throw GraphError("m_separated requires distinct nodes");
    std::vector<bool> in_z(n, false);
    for (NodeId v : z) {
        if (v < 0 || v >= n) throw GraphError("invalid conditioning node");
        if (v == x || v == y) throw GraphError("conditioning set contains an endpoint");
        in_z[v] = true;
    }
    const auto anc_z = ancestor_mask(g, z);

    // State: (node, arrived with an arrowhead at node).
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) * 2, 0);
    std::deque<std::pair<NodeId, bool>> queue;
    for (NodeId w = 0; w < n; ++w) {
        if (!g.adjacent(x, w)) continue;
        if (w == y) return false;
        const bool arrow = g.mark(x, w) == Mark::Arrow;
        if (!seen[w * 2 + arrow]) {
            seen[w * 2 + arrow] = 1;
            queue.emplace_back(w, arrow);
        }
    }
    while (!queue.empty()) {
        auto [w, arrow_in] = queue.front();
        queue.pop_front();
        for (NodeId u = 0; u < n; ++u) {
            if (!g.adjacent(w, u)) continue;
            const bool collider = arrow_in && g.mark(u, w) == Mark::Arrow;
            const bool open = collider ? static_cast<bool>(anc_z[w]) : !in_z[w];
            if (!open) continue;
            if (u == y) return false;
            const bool arrow = g.mark(w, u) == Mark::Arrow;
            if (!seen[u * 2 + arrow]) {
                seen[u * 2 + arrow] = 1;
                queue.emplace_back(u, arrow);
            }
        }
    }
    return true;
}

std::vector<NodeSet> c_components(const MixedGraph& g) {
    const int n = g.size();
    std::vector<NodeId> root(n);
    std::iota(root.begin(), root.end(), 0);
    std::function<NodeId(NodeId)> find = [&](NodeId v) { return root[v] == v ? v : root[v] = find(root[v]); };
    for (auto [i, j] : g.edges()) {
        if (g.is_bidirected(i, j)) {
            NodeId a = find(i), b = find(j);
            if (a != b) root[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<NodeSet> out;
    std::vector<int> slot(n, -1);
    for (NodeId v = 0; v < n; ++v) {
        NodeId r = find(v);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[slot[r]].push_back(v);
    }
    return out;
}

MixedGraph latent_project(const MixedGraph& dag, const NodeSet& latents) {
    std::vector<bool> hidden(dag.size(), false);
    for (NodeId l : latents) {
        if (l < 0 || l >= dag.size()) throw GraphError("invalid latent node");
        hidden[l] = true;
    }
    NodeSet observed;
    std::vector<std::string> names;
    for (NodeId v = 0; v < dag.size(); ++v) {
        if (!hidden[v]) {
            observed.push_back(v);
            names.push_back(dag.name(v));
        }
    }
    if (observed.empty()) throw GraphError("latent_project: every node is latent");

    MixedGraph mag(names, GraphKind::MAG);
    std::vector<std::vector<bool>> desc(dag.size());
    for (NodeId v : observed) desc[v] = descendant_mask(dag, v);

    const int m = static_cast<int>(observed.size());
    for (int p = 0; p < m; ++p) {
        for (int q = p + 1; q < m; ++q) {
            const NodeId a = observed[p];
            const NodeId b = observed[q];
            // Inducing path relative to the latents exists iff a and b are
            // d-connected given the observed ancestors of {a, b}.
            auto anc = ancestor_mask(dag, {a, b});
            NodeSet z;
            for (NodeId v : observed) {
                if (anc[v] && v != a && v != b) z.push_back(v);
            }
            if (m_separated(dag, a, b, z)) continue;
            if (desc[a][b]) {
                mag.add_directed(p, q);
            } else if (desc[b][a]) {
                mag.add_directed(q, p);
            } else {
                mag.add_bidirected(p, q);
            }
        }
    }
    return mag;
}

bool markov_equivalent(const MixedGraph& m1, const MixedGraph& m2) {
    if (m1.names() != m2.names()) throw GraphError("markov_equivalent: node sets differ");
    const int n = m1.size();
    for (NodeId x = 0; x < n; ++x) {
        for (NodeId y = x + 1; y < n; ++y) {
            if (m1.adjacent(x, y) != m2.adjacent(x, y)) return false;
        }
    }
    for (NodeId x = 0; x < n; ++x) {
        for (NodeId y = x + 1; y < n; ++y) {
            NodeSet rest;
            for (NodeId v = 0; v < n; ++v) {
                if (v != x && v != y) rest.push_back(v);
            }
            const std::uint64_t subsets = std::uint64_t{1} << rest.size();
            NodeSet z;
            for (std::uint64_t mask = 0; mask < subsets; ++mask) {
                z.clear();
                for (std::size_t k = 0; k < rest.size(); ++k) {
                    if (mask >> k & 1U) z.push_back(rest[k]);
                }
                if (m_separated(m1, x, y, z) != m_separated(m2, x, y, z)) return false;
            }
        }
    }
    return true;
}

std::vector<Triple> unshielded_triples(const MixedGraph& g) {
    std::vector<Triple> out;
    for (NodeId c = 0; c < g.size(); ++c) {
        NodeSet adj = g.neighbors(c);
        for (std::size_t p = 0; p < adj.size(); ++p) {
            for (std::size_t q = p + 1; q < adj.size(); ++q) {
                if (!g.adjacent(adj[p], adj[q])) out.push_back({adj[p], c, adj[q]});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

MixedGraph skeleton_of(const MixedGraph& g, Mark mark) {
    MixedGraph out(g.names(), mark == Mark::Circle ? GraphKind::PAG : GraphKind::Unclassified);
    for (auto [i, j] : g.edges()) out.set_edge(i, j, mark, mark);
    return out;
}

MixedGraph induced_subgraph(const MixedGraph& g, const NodeSet& keep) {
    std::vector<std::string> names;
    for (NodeId v : keep) names.push_back(g.name(v));
    MixedGraph out(names, g.kind());
    for (NodeId v : keep) {
        for (NodeId w : keep) {
            if (v < w && g.adjacent(v, w)) {
                out.set_edge(out.index_of(g.name(v)), out.index_of(g.name(w)), g.mark(w, v), g.mark(v, w));
            }
        }
    }
    return out;
}

}  // namespace cchm
