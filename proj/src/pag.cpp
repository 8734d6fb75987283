#include "cchm/graph.hpp"

#include <deque>

// FCI orientation with the MAG itself as the independence oracle. Without
// selection bias the rule set R1-R4, R8-R10 is complete.

namespace cchm {
namespace {

class Orienter {
public:
    Orienter(const MixedGraph& mag, MixedGraph& pag) : mag_(mag), pag_(pag), n_(pag.size()) {}

    void run() {
        orient_colliders();
        bool changed = true;
        while (changed) {
            changed = false;
            changed |= rule1();
            changed |= rule2();
            changed |= rule3();
            changed |= rule4();
            if (changed) continue;
            changed |= rule8();
            changed |= rule9();
            changed |= rule10();
        }
    }

private:
    bool adj(NodeId a, NodeId b) const { return pag_.adjacent(a, b); }
    Mark at(NodeId from, NodeId to) const { return pag_.mark(from, to); }

    bool set(NodeId from, NodeId to, Mark m) {
        if (pag_.mark(from, to) == m) return false;
        pag_.set_mark(from, to, m);
        return true;
    }

    void orient_colliders() {
        for (const Triple& t : unshielded_triples(mag_)) {
            if (mag_.mark(t.a, t.c) == Mark::Arrow && mag_.mark(t.b, t.c) == Mark::Arrow) {
                pag_.set_mark(t.a, t.c, Mark::Arrow);
                pag_.set_mark(t.b, t.c, Mark::Arrow);
            }
        }
    }

    // a *-> b o-* c, a and c non-adjacent  =>  b -> c
    bool rule1() {
        bool changed = false;
        for (NodeId b = 0; b < n_; ++b) {
            for (NodeId a : pag_.neighbors(b)) {
                if (at(a, b) != Mark::Arrow) continue;
                for (NodeId c : pag_.neighbors(b)) {
                    if (c == a || adj(a, c) || at(c, b) != Mark::Circle) continue;
                    changed |= set(c, b, Mark::Tail);
                    changed |= set(b, c, Mark::Arrow);
                }
            }
        }
        return changed;
    }

    // a -> b *-> c or a *-> b -> c, with a *-o c  =>  a *-> c
    bool rule2() {
        bool changed = false;
        for (NodeId a = 0; a < n_; ++a) {
            for (NodeId c : pag_.neighbors(a)) {
                if (at(a, c) != Mark::Circle) continue;
                for (NodeId b : pag_.neighbors(a)) {
                    if (b == c || !adj(b, c)) continue;
                    const bool first = pag_.is_directed(a, b) && at(b, c) == Mark::Arrow;
                    const bool second = at(a, b) == Mark::Arrow && pag_.is_directed(b, c);
                    if (first || second) {
                        changed |= set(a, c, Mark::Arrow);
                        break;
                    }
                }
            }
        }
        return changed;
    }

    // a *-> b <-* c, a *-o t o-* c, a and c non-adjacent, t *-o b  =>  t *-> b
    bool rule3() {
        bool changed = false;
        for (NodeId b = 0; b < n_; ++b) {
            for (NodeId t : pag_.neighbors(b)) {
                if (at(t, b) != Mark::Circle) continue;
                const NodeSet nb = pag_.neighbors(b);
                bool found = false;
                for (std::size_t p = 0; p < nb.size() && !found; ++p) {
                    for (std::size_t q = p + 1; q < nb.size() && !found; ++q) {
                        NodeId a = nb[p], c = nb[q];
                        if (a == t || c == t || adj(a, c)) continue;
                        if (at(a, b) != Mark::Arrow || at(c, b) != Mark::Arrow) continue;
                        if (!adj(a, t) || !adj(c, t)) continue;
                        if (at(a, t) == Mark::Circle && at(c, t) == Mark::Circle) found = true;
                    }
                }
                if (found) changed |= set(t, b, Mark::Arrow);
            }
        }
        return changed;
    }

    // Discriminating path <d, ..., a, b, c> for b with b o-* c.
    bool rule4() {
        bool changed = false;
        for (NodeId c = 0; c < n_; ++c) {
            for (NodeId b : pag_.neighbors(c)) {
                if (at(c, b) != Mark::Circle) continue;
                for (NodeId a : pag_.neighbors(b)) {
                    if (a == c || !adj(a, c)) continue;
                    if (at(b, a) != Mark::Arrow || !pag_.is_directed(a, c)) continue;
                    if (!has_discriminating_path(a, b, c)) continue;
                    const bool collider = mag_.mark(a, b) == Mark::Arrow && mag_.mark(c, b) == Mark::Arrow;
                    if (collider) {
                        changed |= set(a, b, Mark::Arrow);
                        changed |= set(b, a, Mark::Arrow);
                        changed |= set(c, b, Mark::Arrow);
                        changed |= set(b, c, Mark::Arrow);
                    } else {
                        changed |= set(c, b, Mark::Tail);
                        changed |= set(b, c, Mark::Arrow);
                    }
                    break;
                }
            }
        }
        return changed;
    }

    // Searches backwards from `a` over colliders that are parents of `c`.
    bool has_discriminating_path(NodeId a, NodeId b, NodeId c) const {
        std::vector<bool> visited(n_, false);
        visited[a] = visited[b] = visited[c] = true;
        std::deque<NodeId> queue{a};
        while (!queue.empty()) {
            NodeId q = queue.front();
            queue.pop_front();
            for (NodeId d : pag_.neighbors(q)) {
                if (visited[d] || at(d, q) != Mark::Arrow) continue;
                if (!adj(d, c)) return true;
                if (pag_.is_directed(d, c) && at(q, d) == Mark::Arrow) {
                    visited[d] = true;
                    queue.push_back(d);
                }
            }
        }
        return false;
    }

    // a -> b -> c or a -o b -> c, with a o-> c  =>  a -> c
    bool rule8() {
        bool changed = false;
        for (NodeId a = 0; a < n_; ++a) {
            for (NodeId c : pag_.neighbors(a)) {
                if (!is_circle_arrow(a, c)) continue;
                for (NodeId b : pag_.neighbors(a)) {
                    if (b == c || !adj(b, c) || !pag_.is_directed(b, c)) continue;
                    const bool tail_at_a = at(b, a) == Mark::Tail;
                    const bool into_b = at(a, b) == Mark::Arrow || at(a, b) == Mark::Circle;
                    if (tail_at_a && into_b) {
                        changed |= set(c, a, Mark::Tail);
                        break;
                    }
                }
            }
        }
        return changed;
    }

    bool is_circle_arrow(NodeId a, NodeId c) const {
        return at(c, a) == Mark::Circle && at(a, c) == Mark::Arrow;
    }

    // An edge u *-* v may lie on a potentially directed path from u to v.
    bool potentially_directed(NodeId u, NodeId v) const {
        return at(v, u) != Mark::Arrow && at(u, v) != Mark::Tail;
    }

    // First steps m of uncovered potentially directed paths a, m, ..., target
    // avoiding `excluded`.
    std::vector<bool> uncovered_pd_first_steps(NodeId a, NodeId target, NodeId excluded) const {
        std::vector<bool> result(n_, false);
        std::vector<bool> on_path(n_, false);
        on_path[a] = true;
        on_path[excluded] = true;
        for (NodeId m : pag_.neighbors(a)) {
            if (m == excluded || !potentially_directed(a, m)) continue;
            on_path[m] = true;
            if (m == target || extend(a, m, target, on_path)) result[m] = true;
            on_path[m] = false;
        }
        return result;
    }

    bool extend(NodeId prev, NodeId cur, NodeId target, std::vector<bool>& on_path) const {
        for (NodeId next : pag_.neighbors(cur)) {
            if (on_path[next] || adj(prev, next) || !potentially_directed(cur, next)) continue;
            if (next == target) return true;
            on_path[next] = true;
            const bool ok = extend(cur, next, target, on_path);
            on_path[next] = false;
            if (ok) return true;
        }
        return false;
    }

    // a o-> c with an uncovered p.d. path <a, b, ..., c>, b and c non-adjacent  =>  a -> c
    bool rule9() {
        bool changed = false;
        for (NodeId a = 0; a < n_; ++a) {
            for (NodeId c : pag_.neighbors(a)) {
                if (!is_circle_arrow(a, c)) continue;
                std::vector<bool> on_path(n_, false);
                on_path[a] = true;
                for (NodeId b : pag_.neighbors(a)) {
                    if (b == c || adj(b, c) || !potentially_directed(a, b)) continue;
                    on_path[b] = true;
                    const bool ok = extend(a, b, c, on_path);
                    on_path[b] = false;
                    if (ok) {
                        changed |= set(c, a, Mark::Tail);
                        break;
                    }
                }
            }
        }
        return changed;
    }

    // a o-> c, b -> c <- t, uncovered p.d. paths from a to b and to t whose
    // first steps m, w differ and are non-adjacent  =>  a -> c
    bool rule10() {
        bool changed = false;
        for (NodeId a = 0; a < n_; ++a) {
            for (NodeId c : pag_.neighbors(a)) {
                if (!is_circle_arrow(a, c)) continue;
                NodeSet into_c;
                for (NodeId p : pag_.neighbors(c)) {
                    if (p != a && pag_.is_directed(p, c)) into_c.push_back(p);
                }
                bool done = false;
                for (std::size_t i = 0; i < into_c.size() && !done; ++i) {
                    auto first_b = uncovered_pd_first_steps(a, into_c[i], c);
                    for (std::size_t j = i + 1; j < into_c.size() && !done; ++j) {
                        auto first_t = uncovered_pd_first_steps(a, into_c[j], c);
                        for (NodeId m = 0; m < n_ && !done; ++m) {
                            if (!first_b[m]) continue;
                            for (NodeId w = 0; w < n_; ++w) {
                                if (first_t[w] && m != w && !adj(m, w)) {
                                    done = true;
                                    break;
                                }
                            }
                        }
                    }
                }
                if (done) changed |= set(c, a, Mark::Tail);
            }
        }
        return changed;
    }

    const MixedGraph& mag_;
    MixedGraph& pag_;
    int n_;
};

}  // namespace

MixedGraph mag_to_pag(const MixedGraph& mag) {
    auto violations = validate_mag(mag);
    if (!violations.empty()) throw GraphError("mag_to_pag: invalid MAG: " + violations.front());
    return ancestral_to_pag(mag);
}

MixedGraph ancestral_to_pag(const MixedGraph& g) {
    if (!is_ancestral(g)) throw GraphError("ancestral_to_pag: graph is not ancestral");
    MixedGraph pag = skeleton_of(g, Mark::Circle);
    Orienter(g, pag).run();
    pag.set_kind(GraphKind::PAG);
    return pag;
}

}  // namespace cchm
