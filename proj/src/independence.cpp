#include "cchm/independence.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

namespace cchm {

CiResult fisher_z_test(const Eigen::MatrixXd& cov, NodeId i, NodeId j, const NodeSet& z, long n, double alpha) {
    const double r = partial_correlation(cov, i, j, z);
    CiResult out;
    out.statistic = fisher_z_statistic(r, n, z.size());
    out.p_value = normal_two_sided_p(out.statistic);
    out.conditioning = z;
    out.independent = out.p_value > alpha;
    return out;
}

CiResult FisherZTest::test(NodeId i, NodeId j, const NodeSet& z) const {
    ++tests_;
    // Symmetric in (i, j): the block is always assembled as (min, max).
    const NodeId lo = std::min(i, j);
    const NodeId hi = std::max(i, j);
    CiResult out = fisher_z_test(cov_, lo, hi, z, n_, alpha_);
    if (log_ != nullptr) {
        auto label = [&](NodeId v) { return names_ != nullptr ? (*names_)[v] : std::to_string(v); };
        std::string cond;
        for (std::size_t k = 0; k < z.size(); ++k) {
            if (k) cond += ' ';
            cond += label(z[k]);
        }
        char buf[128];
        const double r = partial_correlation(cov_, lo, hi, z);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r, out.statistic, out.p_value);
        *log_ << label(lo) << ',' << label(hi) << ',' << cond << ',' << buf << ','
              << (out.independent ? "independent" : "dependent") << '\n';
    }
    return out;
}

void FisherZTest::set_audit_log(std::ostream* log, const std::vector<std::string>* names) {
    log_ = log;
    names_ = names;
    if (log_ != nullptr) *log_ << "i,j,conditioning,r,z,p,decision\n";
}

CiResult OracleTest::test(NodeId i, NodeId j, const NodeSet& z) const {
    CiResult out;
    out.conditioning = z;
    out.independent = m_separated(truth_, i, j, z);
    out.p_value = out.independent ? 1.0 : 0.0;
    out.statistic = out.independent ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
}

void Sepsets::add(NodeId i, NodeId j, NodeSet set) {
    std::sort(set.begin(), set.end());
    sets_[{std::min(i, j), std::max(i, j)}].push_back(std::move(set));
}

const std::vector<NodeSet>* Sepsets::find(NodeId i, NodeId j) const {
    auto it = sets_.find({std::min(i, j), std::max(i, j)});
    return it == sets_.end() ? nullptr : &it->second;
}

namespace {

NodeSet without(const NodeSet& s, NodeId drop) {
    NodeSet out;
    for (NodeId v : s) {
        if (v != drop) out.push_back(v);
    }
    return out;
}

// Distinct size-k subsets of adj(i) \ {j} and adj(j) \ {i}, canonical order.
std::vector<NodeSet> candidate_sets(const MixedGraph& g, NodeId i, NodeId j, int k) {
    std::set<NodeSet> out;
    for (const NodeSet& pool : {without(g.neighbors(i), j), without(g.neighbors(j), i)}) {
        for_each_subset(pool, k, [&](const NodeSet& s) {
            out.insert(s);
            return true;
        });
    }
    return {out.begin(), out.end()};
}

}  // namespace

SkeletonResult learn_skeleton(const std::vector<std::string>& names, const IndependenceTest& test, int max_sepset,
                              const NodeSet& excluded, const Deadline& deadline) {
    if (max_sepset < 0) throw std::invalid_argument("learn_skeleton: max_sepset must be >= 0");
    SkeletonResult result{MixedGraph(names, GraphKind::PAG), {}};
    MixedGraph& g = result.skeleton;
    const int n = g.size();
    std::vector<bool> skip(n, false);
    for (NodeId v : excluded) skip.at(v) = true;

    // Level 0: marginal tests; their p-values fix the processing order of later levels.
    struct Pending {
        double p;
        NodeId i;
        NodeId j;
    };
    std::vector<Pending> order;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            if (skip[i] || skip[j]) continue;
            deadline.check();
            CiResult r = test.test(i, j, {});
            if (r.independent) {
                result.sepsets.add(i, j, {});
            } else {
                g.set_edge(i, j, Mark::Circle, Mark::Circle);
                order.push_back({r.p_value, i, j});
            }
        }
    }
    std::stable_sort(order.begin(), order.end(), [](const Pending& a, const Pending& b) {
        if (a.p != b.p) return a.p < b.p;
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });

    for (int k = 1; k <= max_sepset; ++k) {
        bool any_testable = false;
        for (const Pending& e : order) {
            if (!g.adjacent(e.i, e.j)) continue;
            std::vector<NodeSet> sets = candidate_sets(g, e.i, e.j, k);
            if (sets.empty()) continue;
            any_testable = true;
            std::vector<NodeSet> separating;
            for (const NodeSet& s : sets) {
                deadline.check();
                if (test.test(e.i, e.j, s).independent) separating.push_back(s);
            }
            if (!separating.empty()) {
                g.remove_edge(e.i, e.j);
                for (auto& s : separating) result.sepsets.add(e.i, e.j, std::move(s));
            }
        }
        if (!any_testable) break;
    }
    return result;
}

TripleLists classify_triples(const MixedGraph& skeleton, const IndependenceTest& test, int max_sepset,
                             const Deadline& deadline) {
    TripleLists lists;
    std::map<std::pair<NodeId, NodeId>, std::vector<NodeSet>> found;
    for (const Triple& t : unshielded_triples(skeleton)) {
        auto key = std::make_pair(t.a, t.b);
        auto it = found.find(key);
        if (it == found.end()) {
            std::vector<NodeSet> separating;
            for (int k = 0; k <= max_sepset; ++k) {
                for (const NodeSet& s : candidate_sets(skeleton, t.a, t.b, k)) {
                    deadline.check();
                    if (test.test(t.a, t.b, s).independent) separating.push_back(s);
                }
            }
            it = found.emplace(key, std::move(separating)).first;
        }
        const auto& separating = it->second;
        if (separating.empty()) {
            lists.ambiguous.insert(t);
            continue;
        }
        const auto contains_c = [&](const NodeSet& s) { return std::binary_search(s.begin(), s.end(), t.c); };
        const auto with_c = std::count_if(separating.begin(), separating.end(), contains_c);
        if (with_c == 0) {
            lists.whitelist.insert(t);
        } else if (with_c == static_cast<long>(separating.size())) {
            lists.blacklist.insert(t);
        } else {
            lists.ambiguous.insert(t);
        }
    }
    return lists;
}

}  // namespace cchm
