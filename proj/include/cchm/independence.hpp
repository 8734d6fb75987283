#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cchm/deadline.hpp"
#include "cchm/graph.hpp"

namespace cchm {

class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CiResult {
    double statistic = 0.0;
    double p_value = 1.0;
    NodeSet conditioning;
    bool independent = true;
};

/// Conditional independence test over variables indexed like the graph nodes.
class IndependenceTest {
public:
    virtual ~IndependenceTest() = default;
    virtual CiResult test(NodeId i, NodeId j, const NodeSet& z) const = 0;
};

/// rho_{ij.z} from the precision matrix of the {i, j} u z block.
template <typename Derived>
double partial_correlation(const Eigen::MatrixBase<Derived>& cov, NodeId i, NodeId j, const NodeSet& z) {
    if (i == j) throw DegenerateInput("partial_correlation: i == j");
    for (NodeId v : z) {
        if (v == i || v == j) throw DegenerateInput("partial_correlation: conditioning set contains an endpoint");
    }
    if (z.empty()) {
        const double denom = std::sqrt(cov(i, i) * cov(j, j));
        if (!(denom > 0.0)) throw DegenerateInput("partial_correlation: zero variance");
        return std::clamp(cov(i, j) / denom, -1.0, 1.0);
    }
    std::vector<Eigen::Index> idx{i, j};
    idx.insert(idx.end(), z.begin(), z.end());
    const Eigen::MatrixXd block = cov(idx, idx);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) throw DegenerateInput("partial_correlation: singular covariance block");
    const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
    const double r = -precision(0, 1) / std::sqrt(precision(0, 0) * precision(1, 1));
    return std::clamp(r, -1.0, 1.0);
}

/// Two-sided tail probability of a standard normal statistic.
inline double normal_two_sided_p(double statistic) {
    if (std::isinf(statistic)) return 0.0;
    return std::erfc(std::abs(statistic) / std::sqrt(2.0));
}

/// Fisher z statistic for a partial correlation with `conditioning` variables.
inline double fisher_z_statistic(double r, long n, std::size_t conditioning) {
    if (static_cast<double>(n) <= static_cast<double>(conditioning) + 3.0) {
        throw DegenerateInput("fisher_z: need n > |z| + 3");
    }
    if (std::abs(r) >= 1.0) return std::copysign(std::numeric_limits<double>::infinity(), r);
    return std::atanh(r) * std::sqrt(static_cast<double>(n) - static_cast<double>(conditioning) - 3.0);
}

CiResult fisher_z_test(const Eigen::MatrixXd& cov, NodeId i, NodeId j, const NodeSet& z, long n, double alpha);

class FisherZTest final : public IndependenceTest {
public:
    FisherZTest(Eigen::MatrixXd cov, long n, double alpha) : cov_(std::move(cov)), n_(n), alpha_(alpha) {}

    CiResult test(NodeId i, NodeId j, const NodeSet& z) const override;

    /// Writes one CSV row per test: i,j,conditioning,r,z,p,decision.
    void set_audit_log(std::ostream* log, const std::vector<std::string>* names);
    long tests_run() const { return tests_; }

private:
    Eigen::MatrixXd cov_;
    long n_;
    double alpha_;
    std::ostream* log_ = nullptr;
    const std::vector<std::string>* names_ = nullptr;
    mutable long tests_ = 0;
};

/// Independence read off a graph by m-separation.
class OracleTest final : public IndependenceTest {
public:
    explicit OracleTest(const MixedGraph& truth) : truth_(truth) {}
    CiResult test(NodeId i, NodeId j, const NodeSet& z) const override;

private:
    const MixedGraph& truth_;
};

/// Every separating set found for each removed pair, keyed by (min, max).
class Sepsets {
public:
    void add(NodeId i, NodeId j, NodeSet set);
    const std::vector<NodeSet>* find(NodeId i, NodeId j) const;
    const std::map<std::pair<NodeId, NodeId>, std::vector<NodeSet>>& all() const { return sets_; }

private:
    std::map<std::pair<NodeId, NodeId>, std::vector<NodeSet>> sets_;
};

struct SkeletonResult {
    MixedGraph skeleton;  // all-Circle marks
    Sepsets sepsets;
};

/// PC-style adjacency search. Nodes in `excluded` are left isolated and untested.
SkeletonResult learn_skeleton(const std::vector<std::string>& names, const IndependenceTest& test, int max_sepset,
                              const NodeSet& excluded = {}, const Deadline& deadline = Deadline());

struct TripleLists {
    std::set<Triple> whitelist;
    std::set<Triple> blacklist;
    std::set<Triple> ambiguous;
};

/// Conservative classification of the skeleton's unshielded triples using all
/// separating subsets (up to max_sepset) of the endpoints' neighbourhoods.
TripleLists classify_triples(const MixedGraph& skeleton, const IndependenceTest& test, int max_sepset,
                             const Deadline& deadline = Deadline());

/// Calls `visit` on every subset of `pool` of exactly `k` elements, in lexicographic order.
template <typename Visit>
void for_each_subset(const NodeSet& pool, int k, Visit&& visit) {
    const int n = static_cast<int>(pool.size());
    if (k < 0 || k > n) return;
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    NodeSet subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[pick[i]];
        if (!visit(subset)) return;
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) return;
        ++pick[i];
        for (int t = i + 1; t < k; ++t) pick[t] = pick[t - 1] + 1;
    }
}

}  // namespace cchm
