#include "cchm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cchm/rng.hpp"

namespace cchm {

std::vector<std::string> default_node_names(int v) {
    const int width = static_cast<int>(std::to_string(std::max(v, 1)).size());
    std::vector<std::string> names;
    names.reserve(v);
    for (int i = 1; i <= v; ++i) {
        std::string digits = std::to_string(i);
        names.push_back("X" + std::string(width - digits.size(), '0') + digits);
    }
    return names;
}

NodeSet topological_order(const MixedGraph& dag) {
    const int n = dag.size();
    std::vector<int> indegree(n, 0);
    for (NodeId v = 0; v < n; ++v) indegree[v] = static_cast<int>(dag.parents(v).size());
    NodeSet order;
    std::vector<bool> done(n, false);
    // Smallest ready index first keeps the order canonical.
    while (static_cast<int>(order.size()) < n) {
        NodeId next = -1;
        for (NodeId v = 0; v < n; ++v) {
            if (!done[v] && indegree[v] == 0) {
                next = v;
                break;
            }
        }
        if (next < 0) throw GraphError("topological_order: graph has a directed cycle");
        done[next] = true;
        order.push_back(next);
        for (NodeId c : dag.children(next)) --indegree[c];
    }
    return order;
}

MixedGraph random_dag(int v, int max_in_degree, std::uint64_t seed) {
    if (v < 2) throw SimulationError("random_dag: need at least 2 nodes");
    if (max_in_degree < 1) throw SimulationError("random_dag: max_in_degree must be >= 1");
    MixedGraph dag(default_node_names(v), GraphKind::DAG);
    Rng rng(seed);
    std::vector<NodeId> order(v);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    for (int pos = 1; pos < v; ++pos) {
        const int cap = std::min(max_in_degree, pos);
        const int indegree = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_in_degree) + 1));
        std::vector<NodeId> candidates(order.begin(), order.begin() + pos);
        // Partial Fisher-Yates: the first k entries are a uniform k-subset.
        const int k = std::min(indegree, cap);
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pos - i)));
            std::swap(candidates[i], candidates[j]);
            dag.add_directed(candidates[i], order[pos]);
        }
    }
    return dag;
}

SemParams random_params(const MixedGraph& dag, std::uint64_t seed) {
    const int v = dag.size();
    SemParams params{Eigen::MatrixXd::Zero(v, v), Eigen::VectorXd::Ones(v), Eigen::VectorXd::Zero(v)};
    Rng rng(seed);
    for (auto [i, j] : dag.edges()) {
        const double magnitude = rng.uniform(0.1, 0.9);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        if (dag.is_directed(i, j)) {
            params.coefficients(j, i) = sign * magnitude;
        } else if (dag.is_directed(j, i)) {
            params.coefficients(i, j) = sign * magnitude;
        } else {
            throw GraphError("random_params: graph is not a DAG");
        }
    }
    return params;
}

void check_params(const MixedGraph& dag, const SemParams& params) {
    const int v = dag.size();
    if (params.coefficients.rows() != v || params.coefficients.cols() != v ||
        params.error_variances.size() != v || params.means.size() != v) {
        throw SimulationError("SEM parameters do not match the DAG size");
    }
    for (NodeId child = 0; child < v; ++child) {
        if (!(params.error_variances(child) > 0.0)) {
            throw SimulationError("error variance of " + dag.name(child) + " must be positive");
        }
        for (NodeId parent = 0; parent < v; ++parent) {
            const bool edge = parent != child && dag.adjacent(parent, child) && dag.is_directed(parent, child);
            const bool weight = params.coefficients(child, parent) != 0.0;
            if (edge != weight) {
                throw SimulationError("coefficient support mismatch at " + dag.name(parent) + "->" +
                                      dag.name(child));
            }
        }
    }
}

Dataset sample_sem(const MixedGraph& dag, const SemParams& params, long n, std::uint64_t seed) {
    if (n < 1) throw SimulationError("sample_sem: n must be >= 1");
    check_params(dag, params);
    const int v = dag.size();
    Dataset data{dag.names(), Eigen::MatrixXd(n, v)};
    Rng rng(seed);
    for (NodeId node : topological_order(dag)) {
        const double sd = std::sqrt(params.error_variances(node));
        auto column = data.values.col(node);
        for (long r = 0; r < n; ++r) column(r) = params.means(node) + sd * rng.normal();
        for (NodeId parent : dag.parents(node)) {
            column += params.coefficients(node, parent) * data.values.col(parent);
        }
    }
    return data;
}

LatentSplit hide_latents(const Dataset& data, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw SimulationError("hide_latents: rate must be in [0, 1)");
    const int v = data.variables();
    const int k = static_cast<int>(std::lround(rate * v));
    if (v - k < 2) throw SimulationError("hide_latents: fewer than 2 observed columns would remain");
    std::vector<int> idx(v);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(v - i)));
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> hidden(v, false);
    for (int i = 0; i < k; ++i) hidden[idx[i]] = true;

    LatentSplit out;
    std::vector<int> keep;
    for (int c = 0; c < v; ++c) {
        if (hidden[c]) {
            out.hidden.push_back(data.names[c]);
        } else {
            keep.push_back(c);
            out.observed.names.push_back(data.names[c]);
        }
    }
    std::sort(out.hidden.begin(), out.hidden.end());
    out.observed.values = data.values(Eigen::all, keep);
    return out;
}

CovarianceMatrix covariance(const Dataset& data) {
    const long n = data.samples();
    if (n < 2) throw SimulationError("covariance: need at least 2 samples");
    const Eigen::MatrixXd centred = data.values.rowwise() - data.values.colwise().mean();
    CovarianceMatrix cov{data.names, (centred.transpose() * centred) / static_cast<double>(n - 1), n, {}};
    cov.values = 0.5 * (cov.values + cov.values.transpose()).eval();
    for (int c = 0; c < data.variables(); ++c) {
        if (!(cov.values(c, c) > 0.0)) cov.degenerate.push_back(c);
    }
    return cov;
}

CovarianceMatrix reorder(const CovarianceMatrix& cov, const std::vector<std::string>& order) {
    std::vector<int> idx;
    idx.reserve(order.size());
    for (const auto& name : order) {
        auto it = std::find(cov.names.begin(), cov.names.end(), name);
        if (it == cov.names.end()) throw SimulationError("reorder: unknown variable '" + name + "'");
        idx.push_back(static_cast<int>(it - cov.names.begin()));
    }
    CovarianceMatrix out{order, cov.values(idx, idx), cov.samples, {}};
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (std::find(cov.degenerate.begin(), cov.degenerate.end(), idx[k]) != cov.degenerate.end()) {
            out.degenerate.push_back(static_cast<int>(k));
        }
    }
    return out;
}

Dataset standardize(const Dataset& data) {
    Dataset out = data;
    const long n = data.samples();
    for (int c = 0; c < data.variables(); ++c) {
        auto col = out.values.col(c);
        col.array() -= col.mean();
        const double sd = n > 1 ? std::sqrt(col.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
        if (sd > 0.0) col /= sd;
    }
    return out;
}

Eigen::MatrixXd population_covariance(const SemParams& params) {
    return implied_covariance(params.coefficients, Eigen::MatrixXd(params.error_variances.asDiagonal()));
}

}  // namespace cchm
