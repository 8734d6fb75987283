#pragma once

// Independent reference implementations used as test oracles. They favour
// directness over speed: path enumeration, exhaustive orientation search,
// textbook regressions.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cchm/graph.hpp"
#include "cchm/rng.hpp"
#include "cchm/simulate.hpp"

namespace oracle {

using cchm::Mark;
using cchm::MixedGraph;
using cchm::NodeId;
using cchm::NodeSet;

std::vector<std::string> letters(int n);

/// Ancestors of `targets` (inclusive) by fixpoint iteration.
std::vector<bool> ancestors(const MixedGraph& g, const NodeSet& targets);

/// Enumerates simple paths and applies the blocking rules node by node.
bool separated_by_paths(const MixedGraph& g, NodeId x, NodeId y, const NodeSet& z);

/// No directed cycle, no bidirected edge between an ancestor pair, only Tail/Arrow marks, no Tail-Tail edge.
bool ancestral(const MixedGraph& g);

/// Every non-adjacent pair separated by some subset of the other nodes.
bool maximal(const MixedGraph& g);

bool valid_mag(const MixedGraph& g);

/// One bit per (x < y, Z subset of the rest) in a fixed order: 1 iff separated.
std::vector<bool> separation_signature(const MixedGraph& g);

/// Every edge of `skeleton` oriented as ->, <- or <->; all 3^E graphs.
std::vector<MixedGraph> all_orientations(const MixedGraph& skeleton);

/// Mark consensus over all valid MAGs with the same separation statements as `mag`.
MixedGraph pag_by_consensus(const MixedGraph& mag);

/// Adjacency by enumerated inducing paths, orientation by DAG ancestry.
MixedGraph project_by_inducing_paths(const MixedGraph& dag, const NodeSet& latents);

/// All connected undirected graphs (Circle marks) over n labelled nodes.
std::vector<MixedGraph> connected_skeletons(int n);

/// Random acyclic directed part plus random bidirected edges.
MixedGraph random_admg(int n, double p_directed, double p_bidirected, cchm::Rng& rng);

/// DAG over a random order with independent edge draws.
MixedGraph random_dag(int n, double p, cchm::Rng& rng);

/// Latent projection of a random DAG with `latent` hidden nodes.
struct ProjectedMag {
    MixedGraph dag;
    NodeSet latents;
    MixedGraph mag;
};
ProjectedMag random_mag(int observed, int latent, double p, cchm::Rng& rng);

/// Gaussian BIC of a DAG from per-node least squares on centred data,
/// with the maximum-likelihood (N denominator) residual variance and the 2V + E dimension term.
double regression_bic(const MixedGraph& dag, const Eigen::MatrixXd& data);

/// Linear SEM sample for a MAG: directed edges get coefficients, each
/// bidirected edge a shared latent source.
Eigen::MatrixXd sample_mag_model(const MixedGraph& mag, long n, cchm::Rng& rng);

/// Sample covariance with the N-1 denominator, computed directly.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data);

/// All subsets of `pool` (any size), smallest first.
std::vector<NodeSet> subsets(const NodeSet& pool);

}  // namespace oracle
