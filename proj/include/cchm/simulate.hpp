#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cchm/graph.hpp"

namespace cchm {

/// Linear Gaussian SEM parameters aligned with a DAG's node order.
/// coefficients(child, parent) holds the edge weight; zero elsewhere.
struct SemParams {
    Eigen::MatrixXd coefficients;
    Eigen::VectorXd error_variances;
    Eigen::VectorXd means;
};

/// N x V sample with one named column per variable.
struct Dataset {
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    long samples() const { return static_cast<long>(values.rows()); }
    int variables() const { return static_cast<int>(values.cols()); }
};

struct CovarianceMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;
    long samples = 0;
    /// Indices of zero-variance columns.
    std::vector<int> degenerate;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "X1".."Xv" zero-padded to a common width so lexicographic order is numeric order.
std::vector<std::string> default_node_names(int v);

NodeSet topological_order(const MixedGraph& dag);

MixedGraph random_dag(int v, int max_in_degree, std::uint64_t seed);

SemParams random_params(const MixedGraph& dag, std::uint64_t seed);

/// Throws if the coefficient support differs from the DAG's edges or a
/// variance is not positive.
void check_params(const MixedGraph& dag, const SemParams& params);

Dataset sample_sem(const MixedGraph& dag, const SemParams& params, long n, std::uint64_t seed);

struct LatentSplit {
    Dataset observed;
    std::vector<std::string> hidden;
};

/// Removes round(rate * V) uniformly chosen columns.
LatentSplit hide_latents(const Dataset& data, double rate, std::uint64_t seed);

/// Sample covariance with the N - 1 denominator.
CovarianceMatrix covariance(const Dataset& data);

/// Rows and columns permuted to `order`.
CovarianceMatrix reorder(const CovarianceMatrix& cov, const std::vector<std::string>& order);

Dataset standardize(const Dataset& data);

/// (I - B)^-1 Omega (I - B)^-T.
template <typename DerivedB, typename DerivedO>
Eigen::MatrixXd implied_covariance(const Eigen::MatrixBase<DerivedB>& coefficients,
                                   const Eigen::MatrixBase<DerivedO>& error_covariance) {
    const Eigen::Index v = coefficients.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(v, v) - coefficients;
    const Eigen::MatrixXd a_inv = a.partialPivLu().inverse();
    return a_inv * error_covariance * a_inv.transpose();
}

/// Population covariance of the observed SEM.
Eigen::MatrixXd population_covariance(const SemParams& params);

}  // namespace cchm
