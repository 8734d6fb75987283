#pragma once

#include <cstdint>
#include <mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cchm/graph.hpp"

namespace cchm {

struct RicfOptions {
    double tol = 1e-8;  // max absolute parameter change between sweeps
    int max_iter = 200;
};

/// Maximum likelihood fit of a Gaussian ancestral graph model.
/// coefficients(i, j) is the weight of j -> i; error_covariance is Omega.
struct RicfResult {
    Eigen::MatrixXd coefficients;
    Eigen::MatrixXd error_covariance;
    Eigen::MatrixXd implied_covariance;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Log-likelihood after each sweep.
    std::vector<double> loglik_trace;
};

/// Residual iterative conditional fitting. `cov` is the sample covariance
/// (N - 1 denominator) in the graph's node order; the fit targets
/// (N - 1)/N cov, i.e. the maximum-likelihood estimate.
RicfResult ricf_fit(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options = {});

/// -(N/2) [V ln 2pi + ln|implied| + (N-1)/N tr(implied^-1 cov)].
double gaussian_log_likelihood(const Eigen::MatrixXd& implied, const Eigen::MatrixXd& cov, long n);

double log_likelihood(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options = {});

/// ln(N) (2|V| + |E|).
double bic_penalty(int v, int e, long n);

/// -2 l + ln(N) (2|V| + |E|); lower is better.
double bic(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options = {});

/// Per-component term S_k of the decomposed likelihood, l = -(N/2) sum_k S_k:
///   S_k = |C_k| ln 2pi + ln|Omega_k| + (N-1)/N tr(Omega_k^-1 [(I-B) S (I-B)^T]_k)
/// where only the rows of B for C_k (i.e. the parents of C_k) enter.
struct ComponentFit {
    double score = 0.0;
    int iterations = 0;
    bool converged = false;
};

ComponentFit fit_component(const MixedGraph& mag, const NodeSet& component, const Eigen::MatrixXd& cov, long n,
                           const RicfOptions& options = {});

/// -(N/2) sum_k S_k over the c-components of `mag`.
double decomposed_log_likelihood(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n,
                                 const RicfOptions& options = {});

/// Component scores keyed by (component, parents of each member, bidirected
/// edges inside the component). Lookups are serialised.
class ScoreCache {
public:
    using Key = std::vector<int>;

    static Key key_for(const MixedGraph& mag, const NodeSet& component);

    bool lookup(const Key& key, ComponentFit& out) const;
    void store(const Key& key, const ComponentFit& fit);
    std::size_t size() const;
    std::uint64_t hits() const { return hits_; }

private:
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };

    mutable std::mutex mutex_;
    std::unordered_map<Key, ComponentFit, KeyHash> table_;
    mutable std::uint64_t hits_ = 0;
};

/// Cached BIC of MAGs over a fixed covariance. Non-converged fits score +inf.
class MagScorer {
public:
    MagScorer(Eigen::MatrixXd cov, long n, RicfOptions options = {});

    double bic(const MixedGraph& mag) const;
    const ScoreCache& cache() const { return cache_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    long samples() const { return n_; }

private:
    Eigen::MatrixXd cov_;
    long n_;
    RicfOptions options_;
    mutable ScoreCache cache_;
};

}  // namespace cchm
