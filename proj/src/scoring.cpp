#include "cchm/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cchm/simulate.hpp"

namespace cchm {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// A fitting problem over local variables 0..m-1. Only vertices in `update`
// get their rows of B and Omega estimated; the rest act as exogenous parents.
struct LocalProblem {
    Eigen::MatrixXd s;
    std::vector<NodeSet> parents;
    std::vector<NodeSet> spouses;
    std::vector<NodeSet> component;  // c-component containing each updated vertex
    NodeSet update;
};

struct LocalFit {
    Eigen::MatrixXd b;
    Eigen::MatrixXd omega;
    int iterations = 0;
    bool converged = false;
};

Eigen::VectorXd regress(const Eigen::MatrixXd& xx, const Eigen::VectorXd& xy) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xx);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("ricf: singular regression system");
    return ldlt.solve(xy);
}

// One conditional update of vertex i (Drton, Eichler & Richardson style):
// regress Y_i on its parents and on spouse pseudo-variables built from the
// current residuals of the rest of its c-component.
void update_vertex(const LocalProblem& p, NodeId i, Eigen::MatrixXd& b, Eigen::MatrixXd& omega) {
    const NodeSet& pa = p.parents[i];
    const NodeSet& sp = p.spouses[i];
    const auto& s = p.s;
    const Eigen::Index np = static_cast<Eigen::Index>(pa.size());
    const Eigen::Index ns = static_cast<Eigen::Index>(sp.size());

    for (Eigen::Index c = 0; c < b.cols(); ++c) b(i, c) = 0.0;

    if (ns == 0) {
        if (np == 0) {
            omega(i, i) = s(i, i);
            return;
        }
        const Eigen::VectorXd xy = s(pa, i);
        const Eigen::VectorXd coef = regress(s(pa, pa), xy);
        for (Eigen::Index k = 0; k < np; ++k) b(i, pa[k]) = coef(k);
        omega(i, i) = s(i, i) - coef.dot(xy);
        return;
    }

    NodeSet rest;
    for (NodeId v : p.component[i]) {
        if (v != i) rest.push_back(v);
    }
    std::vector<Eigen::Index> sp_pos;
    for (NodeId v : sp) {
        sp_pos.push_back(std::lower_bound(rest.begin(), rest.end(), v) - rest.begin());
    }
    const Eigen::MatrixXd omega_rest = omega(rest, rest);
    Eigen::LLT<Eigen::MatrixXd> llt(omega_rest);
    if (llt.info() != Eigen::Success) throw std::runtime_error("ricf: error covariance lost positive definiteness");
    const Eigen::MatrixXd omega_rest_inv = llt.solve(Eigen::MatrixXd::Identity(omega_rest.rows(), omega_rest.cols()));
    const Eigen::MatrixXd mix = omega_rest_inv(sp_pos, Eigen::all);

    Eigen::MatrixXd a_rest = -b(rest, Eigen::all);
    for (std::size_t k = 0; k < rest.size(); ++k) a_rest(static_cast<Eigen::Index>(k), rest[k]) += 1.0;

    const Eigen::MatrixXd z_y = mix * (a_rest * s);  // Cov(Z, Y)
    const Eigen::MatrixXd z_z = z_y * a_rest.transpose() * mix.transpose();

    Eigen::MatrixXd xx(np + ns, np + ns);
    Eigen::VectorXd xy(np + ns);
    if (np > 0) {
        xx.topLeftCorner(np, np) = s(pa, pa);
        xx.topRightCorner(np, ns) = z_y(Eigen::all, pa).transpose();
        xx.bottomLeftCorner(ns, np) = z_y(Eigen::all, pa);
        xy.head(np) = s(pa, i);
    }
    xx.bottomRightCorner(ns, ns) = z_z;
    xy.tail(ns) = z_y.col(i);

    const Eigen::VectorXd coef = regress(xx, xy);
    for (Eigen::Index k = 0; k < np; ++k) b(i, pa[k]) = coef(k);
    const Eigen::VectorXd w = coef.tail(ns);
    for (Eigen::Index k = 0; k < ns; ++k) {
        omega(i, sp[k]) = w(k);
        omega(sp[k], i) = w(k);
    }
    const double residual = s(i, i) - coef.dot(xy);
    omega(i, i) = residual + w.dot(omega_rest_inv(sp_pos, sp_pos) * w);
}

double max_change(const LocalProblem& p, const Eigen::MatrixXd& b0, const Eigen::MatrixXd& b1,
                  const Eigen::MatrixXd& o0, const Eigen::MatrixXd& o1) {
    double change = 0.0;
    for (NodeId i : p.update) {
        change = std::max(change, (b1.row(i) - b0.row(i)).cwiseAbs().maxCoeff());
        change = std::max(change, (o1.row(i) - o0.row(i)).cwiseAbs().maxCoeff());
    }
    return change;
}

template <typename OnSweep>
LocalFit run_ricf(const LocalProblem& p, const RicfOptions& options, OnSweep&& on_sweep) {
    const Eigen::Index m = p.s.rows();
    LocalFit fit{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m), 0, false};
    for (NodeId i : p.update) fit.omega(i, i) = p.s(i, i);

    bool any_spouse = false;
    for (NodeId i : p.update) any_spouse |= !p.spouses[i].empty();

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const Eigen::MatrixXd b0 = fit.b;
        const Eigen::MatrixXd o0 = fit.omega;
        for (NodeId i : p.update) update_vertex(p, i, fit.b, fit.omega);
        fit.iterations = iter;
        on_sweep(fit);
        // Without spouses every update is a plain regression: one sweep is exact.
        if (!any_spouse || max_change(p, b0, fit.b, o0, fit.omega) < options.tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

LocalProblem whole_graph_problem(const MixedGraph& mag, const Eigen::MatrixXd& cov) {
    const int v = mag.size();
    if (cov.rows() != v || cov.cols() != v) throw std::invalid_argument("ricf: covariance size does not match graph");
    if (!is_ancestral(mag)) throw std::invalid_argument("ricf: graph is not ancestral");
    LocalProblem p;
    p.s = cov;
    p.parents.resize(v);
    p.spouses.resize(v);
    p.component.resize(v);
    for (NodeId i = 0; i < v; ++i) {
        p.parents[i] = mag.parents(i);
        p.spouses[i] = mag.spouses(i);
        p.update.push_back(i);
    }
    for (const NodeSet& comp : c_components(mag)) {
        for (NodeId i : comp) p.component[i] = comp;
    }
    return p;
}

Eigen::MatrixXd ml_scaled(const Eigen::MatrixXd& cov, long n) {
    return cov * ((static_cast<double>(n) - 1.0) / static_cast<double>(n));
}

void check_covariance(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("ricf: covariance is not positive definite");
}

}  // namespace

double gaussian_log_likelihood(const Eigen::MatrixXd& implied, const Eigen::MatrixXd& cov, long n) {
    Eigen::LLT<Eigen::MatrixXd> llt(implied);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd& l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const double trace = llt.solve(cov).trace();
    const double nd = static_cast<double>(n);
    return -0.5 * nd * (static_cast<double>(implied.rows()) * kLog2Pi + logdet + (nd - 1.0) / nd * trace);
}

RicfResult ricf_fit(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options) {
    if (n < 2) throw std::invalid_argument("ricf: need at least 2 samples");
    check_covariance(cov);
    // Fitting to the N-denominator covariance makes the fit the maximiser of
    // the likelihood below, so every sweep increases it.
    LocalProblem p = whole_graph_problem(mag, ml_scaled(cov, n));
    RicfResult result;
    LocalFit fit = run_ricf(p, options, [&](const LocalFit& f) {
        result.loglik_trace.push_back(gaussian_log_likelihood(implied_covariance(f.b, f.omega), cov, n));
    });
    result.coefficients = fit.b;
    result.error_covariance = fit.omega;
    result.implied_covariance = implied_covariance(fit.b, fit.omega);
    result.loglik = gaussian_log_likelihood(result.implied_covariance, cov, n);
    result.iterations = fit.iterations;
    result.converged = fit.converged;
    return result;
}

double log_likelihood(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options) {
    return ricf_fit(mag, cov, n, options).loglik;
}

double bic_penalty(int v, int e, long n) {
    return std::log(static_cast<double>(n)) * (2.0 * v + e);
}

double bic(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n, const RicfOptions& options) {
    return -2.0 * log_likelihood(mag, cov, n, options) + bic_penalty(mag.size(), mag.num_edges(), n);
}

ComponentFit fit_component(const MixedGraph& mag, const NodeSet& component, const Eigen::MatrixXd& cov, long n,
                           const RicfOptions& options) {
    // Local variables: the component and its parents, in global order.
    NodeSet vars = component;
    for (NodeId v : component) {
        for (NodeId p : mag.parents(v)) vars.push_back(p);
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    auto local = [&](NodeId g) { return static_cast<NodeId>(std::lower_bound(vars.begin(), vars.end(), g) - vars.begin()); };

    LocalProblem p;
    p.s = ml_scaled(cov(vars, vars), n);
    const auto m = vars.size();
    p.parents.resize(m);
    p.spouses.resize(m);
    p.component.resize(m);
    NodeSet local_comp;
    for (NodeId v : component) local_comp.push_back(local(v));
    for (NodeId v : component) {
        const NodeId i = local(v);
        for (NodeId q : mag.parents(v)) p.parents[i].push_back(local(q));
        for (NodeId q : mag.spouses(v)) p.spouses[i].push_back(local(q));
        p.component[i] = local_comp;
        p.update.push_back(i);
    }
    LocalFit fit = run_ricf(p, options, [](const LocalFit&) {});

    const Eigen::Index k = static_cast<Eigen::Index>(local_comp.size());
    Eigen::MatrixXd a_rows = -fit.b(local_comp, Eigen::all);
    for (Eigen::Index r = 0; r < k; ++r) a_rows(r, local_comp[r]) += 1.0;
    const Eigen::MatrixXd resid_cov = a_rows * cov(vars, vars) * a_rows.transpose();
    const Eigen::MatrixXd omega_k = fit.omega(local_comp, local_comp);

    ComponentFit out;
    out.iterations = fit.iterations;
    out.converged = fit.converged;
    Eigen::LLT<Eigen::MatrixXd> llt(omega_k);
    if (llt.info() != Eigen::Success) {
        out.converged = false;
        out.score = std::numeric_limits<double>::infinity();
        return out;
    }
    const Eigen::MatrixXd& l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const double nd = static_cast<double>(n);
    out.score = static_cast<double>(k) * kLog2Pi + logdet + (nd - 1.0) / nd * llt.solve(resid_cov).trace();
    return out;
}

double decomposed_log_likelihood(const MixedGraph& mag, const Eigen::MatrixXd& cov, long n,
                                 const RicfOptions& options) {
    double total = 0.0;
    for (const NodeSet& comp : c_components(mag)) total += fit_component(mag, comp, cov, n, options).score;
    return -0.5 * static_cast<double>(n) * total;
}

ScoreCache::Key ScoreCache::key_for(const MixedGraph& mag, const NodeSet& component) {
    Key key;
    key.push_back(static_cast<int>(component.size()));
    key.insert(key.end(), component.begin(), component.end());
    for (NodeId v : component) {
        NodeSet pa = mag.parents(v);
        key.push_back(static_cast<int>(pa.size()));
        key.insert(key.end(), pa.begin(), pa.end());
    }
    for (NodeId v : component) {
        for (NodeId w : component) {
            if (v < w && mag.adjacent(v, w) && mag.is_bidirected(v, w)) {
                key.push_back(v);
                key.push_back(w);
            }
        }
    }
    return key;
}

std::size_t ScoreCache::KeyHash::operator()(const Key& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (int x : k) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

bool ScoreCache::lookup(const Key& key, ComponentFit& out) const {
    std::lock_guard lock(mutex_);
    auto it = table_.find(key);
    if (it == table_.end()) return false;
    ++hits_;
    out = it->second;
    return true;
}

void ScoreCache::store(const Key& key, const ComponentFit& fit) {
    std::lock_guard lock(mutex_);
    table_.emplace(key, fit);
}

std::size_t ScoreCache::size() const {
    std::lock_guard lock(mutex_);
    return table_.size();
}

MagScorer::MagScorer(Eigen::MatrixXd cov, long n, RicfOptions options)
    : cov_(std::move(cov)), n_(n), options_(options) {
    check_covariance(cov_);
}

double MagScorer::bic(const MixedGraph& mag) const {
    double total = 0.0;
    for (const NodeSet& comp : c_components(mag)) {
        const auto key = ScoreCache::key_for(mag, comp);
        ComponentFit fit;
        if (!cache_.lookup(key, fit)) {
            try {
                fit = fit_component(mag, comp, cov_, n_, options_);
            } catch (const std::runtime_error&) {
                fit.converged = false;
                fit.score = std::numeric_limits<double>::infinity();
            }
            cache_.store(key, fit);
        }
        if (!fit.converged) return std::numeric_limits<double>::infinity();
        total += fit.score;
    }
    return static_cast<double>(n_) * total + bic_penalty(mag.size(), mag.num_edges(), n_);
}

}  // namespace cchm
