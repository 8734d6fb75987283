#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

std::vector<std::string> letters(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
    return out;
}

std::vector<bool> ancestors(const MixedGraph& g, const NodeSet& targets) {
    std::vector<bool> anc(g.size(), false);
    for (NodeId t : targets) anc[t] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId a = 0; a < g.size(); ++a) {
            for (NodeId b = 0; b < g.size(); ++b) {
                if (a != b && !anc[a] && anc[b] && g.adjacent(a, b) && g.is_directed(a, b)) {
                    anc[a] = true;
                    changed = true;
                }
            }
        }
    }
    return anc;
}

bool separated_by_paths(const MixedGraph& g, NodeId x, NodeId y, const NodeSet& z) {
    const std::vector<bool> anc_z = ancestors(g, z);
    std::vector<bool> in_z(g.size(), false);
    for (NodeId v : z) in_z[v] = true;
    std::vector<NodeId> path{x};
    std::vector<bool> on_path(g.size(), false);
    on_path[x] = true;

    auto open = [&]() {
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
            const NodeId prev = path[k - 1], v = path[k], next = path[k + 1];
            const bool collider = g.mark(prev, v) == Mark::Arrow && g.mark(next, v) == Mark::Arrow;
            if (collider ? !anc_z[v] : in_z[v]) return false;
        }
        return true;
    };

    std::function<bool()> search = [&]() {
        const NodeId last = path.back();
        for (NodeId w = 0; w < g.size(); ++w) {
            if (on_path[w] || !g.adjacent(last, w)) continue;
            path.push_back(w);
            on_path[w] = true;
            const bool found = w == y ? open() : search();
            on_path[w] = false;
            path.pop_back();
            if (found) return true;
        }
        return false;
    };
    return !search();
}

bool ancestral(const MixedGraph& g) {
    for (auto [i, j] : g.edges()) {
        const Mark a = g.mark(j, i), b = g.mark(i, j);
        if (a == Mark::Circle || b == Mark::Circle) return false;
        if (a == Mark::Tail && b == Mark::Tail) return false;
    }
    for (NodeId v = 0; v < g.size(); ++v) {
        // v in a directed cycle iff some child of v is an ancestor of v.
        const std::vector<bool> anc = ancestors(g, {v});
        for (NodeId c : g.children(v)) {
            if (anc[c]) return false;
        }
        for (NodeId s : g.spouses(v)) {
            if (anc[s]) return false;
        }
    }
    return true;
}

std::vector<NodeSet> subsets(const NodeSet& pool) {
    std::vector<NodeSet> out;
    const std::size_t n = pool.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        NodeSet s;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (1u << k)) s.push_back(pool[k]);
        }
        out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const NodeSet& a, const NodeSet& b) { return a.size() < b.size(); });
    return out;
}

bool maximal(const MixedGraph& g) {
    for (NodeId x = 0; x < g.size(); ++x) {
        for (NodeId y = x + 1; y < g.size(); ++y) {
            if (g.adjacent(x, y)) continue;
            NodeSet rest;
            for (NodeId v = 0; v < g.size(); ++v) {
                if (v != x && v != y) rest.push_back(v);
            }
            bool separable = false;
            for (const NodeSet& z : subsets(rest)) {
                if (separated_by_paths(g, x, y, z)) {
                    separable = true;
                    break;
                }
            }
            if (!separable) return false;
        }
    }
    return true;
}

bool valid_mag(const MixedGraph& g) { return ancestral(g) && maximal(g); }

std::vector<bool> separation_signature(const MixedGraph& g) {
    std::vector<bool> sig;
    for (NodeId x = 0; x < g.size(); ++x) {
        for (NodeId y = x + 1; y < g.size(); ++y) {
            NodeSet rest;
            for (NodeId v = 0; v < g.size(); ++v) {
                if (v != x && v != y) rest.push_back(v);
            }
            for (const NodeSet& z : subsets(rest)) sig.push_back(separated_by_paths(g, x, y, z));
        }
    }
    return sig;
}

std::vector<MixedGraph> all_orientations(const MixedGraph& skeleton) {
    const auto edges = skeleton.edges();
    std::vector<MixedGraph> out;
    std::size_t total = 1;
    for (std::size_t k = 0; k < edges.size(); ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        MixedGraph g(skeleton.names(), cchm::GraphKind::MAG);
        std::size_t c = code;
        for (auto [i, j] : edges) {
            switch (c % 3) {
                case 0: g.add_directed(i, j); break;
                case 1: g.add_directed(j, i); break;
                default: g.add_bidirected(i, j); break;
            }
            c /= 3;
        }
        out.push_back(std::move(g));
    }
    return out;
}

MixedGraph pag_by_consensus(const MixedGraph& mag) {
    const std::vector<bool> target = separation_signature(mag);
    MixedGraph pag = cchm::skeleton_of(mag, Mark::Circle);
    bool first = true;
    for (const MixedGraph& cand : all_orientations(cchm::skeleton_of(mag, Mark::Circle))) {
        if (!valid_mag(cand) || separation_signature(cand) != target) continue;
        for (auto [i, j] : cand.edges()) {
            for (auto [from, to] : {std::pair{i, j}, std::pair{j, i}}) {
                if (first) {
                    pag.set_mark(from, to, cand.mark(from, to));
                } else if (pag.mark(from, to) != cand.mark(from, to)) {
                    pag.set_mark(from, to, Mark::Circle);
                }
            }
        }
        first = false;
    }
    pag.set_kind(cchm::GraphKind::PAG);
    return pag;
}

MixedGraph project_by_inducing_paths(const MixedGraph& dag, const NodeSet& latents) {
    std::vector<bool> latent(dag.size(), false);
    for (NodeId l : latents) latent[l] = true;
    NodeSet observed;
    std::vector<std::string> names;
    for (NodeId v = 0; v < dag.size(); ++v) {
        if (!latent[v]) {
            observed.push_back(v);
            names.push_back(dag.name(v));
        }
    }
    MixedGraph out(names, cchm::GraphKind::MAG);
    for (std::size_t ia = 0; ia < observed.size(); ++ia) {
        for (std::size_t ib = ia + 1; ib < observed.size(); ++ib) {
            const NodeId a = observed[ia], b = observed[ib];
            const std::vector<bool> anc_ab = ancestors(dag, {a, b});
            std::vector<NodeId> path{a};
            std::vector<bool> on_path(dag.size(), false);
            on_path[a] = true;
            auto inducing = [&]() {
                for (std::size_t k = 1; k + 1 < path.size(); ++k) {
                    const NodeId prev = path[k - 1], v = path[k], next = path[k + 1];
                    const bool collider = dag.mark(prev, v) == Mark::Arrow && dag.mark(next, v) == Mark::Arrow;
                    if (collider ? !anc_ab[v] : !latent[v]) return false;
                }
                return true;
            };
            std::function<bool()> search = [&]() {
                const NodeId last = path.back();
                for (NodeId w = 0; w < dag.size(); ++w) {
                    if (on_path[w] || !dag.adjacent(last, w)) continue;
                    path.push_back(w);
                    on_path[w] = true;
                    const bool found = w == b ? inducing() : search();
                    on_path[w] = false;
                    path.pop_back();
                    if (found) return true;
                }
                return false;
            };
            if (!search()) continue;
            const NodeId oa = static_cast<NodeId>(ia), ob = static_cast<NodeId>(ib);
            if (ancestors(dag, {b})[a]) {
                out.add_directed(oa, ob);
            } else if (ancestors(dag, {a})[b]) {
                out.add_directed(ob, oa);
            } else {
                out.add_bidirected(oa, ob);
            }
        }
    }
    return out;
}

std::vector<MixedGraph> connected_skeletons(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    std::vector<MixedGraph> out;
    for (std::uint32_t mask = 0; mask < (1u << pairs.size()); ++mask) {
        MixedGraph g(letters(n));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (mask & (1u << k)) g.set_edge(pairs[k].first, pairs[k].second, Mark::Circle, Mark::Circle);
        }
        std::vector<bool> seen(n, false);
        std::vector<NodeId> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : g.neighbors(v)) {
                if (!seen[w]) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        if (count == n) out.push_back(std::move(g));
    }
    return out;
}

namespace {

std::vector<NodeId> random_order(int n, cchm::Rng& rng) {
    std::vector<NodeId> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    return order;
}

}  // namespace

MixedGraph random_admg(int n, double p_directed, double p_bidirected, cchm::Rng& rng) {
    MixedGraph g(letters(n));
    const auto order = random_order(n, rng);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double u = rng.uniform();
            if (u < p_directed) {
                g.add_directed(order[a], order[b]);
            } else if (u < p_directed + p_bidirected) {
                g.add_bidirected(order[a], order[b]);
            }
        }
    }
    return g;
}

MixedGraph random_dag(int n, double p, cchm::Rng& rng) {
    MixedGraph g = random_admg(n, p, 0.0, rng);
    g.set_kind(cchm::GraphKind::DAG);
    return g;
}

ProjectedMag random_mag(int observed, int latent, double p, cchm::Rng& rng) {
    ProjectedMag out;
    const int n = observed + latent;
    out.dag = random_dag(n, p, rng);
    auto order = random_order(n, rng);
    out.latents.assign(order.begin(), order.begin() + latent);
    std::sort(out.latents.begin(), out.latents.end());
    out.mag = project_by_inducing_paths(out.dag, out.latents);
    return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
    const Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();
    return centred.transpose() * centred / static_cast<double>(data.rows() - 1);
}

double regression_bic(const MixedGraph& dag, const Eigen::MatrixXd& data) {
    const long n = data.rows();
    const Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();
    double loglik = 0.0;
    for (NodeId v = 0; v < dag.size(); ++v) {
        const NodeSet pa = dag.parents(v);
        Eigen::VectorXd residual = centred.col(v);
        if (!pa.empty()) {
            Eigen::MatrixXd x(n, static_cast<Eigen::Index>(pa.size()));
            for (std::size_t k = 0; k < pa.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = centred.col(pa[k]);
            const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(centred.col(v));
            residual -= x * beta;
        }
        const double sigma2 = residual.squaredNorm() / static_cast<double>(n);
        loglik += -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi) + std::log(sigma2) + 1.0);
    }
    const double dim = 2.0 * dag.size() + dag.num_edges();
    return -2.0 * loglik + std::log(static_cast<double>(n)) * dim;
}

Eigen::MatrixXd sample_mag_model(const MixedGraph& mag, long n, cchm::Rng& rng) {
    const int v = mag.size();
    const NodeSet order = cchm::topological_order(mag);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(v, v);
    for (auto [i, j] : mag.edges()) {
        const double beta = rng.uniform(0.4, 0.9) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        if (mag.is_directed(i, j)) coef(j, i) = beta;
        if (mag.is_directed(j, i)) coef(i, j) = beta;
    }
    Eigen::MatrixXd data(n, v);
    for (long r = 0; r < n; ++r) {
        Eigen::VectorXd noise(v);
        for (int k = 0; k < v; ++k) noise(k) = rng.normal();
        for (auto [i, j] : mag.edges()) {
            if (!mag.is_bidirected(i, j)) continue;
            const double l = rng.normal();
            noise(i) += 0.8 * l;
            noise(j) += 0.8 * l;
        }
        for (NodeId x : order) {
            double value = noise(x);
            for (NodeId p : mag.parents(x)) value += coef(x, p) * data(r, p);
            data(r, x) = value;
        }
    }
    return data;
}

}  // namespace oracle
