#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cchm/independence.hpp"
#include "cchm/rng.hpp"
#include "cchm/simulate.hpp"
#include "support.hpp"

using namespace cchm;

namespace {

// Recursive first-order formula, independent of the precision-matrix route.
double partial_by_recursion(const Eigen::MatrixXd& cov, NodeId i, NodeId j, NodeSet z) {
    if (z.empty()) return cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
    const NodeId last = z.back();
    z.pop_back();
    const double rij = partial_by_recursion(cov, i, j, z);
    const double ril = partial_by_recursion(cov, i, last, z);
    const double rjl = partial_by_recursion(cov, j, last, z);
    return (rij - ril * rjl) / std::sqrt((1 - ril * ril) * (1 - rjl * rjl));
}

Eigen::MatrixXd chain_data(long n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, 3);
    for (long r = 0; r < n; ++r) {
        x(r, 0) = rng.normal();
        x(r, 1) = 0.8 * x(r, 0) + rng.normal();
        x(r, 2) = 0.8 * x(r, 1) + rng.normal();
    }
    return x;
}

Eigen::MatrixXd collider_data(long n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, 3);
    for (long r = 0; r < n; ++r) {
        x(r, 0) = rng.normal();
        x(r, 2) = rng.normal();
        x(r, 1) = 0.8 * x(r, 0) + 0.8 * x(r, 2) + rng.normal();
    }
    return x;
}

const std::vector<std::string> kABC{"A", "B", "C"};

}  // namespace

TEST_CASE("partial correlation examples") {
    Eigen::MatrixXd cov(3, 3);
    cov << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;  // A -> B -> C, standardised
    CHECK(partial_correlation(cov, 0, 1, {}) == doctest::Approx(0.5));
    CHECK(std::abs(partial_correlation(cov, 0, 2, {1})) < 1e-12);
    CHECK(partial_correlation(cov, 0, 2, {}) == doctest::Approx(0.25));
    CHECK(partial_correlation(cov, 2, 0, {}) == partial_correlation(cov, 0, 2, {}));
    CHECK_THROWS_AS(partial_correlation(cov, 0, 0, {}), DegenerateInput);
    CHECK_THROWS_AS(partial_correlation(cov, 0, 1, {1}), DegenerateInput);
    Eigen::MatrixXd singular(3, 3);
    singular << 1, 1, 0, 1, 1, 0, 0, 0, 1;
    CHECK_THROWS_AS(partial_correlation(singular, 0, 2, {1}), DegenerateInput);
}

TEST_CASE("partial correlation agrees with the recursion formula") {
    Rng rng(31);
    for (int k = 0; k < 30; ++k) {
        Eigen::MatrixXd a(6, 6);
        for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < 6; ++c) a(r, c) = rng.normal();
        }
        const Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(6, 6);
        const NodeSet z = k % 3 == 0 ? NodeSet{} : (k % 3 == 1 ? NodeSet{2} : NodeSet{2, 4, 5});
        CHECK(partial_correlation(cov, 0, 1, z) == doctest::Approx(partial_by_recursion(cov, 0, 1, z)).epsilon(1e-9));
    }
}

TEST_CASE("fisher z reference values") {
    // r = 0.5, n = 103, no conditioning: z = atanh(0.5) * 10.
    const double z = fisher_z_statistic(0.5, 103, 0);
    CHECK(z == doctest::Approx(5.493061443340548).epsilon(1e-14));
    // Reference p from an arbitrary-precision evaluation of erfc.
    CHECK(normal_two_sided_p(z) == doctest::Approx(3.950252784999222e-08).epsilon(1e-10));
    CHECK(normal_two_sided_p(0.0) == 1.0);
    CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(fisher_z_statistic(-0.5, 103, 0) == -z);
    CHECK(fisher_z_statistic(0.5, 106, 3) == doctest::Approx(z).epsilon(1e-14));
}

TEST_CASE("fisher z edge cases") {
    CHECK(std::isinf(fisher_z_statistic(1.0, 10, 0)));
    CHECK(normal_two_sided_p(fisher_z_statistic(1.0, 10, 0)) == 0.0);
    CHECK(normal_two_sided_p(fisher_z_statistic(-1.0, 10, 0)) == 0.0);
    CHECK_THROWS_AS(fisher_z_statistic(0.1, 3, 0), DegenerateInput);
    CHECK_THROWS_AS(fisher_z_statistic(0.1, 5, 2), DegenerateInput);
    CHECK_NOTHROW(fisher_z_statistic(0.1, 6, 2));
}

TEST_CASE("fisher z test is symmetric and decides by alpha") {
    const Dataset d{kABC, chain_data(2000, 1)};
    const CovarianceMatrix c = covariance(d);
    const FisherZTest t(c.values, c.samples, 0.01);
    const CiResult ab = t.test(0, 1, {});
    const CiResult ba = t.test(1, 0, {});
    CHECK(ab.p_value == ba.p_value);
    CHECK(ab.statistic == ba.statistic);
    CHECK_FALSE(ab.independent);
    CHECK(t.test(0, 2, {1}).independent);
    CHECK(t.tests_run() == 3);
}

TEST_CASE("skeleton of chain data") {
    const Dataset d{kABC, chain_data(5000, 2)};
    const CovarianceMatrix c = covariance(d);
    const FisherZTest t(c.values, c.samples, 0.01);
    const SkeletonResult s = learn_skeleton(kABC, t, 4);
    CHECK(s.skeleton.adjacent(0, 1));
    CHECK(s.skeleton.adjacent(1, 2));
    CHECK_FALSE(s.skeleton.adjacent(0, 2));
    CHECK(s.skeleton.mark(0, 1) == Mark::Circle);
    const auto* sets = s.sepsets.find(2, 0);
    REQUIRE(sets != nullptr);
    CHECK(*sets == std::vector<NodeSet>{{1}});

    const SkeletonResult level0 = learn_skeleton(kABC, t, 0);
    CHECK(level0.skeleton.num_edges() == 3);
}

TEST_CASE("false adjacencies on independent data stay rare") {
    const int v = 8;
    const MixedGraph empty(default_node_names(v), GraphKind::DAG);
    long kept = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset d = sample_sem(empty, random_params(empty, seed), 1000, seed + 100);
        const CovarianceMatrix c = covariance(d);
        const FisherZTest t(c.values, c.samples, 0.05);
        kept += learn_skeleton(d.names, t, 0).skeleton.num_edges();
    }
    // 20 x 28 marginal tests at alpha 0.05: 28 expected false positives; allow 3 alpha.
    CHECK(kept < 3 * 0.05 * 20 * 28);
}

TEST_CASE("excluded nodes are left isolated and untested") {
    const Dataset d{kABC, chain_data(500, 3)};
    const CovarianceMatrix c = covariance(d);
    const FisherZTest t(c.values, c.samples, 0.01);
    const SkeletonResult s = learn_skeleton(kABC, t, 2, {1});
    CHECK(s.skeleton.neighbors(1).empty());
    CHECK(s.skeleton.adjacent(0, 2));
    CHECK(t.tests_run() == 1);  // A-C has no other neighbour to condition on
    CHECK_THROWS(learn_skeleton(kABC, t, -1));
}

TEST_CASE("oracle skeleton of a DAG is exact and every sepset separates") {
    Rng rng(41);
    for (int k = 0; k < 40; ++k) {
        const MixedGraph dag = oracle::random_dag(7, 0.35, rng);
        const OracleTest t(dag);
        const SkeletonResult s = learn_skeleton(dag.names(), t, 5);
        for (NodeId i = 0; i < 7; ++i) {
            for (NodeId j = i + 1; j < 7; ++j) CHECK(s.skeleton.adjacent(i, j) == dag.adjacent(i, j));
        }
        for (const auto& [pair, sets] : s.sepsets.all()) {
            for (const NodeSet& z : sets) CHECK(oracle::separated_by_paths(dag, pair.first, pair.second, z));
        }
    }
}

TEST_CASE("oracle skeleton of a MAG keeps every true adjacency") {
    Rng rng(42);
    for (int k = 0; k < 40; ++k) {
        const MixedGraph mag = oracle::random_mag(6, 2, 0.4, rng).mag;
        const OracleTest t(mag);
        const SkeletonResult s = learn_skeleton(mag.names(), t, 4);
        for (auto [i, j] : mag.edges()) CHECK(s.skeleton.adjacent(i, j));
    }
}

TEST_CASE("triple classification from data") {
    {
        const Dataset d{kABC, collider_data(5000, 4)};
        const CovarianceMatrix c = covariance(d);
        const FisherZTest t(c.values, c.samples, 0.01);
        const SkeletonResult s = learn_skeleton(kABC, t, 4);
        const TripleLists lists = classify_triples(s.skeleton, t, 4);
        CHECK(lists.whitelist == std::set<Triple>{{0, 1, 2}});
        CHECK(lists.blacklist.empty());
        CHECK(lists.ambiguous.empty());
    }
    {
        const Dataset d{kABC, chain_data(5000, 5)};
        const CovarianceMatrix c = covariance(d);
        const FisherZTest t(c.values, c.samples, 0.01);
        const SkeletonResult s = learn_skeleton(kABC, t, 4);
        const TripleLists lists = classify_triples(s.skeleton, t, 4);
        CHECK(lists.whitelist.empty());
        CHECK(lists.blacklist == std::set<Triple>{{0, 1, 2}});
    }
}

TEST_CASE("oracle triple classification on DAGs matches collider status") {
    Rng rng(43);
    for (int k = 0; k < 40; ++k) {
        const MixedGraph dag = oracle::random_dag(7, 0.35, rng);
        const OracleTest t(dag);
        const SkeletonResult s = learn_skeleton(dag.names(), t, 5);
        const TripleLists lists = classify_triples(s.skeleton, t, 5);
        CHECK(lists.ambiguous.empty());
        for (const Triple& tr : unshielded_triples(s.skeleton)) {
            const bool collider = dag.is_directed(tr.a, tr.c) && dag.is_directed(tr.b, tr.c);
            CHECK(lists.whitelist.count(tr) == (collider ? 1u : 0u));
            CHECK(lists.blacklist.count(tr) == (collider ? 0u : 1u));
        }
    }
}

TEST_CASE("triple lists are disjoint and cover every unshielded triple") {
    Rng rng(44);
    for (int k = 0; k < 10; ++k) {
        const MixedGraph mag = oracle::random_mag(6, 2, 0.4, rng).mag;
        const Eigen::MatrixXd x = oracle::sample_mag_model(mag, 500, rng);
        const Dataset d{mag.names(), x};
        const CovarianceMatrix c = covariance(d);
        const FisherZTest t(c.values, c.samples, 0.05);
        const SkeletonResult s = learn_skeleton(d.names, t, 3);
        const TripleLists lists = classify_triples(s.skeleton, t, 3);
        const auto triples = unshielded_triples(s.skeleton);
        CHECK(lists.whitelist.size() + lists.blacklist.size() + lists.ambiguous.size() == triples.size());
        for (const Triple& tr : triples) {
            const int hits = static_cast<int>(lists.whitelist.count(tr) + lists.blacklist.count(tr) +
                                              lists.ambiguous.count(tr));
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("audit log has one row per test") {
    const Dataset d{kABC, chain_data(300, 6)};
    const CovarianceMatrix c = covariance(d);
    FisherZTest t(c.values, c.samples, 0.01);
    std::ostringstream log;
    t.set_audit_log(&log, &d.names);
    learn_skeleton(kABC, t, 2);
    std::istringstream in(log.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "i,j,conditioning,r,z,p,decision");
    long rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK((line.ends_with(",independent") || line.ends_with(",dependent")));
    }
    CHECK(rows == t.tests_run());
    CHECK(log.str().find("A,C,B,") != std::string::npos);
}

TEST_CASE("an expired deadline stops the search") {
    const Dataset d{kABC, chain_data(300, 7)};
    const CovarianceMatrix c = covariance(d);
    const FisherZTest t(c.values, c.samples, 0.01);
    const Deadline expired(1e-12);
    while (!expired.expired()) {
    }
    CHECK_THROWS_AS(learn_skeleton(kABC, t, 2, {}, expired), TimeoutError);
    CHECK_NOTHROW(learn_skeleton(kABC, t, 2, {}, Deadline(0.0)));
}

TEST_CASE("for_each_subset enumerates in lexicographic order") {
    std::vector<NodeSet> seen;
    for_each_subset({3, 5, 7, 9}, 2, [&](const NodeSet& s) {
        seen.push_back(s);
        return true;
    });
    CHECK(seen == std::vector<NodeSet>{{3, 5}, {3, 7}, {3, 9}, {5, 7}, {5, 9}, {7, 9}});
    int count = 0;
    for_each_subset({1, 2, 3}, 0, [&](const NodeSet& s) {
        CHECK(s.empty());
        ++count;
        return true;
    });
    CHECK(count == 1);
    for_each_subset({1, 2}, 3, [&](const NodeSet&) {
        ++count;
        return true;
    });
    CHECK(count == 1);
}
