#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hyperdisk/networks.hpp"
#include "test_support.hpp"

namespace hyperdisk {
namespace {

PublicationRecord paper(std::string id, int year, std::vector<Authorship> authors,
                        std::vector<std::string> codes = {}) {
    PublicationRecord r{std::move(id), year, std::move(authors), std::move(codes), ""};
    r.normalize();
    return r;
}

TEST(CoauthorGraph, OnePaperThreeAuthorsIsATriangle) {
    const auto g = build_coauthor_graph({paper("p1", 2005, {{"a", "U"}, {"b", "U"}, {"c", "V"}})}, 2005);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 3u);
    for (const auto& e : g.edges()) EXPECT_EQ(e.weight, 1.0);
}

TEST(CoauthorGraph, RepeatedPairAccumulates) {
    const auto g = build_coauthor_graph(
        {paper("p1", 2005, {{"a", "U"}, {"b", "U"}}), paper("p2", 2005, {{"b", "U"}, {"a", "U"}})}, 2005);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.weight(g.id_of("a"), g.id_of("b")), 2.0);
}

TEST(CoauthorGraph, SoloAuthorIsIsolatedNode) {
    const auto g = build_coauthor_graph({paper("p1", 2003, {{"solo", "U"}})}, 2003);
    EXPECT_EQ(g.node_count(), 1u);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(CoauthorGraph, OnlyRequestedYearAndDuplicateAuthorsCollapse) {
    const auto g = build_coauthor_graph(
        {paper("p1", 2003, {{"a", "U"}, {"a", "U"}, {"b", "V"}}), paper("p2", 2004, {{"c", "U"}, {"d", "U"}})},
        2003);
    EXPECT_EQ(g.node_count(), 2u);
    EXPECT_EQ(g.weight(g.id_of("a"), g.id_of("b")), 1.0);
    EXPECT_TRUE(build_coauthor_graph({}, 2003).node_count() == 0);
}

TEST(InstitutionAggregation, SameInstitutionBecomesSelfLoop) {
    WeightedGraph authors;
    authors.add_weight("a", "b", 2.0);
    const auto inst = aggregate_to_institutions(authors, {{"a", "U1"}, {"b", "U1"}});
    EXPECT_EQ(inst.node_count(), 1u);
    EXPECT_EQ(inst.self_loop(inst.id_of("U1")), 2.0);
    EXPECT_EQ(inst.edge_count(), 0u);
}

TEST(InstitutionAggregation, CrossInstitutionEdge) {
    WeightedGraph authors;
    authors.add_weight("a", "c", 3.0);
    const auto inst = aggregate_to_institutions(authors, {{"a", "U1"}, {"c", "U2"}});
    EXPECT_EQ(inst.weight(inst.id_of("U1"), inst.id_of("U2")), 3.0);
}

TEST(InstitutionAggregation, TwoUniversityFixture) {
    // Five scholars: a, b, c at U1; d, e at U2. Two coauthorships cross
    // the universities (a-d and c-e); the rest are internal.
    const std::vector<PublicationRecord> records{
        paper("p1", 2010, {{"a", "U1"}, {"b", "U1"}}), paper("p2", 2010, {{"b", "U1"}, {"c", "U1"}}),
        paper("p3", 2010, {{"a", "U1"}, {"d", "U2"}}), paper("p4", 2010, {{"c", "U1"}, {"e", "U2"}}),
        paper("p5", 2010, {{"d", "U2"}, {"e", "U2"}})};
    const auto authors = build_coauthor_graph(records, 2010);
    const auto inst = aggregate_to_institutions(authors, affiliations_for_year(records, 2010));
    const NodeId u1 = inst.id_of("U1"), u2 = inst.id_of("U2");
    EXPECT_EQ(inst.weight(u1, u2), 2.0);
    EXPECT_EQ(inst.self_loop(u1), 2.0);
    EXPECT_EQ(inst.self_loop(u2), 1.0);
}

TEST(InstitutionAggregation, MissingAffiliationNamesAuthor) {
    WeightedGraph authors;
    authors.add_weight("a", "zed", 1.0);
    try {
        aggregate_to_institutions(authors, {{"a", "U1"}});
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("zed"), std::string::npos);
    }
}

TEST(InstitutionAggregation, ConservesTotalWeight) {
    Rng rng(21);
    std::vector<PublicationRecord> records;
    for (int p = 0; p < 200; ++p) {
        std::vector<Authorship> authors;
        const std::size_t n = 1 + rng.uniform_index(5);
        for (std::size_t k = 0; k < n; ++k) {
            const auto who = rng.uniform_index(40);
            authors.push_back({"a" + std::to_string(who), "U" + std::to_string(who % 7)});
        }
        records.push_back(paper("p" + std::to_string(p), 2001, authors));
    }
    const auto authors = build_coauthor_graph(records, 2001);
    const auto inst = aggregate_to_institutions(authors, affiliations_for_year(records, 2001));
    EXPECT_NEAR(inst.total_edge_weight() + inst.total_self_loop_weight(), authors.total_edge_weight(), 1e-9);
}

TEST(Affiliations, MostFrequentInstitutionWins) {
    const std::vector<PublicationRecord> records{paper("p1", 2002, {{"a", "X"}}), paper("p2", 2002, {{"a", "Y"}}),
                                                 paper("p3", 2002, {{"a", "Y"}}), paper("p4", 2002, {{"b", "Z"}}),
                                                 paper("p5", 2002, {{"b", "W"}})};
    const auto aff = affiliations_for_year(records, 2002);
    EXPECT_EQ(aff.at("a"), "Y");
    EXPECT_EQ(aff.at("b"), "Z");  // tie -> first seen
}

TEST(CooccurrenceGraph, Fixtures) {
    const auto g = build_cooccurrence_graph({paper("p1", 2001, {{"a", "U"}}, {"A", "B", "C"}),
                                             paper("p2", 2002, {{"a", "U"}}, {"Q"}),
                                             paper("p3", 2003, {{"a", "U"}}, {"B", "A", "A"})});
    EXPECT_EQ(g.node_count(), 4u);
    EXPECT_EQ(g.edge_count(), 3u);
    EXPECT_EQ(g.weight(g.id_of("A"), g.id_of("B")), 2.0);
    EXPECT_EQ(g.weight(g.id_of("A"), g.id_of("C")), 1.0);
    EXPECT_EQ(g.degree(g.id_of("Q")), 0u);
}

TEST(TopK, RanksByTotalWeightAndDropsMissing) {
    WeightedGraph y1, y2;
    y1.add_weight("A", "B", 5.0);
    y1.add_weight("C", "C", 9.0);  // C heavy but absent in year 2
    y1.add_weight("D", "A", 1.0);
    y2.add_weight("A", "B", 1.0);
    y2.add_weight("D", "B", 1.0);
    EXPECT_EQ(top_k_institutions({y1, y2}, 3), (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(top_k_institutions({y1, y2}, 10), (std::vector<std::string>{"A", "B", "D"}));
}

// Brute-force evaluation that visits every unordered node pair of the whole
// graph and reads adjacency from a dense matrix.
double clustering_oracle(const WeightedGraph& g, NodeId i) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (const auto& e : g.edges()) w[e.u][e.v] = w[e.v][e.u] = e.weight;
    std::size_t deg = 0;
    for (NodeId k = 0; k < n; ++k) deg += (k != i && w[i][k] > 0.0);
    if (deg < 2) return 0.0;
    double maxw = 0.0;
    for (NodeId k = 0; k < n; ++k) {
        if (k == i || w[i][k] == 0.0) continue;
        maxw = std::max(maxw, w[i][k]);
        for (NodeId h = 0; h < n; ++h) {
            if (h != i && w[i][h] > 0.0) maxw = std::max(maxw, w[k][h]);
        }
    }
    double num = 0.0;
    for (NodeId k = 0; k < n; ++k) {
        for (NodeId h = k + 1; h < n; ++h) {
            if (k == i || h == i) continue;
            if (w[i][k] > 0.0 && w[i][h] > 0.0 && w[k][h] > 0.0) num += std::cbrt(w[i][k] * w[i][h] * w[k][h]);
        }
    }
    if (num == 0.0) return 0.0;
    return num / (maxw * static_cast<double>(deg) * static_cast<double>(deg - 1));
}

TEST(WeightedClustering, UniformTriangleIsOneHalf) {
    WeightedGraph g;
    g.add_weight("a", "b", 4.0);
    g.add_weight("b", "c", 4.0);
    g.add_weight("c", "a", 4.0);
    for (NodeId u = 0; u < 3; ++u) EXPECT_DOUBLE_EQ(weighted_clustering(g, u), 0.5);
}

TEST(WeightedClustering, StarCenterIsZero) {
    WeightedGraph g;
    for (int i = 0; i < 5; ++i) g.add_weight("hub", "leaf" + std::to_string(i), 1.0 + i);
    EXPECT_EQ(weighted_clustering(g, "hub"), 0.0);
    EXPECT_EQ(weighted_clustering(g, "leaf0"), 0.0);
}

TEST(WeightedClustering, IgnoresSelfLoops) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "c", 1.0);
    g.add_weight("c", "a", 1.0);
    g.add_weight("a", "a", 100.0);
    EXPECT_DOUBLE_EQ(weighted_clustering(g, "a"), 0.5);
}

TEST(WeightedClustering, MatchesBruteForceOnRandomGraphs) {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = testing::random_weighted_graph(rng, 30, 0.2, 9);
        for (NodeId i = 0; i < g.node_count(); ++i) {
            const double c = weighted_clustering(g, i);
            EXPECT_EQ(c, clustering_oracle(g, i));
            EXPECT_GE(c, 0.0);
            EXPECT_LE(c, 0.5);
        }
    }
}

TEST(WeightedClustering, UniformWeightsGiveHalfTheTripleRatio) {
    Rng rng(4);
    const auto g = testing::random_weighted_graph(rng, 25, 0.3, 1);
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto& nb = g.neighbors(i);
        std::vector<NodeId> ids;
        for (const auto& [k, w] : nb) ids.push_back(k);
        double closed = 0.0;
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b) closed += g.has_edge(ids[a], ids[b]);
        const double deg = static_cast<double>(ids.size());
        const double ratio = ids.size() < 2 ? 0.0 : closed / (deg * (deg - 1) / 2.0);
        EXPECT_NEAR(weighted_clustering(g, i), 0.5 * ratio, 1e-12);
    }
}

TEST(WeightedClustering, UnknownNodeThrows) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    EXPECT_THROW(weighted_clustering(g, "nope"), DataError);
}

TEST(Betweenness, Path) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "c", 7.0);
    const auto bc = betweenness_by_label(g);
    EXPECT_DOUBLE_EQ(bc.at("b"), 1.0);
    EXPECT_DOUBLE_EQ(bc.at("a"), 0.0);
    EXPECT_DOUBLE_EQ(bc.at("c"), 0.0);
}

TEST(Betweenness, CompleteGraphIsZero) {
    WeightedGraph g;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) g.add_weight(std::to_string(i), std::to_string(j), 1.0);
    for (double b : betweenness_centrality(g)) EXPECT_DOUBLE_EQ(b, 0.0);
}

TEST(Betweenness, StarCenter) {
    WeightedGraph g;
    for (int i = 0; i < 5; ++i) g.add_weight("c", "l" + std::to_string(i), 1.0);
    g.add_weight("c", "c", 3.0);
    EXPECT_DOUBLE_EQ(betweenness_by_label(g).at("c"), 10.0);
}

TEST(Betweenness, SplitsOverEqualPaths) {
    // square a-b-c-d-a: each opposite pair has two shortest paths
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "c", 1.0);
    g.add_weight("c", "d", 1.0);
    g.add_weight("d", "a", 1.0);
    for (double b : betweenness_centrality(g)) EXPECT_DOUBLE_EQ(b, 0.5);
}

TEST(Betweenness, DisconnectedThrows) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("c", "d", 1.0);
    EXPECT_THROW(betweenness_centrality(g), DataError);
}

TEST(ReferenceGraphs, TreeCounts) {
    const auto t = generate_tree(3, 3);
    EXPECT_EQ(t.node_count(), 13u);
    EXPECT_EQ(t.edge_count(), 12u);
    EXPECT_EQ(t.degree(t.id_of("0")), 3u);
    EXPECT_EQ(generate_tree(2, 1).node_count(), 1u);
    EXPECT_THROW(generate_tree(0, 3), ConfigError);
}

TEST(ReferenceGraphs, RingLattice) {
    const auto g = generate_reference_graph(ReferenceKind::ring_lattice, {.nodes = 20, .neighbors = 4});
    EXPECT_EQ(g.node_count(), 20u);
    EXPECT_EQ(g.edge_count(), 40u);
    for (auto d : g.degree_sequence()) EXPECT_EQ(d, 4u);
    EXPECT_TRUE(g.has_edge(g.id_of("19"), g.id_of("1")));
    EXPECT_THROW(generate_ring_lattice(5, 6), ConfigError);
    EXPECT_THROW(generate_ring_lattice(10, 3), ConfigError);
}

TEST(Rewiring, PreservesDegreesAndRaisesBetweennessSpread) {
    const auto ring = generate_ring_lattice(30, 4);
    Rng rng(11);
    const auto result = rewire_increase_hierarchy(ring, 200, rng);
    EXPECT_EQ(result.graph.degree_sequence(), ring.degree_sequence());
    EXPECT_TRUE(result.graph.is_connected());
    EXPECT_GE(result.final_stddev, result.initial_stddev);
    EXPECT_GT(result.accepted, 0u);
    EXPECT_DOUBLE_EQ(result.final_stddev, betweenness_stddev(result.graph));
}

TEST(Rewiring, ZeroAttemptsIsIdentity) {
    const auto ring = generate_ring_lattice(12, 4);
    Rng rng(1);
    const auto result = rewire_increase_hierarchy(ring, 0, rng);
    EXPECT_EQ(result.accepted, 0u);
    const auto a = ring.edges(), b = result.graph.edges();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].u, b[i].u);
        EXPECT_EQ(a[i].v, b[i].v);
    }
}

TEST(Rewiring, DeterministicGivenSeed) {
    const auto ring = generate_ring_lattice(30, 4);
    Rng r1(5), r2(5);
    const auto a = rewire_increase_hierarchy(ring, 100, r1);
    const auto b = rewire_increase_hierarchy(ring, 100, r2);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.final_stddev, b.final_stddev);
}

TEST(Rewiring, HierarchyOrderingOfBetweennessSpread) {
    int ordered = 0;
    const double tree_std = betweenness_stddev(generate_tree(3, 3));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto ring = generate_ring_lattice(30, 4);
        Rng rng = Rng::substream(seed, "rewire");
        const auto rw = rewire_increase_hierarchy(ring, 200, rng);
        ordered += (tree_std > 0.0 && rw.final_stddev > betweenness_stddev(ring));
    }
    EXPECT_GE(ordered, 6);
}

}  // namespace
}  // namespace hyperdisk
