#pragma once

// Coauthorship, institution and code co-occurrence networks, plus the
// structural measures and synthetic reference graphs used to probe them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperdisk/error.hpp"
#include "hyperdisk/graph.hpp"
#include "hyperdisk/random.hpp"

namespace hyperdisk {

struct Authorship {
    std::string author;
    std::string institution;
};

struct PublicationRecord {
    std::string id;
    int year = 0;
    std::vector<Authorship> authors;
    std::vector<std::string> codes;
    std::string abstract;

    // Drops repeated authors and codes, keeping the first occurrence, and
    // checks year > 0 and a non-empty author list.
    void normalize() {
        if (year <= 0) throw DataError("record '" + id + "': year must be positive");
        if (authors.empty()) throw DataError("record '" + id + "': author list is empty");
        std::set<std::string> seen;
        std::vector<Authorship> unique_authors;
        for (auto& a : authors) {
            if (a.author.empty()) throw DataError("record '" + id + "': empty author id");
            if (seen.insert(a.author).second) unique_authors.push_back(std::move(a));
        }
        authors = std::move(unique_authors);
        seen.clear();
        std::vector<std::string> unique_codes;
        for (auto& c : codes) {
            if (seen.insert(c).second) unique_codes.push_back(std::move(c));
        }
        codes = std::move(unique_codes);
    }
};

namespace detail {

inline std::vector<std::string> distinct_authors(const PublicationRecord& r) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& a : r.authors) {
        if (seen.insert(a.author).second) out.push_back(a.author);
    }
    return out;
}

inline std::vector<std::string> distinct_codes(const PublicationRecord& r) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& c : r.codes) {
        if (seen.insert(c).second) out.push_back(c);
    }
    return out;
}

inline void connect_all_pairs(WeightedGraph& g, const std::vector<std::string>& members) {
    std::vector<NodeId> ids;
    ids.reserve(members.size());
    for (const auto& m : members) ids.push_back(g.add_node(m));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) g.add_weight(ids[i], ids[j], 1.0);
    }
}

}  // namespace detail

/// Authors of one year's papers, each coauthoring pair gaining weight 1 per
/// shared paper. Solo authors appear as isolated nodes.
inline WeightedGraph build_coauthor_graph(const std::vector<PublicationRecord>& records, int year) {
    WeightedGraph g;
    for (const auto& r : records) {
        if (r.year == year) detail::connect_all_pairs(g, detail::distinct_authors(r));
    }
    return g;
}

/// Codes that appear together on a paper, pooled over every record.
inline WeightedGraph build_cooccurrence_graph(const std::vector<PublicationRecord>& records) {
    WeightedGraph g;
    for (const auto& r : records) detail::connect_all_pairs(g, detail::distinct_codes(r));
    return g;
}

/// Author -> institution for one year. An author listed under several
/// institutions that year is assigned the most frequent one; ties go to the
/// institution seen first.
inline std::map<std::string, std::string> affiliations_for_year(
    const std::vector<PublicationRecord>& records, int year) {
    struct Tally {
        std::map<std::string, std::pair<int, std::size_t>> counts;  // inst -> (count, first seen)
    };
    std::map<std::string, Tally> tallies;
    std::size_t order = 0;
    for (const auto& r : records) {
        if (r.year != year) continue;
        std::set<std::string> seen;
        for (const auto& a : r.authors) {
            if (!seen.insert(a.author).second) continue;
            auto& entry = tallies[a.author].counts[a.institution];
            if (entry.first == 0) entry.second = order++;
            ++entry.first;
        }
    }
    std::map<std::string, std::string> out;
    for (const auto& [author, tally] : tallies) {
        const std::string* best = nullptr;
        std::pair<int, std::size_t> best_key{-1, 0};
        for (const auto& [inst, key] : tally.counts) {
            if (key.first > best_key.first ||
                (key.first == best_key.first && key.second < best_key.second)) {
                best = &inst;
                best_key = key;
            }
        }
        out.emplace(author, *best);
    }
    return out;
}

/// Merges authors into their institutions. Cross-institution weights sum
/// into institution edges; within-institution weights become self-loops.
inline WeightedGraph aggregate_to_institutions(const WeightedGraph& authors,
                                               const std::map<std::string, std::string>& affiliation) {
    WeightedGraph out;
    std::vector<NodeId> inst_of(authors.node_count());
    for (NodeId u = 0; u < authors.node_count(); ++u) {
        auto it = affiliation.find(authors.label(u));
        if (it == affiliation.end()) {
            throw DataError("no institution affiliation for author '" + authors.label(u) + "'");
        }
        inst_of[u] = out.add_node(it->second);
    }
    for (const auto& e : authors.all_edges()) out.add_weight(inst_of[e.u], inst_of[e.v], e.weight);
    return out;
}

/// Fixes a common institution node set across yearly networks: rank by
/// incident weight (self-loops included) summed over all years, keep the
/// top k, then drop any that are missing from some year.
inline std::vector<std::string> top_k_institutions(const std::vector<WeightedGraph>& yearly,
                                                   std::size_t k) {
    std::map<std::string, double> score;
    for (const auto& g : yearly) {
        for (NodeId u = 0; u < g.node_count(); ++u) score[g.label(u)] += g.strength(u);
    }
    std::vector<std::pair<std::string, double>> ranked(score.begin(), score.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > k) ranked.resize(k);
    std::vector<std::string> out;
    for (const auto& [label, s] : ranked) {
        const bool everywhere = std::all_of(yearly.begin(), yearly.end(),
                                            [&](const WeightedGraph& g) { return g.has_node(label); });
        if (everywhere) out.push_back(label);
    }
    return out;
}

/// Weighted clustering coefficient of node i:
///
///   c_i = sum over unordered neighbor pairs {k, h} with an edge k-h of
///         (w_ik w_ih w_kh)^(1/3) / (max_w * deg_i * (deg_i - 1))
///
/// where max_w is the largest edge weight in i's ego network (edges from i
/// and edges among its neighbors). Self-loops are ignored. With uniform
/// weights this is half the usual local clustering coefficient.
inline double weighted_clustering(const WeightedGraph& g, NodeId i) {
    const auto& nbrs = g.neighbors(i);
    const std::size_t deg = nbrs.size();
    if (deg < 2) return 0.0;

    std::vector<std::pair<NodeId, double>> ego(nbrs.begin(), nbrs.end());
    double max_w = 0.0;
    for (const auto& [k, w] : ego) max_w = std::max(max_w, w);

    double numerator = 0.0;
    for (std::size_t a = 0; a < ego.size(); ++a) {
        const auto& k_nbrs = g.neighbors(ego[a].first);
        for (std::size_t b = a + 1; b < ego.size(); ++b) {
            auto it = k_nbrs.find(ego[b].first);
            if (it == k_nbrs.end()) continue;
            max_w = std::max(max_w, it->second);
            numerator += std::cbrt(ego[a].second * ego[b].second * it->second);
        }
    }
    if (numerator == 0.0) return 0.0;
    return numerator / (max_w * static_cast<double>(deg) * static_cast<double>(deg - 1));
}

inline double weighted_clustering(const WeightedGraph& g, std::string_view label) {
    return weighted_clustering(g, g.id_of(label));
}

/// Unnormalized shortest-path betweenness on the unweighted skeleton
/// (Brandes accumulation; each unordered pair counted once).
inline std::vector<double> betweenness_centrality(const WeightedGraph& g) {
    g.require_connected("betweenness centrality");
    const std::size_t n = g.node_count();
    std::vector<double> bc(n, 0.0);
    std::vector<std::vector<NodeId>> preds(n);
    std::vector<double> sigma(n);
    std::vector<long> dist(n);
    std::vector<double> delta(n);
    std::vector<NodeId> order;
    order.reserve(n);
    std::deque<NodeId> queue;

    for (NodeId s = 0; s < n; ++s) {
        for (NodeId v = 0; v < n; ++v) {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while (!queue.empty()) {
            const NodeId v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (const auto& [w, weight] : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const NodeId w = *it;
            for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    for (double& b : bc) b /= 2.0;
    return bc;
}

inline std::map<std::string, double> betweenness_by_label(const WeightedGraph& g) {
    const auto bc = betweenness_centrality(g);
    std::map<std::string, double> out;
    for (NodeId u = 0; u < g.node_count(); ++u) out.emplace(g.label(u), bc[u]);
    return out;
}

// Population standard deviation.
inline double population_stddev(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

inline double betweenness_stddev(const WeightedGraph& g) {
    return population_stddev(betweenness_centrality(g));
}

/// Rooted tree with the given branching factor; `levels` counts the root as
/// level one, so tree(3, 3) has 1 + 3 + 9 nodes. Nodes are labelled by
/// breadth-first index, root "0". Unit weights.
inline WeightedGraph generate_tree(int branching, int levels) {
    if (branching < 1 || levels < 1) throw ConfigError("tree requires branching >= 1 and levels >= 1");
    WeightedGraph g;
    g.add_node("0");
    std::vector<NodeId> frontier{0};
    for (int level = 1; level < levels; ++level) {
        std::vector<NodeId> next;
        for (NodeId parent : frontier) {
            for (int c = 0; c < branching; ++c) {
                const NodeId child = g.add_node(std::to_string(g.node_count()));
                g.add_weight(parent, child, 1.0);
                next.push_back(child);
            }
        }
        frontier = std::move(next);
    }
    return g;
}

/// Ring of n nodes, each joined to its k/2 nearest neighbors on either side.
inline WeightedGraph generate_ring_lattice(int n, int k) {
    if (n < 1 || k <= 0 || k % 2 != 0 || k >= n) {
        throw ConfigError("ring lattice requires even k with 0 < k < n (got n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
    }
    WeightedGraph g;
    for (int i = 0; i < n; ++i) g.add_node(std::to_string(i));
    for (int i = 0; i < n; ++i) {
        for (int step = 1; step <= k / 2; ++step) {
            g.add_weight(static_cast<NodeId>(i), static_cast<NodeId>((i + step) % n), 1.0);
        }
    }
    return g;
}

enum class ReferenceKind { tree, ring_lattice };

struct ReferenceParams {
    int branching = 3;
    int levels = 3;
    int nodes = 30;
    int neighbors = 4;
};

inline WeightedGraph generate_reference_graph(ReferenceKind kind, const ReferenceParams& p) {
    return kind == ReferenceKind::tree ? generate_tree(p.branching, p.levels)
                                       : generate_ring_lattice(p.nodes, p.neighbors);
}

struct RewireResult {
    WeightedGraph graph;
    std::size_t accepted = 0;
    double initial_stddev = 0.0;
    double final_stddev = 0.0;
};

/// Degree-preserving rewiring that pushes a graph toward hierarchy. Each
/// attempt proposes a double-edge swap (a-b, c-d) -> (a-d, c-b); the swap is
/// kept only when the graph stays connected and the standard deviation of
/// betweenness strictly increases. Edge weights travel with the swapped
/// endpoints.
inline RewireResult rewire_increase_hierarchy(const WeightedGraph& input, std::size_t attempts,
                                              Rng& rng) {
    input.require_connected("rewiring");
    RewireResult result{input, 0, 0.0, 0.0};
    WeightedGraph& current = result.graph;
    double current_std = betweenness_stddev(current);
    result.initial_stddev = current_std;

    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        const auto edges = current.edges();
        if (edges.size() < 2) break;
        const std::size_t i = rng.uniform_index(edges.size());
        std::size_t j = rng.uniform_index(edges.size() - 1);
        if (j >= i) ++j;
        const NodeId a = edges[i].u;
        const NodeId b = edges[i].v;
        NodeId c = edges[j].u;
        NodeId d = edges[j].v;
        if (rng.uniform_index(2) == 1) std::swap(c, d);
        if (a == c || a == d || b == c || b == d) continue;
        if (current.has_edge(a, d) || current.has_edge(c, b)) continue;

        WeightedGraph candidate = current;
        candidate.remove_edge(a, b);
        candidate.remove_edge(c, d);
        candidate.set_weight(a, d, edges[i].weight);
        candidate.set_weight(c, b, edges[j].weight);
        if (!candidate.is_connected()) continue;
        const double s = betweenness_stddev(candidate);
        if (s > current_std) {
            current = std::move(candidate);
            current_std = s;
            ++result.accepted;
        }
    }
    result.final_stddev = current_std;
    return result;
}

}  // namespace hyperdisk
