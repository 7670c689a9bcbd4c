#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hyperdisk/error.hpp"

namespace hyperdisk {

using NodeId = std::size_t;

struct WeightedEdge {
    NodeId u = 0;
    NodeId v = 0;
    double weight = 0.0;
};

/// Undirected weighted graph over text-labelled nodes. Parallel edges are
/// collapsed into summed weights; self-loops are kept separately from the
/// neighbor lists. Node ids are dense and follow insertion order.
class WeightedGraph {
public:
    NodeId add_node(std::string_view label) {
        auto it = index_.find(std::string(label));
        if (it != index_.end()) return it->second;
        const NodeId id = labels_.size();
        labels_.emplace_back(label);
        index_.emplace(labels_.back(), id);
        adjacency_.emplace_back();
        loops_.push_back(0.0);
        return id;
    }

    // Adds weight to the (u, v) edge, creating nodes as needed.
    void add_weight(std::string_view a, std::string_view b, double w) {
        const NodeId u = add_node(a);
        const NodeId v = add_node(b);
        add_weight(u, v, w);
    }

    void add_weight(NodeId u, NodeId v, double w) {
        check(u);
        check(v);
        if (!(w > 0.0)) throw DataError("edge weights must be positive");
        if (u == v) {
            loops_[u] += w;
        } else {
            adjacency_[u][v] += w;
            adjacency_[v][u] += w;
        }
    }

    void set_weight(NodeId u, NodeId v, double w) {
        check(u);
        check(v);
        if (w < 0.0) throw DataError("edge weights must be non-negative");
        if (u == v) {
            loops_[u] = w;
        } else if (w == 0.0) {
            adjacency_[u].erase(v);
            adjacency_[v].erase(u);
        } else {
            adjacency_[u][v] = w;
            adjacency_[v][u] = w;
        }
    }

    void remove_edge(NodeId u, NodeId v) { set_weight(u, v, 0.0); }

    std::size_t node_count() const { return labels_.size(); }

    // Number of distinct non-loop edges.
    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& nbrs : adjacency_) twice += nbrs.size();
        return twice / 2;
    }

    std::size_t self_loop_count() const {
        return static_cast<std::size_t>(std::count_if(loops_.begin(), loops_.end(),
                                                      [](double w) { return w > 0.0; }));
    }

    bool has_node(std::string_view label) const { return index_.contains(std::string(label)); }

    NodeId id_of(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) throw DataError("unknown node '" + std::string(label) + "'");
        return it->second;
    }

    const std::string& label(NodeId id) const {
        check(id);
        return labels_[id];
    }
    const std::vector<std::string>& labels() const { return labels_; }

    double weight(NodeId u, NodeId v) const {
        check(u);
        check(v);
        if (u == v) return loops_[u];
        auto it = adjacency_[u].find(v);
        return it == adjacency_[u].end() ? 0.0 : it->second;
    }

    bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0.0; }

    double self_loop(NodeId u) const {
        check(u);
        return loops_[u];
    }

    // Non-loop neighbors, ordered by id, with edge weights.
    const std::map<NodeId, double>& neighbors(NodeId u) const {
        check(u);
        return adjacency_[u];
    }

    std::size_t degree(NodeId u) const { return neighbors(u).size(); }

    std::vector<std::size_t> degree_sequence() const {
        std::vector<std::size_t> out(node_count());
        for (NodeId u = 0; u < node_count(); ++u) out[u] = adjacency_[u].size();
        return out;
    }

    // Sum of incident non-loop weights plus the self-loop weight.
    double strength(NodeId u) const {
        double s = self_loop(u);
        for (const auto& [v, w] : adjacency_[u]) s += w;
        return s;
    }

    // Non-loop edges with u < v, ordered by (u, v).
    std::vector<WeightedEdge> edges() const {
        std::vector<WeightedEdge> out;
        for (NodeId u = 0; u < node_count(); ++u) {
            for (const auto& [v, w] : adjacency_[u]) {
                if (u < v) out.push_back({u, v, w});
            }
        }
        return out;
    }

    // Non-loop edges followed by self-loops in (u, v) order, for export.
    std::vector<WeightedEdge> all_edges() const {
        std::vector<WeightedEdge> out;
        for (NodeId u = 0; u < node_count(); ++u) {
            if (loops_[u] > 0.0) out.push_back({u, u, loops_[u]});
            for (const auto& [v, w] : adjacency_[u]) {
                if (u < v) out.push_back({u, v, w});
            }
        }
        return out;
    }

    double total_edge_weight() const {
        double total = 0.0;
        for (const auto& e : edges()) total += e.weight;
        return total;
    }

    double total_self_loop_weight() const {
        double total = 0.0;
        for (double w : loops_) total += w;
        return total;
    }

    // Component index per node over positive-weight non-loop edges.
    std::vector<std::size_t> component_labels() const {
        constexpr std::size_t unset = static_cast<std::size_t>(-1);
        std::vector<std::size_t> comp(node_count(), unset);
        std::size_t next = 0;
        std::vector<NodeId> stack;
        for (NodeId s = 0; s < node_count(); ++s) {
            if (comp[s] != unset) continue;
            comp[s] = next;
            stack.push_back(s);
            while (!stack.empty()) {
                const NodeId u = stack.back();
                stack.pop_back();
                for (const auto& [v, w] : adjacency_[u]) {
                    if (comp[v] == unset) {
                        comp[v] = next;
                        stack.push_back(v);
                    }
                }
            }
            ++next;
        }
        return comp;
    }

    std::vector<std::vector<NodeId>> components() const {
        const auto comp = component_labels();
        std::vector<std::vector<NodeId>> out;
        for (NodeId u = 0; u < comp.size(); ++u) {
            if (comp[u] >= out.size()) out.resize(comp[u] + 1);
            out[comp[u]].push_back(u);
        }
        return out;
    }

    bool is_connected() const { return node_count() <= 1 || components().size() == 1; }

    // Throws DataError listing the components when the graph is disconnected.
    void require_connected(std::string_view what) const {
        const auto comps = components();
        if (comps.size() <= 1) return;
        std::string msg = std::string(what) + ": graph is disconnected into " +
                          std::to_string(comps.size()) + " components:";
        for (std::size_t c = 0; c < comps.size(); ++c) {
            msg += c == 0 ? " {" : " | {";
            for (std::size_t i = 0; i < comps[c].size() && i < 5; ++i) {
                if (i) msg += ", ";
                msg += labels_[comps[c][i]];
            }
            if (comps[c].size() > 5) msg += ", ... (" + std::to_string(comps[c].size()) + " nodes)";
            msg += "}";
        }
        throw DataError(msg);
    }

    // Subgraph induced on the given labels, in the given order. Labels absent
    // from this graph still become (isolated) nodes.
    WeightedGraph induced(const std::vector<std::string>& keep) const {
        WeightedGraph out;
        for (const auto& l : keep) out.add_node(l);
        for (NodeId nu = 0; nu < out.node_count(); ++nu) {
            if (!has_node(out.label(nu))) continue;
            const NodeId u = id_of(out.label(nu));
            if (loops_[u] > 0.0) out.set_weight(nu, nu, loops_[u]);
            for (const auto& [v, w] : adjacency_[u]) {
                if (!out.has_node(labels_[v])) continue;
                const NodeId nv = out.id_of(labels_[v]);
                if (nu < nv) out.set_weight(nu, nv, w);
            }
        }
        return out;
    }

private:
    void check(NodeId id) const {
        if (id >= labels_.size()) throw DataError("node id " + std::to_string(id) + " out of range");
    }

    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> index_;
    std::vector<std::map<NodeId, double>> adjacency_;
    std::vector<double> loops_;
};

}  // namespace hyperdisk
