#pragma once

// Two-dimensional Poincare-disk embeddings trained with a softmax
// negative-sampling objective and Riemannian SGD.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperdisk/error.hpp"
#include "hyperdisk/geometry.hpp"
#include "hyperdisk/graph.hpp"
#include "hyperdisk/random.hpp"

namespace hyperdisk {

inline constexpr const char* kLossName = "softmax_negative_sampling";
inline constexpr double kInitRadius = 1e-3;

struct TrainConfig {
    double learning_rate = 0.5;
    int negatives = 50;
    int batch_size = 30;
    int epochs = 300;
    int burnin_epochs = 20;
    int eval_every = 5;
    double epsilon = kDefaultDiskEpsilon;
    bool symmetrize = true;
    std::uint64_t seed = 0;
    double burnin_lr_factor = 0.1;
    // 0 means "same as negatives"
    int burnin_negatives = 0;
    double validation_fraction = 0.05;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (negatives < 1) throw ConfigError("negatives must be at least 1");
        if (burnin_negatives < 0) throw ConfigError("burnin_negatives must be non-negative");
        if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
        if (epochs < 1) throw ConfigError("epochs must be at least 1");
        if (burnin_epochs < 0 || burnin_epochs >= epochs) {
            throw ConfigError("burnin_epochs must be in [0, epochs)");
        }
        if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
        if (!(burnin_lr_factor > 0.0)) throw ConfigError("burnin_lr_factor must be positive");
        if (!(validation_fraction >= 0.0 && validation_fraction < 0.5)) {
            throw ConfigError("validation_fraction must lie in [0, 0.5)");
        }
    }

    int effective_burnin_negatives() const { return burnin_negatives > 0 ? burnin_negatives : negatives; }
};

class EmbeddingModel {
public:
    EmbeddingModel() = default;
    EmbeddingModel(std::vector<std::string> labels, std::vector<HyperbolicPoint> positions,
                   TrainConfig config, double best_validation_loss, int epoch_of_best)
        : labels_(std::move(labels)),
          positions_(std::move(positions)),
          config_(config),
          best_validation_loss_(best_validation_loss),
          epoch_of_best_(epoch_of_best) {
        if (labels_.size() != positions_.size()) {
            throw DataError("embedding has " + std::to_string(labels_.size()) + " labels but " +
                            std::to_string(positions_.size()) + " positions");
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (!index_.emplace(labels_[i], i).second) {
                throw DataError("duplicate node '" + labels_[i] + "' in embedding");
            }
        }
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<HyperbolicPoint>& positions() const { return positions_; }
    const TrainConfig& config() const { return config_; }
    double best_validation_loss() const { return best_validation_loss_; }
    int epoch_of_best() const { return epoch_of_best_; }

    bool contains(std::string_view label) const { return index_.contains(std::string(label)); }

    std::size_t index_of(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) throw DataError("node '" + std::string(label) + "' is not embedded");
        return it->second;
    }

    const HyperbolicPoint& position(std::string_view label) const { return positions_[index_of(label)]; }

    friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
        return a.labels_ == b.labels_ && a.positions_ == b.positions_ &&
               a.best_validation_loss_ == b.best_validation_loss_ && a.epoch_of_best_ == b.epoch_of_best_;
    }

private:
    std::vector<std::string> labels_;
    std::vector<HyperbolicPoint> positions_;
    TrainConfig config_;
    double best_validation_loss_ = std::numeric_limits<double>::infinity();
    int epoch_of_best_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Metric conversion from a Euclidean gradient to the Riemannian gradient
/// of the Poincare ball: ((1 - |p|^2)^2 / 4) * grad.
inline Vec2 riemannian_scale(Vec2 euclidean_gradient, const HyperbolicPoint& at) {
    const double a = 1.0 - at.norm_sq();
    return (a * a / 4.0) * euclidean_gradient;
}

/// Euclidean gradient of d(u, v) with respect to u. Zero when u == v.
inline Vec2 distance_gradient(Vec2 u, Vec2 v) {
    const double alpha = 1.0 - u.norm_sq();
    const double beta = 1.0 - v.norm_sq();
    const double z = 2.0 * (u - v).norm_sq() / (alpha * beta);
    if (z <= 0.0) return {};
    const double root = std::sqrt(z * (z + 2.0));  // sqrt(gamma^2 - 1)
    const double coef_u = (v.norm_sq() - 2.0 * u.dot(v) + 1.0) / (alpha * alpha);
    const double scale = 4.0 / (beta * root);
    return scale * (coef_u * u - (1.0 / alpha) * v);
}

struct PairLossResult {
    double loss = 0.0;
    Vec2 source_gradient;
    // candidates[0] is the positive target, the rest are negatives
    std::vector<Vec2> candidate_gradients;
};

/// Softmax negative-sampling loss for one positive pair,
///   L = -log( exp(-d(u, v)) / sum_{c in {v} + negatives} exp(-d(u, c)) ),
/// with Euclidean gradients for every point involved.
inline PairLossResult softmax_pair_loss(Vec2 source, std::span<const Vec2> candidates,
                                        bool with_gradient = true) {
    PairLossResult out;
    const std::size_t m = candidates.size();
    if (m == 0) throw DataError("pair loss needs at least the positive candidate");
    std::vector<double> dist(m);
    std::size_t nearest = 0;
    for (std::size_t j = 0; j < m; ++j) {
        dist[j] = detail::arcosh1p(detail::distance_argument(source, candidates[j]));
        if (dist[j] < dist[nearest]) nearest = j;
    }
    // L = d_0 - d_min + log(1 + sum_{j != nearest} exp(d_min - d_j))
    const double dmin = dist[nearest];
    double tail = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (j != nearest) tail += std::exp(dmin - dist[j]);
    }
    out.loss = (dist[0] - dmin) + std::log1p(tail);
    if (!with_gradient) return out;

    out.candidate_gradients.assign(m, Vec2{});
    const double denom = 1.0 + tail;
    for (std::size_t j = 0; j < m; ++j) {
        const double prob = std::exp(dmin - dist[j]) / denom;
        const double dl_dd = (j == 0 ? 1.0 : 0.0) - prob;
        if (dl_dd == 0.0) continue;
        out.source_gradient += dl_dd * distance_gradient(source, candidates[j]);
        out.candidate_gradients[j] = dl_dd * distance_gradient(candidates[j], source);
    }
    return out;
}

/// Loss of one (source, target) pair against explicit negatives.
inline double pair_loss(const EmbeddingModel& model, std::string_view source, std::string_view target,
                        const std::vector<std::string>& negatives) {
    std::vector<Vec2> candidates;
    candidates.reserve(negatives.size() + 1);
    candidates.push_back(model.position(target).vec());
    for (const auto& n : negatives) {
        if (n == target) throw DataError("target '" + std::string(target) + "' listed among negatives");
        candidates.push_back(model.position(n).vec());
    }
    return softmax_pair_loss(model.position(source).vec(), candidates, false).loss;
}

/// Per-node pools of eligible negatives: every node that is neither the
/// source nor one of its neighbors. A node adjacent to everything falls
/// back to all nodes other than itself.
class NegativeSampler {
public:
    explicit NegativeSampler(const WeightedGraph& g) : pools_(g.node_count()) {
        const std::size_t n = g.node_count();
        for (NodeId s = 0; s < n; ++s) {
            const auto& nbrs = g.neighbors(s);
            for (NodeId v = 0; v < n; ++v) {
                if (v != s && !nbrs.contains(v)) pools_[s].push_back(v);
            }
            if (pools_[s].empty()) {
                for (NodeId v = 0; v < n; ++v) {
                    if (v != s) pools_[s].push_back(v);
                }
            }
        }
    }

    const std::vector<NodeId>& pool(NodeId source) const { return pools_.at(source); }

    // k draws, without replacement when the pool allows it.
    void sample(NodeId source, std::size_t k, Rng& rng, std::vector<NodeId>& out) const {
        out.clear();
        const auto& base = pools_.at(source);
        if (base.empty()) throw DataError("no candidate negatives for a single-node graph");
        if (base.size() >= k) {
            scratch_ = base;
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + rng.uniform_index(scratch_.size() - i);
                std::swap(scratch_[i], scratch_[j]);
                out.push_back(scratch_[i]);
            }
        } else {
            for (std::size_t i = 0; i < k; ++i) out.push_back(base[rng.uniform_index(base.size())]);
        }
    }

private:
    std::vector<std::vector<NodeId>> pools_;
    mutable std::vector<NodeId> scratch_;
};

inline std::vector<std::string> sample_negatives(const WeightedGraph& g, std::string_view source,
                                                 std::size_t k, Rng& rng) {
    if (k < 1) throw ConfigError("negative sample size must be at least 1");
    const NodeId s = g.id_of(source);
    NegativeSampler sampler(g);
    std::vector<NodeId> ids;
    sampler.sample(s, k, rng, ids);
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (NodeId id : ids) out.push_back(g.label(id));
    return out;
}

struct TrainingPair {
    NodeId source = 0;
    NodeId target = 0;
    double weight = 0.0;
};

/// Directed positive pairs drawn with probability proportional to weight.
class PairSampler {
public:
    explicit PairSampler(std::vector<TrainingPair> pairs) : pairs_(std::move(pairs)) {
        double total = 0.0;
        cumulative_.reserve(pairs_.size());
        for (const auto& p : pairs_) {
            total += p.weight;
            cumulative_.push_back(total);
        }
    }

    std::size_t size() const { return pairs_.size(); }
    const std::vector<TrainingPair>& pairs() const { return pairs_; }

    double probability(std::size_t i) const { return pairs_[i].weight / cumulative_.back(); }

    const TrainingPair& draw(Rng& rng) const {
        const double target = rng.uniform01() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) --it;
        return pairs_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

private:
    std::vector<TrainingPair> pairs_;
    std::vector<double> cumulative_;
};

inline std::vector<TrainingPair> training_pairs(const std::vector<WeightedEdge>& edges, bool symmetrize) {
    std::vector<TrainingPair> out;
    out.reserve(edges.size() * (symmetrize ? 2 : 1));
    for (const auto& e : edges) {
        out.push_back({e.u, e.v, e.weight});
        if (symmetrize) out.push_back({e.v, e.u, e.weight});
    }
    return out;
}

struct EpochReport {
    int epoch = 0;  // 1-based
    bool burnin = false;
    double mean_loss = 0.0;
    // set only on checkpoint evaluations
    double validation_loss = std::numeric_limits<double>::quiet_NaN();
    std::span<const Vec2> positions;
};

using EpochObserver = std::function<void(const EpochReport&)>;

namespace detail {

struct ValidationSet {
    std::vector<TrainingPair> pairs;
    std::vector<std::vector<NodeId>> negatives;
};

inline double validation_loss(const ValidationSet& vs, std::span<const Vec2> pos) {
    if (vs.pairs.empty()) return 0.0;
    double total = 0.0;
    std::vector<Vec2> candidates;
    for (std::size_t i = 0; i < vs.pairs.size(); ++i) {
        candidates.clear();
        candidates.push_back(pos[vs.pairs[i].target]);
        for (NodeId n : vs.negatives[i]) candidates.push_back(pos[n]);
        total += softmax_pair_loss(pos[vs.pairs[i].source], candidates, false).loss;
    }
    return total / static_cast<double>(vs.pairs.size());
}

}  // namespace detail

/// Trains an embedding of `graph`. Training pairs are the non-loop edges
/// (both orientations when symmetrize is set), sampled in proportion to
/// weight; a seeded fraction of edges is held out for validation, and the
/// returned positions are the checkpoint with the lowest validation loss
/// among post-burn-in evaluations. When the hold-out would be empty the
/// training edges double as validation edges.
inline EmbeddingModel train(const WeightedGraph& graph, const TrainConfig& config,
                            const EpochObserver& observer = {}) {
    config.validate();
    const std::size_t n = graph.node_count();
    if (n < 2) throw DataError("embedding requires at least two nodes");
    auto edges = graph.edges();
    if (edges.empty()) throw DataError("embedding requires at least one non-loop edge");
    graph.require_connected("embedding");

    // hold-out split
    Rng split_rng = Rng::substream(config.seed, "embed.split");
    const auto holdout = static_cast<std::size_t>(std::floor(config.validation_fraction *
                                                             static_cast<double>(edges.size())));
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    split_rng.shuffle(std::span<std::size_t>(order));
    std::vector<bool> held(edges.size(), false);
    for (std::size_t i = 0; i < holdout; ++i) held[order[i]] = true;
    std::vector<WeightedEdge> train_edges;
    std::vector<WeightedEdge> val_edges;
    for (std::size_t i = 0; i < edges.size(); ++i) (held[i] ? val_edges : train_edges).push_back(edges[i]);
    if (val_edges.empty()) val_edges = train_edges;

    const NegativeSampler negatives(graph);
    const PairSampler sampler(training_pairs(train_edges, config.symmetrize));

    detail::ValidationSet validation;
    {
        Rng val_rng = Rng::substream(config.seed, "embed.validation");
        for (const auto& e : val_edges) {
            validation.pairs.push_back({e.u, e.v, e.weight});
            validation.negatives.emplace_back();
            negatives.sample(e.u, static_cast<std::size_t>(config.negatives), val_rng,
                             validation.negatives.back());
        }
    }

    // area-uniform initialization in a small disk around the origin
    std::vector<Vec2> pos(n);
    {
        Rng init_rng = Rng::substream(config.seed, "embed.init");
        for (auto& p : pos) {
            const double r = kInitRadius * std::sqrt(init_rng.uniform01());
            const double theta = kTwoPi * init_rng.uniform01();
            p = {r * std::cos(theta), r * std::sin(theta)};
        }
    }

    Rng rng = Rng::substream(config.seed, "embed.train");
    std::vector<Vec2> grad(n);
    std::vector<bool> touched(n, false);
    std::vector<NodeId> touched_list;
    std::vector<NodeId> neg_ids;
    std::vector<Vec2> candidates;

    std::vector<Vec2> best = pos;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    const std::size_t samples_per_epoch = sampler.size();
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const bool burnin = epoch <= config.burnin_epochs;
        const double lr = burnin ? config.learning_rate * config.burnin_lr_factor : config.learning_rate;
        const auto k = static_cast<std::size_t>(burnin ? config.effective_burnin_negatives() : config.negatives);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < samples_per_epoch; start += batch) {
            const std::size_t stop = std::min(samples_per_epoch, start + batch);
            for (std::size_t s = start; s < stop; ++s) {
                const TrainingPair& pair = sampler.draw(rng);
                negatives.sample(pair.source, k, rng, neg_ids);
                candidates.clear();
                candidates.push_back(pos[pair.target]);
                for (NodeId id : neg_ids) candidates.push_back(pos[id]);
                const auto term = softmax_pair_loss(pos[pair.source], candidates);
                epoch_loss += term.loss;

                auto accumulate = [&](NodeId id, Vec2 g) {
                    if (!touched[id]) {
                        touched[id] = true;
                        touched_list.push_back(id);
                    }
                    grad[id] += g;
                };
                accumulate(pair.source, term.source_gradient);
                accumulate(pair.target, term.candidate_gradients[0]);
                for (std::size_t j = 0; j < neg_ids.size(); ++j) {
                    accumulate(neg_ids[j], term.candidate_gradients[j + 1]);
                }
            }
            // gradient of the batch-mean loss
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            for (NodeId id : touched_list) {
                const HyperbolicPoint here(pos[id]);
                const Vec2 step = riemannian_scale(inv_batch * grad[id], here);
                pos[id] = project_into_disk(pos[id] - lr * step, config.epsilon).vec();
                grad[id] = {};
                touched[id] = false;
            }
            touched_list.clear();
        }

        EpochReport report;
        report.epoch = epoch;
        report.burnin = burnin;
        report.mean_loss = epoch_loss / static_cast<double>(samples_per_epoch);
        const bool evaluate = !burnin && (epoch % config.eval_every == 0 || epoch == config.epochs);
        if (evaluate) {
            const double vl = detail::validation_loss(validation, pos);
            report.validation_loss = vl;
            // strict improvement keeps the earliest epoch on ties
            if (vl < best_loss) {
                best_loss = vl;
                best_epoch = epoch;
                best = pos;
            }
        }
        if (observer) {
            report.positions = pos;
            observer(report);
        }
    }

    std::vector<HyperbolicPoint> points;
    points.reserve(n);
    for (const auto& p : best) points.emplace_back(p);
    return EmbeddingModel(graph.labels(), std::move(points), config, best_loss, best_epoch);
}

/// Mean rank of each true neighbor among the source's non-neighbors by
/// hyperbolic distance (rank 1 = closer than every non-neighbor).
inline double mean_rank(std::span<const Vec2> positions, const WeightedGraph& g) {
    double total = 0.0;
    std::size_t count = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto& nbrs = g.neighbors(u);
        const HyperbolicPoint pu(positions[u]);
        for (const auto& [v, w] : nbrs) {
            const double dv = poincare_distance(pu, HyperbolicPoint(positions[v]));
            std::size_t rank = 1;
            for (NodeId x = 0; x < g.node_count(); ++x) {
                if (x == u || nbrs.contains(x)) continue;
                if (poincare_distance(pu, HyperbolicPoint(positions[x])) < dv) ++rank;
            }
            total += static_cast<double>(rank);
            ++count;
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

inline double mean_rank(const EmbeddingModel& model, const WeightedGraph& g) {
    std::vector<Vec2> pos;
    pos.reserve(g.node_count());
    for (const auto& l : g.labels()) pos.push_back(model.position(l).vec());
    return mean_rank(pos, g);
}

// Expected mean rank when positions carry no information: each neighbor is
// equally likely to sit anywhere among the non-neighbors.
inline double random_mean_rank(const WeightedGraph& g) {
    double total = 0.0;
    std::size_t count = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const std::size_t deg = g.degree(u);
        const double non_neighbors = static_cast<double>(g.node_count() - 1 - deg);
        total += static_cast<double>(deg) * (1.0 + non_neighbors / 2.0);
        count += deg;
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

/// Deterministic full-softmax loss: mean over directed edges of the pair
/// loss against every eligible negative.
inline double full_softmax_loss(std::span<const Vec2> positions, const WeightedGraph& g) {
    const NegativeSampler pools(g);
    double total = 0.0;
    std::size_t count = 0;
    std::vector<Vec2> candidates;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (const auto& [v, w] : g.neighbors(u)) {
            candidates.clear();
            candidates.push_back(positions[v]);
            for (NodeId x : pools.pool(u)) candidates.push_back(positions[x]);
            total += softmax_pair_loss(positions[u], candidates, false).loss;
            ++count;
        }
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace hyperdisk
