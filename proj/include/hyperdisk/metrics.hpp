#pragma once

// Readouts on embedded entities: angular modes, representative codes,
// radius summaries, angular and lexical entropy, distance matrices.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hyperdisk/embedding.hpp"
#include "hyperdisk/error.hpp"
#include "hyperdisk/geometry.hpp"
#include "hyperdisk/networks.hpp"

namespace hyperdisk {

inline constexpr std::size_t kKdeGridPoints = 3600;
inline constexpr std::size_t kDefaultAngleBins = 36;
inline constexpr std::size_t kHierarchyCount = 10;

namespace detail {

inline void check_weighted_angles(std::span<const double> angles, std::span<const double> weights) {
    if (angles.empty()) throw DataError("angle list is empty");
    if (angles.size() != weights.size()) throw DataError("angles and weights differ in length");
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (!std::isfinite(angles[i])) throw DomainError("non-finite angle");
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw DomainError("angle weights must be positive and finite");
        }
    }
}

// Wraps into (-pi, pi].
inline double signed_angle(double a) {
    double t = normalize_angle(a);
    return t > std::numbers::pi ? t - kTwoPi : t;
}

}  // namespace detail

/// Scott's-rule bandwidth for weighted angles: the weighted standard
/// deviation of the angles unwrapped around their circular mean, times
/// n_eff^(-1/5) with n_eff = (sum w)^2 / sum w^2.
inline double scott_bandwidth(std::span<const double> angles, std::span<const double> weights) {
    detail::check_weighted_angles(angles, weights);
    double sw = 0.0, sw2 = 0.0, sc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        sw += weights[i];
        sw2 += weights[i] * weights[i];
        sc += weights[i] * std::cos(angles[i]);
        ss += weights[i] * std::sin(angles[i]);
    }
    const double center = std::atan2(ss, sc);
    double mean = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        mean += weights[i] * detail::signed_angle(angles[i] - center);
    }
    mean /= sw;
    double var = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double d = detail::signed_angle(angles[i] - center) - mean;
        var += weights[i] * d * d;
    }
    var /= sw;
    const double n_eff = sw * sw / sw2;
    return std::sqrt(var) * std::pow(n_eff, -0.2);
}

/// Weighted Gaussian kernel density of a set of angles on the 3600-point
/// grid theta_g = g * 2pi / 3600. The sample is replicated at +-2pi so mass
/// near 0 and 2pi merges. Values are unnormalised.
inline std::vector<double> kde_density_grid(std::span<const double> angles, std::span<const double> weights,
                                            double bandwidth) {
    detail::check_weighted_angles(angles, weights);
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("KDE bandwidth must be positive");
    const double step = kTwoPi / static_cast<double>(kKdeGridPoints);
    std::vector<double> a(angles.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = normalize_angle(angles[i]);
    const double inv_h = 1.0 / bandwidth;
    std::vector<double> density(kKdeGridPoints, 0.0);
    for (std::size_t g = 0; g < kKdeGridPoints; ++g) {
        const double theta = step * static_cast<double>(g);
        double d = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (int shift = -1; shift <= 1; ++shift) {
                const double z = (theta - a[i] - kTwoPi * shift) * inv_h;
                d += weights[i] * std::exp(-0.5 * z * z);
            }
        }
        density[g] = d;
    }
    return density;
}

/// Mode of the weighted circular KDE, maximised over the 3600-point grid.
/// Without an explicit bandwidth, Scott's rule is used; a degenerate
/// (zero-spread) sample falls back to one grid step.
inline double kde_peak_angle(std::span<const double> angles, std::span<const double> weights,
                             std::optional<double> bandwidth = std::nullopt) {
    detail::check_weighted_angles(angles, weights);
    const double step = kTwoPi / static_cast<double>(kKdeGridPoints);
    if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("KDE bandwidth must be positive");
    double h = bandwidth ? *bandwidth : scott_bandwidth(angles, weights);
    if (!(h > 0.0)) h = step;
    const auto density = kde_density_grid(angles, weights, h);
    const auto best = std::max_element(density.begin(), density.end()) - density.begin();
    return step * static_cast<double>(best);
}

/// The code with the smallest summed hyperbolic distance to the entity's
/// other codes. Ties go to the smaller radius, then the smaller id.
inline std::string representative_node(const std::vector<std::string>& codes, const EmbeddingModel& model) {
    if (codes.empty()) throw DataError("representative node needs at least one code");
    std::vector<HyperbolicPoint> pts;
    pts.reserve(codes.size());
    for (const auto& c : codes) pts.push_back(model.position(c));

    auto summed_distance = [&](std::size_t i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i != j) sum += poincare_distance(pts[i], pts[j]);
        }
        return sum;
    };

    std::size_t best = 0;
    double best_sum = summed_distance(0);
    for (std::size_t i = 1; i < codes.size(); ++i) {
        const double sum = summed_distance(i);
        // sums accumulated in different orders can differ by rounding alone
        const double tol = 1e-12 * std::max(1.0, best_sum);
        bool better = sum < best_sum - tol;
        if (!better && std::fabs(sum - best_sum) <= tol) {
            const double ri = pts[i].radius();
            const double rb = pts[best].radius();
            better = ri < rb || (ri == rb && codes[i] < codes[best]);
        }
        if (better) {
            best = i;
            best_sum = sum;
        }
    }
    return codes[best];
}

inline std::string representative_node(const std::map<std::string, double>& code_weights,
                                       const EmbeddingModel& model) {
    std::vector<std::string> codes;
    codes.reserve(code_weights.size());
    for (const auto& [code, w] : code_weights) codes.push_back(code);
    return representative_node(codes, model);
}

/// Mean of the ten smallest radii (all of them when fewer than ten).
inline double hierarchy_summary(std::vector<double> radii) {
    if (radii.empty()) throw DataError("hierarchy summary of an empty radius list");
    const std::size_t k = std::min(kHierarchyCount, radii.size());
    std::partial_sort(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(k), radii.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += radii[i];
    return sum / static_cast<double>(k);
}

/// Shannon entropy (nats) of the weight-normalised angle histogram over
/// `bins` equal arcs of [0, 2pi).
inline double angular_entropy(std::span<const double> angles, std::span<const double> weights,
                              std::size_t bins = kDefaultAngleBins) {
    if (bins < 2) throw ConfigError("angular entropy needs at least two bins");
    detail::check_weighted_angles(angles, weights);
    std::vector<double> mass(bins, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        auto b = static_cast<std::size_t>(normalize_angle(angles[i]) / kTwoPi * static_cast<double>(bins));
        b = std::min(b, bins - 1);
        mass[b] += weights[i];
        total += weights[i];
    }
    double h = 0.0;
    for (double m : mass) {
        if (m > 0.0) {
            const double p = m / total;
            h -= p * std::log(p);
        }
    }
    return std::max(h, 0.0);
}

/// Lower-cased tokens split on ASCII non-alphanumeric bytes. Bytes >= 0x80
/// are kept as word characters so UTF-8 sequences stay inside tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c >= 0x80 || std::isalnum(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

struct TokenEntropy {
    double normalized = 0.0;  // entropy / ln(vocabulary)
    double entropy = 0.0;     // nats
    std::size_t vocabulary = 0;
    std::size_t tokens = 0;
};

/// Entropy of the word distribution of a corpus after dropping stopwords
/// and words seen fewer than twice, normalised by ln(vocabulary size).
/// Zero when at most one word survives.
inline TokenEntropy token_entropy(const std::vector<std::string>& texts, const std::set<std::string>& stopwords) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts) {
        for (auto& tok : tokenize(t)) {
            if (!stopwords.contains(tok)) ++counts[tok];
        }
    }
    TokenEntropy out;
    for (const auto& [tok, c] : counts) {
        if (c >= 2) {
            ++out.vocabulary;
            out.tokens += c;
        }
    }
    if (out.vocabulary <= 1) return out;
    const double total = static_cast<double>(out.tokens);
    for (const auto& [tok, c] : counts) {
        if (c < 2) continue;
        const double p = static_cast<double>(c) / total;
        out.entropy -= p * std::log(p);
    }
    out.normalized = out.entropy / std::log(static_cast<double>(out.vocabulary));
    return out;
}

inline double normalized_token_entropy(const std::vector<std::string>& texts,
                                       const std::set<std::string>& stopwords) {
    return token_entropy(texts, stopwords).normalized;
}

struct DistanceMatrix {
    std::vector<std::string> ids;
    std::vector<double> values;  // row-major, n x n

    std::size_t size() const { return ids.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }

    // Mean distance from each entity to all others, 1/(n-1) sum_{j != i}.
    std::vector<double> row_means() const {
        const std::size_t n = ids.size();
        std::vector<double> out(n, 0.0);
        if (n < 2) return out;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) s += at(i, j);
            }
            out[i] = s / static_cast<double>(n - 1);
        }
        return out;
    }
};

inline DistanceMatrix pairwise_distances(const std::vector<std::string>& ids,
                                         const std::vector<HyperbolicPoint>& points) {
    if (ids.size() != points.size()) throw DataError("ids and points differ in length");
    const std::size_t n = ids.size();
    DistanceMatrix m{ids, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = poincare_distance(points[i], points[j]);
            m.values[i * n + j] = d;
            m.values[j * n + i] = d;
        }
    }
    return m;
}

inline DistanceMatrix pairwise_distances(const EmbeddingModel& model, const std::vector<std::string>& ids) {
    std::vector<HyperbolicPoint> pts;
    pts.reserve(ids.size());
    for (const auto& id : ids) pts.push_back(model.position(id));
    return pairwise_distances(ids, pts);
}

struct SemanticPosition {
    double r = 0.0;
    double theta = 0.0;
    std::string representative;
    double hierarchy = 0.0;  // mean of the ten smallest code radii
    double diversity = 0.0;  // angular entropy of the code angles
};

/// Places an entity in code space from its weighted codes: the angle is
/// the KDE mode of the code angles (weighted by paper counts), the radius
/// is that of the representative code.
inline SemanticPosition semantic_position(const std::map<std::string, double>& code_weights,
                                          const EmbeddingModel& codes, std::size_t bins = kDefaultAngleBins) {
    if (code_weights.empty()) throw DataError("entity has no codes");
    std::vector<double> angles, weights, radii;
    for (const auto& [code, w] : code_weights) {
        const HyperbolicPoint& p = codes.position(code);
        angles.push_back(p.angle());
        weights.push_back(w);
        radii.push_back(p.radius());
    }
    SemanticPosition out;
    out.theta = kde_peak_angle(angles, weights);
    out.representative = representative_node(code_weights, codes);
    out.r = codes.position(out.representative).radius();
    out.hierarchy = hierarchy_summary(radii);
    out.diversity = angular_entropy(angles, weights, bins);
    return out;
}

/// Per-institution paper counts for every code used in `year`. A paper
/// counts once per institution regardless of how many of its authors list it.
inline std::map<std::string, std::map<std::string, double>> institution_code_weights(
    const std::vector<PublicationRecord>& records, int year) {
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& r : records) {
        if (r.year != year) continue;
        std::set<std::string> insts;
        for (const auto& a : r.authors) insts.insert(a.institution);
        std::set<std::string> codes(r.codes.begin(), r.codes.end());
        for (const auto& inst : insts) {
            for (const auto& c : codes) out[inst][c] += 1.0;
        }
    }
    return out;
}

/// Average number of distinct coauthors per author in one year.
inline double mean_collaborators(const std::vector<PublicationRecord>& records, int year) {
    const WeightedGraph g = build_coauthor_graph(records, year);
    if (g.node_count() == 0) return 0.0;
    double total = 0.0;
    for (NodeId u = 0; u < g.node_count(); ++u) total += static_cast<double>(g.degree(u));
    return total / static_cast<double>(g.node_count());
}

}  // namespace hyperdisk
