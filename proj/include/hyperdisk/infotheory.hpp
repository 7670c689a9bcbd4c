#pragma once

// Discrete information measures over dense joint probability tables.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hyperdisk/error.hpp"

namespace hyperdisk {

enum class LogBase { bits, nats };

inline double log_in(double v, LogBase base) { return base == LogBase::bits ? std::log2(v) : std::log(v); }

inline constexpr double kMassTolerance = 1e-12;

/// Entropy -sum p log p of a marginal distribution (0 log 0 = 0).
inline double entropy(std::span<const double> p, LogBase base = LogBase::bits) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("probabilities must be finite and non-negative");
        total += v;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
        throw DomainError("distribution is not normalised (total mass " + std::to_string(total) + ")");
    }
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * log_in(v, base);
    }
    return std::max(h, 0.0);
}

/// Dense joint distribution over named discrete variables. Probabilities
/// are stored row-major with the last variable varying fastest.
class JointDistribution {
public:
    JointDistribution(std::vector<std::string> names, std::vector<std::size_t> sizes, std::vector<double> probs)
        : names_(std::move(names)), sizes_(std::move(sizes)), probs_(std::move(probs)) {
        if (names_.empty() || names_.size() != sizes_.size()) {
            throw DataError("joint distribution needs one support size per variable");
        }
        std::size_t cells = 1;
        for (std::size_t s : sizes_) {
            if (s == 0) throw DataError("variable support must be non-empty");
            cells *= s;
        }
        if (cells != probs_.size()) {
            throw DataError("joint table has " + std::to_string(probs_.size()) + " cells, expected " +
                            std::to_string(cells));
        }
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = i + 1; j < names_.size(); ++j) {
                if (names_[i] == names_[j]) throw DataError("duplicate variable name '" + names_[i] + "'");
            }
        }
        double total = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("probabilities must be finite and non-negative");
            total += p;
        }
        if (std::fabs(total - 1.0) > kMassTolerance) {
            throw DomainError("joint distribution is not normalised (total mass " + std::to_string(total) + ")");
        }
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    const std::vector<double>& probabilities() const { return probs_; }
    std::size_t arity() const { return names_.size(); }

    std::size_t index_of(const std::string& name) const {
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) throw DataError("unknown variable '" + name + "'");
        return static_cast<std::size_t>(it - names_.begin());
    }

    // Marginal table over the given variables (in the given order).
    std::vector<double> marginal(const std::vector<std::string>& keep) const {
        std::vector<std::size_t> axes;
        for (const auto& k : keep) axes.push_back(index_of(k));
        std::vector<std::size_t> out_strides(axes.size(), 1);
        std::size_t out_cells = 1;
        for (std::size_t i = axes.size(); i-- > 0;) {
            out_strides[i] = out_cells;
            out_cells *= sizes_[axes[i]];
        }
        std::vector<double> out(out_cells, 0.0);
        std::vector<std::size_t> coord(sizes_.size(), 0);
        for (double p : probs_) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < axes.size(); ++i) idx += coord[axes[i]] * out_strides[i];
            out[idx] += p;
            for (std::size_t d = sizes_.size(); d-- > 0;) {
                if (++coord[d] < sizes_[d]) break;
                coord[d] = 0;
            }
        }
        return out;
    }

    double joint_entropy(const std::vector<std::string>& vars, LogBase base = LogBase::bits) const {
        if (vars.empty()) return 0.0;
        return entropy_unchecked(marginal(vars), base);
    }

private:
    static double entropy_unchecked(const std::vector<double>& p, LogBase base) {
        double h = 0.0;
        for (double v : p) {
            if (v > 0.0) h -= v * log_in(v, base);
        }
        return std::max(h, 0.0);
    }

    std::vector<std::string> names_;
    std::vector<std::size_t> sizes_;
    std::vector<double> probs_;
};

/// I(X;Y) = H(X) + H(Y) - H(X,Y) for a two-variable joint.
inline double mutual_information(const JointDistribution& j, LogBase base = LogBase::bits) {
    if (j.arity() != 2) throw DataError("mutual information needs exactly two variables");
    const auto& n = j.names();
    const double mi = j.joint_entropy({n[0]}, base) + j.joint_entropy({n[1]}, base) - j.joint_entropy(n, base);
    return std::max(mi, 0.0);
}

/// H(target | given) = H(target, given) - H(given).
inline double conditional_entropy(const JointDistribution& j, const std::string& target, const std::string& given,
                                  LogBase base = LogBase::bits) {
    j.index_of(target);
    j.index_of(given);
    if (target == given) return 0.0;
    return std::max(j.joint_entropy({target, given}, base) - j.joint_entropy({given}, base), 0.0);
}

/// I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(X,Y,Z) - H(Z).
inline double conditional_mutual_information(const JointDistribution& j, const std::string& x,
                                             const std::string& y, const std::string& z,
                                             LogBase base = LogBase::bits) {
    const double v = j.joint_entropy({x, z}, base) + j.joint_entropy({y, z}, base) -
                     j.joint_entropy({x, y, z}, base) - j.joint_entropy({z}, base);
    return std::max(v, 0.0);
}

/// Interaction information I(X;Y;Z) = I(X;Y) - I(X;Y|Z). Can be negative.
inline double interaction_information(const JointDistribution& j, LogBase base = LogBase::bits) {
    if (j.arity() != 3) throw DataError("interaction information needs exactly three variables");
    const auto& n = j.names();
    const double ixy = j.joint_entropy({n[0]}, base) + j.joint_entropy({n[1]}, base) -
                       j.joint_entropy({n[0], n[1]}, base);
    return ixy - conditional_mutual_information(j, n[0], n[1], n[2], base);
}

}  // namespace hyperdisk
