#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cmath>
#include <numbers>
#include <vector>

#include "hyperdisk/geometry.hpp"
#include "hyperdisk/graph.hpp"
#include "hyperdisk/random.hpp"

namespace hyperdisk::testing {

// Point drawn uniformly by area from the disk of radius max_r.
inline HyperbolicPoint random_point(Rng& rng, double max_r = 0.95) {
    const double r = max_r * std::sqrt(rng.uniform01());
    return HyperbolicPoint::from_polar(r, kTwoPi * rng.uniform01());
}

// Von Mises draw (Best & Fisher 1979 rejection sampler).
inline double von_mises(Rng& rng, double mu, double kappa) {
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
        const double u1 = rng.uniform01();
        const double u2 = rng.uniform01();
        const double u3 = rng.uniform01();
        const double z = std::cos(std::numbers::pi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double theta = mu + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(f);
            return normalize_angle(theta);
        }
    }
}

// Erdos-Renyi style graph with integer weights in [1, max_weight].
inline WeightedGraph random_weighted_graph(Rng& rng, int n, double p, int max_weight) {
    WeightedGraph g;
    for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform01() < p) {
                g.add_weight(static_cast<NodeId>(i), static_cast<NodeId>(j),
                             static_cast<double>(1 + rng.uniform_index(static_cast<std::size_t>(max_weight))));
            }
        }
    }
    return g;
}

}  // namespace hyperdisk::testing
