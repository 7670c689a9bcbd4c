#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hyperdisk/embedding.hpp"
#include "hyperdisk/networks.hpp"
#include "test_support.hpp"

namespace hyperdisk {
namespace {

EmbeddingModel model_of(std::vector<std::string> labels, std::vector<HyperbolicPoint> points) {
    return EmbeddingModel(std::move(labels), std::move(points), TrainConfig{}, 0.0, 0);
}

TrainConfig tree_config(std::uint64_t seed) {
    TrainConfig c;
    c.negatives = 10;
    c.seed = seed;
    return c;
}

// Independent loss oracle: the textbook softmax form.
double softmax_oracle(Vec2 s, const std::vector<Vec2>& cands) {
    const HyperbolicPoint ps(s);
    double denom = 0.0;
    for (const auto& c : cands) denom += std::exp(-poincare_distance(ps, HyperbolicPoint(c)));
    return -std::log(std::exp(-poincare_distance(ps, HyperbolicPoint(cands[0]))) / denom);
}

TEST(PairLoss, CoincidentPositiveFarNegatives) {
    // negatives at hyperbolic distance 20 from the source at the origin
    const double r = std::tanh(10.0);
    const auto m = model_of({"u", "v", "n1", "n2"}, {HyperbolicPoint(0.0, 0.0), HyperbolicPoint(0.0, 0.0),
                                                     HyperbolicPoint(r, 0.0), HyperbolicPoint(-r, 0.0)});
    EXPECT_NEAR(pair_loss(m, "u", "v", {"n1", "n2"}), 4.1223072363804e-9, 1e-15);
}

TEST(PairLoss, EquidistantCandidatesGiveLogOfCount) {
    std::vector<std::string> labels{"u", "v"};
    std::vector<HyperbolicPoint> pts{HyperbolicPoint(0.0, 0.0), HyperbolicPoint::from_polar(0.4, 0.0)};
    std::vector<std::string> negs;
    for (int i = 1; i <= 50; ++i) {
        labels.push_back("n" + std::to_string(i));
        negs.push_back(labels.back());
        pts.push_back(HyperbolicPoint::from_polar(0.4, kTwoPi * i / 51.0));
    }
    const auto m = model_of(labels, pts);
    EXPECT_NEAR(pair_loss(m, "u", "v", negs), 3.9318256327243257, 1e-12);
}

TEST(PairLoss, SingleCandidateIsZero) {
    const auto m = model_of({"u", "v"}, {HyperbolicPoint(0.1, 0.2), HyperbolicPoint(-0.5, 0.3)});
    EXPECT_EQ(pair_loss(m, "u", "v", {}), 0.0);
}

TEST(PairLoss, MatchesTextbookSoftmax) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 s = testing::random_point(rng).vec();
        std::vector<Vec2> cands;
        for (int j = 0; j < 6; ++j) cands.push_back(testing::random_point(rng).vec());
        const double got = softmax_pair_loss(s, cands, false).loss;
        EXPECT_GE(got, 0.0);
        EXPECT_NEAR(got, softmax_oracle(s, cands), 1e-10);
    }
}

TEST(PairLoss, DecreasesAsPositiveApproaches) {
    std::vector<std::string> labels{"u", "v", "a", "b"};
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.8, 0.6, 0.4, 0.2, 0.05}) {
        const auto m = model_of(labels, {HyperbolicPoint(0.0, 0.0), HyperbolicPoint(r, 0.0),
                                         HyperbolicPoint(0.0, 0.5), HyperbolicPoint(0.0, -0.5)});
        const double l = pair_loss(m, "u", "v", {"a", "b"});
        EXPECT_LT(l, prev);
        prev = l;
    }
}

TEST(PairLoss, Errors) {
    const auto m = model_of({"u", "v", "w"}, {HyperbolicPoint(0, 0), HyperbolicPoint(0.1, 0), HyperbolicPoint(0, 0.1)});
    EXPECT_THROW(pair_loss(m, "u", "v", {"v"}), DataError);
    EXPECT_THROW(pair_loss(m, "u", "ghost", {"w"}), DataError);
    EXPECT_THROW(pair_loss(m, "u", "v", {"ghost"}), DataError);
}

TEST(RiemannianScale, Factors) {
    const Vec2 g{1.0, -2.0};
    const Vec2 at0 = riemannian_scale(g, HyperbolicPoint(0.0, 0.0));
    EXPECT_DOUBLE_EQ(at0.x, 0.25);
    EXPECT_DOUBLE_EQ(at0.y, -0.5);
    const Vec2 at5 = riemannian_scale(g, HyperbolicPoint::from_polar(0.5, 1.1));
    EXPECT_NEAR(at5.x, 0.140625, 1e-15);
    EXPECT_NEAR(at5.y, -0.28125, 1e-15);
}

double relative_error(Vec2 a, Vec2 b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-8});
    return (a - b).norm() / scale;
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(17);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec2> pts;
        for (int j = 0; j < 7; ++j) pts.push_back(testing::random_point(rng, 0.9).vec());
        auto loss_at = [&](const std::vector<Vec2>& p) {
            return softmax_pair_loss(p[0], std::span<const Vec2>(p).subspan(1), false).loss;
        };
        const auto analytic = softmax_pair_loss(pts[0], std::span<const Vec2>(pts).subspan(1));
        for (std::size_t j = 0; j < pts.size(); ++j) {
            Vec2 fd;
            for (int axis = 0; axis < 2; ++axis) {
                auto plus = pts, minus = pts;
                (axis == 0 ? plus[j].x : plus[j].y) += h;
                (axis == 0 ? minus[j].x : minus[j].y) -= h;
                (axis == 0 ? fd.x : fd.y) = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
            }
            const Vec2 a = j == 0 ? analytic.source_gradient : analytic.candidate_gradients[j - 1];
            const HyperbolicPoint at(pts[j]);
            EXPECT_LT(relative_error(riemannian_scale(a, at), riemannian_scale(fd, at)), 1e-4)
                << "trial " << trial << " point " << j;
        }
    }
}

TEST(Gradient, DistanceGradientZeroAtCoincidence) {
    const Vec2 g = distance_gradient({0.3, 0.1}, {0.3, 0.1});
    EXPECT_EQ(g.x, 0.0);
    EXPECT_EQ(g.y, 0.0);
}

WeightedGraph star(int leaves) {
    WeightedGraph g;
    for (int i = 0; i < leaves; ++i) g.add_weight("c", "l" + std::to_string(i), 1.0);
    return g;
}

TEST(NegativeSampling, ReplacementFromSmallPool) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "c", 1.0);
    g.add_weight("c", "d", 1.0);
    g.add_weight("d", "e", 1.0);
    Rng rng(1);
    const auto s = sample_negatives(g, "a", 50, rng);
    ASSERT_EQ(s.size(), 50u);
    std::set<std::string> seen(s.begin(), s.end());
    EXPECT_EQ(seen, (std::set<std::string>{"c", "d", "e"}));
}

TEST(NegativeSampling, WithoutReplacementWhenPoolSuffices) {
    const auto g = generate_ring_lattice(30, 4);
    Rng rng(2);
    const auto s = sample_negatives(g, "0", 10, rng);
    std::set<std::string> seen(s.begin(), s.end());
    EXPECT_EQ(seen.size(), 10u);
    for (const auto& x : {"0", "1", "2", "28", "29"}) EXPECT_FALSE(seen.contains(x));
}

TEST(NegativeSampling, StarCenterFallsBack) {
    const auto g = star(4);
    Rng rng(3);
    for (const auto& id : sample_negatives(g, "c", 20, rng)) EXPECT_NE(id, "c");
}

TEST(NegativeSampling, Deterministic) {
    const auto g = generate_tree(3, 3);
    Rng a(9), b(9);
    EXPECT_EQ(sample_negatives(g, "1", 8, a), sample_negatives(g, "1", 8, b));
}

TEST(NegativeSampling, UniformOverPool) {
    const auto g = generate_ring_lattice(10, 2);
    Rng rng(5);
    std::map<std::string, int> counts;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) counts[sample_negatives(g, "0", 1, rng)[0]]++;
    EXPECT_EQ(counts.size(), 7u);
    for (const auto& [id, c] : counts) EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 7.0, 0.01) << id;
}

TEST(NegativeSampling, Errors) {
    const auto g = generate_tree(2, 2);
    Rng rng(1);
    EXPECT_THROW(sample_negatives(g, "0", 0, rng), ConfigError);
    EXPECT_THROW(sample_negatives(g, "ghost", 1, rng), DataError);
}

TEST(PairSampling, SymmetrizedOrientationsEquallyLikely) {
    WeightedGraph g;
    g.add_weight("a", "b", 3.0);
    g.add_weight("b", "c", 1.0);
    const PairSampler sampler(training_pairs(g.edges(), true));
    ASSERT_EQ(sampler.size(), 4u);
    std::map<std::pair<NodeId, NodeId>, double> prob;
    for (std::size_t i = 0; i < sampler.size(); ++i) {
        prob[{sampler.pairs()[i].source, sampler.pairs()[i].target}] = sampler.probability(i);
    }
    const auto ab = prob[{0, 1}], ba = prob[{1, 0}], bc = prob[{1, 2}], cb = prob[{2, 1}];
    EXPECT_DOUBLE_EQ(ab, ba);
    EXPECT_DOUBLE_EQ(bc, cb);
    EXPECT_DOUBLE_EQ(ab, 3.0 * bc);

    Rng rng(8);
    std::map<std::pair<NodeId, NodeId>, int> counts;
    const int draws = 80000;
    for (int i = 0; i < draws; ++i) {
        const auto& p = sampler.draw(rng);
        counts[{p.source, p.target}]++;
    }
    for (const auto& [key, c] : counts) EXPECT_NEAR(c / static_cast<double>(draws), prob[key], 0.01);
}

TEST(PairSampling, WithoutSymmetrizeOneOrientation) {
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    EXPECT_EQ(training_pairs(g.edges(), false).size(), 1u);
}

TEST(Training, ProjectionInvariantEveryEpoch) {
    const auto g = generate_tree(3, 3);
    auto cfg = tree_config(3);
    cfg.epochs = 60;
    cfg.learning_rate = 5.0;  // aggressive steps push points at the boundary
    train(g, cfg, [&](const EpochReport& r) {
        for (const auto& p : r.positions) ASSERT_LE(p.norm(), 1.0 - cfg.epsilon);
    });
}

TEST(Training, DeterministicForSeed) {
    const auto g = generate_tree(3, 3);
    auto cfg = tree_config(7);
    cfg.epochs = 80;
    EXPECT_EQ(train(g, cfg), train(g, cfg));
    auto other = cfg;
    other.seed = 8;
    EXPECT_FALSE(train(g, cfg) == train(g, other));
}

TEST(Training, RootNearCenterOnTree) {
    const auto g = generate_tree(3, 3);
    const auto model = train(g, tree_config(7));
    std::vector<double> radii;
    for (const auto& p : model.positions()) radii.push_back(p.radius());
    std::sort(radii.begin(), radii.end());
    EXPECT_LE(model.position("0").radius(), radii[2]);
    for (const auto& p : model.positions()) EXPECT_LE(p.norm_sq(), 1.0);
}

TEST(Training, CheckpointIsAPostBurninEvaluation) {
    const auto g = generate_tree(3, 3);
    auto cfg = tree_config(2);
    cfg.epochs = 50;
    std::vector<std::pair<int, double>> evals;
    train(g, cfg, [&](const EpochReport& r) {
        if (!std::isnan(r.validation_loss)) {
            EXPECT_FALSE(r.burnin);
            evals.emplace_back(r.epoch, r.validation_loss);
        }
    });
    const auto model = train(g, cfg);
    ASSERT_FALSE(evals.empty());
    auto best = evals.front();
    for (const auto& e : evals) {
        if (e.second < best.second) best = e;
    }
    EXPECT_EQ(model.epoch_of_best(), best.first);
    EXPECT_EQ(model.best_validation_loss(), best.second);
    EXPECT_GT(model.epoch_of_best(), cfg.burnin_epochs);
    EXPECT_TRUE(model.epoch_of_best() % cfg.eval_every == 0 || model.epoch_of_best() == cfg.epochs);
}

TEST(Training, LossMostlyNonIncreasing) {
    const auto g = generate_tree(3, 3);
    std::vector<double> losses;
    train(g, tree_config(7), [&](const EpochReport& r) { losses.push_back(full_softmax_loss(r.positions, g)); });
    int ok = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) ok += losses[i] <= losses[i - 1];
    EXPECT_GE(ok, static_cast<int>(0.9 * static_cast<double>(losses.size() - 1)));
}

TEST(Training, MeanRankBeatsRandomBaseline) {
    const auto g = generate_tree(3, 3);
    const auto model = train(g, tree_config(7));
    EXPECT_LE(2.0 * mean_rank(model, g), random_mean_rank(g));
}

TEST(Training, TreeRadiiMoreSpreadThanRing) {
    auto spread = [](const EmbeddingModel& m) {
        std::vector<double> r;
        for (const auto& p : m.positions()) r.push_back(p.radius());
        return population_stddev(r);
    };
    int ordered = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ordered += spread(train(generate_tree(3, 3), tree_config(seed))) >
                   spread(train(generate_ring_lattice(20, 4), tree_config(seed)));
    }
    EXPECT_GE(ordered, 8);
}

TEST(Training, IgnoresSelfLoopsAndHonoursWeights) {
    auto g = generate_tree(3, 3);
    g.add_weight("0", "0", 50.0);
    auto cfg = tree_config(4);
    cfg.epochs = 40;
    const auto with_loop = train(g, cfg);
    EXPECT_EQ(with_loop, train(generate_tree(3, 3), cfg));
}

TEST(Training, Errors) {
    WeightedGraph loops;
    loops.add_weight("a", "a", 1.0);
    loops.add_node("b");
    EXPECT_THROW(train(loops, tree_config(1)), DataError);

    WeightedGraph split;
    split.add_weight("a", "b", 1.0);
    split.add_weight("c", "d", 1.0);
    try {
        train(split, tree_config(1));
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("{c, d}"), std::string::npos);
    }

    auto bad = tree_config(1);
    bad.burnin_epochs = bad.epochs;
    EXPECT_THROW(train(generate_tree(3, 3), bad), ConfigError);
    bad = tree_config(1);
    bad.learning_rate = 0.0;
    EXPECT_THROW(train(generate_tree(3, 3), bad), ConfigError);
}

TEST(MeanRank, PerfectAndRandomBaselines) {
    // path a-b-c on a line: every neighbor is nearer than the lone non-neighbor
    WeightedGraph g;
    g.add_weight("a", "b", 1.0);
    g.add_weight("b", "c", 1.0);
    const std::vector<Vec2> pos{{-0.5, 0.0}, {0.0, 0.0}, {0.5, 0.0}};
    EXPECT_DOUBLE_EQ(mean_rank(pos, g), 1.0);
    // a's one non-neighbor is c: expected rank 1.5 for a and c, 1 for b
    EXPECT_DOUBLE_EQ(random_mean_rank(g), (1.5 + 1.0 + 1.0 + 1.5) / 4.0);
}

}  // namespace
}  // namespace hyperdisk
