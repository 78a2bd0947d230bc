// Tests for the decision-forest classifier and the minority oversampler:
// training determinism, hand-checkable prediction rules, oversampling
// geometry, and bit-exact model persistence.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qdfg/forest.hpp"
#include "testutil.hpp"

namespace {

using namespace qdfg;

LabeledSample sample(std::vector<double> values, Label label) {
    LabeledSample s;
    s.values = std::move(values);
    s.label = label;
    return s;
}

/// Two tight, well-separated 2-D clusters: 20 benign near (0.1, 0.2) and
/// 20 malicious near (0.9, 0.8).
std::vector<LabeledSample> separable_toy() {
    std::vector<LabeledSample> out;
    for (int i = 0; i < 20; ++i) {
        const double off = 0.004 * i;
        out.push_back(sample({0.1 + off, 0.2 - off / 2}, Label::Benign));
        out.push_back(sample({0.9 - off, 0.8 + off / 2}, Label::Malicious));
    }
    return out;
}

/// A noisier random dataset (still two classes) for determinism checks.
std::vector<LabeledSample> random_dataset(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.uniform_real();
        out.push_back(sample(std::move(v), rng.bernoulli(0.4) ? Label::Malicious
                                                              : Label::Benign));
    }
    // Guarantee both classes.
    out[0].label = Label::Benign;
    out[1].label = Label::Malicious;
    return out;
}

DecisionTree leaf_tree(std::uint64_t nb, std::uint64_t nm) {
    DecisionTree t;
    DecisionTree::Node n;
    n.feature = -1;
    n.n_benign = nb;
    n.n_malicious = nm;
    t.nodes.push_back(n);
    return t;
}

// ---------------------------------------------------------------------------
// Hand-built tree prediction rules.
// ---------------------------------------------------------------------------

TEST(TreePredict, DescendsLeftOnStrictlyLess) {
    DecisionTree t;
    DecisionTree::Node root;
    root.feature = 0;
    root.threshold = 0.5;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    DecisionTree::Node left;
    left.n_benign = 4; // pure benign leaf
    t.nodes.push_back(left);
    DecisionTree::Node right;
    right.n_malicious = 4; // pure malicious leaf
    t.nodes.push_back(right);

    EXPECT_EQ(t.predict({0.4}, Label::Benign), Label::Benign);
    // Equality goes right: the descent condition is x < threshold.
    EXPECT_EQ(t.predict({0.5}, Label::Benign), Label::Malicious);
    EXPECT_EQ(t.predict({0.6}, Label::Benign), Label::Malicious);
}

TEST(TreePredict, LeafMajorityAndTieBreak) {
    EXPECT_EQ(leaf_tree(3, 1).predict({0.0}, Label::Malicious), Label::Benign);
    EXPECT_EQ(leaf_tree(1, 3).predict({0.0}, Label::Benign), Label::Malicious);
    EXPECT_EQ(leaf_tree(2, 2).predict({0.0}, Label::Benign), Label::Benign);
    EXPECT_EQ(leaf_tree(2, 2).predict({0.0}, Label::Malicious), Label::Malicious);
}

TEST(TreePredict, MultiLevelDescent) {
    // root: x0 < 1 ? (x1 < 5 ? B : M) : M
    DecisionTree t;
    t.nodes.resize(5);
    t.nodes[0].feature = 0;
    t.nodes[0].threshold = 1.0;
    t.nodes[0].left = 1;
    t.nodes[0].right = 2;
    t.nodes[1].feature = 1;
    t.nodes[1].threshold = 5.0;
    t.nodes[1].left = 3;
    t.nodes[1].right = 4;
    t.nodes[2].feature = -1;
    t.nodes[2].n_malicious = 1;
    t.nodes[3].feature = -1;
    t.nodes[3].n_benign = 1;
    t.nodes[4].feature = -1;
    t.nodes[4].n_malicious = 1;

    EXPECT_EQ(t.predict({0.0, 2.0}, Label::Benign), Label::Benign);
    EXPECT_EQ(t.predict({0.0, 9.0}, Label::Benign), Label::Malicious);
    EXPECT_EQ(t.predict({3.0, 2.0}, Label::Benign), Label::Malicious);
}

// ---------------------------------------------------------------------------
// Voting.
// ---------------------------------------------------------------------------

RandomForest hand_forest(std::vector<DecisionTree> trees, Label tie_break) {
    RandomForest f;
    f.feature_dim = 1;
    f.config.tie_break = tie_break;
    f.trees = std::move(trees);
    return f;
}

TEST(ForestVote, ScoreIsMaliciousVoteShare) {
    auto f = hand_forest({leaf_tree(0, 1), leaf_tree(0, 1), leaf_tree(1, 0)},
                         Label::Benign);
    const Verdict v = classify(f, {0.0});
    EXPECT_DOUBLE_EQ(v.score, 2.0 / 3.0);
    EXPECT_EQ(v.label, Label::Malicious);

    auto g = hand_forest({leaf_tree(0, 1), leaf_tree(1, 0), leaf_tree(1, 0)},
                         Label::Benign);
    const Verdict w = classify(g, {0.0});
    EXPECT_DOUBLE_EQ(w.score, 1.0 / 3.0);
    EXPECT_EQ(w.label, Label::Benign);
}

TEST(ForestVote, ExactTieUsesConfiguredTieBreak) {
    auto f = hand_forest({leaf_tree(0, 1), leaf_tree(1, 0)}, Label::Benign);
    EXPECT_EQ(classify(f, {0.0}).label, Label::Benign);
    EXPECT_DOUBLE_EQ(classify(f, {0.0}).score, 0.5);
    auto g = hand_forest({leaf_tree(0, 1), leaf_tree(1, 0)}, Label::Malicious);
    EXPECT_EQ(classify(g, {0.0}).label, Label::Malicious);
}

TEST(ForestVote, RejectsBadInputVectors) {
    auto f = hand_forest({leaf_tree(1, 0)}, Label::Benign);
    EXPECT_THROW(classify(f, {}), DomainError);
    EXPECT_THROW(classify(f, {1.0, 2.0}), DomainError);
    EXPECT_THROW(classify(f, {std::numeric_limits<double>::quiet_NaN()}), DomainError);
    EXPECT_THROW(classify(f, {std::numeric_limits<double>::infinity()}), DomainError);
}

// ---------------------------------------------------------------------------
// Feature subsampling width.
// ---------------------------------------------------------------------------

TEST(ForestConfig, DefaultFeaturesPerSplitIsCeilSqrtDim) {
    RandomForest f;
    f.feature_dim = 8;
    EXPECT_EQ(f.effective_features_per_split(), 3u);
    f.feature_dim = 500;
    EXPECT_EQ(f.effective_features_per_split(), 23u);
    f.feature_dim = 1;
    EXPECT_EQ(f.effective_features_per_split(), 1u);
    f.feature_dim = 9;
    EXPECT_EQ(f.effective_features_per_split(), 3u);
}

TEST(ForestConfig, ExplicitFeaturesPerSplitIsCappedAtDim) {
    RandomForest f;
    f.feature_dim = 8;
    f.config.features_per_split = 5;
    EXPECT_EQ(f.effective_features_per_split(), 5u);
    f.config.features_per_split = 20;
    EXPECT_EQ(f.effective_features_per_split(), 8u);
}

TEST(ForestConfig, JsonRoundTripAndValidation) {
    ClassifierConfig c;
    c.n_trees = 7;
    c.features_per_split = 2;
    c.min_leaf = 3;
    c.max_depth = 9;
    c.tie_break = Label::Malicious;
    c.smote_ratio = 0.75;
    c.smote_k = 4;
    c.seed = 1234567;
    EXPECT_EQ(ClassifierConfig::from_json(c.to_json()), c);

    // Missing keys fall back to defaults.
    EXPECT_EQ(ClassifierConfig::from_json(json::object()), ClassifierConfig{});

    json bad = c.to_json();
    bad["n_trees"] = 0;
    EXPECT_THROW(ClassifierConfig::from_json(bad), ConfigError);
    bad = c.to_json();
    bad["min_leaf"] = 0;
    EXPECT_THROW(ClassifierConfig::from_json(bad), ConfigError);
    bad = c.to_json();
    bad["tie_break"] = "unknown";
    EXPECT_THROW(ClassifierConfig::from_json(bad), ConfigError);
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

TEST(Train, PerfectOnWellSeparatedClusters) {
    const auto data = separable_toy();
    ClassifierConfig cfg;
    cfg.seed = 7;
    const RandomForest f = train_forest(data, cfg);
    ASSERT_EQ(f.trees.size(), 10u);
    EXPECT_EQ(f.feature_dim, 2u);
    for (const LabeledSample& s : data) {
        const Verdict v = classify(f, s.values);
        EXPECT_EQ(v.label, s.label);
        // Every bootstrap sees both clusters, so the vote is unanimous.
        EXPECT_DOUBLE_EQ(v.score, s.label == Label::Malicious ? 1.0 : 0.0);
    }
}

TEST(Train, DeterministicForFixedDataAndSeed) {
    Rng rng(91);
    const auto data = random_dataset(rng, 60, 5);
    ClassifierConfig cfg;
    cfg.seed = 42;
    const std::string a = forest_to_json(train_forest(data, cfg)).dump();
    const std::string b = forest_to_json(train_forest(data, cfg)).dump();
    EXPECT_EQ(a, b);
}

TEST(Train, SampleOrderDoesNotMatter) {
    Rng rng(92);
    auto data = random_dataset(rng, 50, 4);
    ClassifierConfig cfg;
    cfg.seed = 3;
    const std::string canonical = forest_to_json(train_forest(data, cfg)).dump();
    Rng shuffler(17);
    for (int round = 0; round < 5; ++round) {
        shuffler.shuffle(data);
        EXPECT_EQ(forest_to_json(train_forest(data, cfg)).dump(), canonical);
    }
}

TEST(Train, ThreadCountDoesNotChangeTheModel) {
    Rng rng(93);
    const auto data = random_dataset(rng, 60, 5);
    ClassifierConfig cfg;
    cfg.seed = 5;
    const std::string one = forest_to_json(train_forest(data, cfg, 1)).dump();
    EXPECT_EQ(forest_to_json(train_forest(data, cfg, 2)).dump(), one);
    EXPECT_EQ(forest_to_json(train_forest(data, cfg, 4)).dump(), one);
}

TEST(Train, SeedChangesTheModel) {
    Rng rng(94);
    const auto data = random_dataset(rng, 60, 5);
    ClassifierConfig a, b;
    a.seed = 1;
    b.seed = 2;
    EXPECT_NE(forest_to_json(train_forest(data, a)).dump(),
              forest_to_json(train_forest(data, b)).dump());
}

TEST(Train, RespectsMaxDepth) {
    Rng rng(95);
    const auto data = random_dataset(rng, 80, 4);
    ClassifierConfig cfg;
    cfg.seed = 9;
    cfg.max_depth = 1; // a single node: no split may happen at depth 1
    const RandomForest f = train_forest(data, cfg);
    for (const DecisionTree& t : f.trees) {
        ASSERT_EQ(t.nodes.size(), 1u);
        EXPECT_EQ(t.nodes[0].feature, -1);
    }
    cfg.max_depth = 2; // at most root + two leaves
    for (const DecisionTree& t : train_forest(data, cfg).trees)
        EXPECT_LE(t.nodes.size(), 3u);
}

TEST(Train, MinLeafBoundsLeafOccupancy) {
    Rng rng(96);
    const auto data = random_dataset(rng, 70, 3);
    ClassifierConfig cfg;
    cfg.seed = 11;
    cfg.min_leaf = 5;
    const RandomForest f = train_forest(data, cfg);
    for (const DecisionTree& t : f.trees)
        for (const DecisionTree::Node& n : t.nodes)
            if (n.feature < 0) EXPECT_GE(n.n_benign + n.n_malicious, 5u);
}

TEST(Train, LeafCountsAccountForTheWholeBootstrap) {
    Rng rng(97);
    const auto data = random_dataset(rng, 45, 3);
    ClassifierConfig cfg;
    cfg.seed = 13;
    const RandomForest f = train_forest(data, cfg);
    for (const DecisionTree& t : f.trees) {
        std::uint64_t total = 0;
        for (const DecisionTree::Node& n : t.nodes)
            if (n.feature < 0) total += n.n_benign + n.n_malicious;
        // Bootstrap draws exactly |data| samples; every one lands in a leaf.
        EXPECT_EQ(total, data.size());
    }
}

TEST(Train, RejectsDegenerateInputs) {
    EXPECT_THROW(train_forest({}, ClassifierConfig{}), DomainError);

    std::vector<LabeledSample> one_class = {sample({1.0}, Label::Benign),
                                            sample({2.0}, Label::Benign)};
    EXPECT_THROW(train_forest(one_class, ClassifierConfig{}), DomainError);

    std::vector<LabeledSample> ragged = {sample({1.0}, Label::Benign),
                                         sample({1.0, 2.0}, Label::Malicious)};
    EXPECT_THROW(train_forest(ragged, ClassifierConfig{}), DomainError);

    std::vector<LabeledSample> unlabeled = {sample({1.0}, Label::Benign),
                                            sample({2.0}, Label::Unknown)};
    EXPECT_THROW(train_forest(unlabeled, ClassifierConfig{}), DomainError);

    std::vector<LabeledSample> nan_sample = {
        sample({std::numeric_limits<double>::quiet_NaN()}, Label::Benign),
        sample({2.0}, Label::Malicious)};
    EXPECT_THROW(train_forest(nan_sample, ClassifierConfig{}), DomainError);

    std::vector<LabeledSample> empty_vectors = {sample({}, Label::Benign),
                                                sample({}, Label::Malicious)};
    EXPECT_THROW(train_forest(empty_vectors, ClassifierConfig{}), DomainError);
}

// ---------------------------------------------------------------------------
// Minority oversampling.
// ---------------------------------------------------------------------------

std::size_t count_label(const std::vector<LabeledSample>& v, Label l) {
    std::size_t n = 0;
    for (const auto& s : v)
        if (s.label == l) ++n;
    return n;
}

TEST(Smote, RestoresRequestedBalanceExactly) {
    std::vector<LabeledSample> data;
    for (int i = 0; i < 10; ++i)
        data.push_back(sample({double(i), double(2 * i)}, Label::Benign));
    for (int i = 0; i < 4; ++i)
        data.push_back(sample({double(100 + i), double(i)}, Label::Malicious));

    const auto out = smote(data, 1.0, 5, Rng(7));
    EXPECT_EQ(out.size(), 20u);
    EXPECT_EQ(count_label(out, Label::Malicious), 10u);
    EXPECT_EQ(count_label(out, Label::Benign), 10u);

    // Originals are preserved verbatim as a prefix; synthetics follow.
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(out[i], data[i]);
    for (std::size_t i = data.size(); i < out.size(); ++i)
        EXPECT_EQ(out[i].label, Label::Malicious);
}

TEST(Smote, CeilingOfRatioTimesMajority) {
    std::vector<LabeledSample> data;
    for (int i = 0; i < 10; ++i) data.push_back(sample({double(i)}, Label::Benign));
    for (int i = 0; i < 3; ++i) data.push_back(sample({double(50 + i)}, Label::Malicious));
    // ceil(0.75 * 10) = 8 minority samples wanted -> 5 synthetics.
    const auto out = smote(data, 0.75, 5, Rng(1));
    EXPECT_EQ(count_label(out, Label::Malicious), 8u);
    EXPECT_EQ(out.size(), 18u);
}

TEST(Smote, RatioAboveOneOvershootsTheMajority) {
    std::vector<LabeledSample> data;
    for (int i = 0; i < 6; ++i) data.push_back(sample({double(i)}, Label::Benign));
    for (int i = 0; i < 4; ++i) data.push_back(sample({double(50 + i)}, Label::Malicious));
    const auto out = smote(data, 1.5, 3, Rng(2));
    EXPECT_EQ(count_label(out, Label::Malicious), 9u); // ceil(1.5 * 6)
}

TEST(Smote, AlreadyBalancedInputIsReturnedUnchanged) {
    std::vector<LabeledSample> data = {
        sample({0.0}, Label::Benign), sample({1.0}, Label::Benign),
        sample({2.0}, Label::Malicious), sample({3.0}, Label::Malicious)};
    EXPECT_EQ(smote(data, 1.0, 5, Rng(3)), data);
    // A low enough ratio also requires nothing.
    std::vector<LabeledSample> skew = {
        sample({0.0}, Label::Benign), sample({1.0}, Label::Benign),
        sample({2.0}, Label::Benign), sample({3.0}, Label::Benign),
        sample({9.0}, Label::Malicious), sample({8.0}, Label::Malicious)};
    EXPECT_EQ(smote(skew, 0.5, 5, Rng(3)), skew);
}

TEST(Smote, SingleClassInputIsReturnedUnchanged) {
    std::vector<LabeledSample> data = {sample({0.0}, Label::Benign),
                                       sample({1.0}, Label::Benign)};
    EXPECT_EQ(smote(data, 1.0, 5, Rng(4)), data);
    EXPECT_EQ(smote(std::vector<LabeledSample>{}, 1.0, 5, Rng(4)).size(), 0u);
}

TEST(Smote, BenignCanBeTheMinority) {
    std::vector<LabeledSample> data;
    for (int i = 0; i < 9; ++i) data.push_back(sample({double(i)}, Label::Malicious));
    data.push_back(sample({100.0}, Label::Benign));
    data.push_back(sample({101.0}, Label::Benign));
    const auto out = smote(data, 1.0, 5, Rng(5));
    EXPECT_EQ(count_label(out, Label::Benign), 9u);
    for (std::size_t i = data.size(); i < out.size(); ++i) {
        EXPECT_EQ(out[i].label, Label::Benign);
        EXPECT_GE(out[i].values[0], 100.0);
        EXPECT_LE(out[i].values[0], 101.0);
    }
}

TEST(Smote, SyntheticsLieOnSegmentsBetweenMinorityPoints) {
    // With exactly two minority points every synthetic must sit on the
    // segment between them: (u, 2u, 3u) for u in [0, 1).
    std::vector<LabeledSample> data;
    for (int i = 0; i < 12; ++i)
        data.push_back(sample({double(i), 50.0, -3.0}, Label::Benign));
    data.push_back(sample({0.0, 0.0, 0.0}, Label::Malicious));
    data.push_back(sample({1.0, 2.0, 3.0}, Label::Malicious));
    const auto out = smote(data, 1.0, 5, Rng(6));
    EXPECT_EQ(count_label(out, Label::Malicious), 12u);
    for (std::size_t i = data.size(); i < out.size(); ++i) {
        const auto& v = out[i].values;
        const double u = v[0];
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_NEAR(v[1], 2.0 * u, 1e-12);
        EXPECT_NEAR(v[2], 3.0 * u, 1e-12);
    }
}

TEST(Smote, SyntheticsRespectPerDimensionMinorityBounds) {
    Rng rng(48);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<LabeledSample> data;
        const std::size_t dim = 1 + rng.below(5);
        const std::size_t n_min = 2 + rng.below(6);
        const std::size_t n_maj = n_min + 1 + rng.below(8);
        std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
        std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n_maj; ++i) {
            std::vector<double> v(dim);
            for (double& x : v) x = rng.uniform_real() * 100.0 - 50.0;
            data.push_back(sample(std::move(v), Label::Benign));
        }
        for (std::size_t i = 0; i < n_min; ++i) {
            std::vector<double> v(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                v[j] = rng.uniform_real() * 100.0 - 50.0;
                lo[j] = std::min(lo[j], v[j]);
                hi[j] = std::max(hi[j], v[j]);
            }
            data.push_back(sample(std::move(v), Label::Malicious));
        }
        const auto out = smote(data, 1.0, 3, Rng(1000 + iter));
        ASSERT_EQ(count_label(out, Label::Malicious), n_maj);
        for (std::size_t i = data.size(); i < out.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                EXPECT_GE(out[i].values[j], lo[j] - 1e-12);
                EXPECT_LE(out[i].values[j], hi[j] + 1e-12);
            }
    }
}

TEST(Smote, NeighborCountIsCappedByAvailableNeighbors) {
    std::vector<LabeledSample> data;
    for (int i = 0; i < 9; ++i) data.push_back(sample({double(i)}, Label::Benign));
    data.push_back(sample({40.0}, Label::Malicious));
    data.push_back(sample({41.0}, Label::Malicious));
    data.push_back(sample({42.0}, Label::Malicious));
    // k = 50 far exceeds the 2 neighbors each minority point has.
    const auto out = smote(data, 1.0, 50, Rng(8));
    EXPECT_EQ(count_label(out, Label::Malicious), 9u);
    for (std::size_t i = data.size(); i < out.size(); ++i) {
        EXPECT_GE(out[i].values[0], 40.0);
        EXPECT_LE(out[i].values[0], 42.0);
    }
}

TEST(Smote, DeterministicForAGivenGenerator) {
    std::vector<LabeledSample> data;
    Rng rng(49);
    for (int i = 0; i < 14; ++i)
        data.push_back(sample({rng.uniform_real(), rng.uniform_real()},
                              i < 10 ? Label::Benign : Label::Malicious));
    const auto a = smote(data, 1.0, 5, Rng(77));
    const auto b = smote(data, 1.0, 5, Rng(77));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
    const auto c = smote(data, 1.0, 5, Rng(78));
    EXPECT_NE(a, c); // a different stream draws different interpolants
}

TEST(Smote, RejectsImpossibleOrMalformedRequests) {
    std::vector<LabeledSample> lonely;
    for (int i = 0; i < 5; ++i) lonely.push_back(sample({double(i)}, Label::Benign));
    lonely.push_back(sample({9.0}, Label::Malicious));
    EXPECT_THROW(smote(lonely, 1.0, 5, Rng(9)), DomainError);
    // ... but a ratio satisfied by the single point needs no synthesis.
    EXPECT_EQ(smote(lonely, 0.2, 5, Rng(9)), lonely);

    std::vector<LabeledSample> ok = {sample({0.0}, Label::Benign),
                                     sample({1.0}, Label::Malicious)};
    EXPECT_THROW(smote(ok, 1.0, 0, Rng(9)), ConfigError);

    std::vector<LabeledSample> ragged = {sample({0.0}, Label::Benign),
                                         sample({1.0, 2.0}, Label::Malicious)};
    EXPECT_THROW(smote(ragged, 1.0, 5, Rng(9)), DomainError);

    std::vector<LabeledSample> unlabeled = {sample({0.0}, Label::Benign),
                                            sample({1.0}, Label::Unknown)};
    EXPECT_THROW(smote(unlabeled, 1.0, 5, Rng(9)), DomainError);
}

// ---------------------------------------------------------------------------
// Persistence.
// ---------------------------------------------------------------------------

TEST(ModelIo, RoundTripIsBitExact) {
    Rng rng(50);
    const auto data = random_dataset(rng, 60, 6);
    ClassifierConfig cfg;
    cfg.seed = 21;
    cfg.n_trees = 12;
    cfg.tie_break = Label::Malicious;
    const RandomForest f = train_forest(data, cfg);
    const json doc = forest_to_json(f);
    const RandomForest g = forest_from_json(doc);
    EXPECT_EQ(f, g);
    EXPECT_EQ(forest_to_json(g).dump(), doc.dump());
    // The reloaded model votes identically.
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x(6);
        for (double& v : x) v = rng.uniform_real();
        EXPECT_EQ(classify(f, x), classify(g, x));
    }
}

TEST(ModelIo, DocumentCarriesFormatTagAndVersion) {
    const auto f = hand_forest({leaf_tree(1, 0)}, Label::Benign);
    const json doc = forest_to_json(f);
    EXPECT_EQ(doc.at("format"), "qdfg.forest");
    EXPECT_EQ(doc.at("version"), 1);
    EXPECT_EQ(doc.at("feature_dim"), 1);
}

TEST(ModelIo, RejectsForeignAndCorruptDocuments) {
    const auto f = hand_forest({leaf_tree(1, 0)}, Label::Benign);
    const json good = forest_to_json(f);

    EXPECT_THROW(forest_from_json(json::array()), ParseError);
    EXPECT_THROW(forest_from_json(json{{"format", "something.else"}}), ParseError);

    json bad = good;
    bad["version"] = 2;
    EXPECT_THROW(forest_from_json(bad), ParseError);

    bad = good;
    bad["trees"] = json::array();
    EXPECT_THROW(forest_from_json(bad), ParseError);

    bad = good;
    bad["trees"][0]["nodes"] = json::array();
    EXPECT_THROW(forest_from_json(bad), ParseError);

    bad = good;
    bad["trees"][0]["nodes"][0] = json::array({-1, 0.0, -1, -1, 1}); // short record
    EXPECT_THROW(forest_from_json(bad), ParseError);

    // An interior node pointing outside the tree is rejected.
    bad = good;
    bad["trees"][0]["nodes"][0] = json::array({0, 0.5, 1, 7, 0, 0});
    EXPECT_THROW(forest_from_json(bad), ParseError);
    bad["trees"][0]["nodes"][0] = json::array({0, 0.5, -1, 0, 0, 0});
    EXPECT_THROW(forest_from_json(bad), ParseError);

    // Config validation applies on load as well.
    bad = good;
    bad["config"]["n_trees"] = 0;
    EXPECT_THROW(forest_from_json(bad), ConfigError);
}

TEST(ModelIo, ThresholdPrecisionSurvivesTheRoundTrip) {
    DecisionTree t;
    DecisionTree::Node root;
    root.feature = 0;
    root.threshold = 0.1 + 0.2; // deliberately non-representable midpoint
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    t.nodes.push_back(leaf_tree(3, 0).nodes[0]);
    t.nodes.push_back(leaf_tree(0, 3).nodes[0]);
    auto f = hand_forest({t}, Label::Benign);
    const RandomForest g = forest_from_json(forest_to_json(f));
    EXPECT_EQ(g.trees[0].nodes[0].threshold, 0.1 + 0.2);
    // A probe between the nearest representable neighbors stays on the same
    // side after reload.
    const double probe = std::nextafter(0.1 + 0.2, 0.0);
    EXPECT_EQ(f.trees[0].predict({probe}, Label::Benign),
              g.trees[0].predict({probe}, Label::Benign));
}

} // namespace
