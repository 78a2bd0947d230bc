#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/entity.hpp"
#include "qdfg/parallel.hpp"
#include "qdfg/rng.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

/// One training point: a feature vector and its ground truth.
struct LabeledSample {
    std::vector<double> values;
    Label label = Label::Unknown;

    friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Random Forest hyperparameters. features_per_split = 0 means the usual
/// ceil(sqrt(dimension)); max_depth = 0 means unlimited.
struct ClassifierConfig {
    std::size_t n_trees = 10;
    std::size_t features_per_split = 0;
    std::size_t min_leaf = 2;
    std::size_t max_depth = 0;
    Label tie_break = Label::Benign;
    double smote_ratio = 1.0;
    std::size_t smote_k = 5;
    std::uint64_t seed = 0;

    friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;

    json to_json() const {
        return json{{"n_trees", n_trees},
                    {"features_per_split", features_per_split},
                    {"min_leaf", min_leaf},
                    {"max_depth", max_depth},
                    {"tie_break", std::string(label_name(tie_break))},
                    {"smote_ratio", smote_ratio},
                    {"smote_k", smote_k},
                    {"seed", seed}};
    }

    static ClassifierConfig from_json(const json& j) {
        ClassifierConfig c;
        if (j.contains("n_trees")) c.n_trees = j["n_trees"].get<std::size_t>();
        if (j.contains("features_per_split"))
            c.features_per_split = j["features_per_split"].get<std::size_t>();
        if (j.contains("min_leaf")) c.min_leaf = j["min_leaf"].get<std::size_t>();
        if (j.contains("max_depth")) c.max_depth = j["max_depth"].get<std::size_t>();
        if (j.contains("tie_break"))
            c.tie_break = label_from_name(j["tie_break"].get<std::string>());
        if (j.contains("smote_ratio")) c.smote_ratio = j["smote_ratio"].get<double>();
        if (j.contains("smote_k")) c.smote_k = j["smote_k"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (c.n_trees == 0) throw ConfigError("n_trees must be >= 1");
        if (c.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
        if (c.tie_break == Label::Unknown) throw ConfigError("tie_break must be a class label");
        return c;
    }
};

/// Flat binary decision tree. feature = -1 marks a leaf; leaves carry the
/// class counts of the training samples that reached them.
struct DecisionTree {
    struct Node {
        std::int32_t feature = -1;
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint64_t n_benign = 0;
        std::uint64_t n_malicious = 0;

        friend bool operator==(const Node&, const Node&) = default;
    };

    std::vector<Node> nodes; // root at index 0

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

    /// Majority vote of the leaf the vector descends to; ties favor
    /// tie_break.
    Label predict(const std::vector<double>& x, Label tie_break) const {
        std::size_t i = 0;
        while (nodes[i].feature >= 0) {
            const Node& nd = nodes[i];
            i = static_cast<std::size_t>(
                x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right);
        }
        const Node& leaf = nodes[i];
        if (leaf.n_malicious > leaf.n_benign) return Label::Malicious;
        if (leaf.n_benign > leaf.n_malicious) return Label::Benign;
        return tie_break;
    }
};

/// A trained forest: the trees plus everything needed to reproduce or apply
/// them.
struct RandomForest {
    ClassifierConfig config;
    std::size_t feature_dim = 0;
    std::vector<DecisionTree> trees;

    friend bool operator==(const RandomForest&, const RandomForest&) = default;

    std::size_t effective_features_per_split() const {
        if (config.features_per_split > 0)
            return std::min(config.features_per_split, feature_dim);
        return static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(feature_dim))));
    }
};

/// Classification result: the voted label and the malicious vote share.
struct Verdict {
    Label label = Label::Unknown;
    double score = 0.0;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

namespace detail {

inline void check_sample(const LabeledSample& s, std::size_t dim) {
    if (s.values.size() != dim)
        throw DomainError("sample dimension " + std::to_string(s.values.size()) +
                          " does not match " + std::to_string(dim));
    for (double v : s.values)
        if (!std::isfinite(v)) throw DomainError("sample contains a non-finite value");
    if (s.label == Label::Unknown) throw DomainError("training sample lacks a label");
}

inline double gini(std::uint64_t nb, std::uint64_t nm) {
    const double n = static_cast<double>(nb + nm);
    if (n == 0.0) return 0.0;
    const double pb = static_cast<double>(nb) / n;
    const double pm = static_cast<double>(nm) / n;
    return 1.0 - pb * pb - pm * pm;
}

struct SplitChoice {
    double decrease = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
    bool found = false;
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<LabeledSample>& data, std::size_t dim,
                const ClassifierConfig& cfg, std::size_t per_split, Rng rng)
        : data_(data), dim_(dim), cfg_(cfg), per_split_(per_split), rng_(std::move(rng)) {}

    DecisionTree build() {
        std::vector<std::size_t> idx(data_.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = static_cast<std::size_t>(rng_.below(data_.size()));
        std::sort(idx.begin(), idx.end()); // canonical bag order
        DecisionTree tree;
        grow(tree, idx, 1);
        return tree;
    }

private:
    std::int32_t grow(DecisionTree& tree, const std::vector<std::size_t>& idx,
                      std::size_t depth) {
        std::uint64_t nb = 0, nm = 0;
        for (std::size_t i : idx)
            (data_[i].label == Label::Malicious ? nm : nb) += 1;
        const auto node_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        const bool pure = nb == 0 || nm == 0;
        const bool depth_capped = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
        SplitChoice split;
        if (!pure && !depth_capped && idx.size() >= 2 * cfg_.min_leaf)
            split = best_split(idx, nb, nm);
        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(node_id)].n_benign = nb;
            tree.nodes[static_cast<std::size_t>(node_id)].n_malicious = nm;
            return node_id;
        }
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (data_[i].values[split.feature] < split.threshold ? left : right).push_back(i);
        const std::int32_t l = grow(tree, left, depth + 1);
        const std::int32_t r = grow(tree, right, depth + 1);
        DecisionTree::Node& nd = tree.nodes[static_cast<std::size_t>(node_id)];
        nd.feature = static_cast<std::int32_t>(split.feature);
        nd.threshold = split.threshold;
        nd.left = l;
        nd.right = r;
        return node_id;
    }

    /// Best Gini-impurity decrease over a random feature subset; candidate
    /// thresholds are midpoints between consecutive distinct values. Ties
    /// resolve to the lower feature index, then the lower threshold.
    SplitChoice best_split(const std::vector<std::size_t>& idx, std::uint64_t nb,
                           std::uint64_t nm) {
        std::vector<std::size_t> features(dim_);
        for (std::size_t f = 0; f < dim_; ++f) features[f] = f;
        for (std::size_t i = 0; i < per_split_; ++i) {
            const auto j = i + static_cast<std::size_t>(rng_.below(dim_ - i));
            std::swap(features[i], features[j]);
        }
        features.resize(per_split_);
        std::sort(features.begin(), features.end());

        const double parent = gini(nb, nm);
        const double total = static_cast<double>(idx.size());
        SplitChoice best;
        std::vector<std::pair<double, Label>> col(idx.size());
        for (std::size_t f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                col[i] = {data_[idx[i]].values[f], data_[idx[i]].label};
            std::sort(col.begin(), col.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::uint64_t lb = 0, lm = 0;
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                (col[i].second == Label::Malicious ? lm : lb) += 1;
                if (col[i].first == col[i + 1].first) continue;
                const std::uint64_t left_n = lb + lm;
                const std::uint64_t right_n = idx.size() - left_n;
                if (left_n < cfg_.min_leaf || right_n < cfg_.min_leaf) continue;
                const double child = (static_cast<double>(left_n) * gini(lb, lm) +
                                      static_cast<double>(right_n) * gini(nb - lb, nm - lm)) /
                                     total;
                const double decrease = parent - child;
                const double threshold = col[i].first + (col[i + 1].first - col[i].first) / 2.0;
                if (decrease <= 0.0) continue;
                const bool better =
                    !best.found || decrease > best.decrease ||
                    (decrease == best.decrease &&
                     (f < best.feature || (f == best.feature && threshold < best.threshold)));
                if (better) {
                    best.found = true;
                    best.decrease = decrease;
                    best.feature = f;
                    best.threshold = threshold;
                }
            }
        }
        return best;
    }

    const std::vector<LabeledSample>& data_;
    std::size_t dim_;
    const ClassifierConfig& cfg_;
    std::size_t per_split_;
    Rng rng_;
};

} // namespace detail

/// Synthetic minority oversampling: new minority points are drawn on the
/// segments between existing minority points and their nearest minority
/// neighbors, until minority/majority reaches target_ratio. Originals are
/// returned unchanged, synthetics appended.
inline std::vector<LabeledSample> smote(const std::vector<LabeledSample>& samples,
                                        double target_ratio, std::size_t k, Rng rng) {
    if (samples.empty()) return samples;
    if (k == 0) throw ConfigError("smote k must be >= 1");
    const std::size_t dim = samples.front().values.size();
    std::size_t nb = 0, nm = 0;
    for (const LabeledSample& s : samples) {
        detail::check_sample(s, dim);
        (s.label == Label::Malicious ? nm : nb) += 1;
    }
    if (nb == 0 || nm == 0) return samples; // single class: nothing to balance
    const Label minority_label = nm < nb ? Label::Malicious : Label::Benign;
    const std::size_t minority = std::min(nb, nm);
    const std::size_t majority = std::max(nb, nm);
    const auto wanted =
        static_cast<std::size_t>(std::ceil(target_ratio * static_cast<double>(majority)));
    if (minority >= wanted) return samples;
    if (minority < 2)
        throw DomainError("smote needs at least 2 minority samples, got " +
                          std::to_string(minority));
    std::vector<std::size_t> min_idx;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].label == minority_label) min_idx.push_back(i);

    // k nearest minority neighbors per minority point (ties by index).
    const std::size_t kk = std::min(k, minority - 1);
    std::vector<std::vector<std::size_t>> neighbors(minority);
    std::vector<std::pair<double, std::size_t>> dists;
    for (std::size_t a = 0; a < minority; ++a) {
        dists.clear();
        for (std::size_t b = 0; b < minority; ++b) {
            if (a == b) continue;
            double d2 = 0.0;
            const auto& va = samples[min_idx[a]].values;
            const auto& vb = samples[min_idx[b]].values;
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = va[j] - vb[j];
                d2 += d * d;
            }
            dists.emplace_back(d2, b);
        }
        std::sort(dists.begin(), dists.end());
        neighbors[a].reserve(kk);
        for (std::size_t j = 0; j < kk; ++j) neighbors[a].push_back(dists[j].second);
    }

    std::vector<LabeledSample> out = samples;
    const std::size_t n_synth = wanted - minority;
    for (std::size_t s = 0; s < n_synth; ++s) {
        const auto a = static_cast<std::size_t>(rng.below(minority));
        const auto& nn = neighbors[a];
        const auto b = nn[static_cast<std::size_t>(rng.below(nn.size()))];
        const double u = rng.uniform_real();
        LabeledSample synth;
        synth.label = minority_label;
        synth.values.resize(dim);
        const auto& va = samples[min_idx[a]].values;
        const auto& vb = samples[min_idx[b]].values;
        for (std::size_t j = 0; j < dim; ++j) synth.values[j] = va[j] + u * (vb[j] - va[j]);
        out.push_back(std::move(synth));
    }
    return out;
}

/// Train a Random Forest. Deterministic in (samples-as-set, config): samples
/// are canonically sorted before any seeded draw, each tree consumes its own
/// seed substream, and trees may be built in parallel without changing the
/// result.
inline RandomForest train_forest(std::vector<LabeledSample> samples,
                                 const ClassifierConfig& cfg, unsigned jobs = 1) {
    if (samples.empty()) throw DomainError("cannot train on an empty sample set");
    const std::size_t dim = samples.front().values.size();
    if (dim == 0) throw DomainError("samples must have at least one feature");
    std::size_t nb = 0, nm = 0;
    for (const LabeledSample& s : samples) {
        detail::check_sample(s, dim);
        (s.label == Label::Malicious ? nm : nb) += 1;
    }
    if (nb == 0 || nm == 0)
        throw DomainError("training needs both classes; got " + std::to_string(nb) +
                          " benign and " + std::to_string(nm) + " malicious");
    std::sort(samples.begin(), samples.end(), [](const LabeledSample& a, const LabeledSample& b) {
        if (a.values != b.values) return a.values < b.values;
        return static_cast<int>(a.label) < static_cast<int>(b.label);
    });
    RandomForest forest;
    forest.config = cfg;
    forest.feature_dim = dim;
    forest.trees.resize(cfg.n_trees);
    const std::size_t per_split = forest.effective_features_per_split();
    Rng root(cfg.seed);
    parallel_for(cfg.n_trees, jobs, [&](std::size_t t) {
        detail::TreeBuilder builder(samples, dim, cfg, per_split, root.fork(t));
        forest.trees[t] = builder.build();
    });
    return forest;
}

/// Vote the forest: score is the malicious vote share; the label is
/// malicious only on a strict majority (ties go to config.tie_break).
inline Verdict classify(const RandomForest& forest, const std::vector<double>& values) {
    if (values.size() != forest.feature_dim)
        throw DomainError("feature vector length " + std::to_string(values.size()) +
                          " does not match model dimension " +
                          std::to_string(forest.feature_dim));
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("feature vector contains a non-finite value");
    std::size_t votes = 0;
    for (const DecisionTree& tree : forest.trees)
        if (tree.predict(values, forest.config.tie_break) == Label::Malicious) ++votes;
    Verdict v;
    v.score = static_cast<double>(votes) / static_cast<double>(forest.trees.size());
    if (v.score > 0.5)
        v.label = Label::Malicious;
    else if (v.score < 0.5)
        v.label = Label::Benign;
    else
        v.label = forest.config.tie_break;
    return v;
}

// ---------------------------------------------------------------------------
// Model persistence: versioned JSON, bit-exact round-trip.
// ---------------------------------------------------------------------------

inline json forest_to_json(const RandomForest& forest) {
    json trees = json::array();
    for (const DecisionTree& tree : forest.trees) {
        json nodes = json::array();
        for (const DecisionTree::Node& n : tree.nodes)
            nodes.push_back(json::array(
                {n.feature, n.threshold, n.left, n.right, n.n_benign, n.n_malicious}));
        trees.push_back(json{{"nodes", std::move(nodes)}});
    }
    return json{{"format", "qdfg.forest"},
                {"version", 1},
                {"feature_dim", forest.feature_dim},
                {"config", forest.config.to_json()},
                {"trees", std::move(trees)}};
}

inline RandomForest forest_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", std::string()) != "qdfg.forest")
        throw ParseError(0, "not a forest model document");
    if (doc.value("version", 0) != 1)
        throw ParseError(0, "unsupported model version " +
                                std::to_string(doc.value("version", 0)));
    RandomForest forest;
    forest.config = ClassifierConfig::from_json(doc.at("config"));
    forest.feature_dim = doc.at("feature_dim").get<std::size_t>();
    for (const json& jt : doc.at("trees")) {
        DecisionTree tree;
        for (const json& jn : jt.at("nodes")) {
            if (!jn.is_array() || jn.size() != 6)
                throw ParseError(0, "malformed tree node record");
            DecisionTree::Node n;
            n.feature = jn[0].get<std::int32_t>();
            n.threshold = jn[1].get<double>();
            n.left = jn[2].get<std::int32_t>();
            n.right = jn[3].get<std::int32_t>();
            n.n_benign = jn[4].get<std::uint64_t>();
            n.n_malicious = jn[5].get<std::uint64_t>();
            const auto limit = static_cast<std::int64_t>(jt.at("nodes").size());
            if (n.feature >= 0 && (n.left < 0 || n.right < 0 || n.left >= limit ||
                                   n.right >= limit))
                throw ParseError(0, "tree node child index out of range");
            tree.nodes.push_back(n);
        }
        if (tree.nodes.empty()) throw ParseError(0, "tree without nodes");
        forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.empty()) throw ParseError(0, "model has no trees");
    return forest;
}

} // namespace qdfg
