#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/csv.hpp"
#include "qdfg/forest.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

using GramCounts = std::map<std::string, std::uint64_t>;

/// The call names of a trace, in order.
inline std::vector<std::string> call_names(const TraceLog& log) {
    std::vector<std::string> out;
    out.reserve(log.events.size());
    for (const RawEvent& ev : log.events) out.push_back(ev.api);
    return out;
}

/// Sliding-window gram counts (width n, stride 1). Each window's call names
/// are sorted before joining with '|', so a gram is an unordered multiset of
/// n consecutive calls. Sequences shorter than n have no grams.
inline GramCounts ngram_profile(const std::vector<std::string>& calls, std::size_t n) {
    if (n == 0) throw ConfigError("gram width must be >= 1");
    GramCounts counts;
    if (calls.size() < n) return counts;
    std::vector<std::string> window(n);
    for (std::size_t i = 0; i + n <= calls.size(); ++i) {
        std::copy(calls.begin() + static_cast<std::ptrdiff_t>(i),
                  calls.begin() + static_cast<std::ptrdiff_t>(i + n), window.begin());
        std::sort(window.begin(), window.end());
        std::string key = window[0];
        for (std::size_t j = 1; j < n; ++j) {
            key += '|';
            key += window[j];
        }
        counts[key] += 1;
    }
    return counts;
}

/// The top_k most frequent grams across the training profiles, most frequent
/// first; frequency ties break lexicographically.
inline std::vector<std::string> build_vocabulary(const std::vector<GramCounts>& profiles,
                                                 std::size_t top_k) {
    std::map<std::string, std::uint64_t> total;
    for (const GramCounts& p : profiles)
        for (const auto& [key, c] : p) total[key] += c;
    std::vector<std::pair<std::string, std::uint64_t>> ranked(total.begin(), total.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > top_k) ranked.resize(top_k);
    std::vector<std::string> vocab;
    vocab.reserve(ranked.size());
    for (auto& [key, c] : ranked) vocab.push_back(std::move(key));
    return vocab;
}

/// Relative frequency of each vocabulary gram. The denominator is the
/// profile's TOTAL gram count, so out-of-vocabulary grams dilute every
/// component. A profile with no grams maps to the zero vector.
inline std::vector<double> vectorize(const GramCounts& profile,
                                     const std::vector<std::string>& vocabulary) {
    std::uint64_t total = 0;
    for (const auto& [key, c] : profile) total += c;
    std::vector<double> v(vocabulary.size(), 0.0);
    if (total == 0) return v;
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        auto it = profile.find(vocabulary[i]);
        if (it != profile.end())
            v[i] = static_cast<double>(it->second) / static_cast<double>(total);
    }
    return v;
}

/// An n-gram classifier: the fixed vocabulary plus a forest trained on
/// vocabulary-frequency vectors.
struct NgramModel {
    std::size_t n = 2;
    std::vector<std::string> vocabulary;
    RandomForest forest;

    friend bool operator==(const NgramModel&, const NgramModel&) = default;

    std::vector<double> vectorize_calls(const std::vector<std::string>& calls) const {
        return vectorize(ngram_profile(calls, n), vocabulary);
    }
};

inline Verdict classify(const NgramModel& model, const std::vector<std::string>& calls) {
    return classify(model.forest, model.vectorize_calls(calls));
}

/// Train the baseline: fix the vocabulary on the training sequences, balance
/// the frequency vectors with the same oversampling as the main classifier,
/// and fit the shared forest implementation.
inline NgramModel train_ngram(const std::vector<std::pair<std::vector<std::string>, Label>>& seqs,
                              std::size_t n, std::size_t top_k, const ClassifierConfig& cfg,
                              unsigned jobs = 1) {
    if (seqs.empty()) throw DomainError("cannot train on an empty sequence set");
    NgramModel model;
    model.n = n;
    std::vector<GramCounts> profiles;
    profiles.reserve(seqs.size());
    for (const auto& [calls, label] : seqs) profiles.push_back(ngram_profile(calls, n));
    model.vocabulary = build_vocabulary(profiles, top_k);
    if (model.vocabulary.empty())
        throw DomainError("no grams in training data (sequences shorter than n?)");
    std::vector<LabeledSample> samples;
    samples.reserve(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i)
        samples.push_back(LabeledSample{vectorize(profiles[i], model.vocabulary),
                                        seqs[i].second});
    if (cfg.smote_ratio > 0.0)
        samples = smote(samples, cfg.smote_ratio, cfg.smote_k, Rng(cfg.seed, 0x536d6f7465ULL));
    model.forest = train_forest(std::move(samples), cfg, jobs);
    return model;
}

inline json ngram_to_json(const NgramModel& model) {
    return json{{"format", "qdfg.ngram"},
                {"version", 1},
                {"n", model.n},
                {"vocabulary", model.vocabulary},
                {"forest", forest_to_json(model.forest)}};
}

inline NgramModel ngram_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", std::string()) != "qdfg.ngram")
        throw ParseError(0, "not an n-gram model document");
    if (doc.value("version", 0) != 1)
        throw ParseError(0, "unsupported model version");
    NgramModel model;
    model.n = doc.at("n").get<std::size_t>();
    model.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
    model.forest = forest_from_json(doc.at("forest"));
    return model;
}

/// Export profiles in the feature-matrix CSV layout, with gram keys as the
/// value columns.
inline void write_ngram_csv(std::ostream& os, const std::vector<std::string>& vocabulary,
                            const std::vector<std::string>& sample_ids,
                            const std::vector<std::vector<double>>& vectors,
                            const std::vector<Label>& labels,
                            const std::vector<std::string>& families) {
    std::vector<std::string> header{"sample_id", "node"};
    for (const std::string& g : vocabulary) header.push_back(g);
    header.push_back("label");
    header.push_back("family");
    csv::write_row(os, header);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        std::vector<std::string> fields{sample_ids[i], std::string()};
        for (double v : vectors[i]) fields.push_back(format_double(v));
        fields.push_back(labels[i] == Label::Unknown ? std::string()
                                                     : std::string(label_name(labels[i])));
        fields.push_back(families[i]);
        csv::write_row(os, fields);
    }
}

} // namespace qdfg
