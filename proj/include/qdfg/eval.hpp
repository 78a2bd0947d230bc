#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string_view>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qdfg/features.hpp"
#include "qdfg/forest.hpp"
#include "qdfg/graph.hpp"
#include "qdfg/ngram.hpp"
#include "qdfg/obfuscate.hpp"
#include "qdfg/parallel.hpp"
#include "qdfg/rng.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

// ---------------------------------------------------------------------------
// Quality metrics
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t mw() const { return tp + fn; } // malicious samples
    std::uint64_t gw() const { return tn + fp; } // benign samples

    void add(Label truth, Label predicted) {
        if (truth == Label::Malicious)
            (predicted == Label::Malicious ? tp : fn) += 1;
        else
            (predicted == Label::Malicious ? fp : tn) += 1;
    }

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        tn += o.tn;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Point metrics of one experiment run.
struct RunMetrics {
    double dr = 0.0, fpr = 0.0, precision = 0.0, f_measure = 0.0;
    ConfusionCounts counts;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Aggregated metrics: means plus standard deviation across repetitions.
struct QualityMetrics {
    double dr = 0.0, fpr = 0.0, precision = 0.0, f_measure = 0.0;
    double dr_sigma = 0.0, fpr_sigma = 0.0, precision_sigma = 0.0, f_sigma = 0.0;

    friend bool operator==(const QualityMetrics&, const QualityMetrics&) = default;
};

inline RunMetrics quality_metrics(const ConfusionCounts& c) {
    if (c.mw() == 0) throw DomainError("quality metrics need at least one malicious sample");
    if (c.gw() == 0) throw DomainError("quality metrics need at least one benign sample");
    RunMetrics m;
    m.counts = c;
    m.dr = static_cast<double>(c.tp) / static_cast<double>(c.mw());
    m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.gw());
    m.precision =
        c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    m.f_measure = static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    return m;
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double sigma_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

inline QualityMetrics summarize_runs(const std::vector<RunMetrics>& runs) {
    std::vector<double> dr, fpr, prec, f;
    for (const RunMetrics& r : runs) {
        dr.push_back(r.dr);
        fpr.push_back(r.fpr);
        prec.push_back(r.precision);
        f.push_back(r.f_measure);
    }
    QualityMetrics q;
    q.dr = mean_of(dr);
    q.fpr = mean_of(fpr);
    q.precision = mean_of(prec);
    q.f_measure = mean_of(f);
    q.dr_sigma = sigma_of(dr);
    q.fpr_sigma = sigma_of(fpr);
    q.precision_sigma = sigma_of(prec);
    q.f_sigma = sigma_of(f);
    return q;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Welch's t-test
// ---------------------------------------------------------------------------

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

namespace detail {

/// Continued-fraction core of the incomplete beta function (modified Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 400;
    constexpr double eps = 1e-14;
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

inline void mean_var(const std::vector<double>& v, double& mean, double& var) {
    mean = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    var = acc / static_cast<double>(v.size() - 1); // sample variance
}

} // namespace detail

/// Two-tailed Welch unequal-variance t-test. When both samples are
/// degenerate (zero variance), p is 1 for equal means and 0 otherwise.
inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw DomainError("welch test needs at least 2 observations per sample");
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    double ma, va, mb, vb;
    detail::mean_var(a, ma, va);
    detail::mean_var(b, mb, vb);
    WelchResult r;
    if (va == 0.0 && vb == 0.0) {
        r.t = ma == mb ? 0.0 : std::numeric_limits<double>::infinity();
        r.df = na + nb - 2.0;
        r.p = ma == mb ? 1.0 : 0.0;
        return r;
    }
    const double se2 = va / na + vb / nb;
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 /
           ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    const double x = r.df / (r.df + r.t * r.t);
    r.p = std::clamp(detail::regularized_incomplete_beta(r.df / 2.0, 0.5, x), 0.0, 1.0);
    return r;
}

// ---------------------------------------------------------------------------
// Dataset plumbing
// ---------------------------------------------------------------------------

/// A built graph with its sample identity, for experiments that rewrite edge
/// attributes before feature extraction.
struct GraphSample {
    std::string sample_id;
    Label label = Label::Unknown;
    std::string family;
    Qdfg graph;
};

inline std::vector<GraphSample> build_graph_samples(const std::vector<TraceLog>& logs,
                                                    const MappingTable& mapping,
                                                    unsigned jobs = 1) {
    std::vector<GraphSample> out(logs.size());
    parallel_for(logs.size(), jobs, [&](std::size_t i) {
        out[i] = GraphSample{logs[i].sample_id, logs[i].label, logs[i].family,
                             build_graph(interpret_log(logs[i], mapping))};
    });
    return out;
}

inline Dataset extract_dataset(const std::vector<GraphSample>& graphs,
                               const FeatureOptions& fopts = {}, unsigned jobs = 1) {
    std::vector<std::vector<SampleRow>> per_graph(graphs.size());
    parallel_for(graphs.size(), jobs, [&](std::size_t i) {
        for (FeatureVector& fv :
             extract_all(graphs[i].graph, graphs[i].label, graphs[i].family, fopts))
            per_graph[i].push_back(SampleRow{graphs[i].sample_id, std::move(fv)});
    });
    Dataset out;
    for (auto& rows : per_graph)
        for (SampleRow& r : rows) out.push_back(std::move(r));
    return out;
}

inline Dataset extract_dataset(const std::vector<TraceLog>& logs, const MappingTable& mapping,
                               const FeatureOptions& fopts = {}, unsigned jobs = 1) {
    return extract_dataset(build_graph_samples(logs, mapping, jobs), fopts, jobs);
}

inline std::vector<LabeledSample> to_labeled(const Dataset& rows) {
    std::vector<LabeledSample> out;
    out.reserve(rows.size());
    for (const SampleRow& r : rows)
        out.push_back(LabeledSample{
            std::vector<double>(r.fv.values.begin(), r.fv.values.end()), r.fv.label});
    return out;
}

// ---------------------------------------------------------------------------
// Repeated stratified k-fold cross-validation
// ---------------------------------------------------------------------------

struct CvOptions {
    std::size_t k = 10;
    std::size_t repeats = 10;
    double smote_ratio = 1.0; // 0 disables oversampling
    ClassifierConfig cfg;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

struct CvResult {
    QualityMetrics summary;
    std::vector<RunMetrics> runs; // one per repeat
    ConfusionCounts total;
};

/// Called once per trained fold with the indices of the held-out rows and
/// the augmented training set actually fed to the forest. Lets tests audit
/// that oversampling never leaks into a test fold.
using CvAudit = std::function<void(std::size_t repeat, std::size_t fold,
                                   const std::vector<std::size_t>& test_indices,
                                   const std::vector<LabeledSample>& train_augmented)>;

inline CvResult cross_validate(const std::vector<LabeledSample>& data, const CvOptions& opt,
                               const CvAudit& audit = nullptr) {
    if (opt.k < 2) throw ConfigError("cross-validation needs k >= 2");
    if (opt.repeats < 1) throw ConfigError("cross-validation needs repeats >= 1");
    std::vector<std::size_t> benign_idx, malicious_idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].label == Label::Malicious)
            malicious_idx.push_back(i);
        else if (data[i].label == Label::Benign)
            benign_idx.push_back(i);
        else
            throw DomainError("cross-validation sample " + std::to_string(i) + " lacks a label");
    }
    if (benign_idx.size() < opt.k || malicious_idx.size() < opt.k)
        throw DomainError("each class needs at least k samples (benign " +
                          std::to_string(benign_idx.size()) + ", malicious " +
                          std::to_string(malicious_idx.size()) + ", k " +
                          std::to_string(opt.k) + ")");

    // Deterministic per-repeat fold assignment: shuffle each class, deal
    // round-robin.
    std::vector<std::vector<std::size_t>> fold_of(opt.repeats,
                                                  std::vector<std::size_t>(data.size(), 0));
    for (std::size_t r = 0; r < opt.repeats; ++r) {
        Rng rng = Rng(opt.seed, 0xCF01ULL).fork(r);
        std::vector<std::size_t> b = benign_idx, m = malicious_idx;
        rng.shuffle(b);
        rng.shuffle(m);
        for (std::size_t j = 0; j < b.size(); ++j) fold_of[r][b[j]] = j % opt.k;
        for (std::size_t j = 0; j < m.size(); ++j) fold_of[r][m[j]] = j % opt.k;
    }

    std::vector<ConfusionCounts> fold_counts(opt.repeats * opt.k);
    parallel_for(opt.repeats * opt.k, opt.jobs, [&](std::size_t unit) {
        const std::size_t r = unit / opt.k;
        const std::size_t f = unit % opt.k;
        std::vector<LabeledSample> train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[r][i] == f)
                test.push_back(i);
            else
                train.push_back(data[i]);
        }
        Rng unit_rng = Rng(opt.seed, 0xCF02ULL).fork(unit);
        if (opt.smote_ratio > 0.0)
            train = smote(train, opt.smote_ratio, opt.cfg.smote_k, unit_rng.fork(0));
        ClassifierConfig cfg = opt.cfg;
        cfg.seed = unit_rng.fork(1).next_u64();
        if (audit) audit(r, f, test, train);
        const RandomForest forest = train_forest(std::move(train), cfg);
        ConfusionCounts c;
        for (std::size_t i : test) c.add(data[i].label, classify(forest, data[i].values).label);
        fold_counts[unit] = c;
    });

    CvResult result;
    for (std::size_t r = 0; r < opt.repeats; ++r) {
        ConfusionCounts repeat_counts;
        for (std::size_t f = 0; f < opt.k; ++f) repeat_counts += fold_counts[r * opt.k + f];
        result.runs.push_back(quality_metrics(repeat_counts));
        result.total += repeat_counts;
    }
    result.summary = detail::summarize_runs(result.runs);
    return result;
}

// ---------------------------------------------------------------------------
// Quantity ablation
// ---------------------------------------------------------------------------

enum class AblationMode { Real, FixedOne, Random };

inline std::string_view ablation_name(AblationMode m) {
    switch (m) {
    case AblationMode::Real: return "real";
    case AblationMode::FixedOne: return "fixed_one";
    case AblationMode::Random: return "random";
    }
    return "?";
}

inline AblationMode ablation_from_name(std::string_view s) {
    if (s == "real") return AblationMode::Real;
    if (s == "fixed_one") return AblationMode::FixedOne;
    if (s == "random") return AblationMode::Random;
    throw ConfigError("unknown ablation mode '" + std::string(s) + "'");
}

/// Rewrite every edge size of a graph per the ablation mode: untouched,
/// globally 1, or uniform in [1, largest original size of the graph].
inline Qdfg rewrite_quantities(const Qdfg& g, AblationMode mode, Rng& rng) {
    Qdfg out = g;
    if (mode == AblationMode::Real) return out;
    if (mode == AblationMode::FixedOne) {
        out.rewrite_sizes([](const EntityRef&, const EntityRef&, const EdgeAttrs&) {
            return std::uint64_t{1};
        });
        return out;
    }
    const std::uint64_t max_size = g.max_edge_size();
    out.rewrite_sizes([&](const EntityRef&, const EntityRef&, const EdgeAttrs&) {
        return static_cast<std::uint64_t>(
            rng.uniform_int(1, static_cast<std::int64_t>(std::max<std::uint64_t>(1, max_size))));
    });
    return out;
}

struct AblationReport {
    AblationMode mode = AblationMode::Real;
    CvResult real;
    CvResult ablated;
    double fpr_ratio = 1.0; // ablated mean FPR / real mean FPR
    double fn_ratio = 1.0;  // ablated total FN / real total FN
    WelchResult dr_test;    // real vs ablated per-repeat DR
    WelchResult fpr_test;   // real vs ablated per-repeat FPR
};

inline AblationReport quantity_ablation(const std::vector<GraphSample>& graphs,
                                        AblationMode mode, const CvOptions& opt,
                                        const FeatureOptions& fopts = {}) {
    AblationReport report;
    report.mode = mode;
    const std::vector<LabeledSample> real_data =
        to_labeled(extract_dataset(graphs, fopts, opt.jobs));
    report.real = cross_validate(real_data, opt);
    if (mode == AblationMode::Real) {
        report.ablated = report.real;
    } else {
        std::vector<GraphSample> rewritten(graphs.size());
        parallel_for(graphs.size(), opt.jobs, [&](std::size_t i) {
            Rng rng = Rng(opt.seed, 0xAB1AULL).fork(i);
            rewritten[i] = GraphSample{graphs[i].sample_id, graphs[i].label, graphs[i].family,
                                       rewrite_quantities(graphs[i].graph, mode, rng)};
        });
        const std::vector<LabeledSample> ablated_data =
            to_labeled(extract_dataset(rewritten, fopts, opt.jobs));
        report.ablated = cross_validate(ablated_data, opt);
    }
    report.fpr_ratio = report.real.summary.fpr == 0.0
                           ? (report.ablated.summary.fpr == 0.0 ? 1.0
                                                                : std::numeric_limits<double>::infinity())
                           : report.ablated.summary.fpr / report.real.summary.fpr;
    const double real_fn = static_cast<double>(report.real.total.fn);
    const double abl_fn = static_cast<double>(report.ablated.total.fn);
    report.fn_ratio = real_fn == 0.0
                          ? (abl_fn == 0.0 ? 1.0 : std::numeric_limits<double>::infinity())
                          : abl_fn / real_fn;
    std::vector<double> dr_real, dr_abl, fpr_real, fpr_abl;
    for (const RunMetrics& r : report.real.runs) {
        dr_real.push_back(r.dr);
        fpr_real.push_back(r.fpr);
    }
    for (const RunMetrics& r : report.ablated.runs) {
        dr_abl.push_back(r.dr);
        fpr_abl.push_back(r.fpr);
    }
    if (dr_real.size() >= 2) {
        report.dr_test = welch_t_test(dr_real, dr_abl);
        report.fpr_test = welch_t_test(fpr_real, fpr_abl);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Leave-one-family-out
// ---------------------------------------------------------------------------

struct FamilyResult {
    std::string family;
    std::size_t tested = 0;
    std::size_t detected = 0;
    double dr = 0.0;
};

struct LofoResult {
    std::vector<FamilyResult> families;
    double mean_dr = 0.0;
};

inline LofoResult leave_one_family_out(const Dataset& rows, const CvOptions& opt) {
    std::set<std::string> family_set;
    for (const SampleRow& r : rows)
        if (r.fv.label == Label::Malicious) {
            if (r.fv.family.empty())
                throw DomainError("malicious sample '" + r.sample_id + "' lacks a family");
            family_set.insert(r.fv.family);
        }
    if (family_set.size() < 2)
        throw DomainError("leave-one-family-out needs at least 2 malicious families");
    const std::vector<std::string> families(family_set.begin(), family_set.end());
    LofoResult result;
    result.families.resize(families.size());
    parallel_for(families.size(), opt.jobs, [&](std::size_t fi) {
        const std::string& held_out = families[fi];
        std::vector<LabeledSample> train;
        std::vector<const SampleRow*> test;
        for (const SampleRow& r : rows) {
            if (r.fv.label == Label::Malicious && r.fv.family == held_out) {
                test.push_back(&r);
            } else {
                train.push_back(LabeledSample{
                    std::vector<double>(r.fv.values.begin(), r.fv.values.end()), r.fv.label});
            }
        }
        Rng rng = Rng(opt.seed, 0x10F0ULL).fork(fi);
        if (opt.smote_ratio > 0.0)
            train = smote(train, opt.smote_ratio, opt.cfg.smote_k, rng.fork(0));
        ClassifierConfig cfg = opt.cfg;
        cfg.seed = rng.fork(1).next_u64();
        const RandomForest forest = train_forest(std::move(train), cfg);
        FamilyResult fr;
        fr.family = held_out;
        fr.tested = test.size();
        for (const SampleRow* r : test) {
            const std::vector<double> v(r->fv.values.begin(), r->fv.values.end());
            if (classify(forest, v).label == Label::Malicious) ++fr.detected;
        }
        fr.dr = fr.tested == 0 ? 0.0
                               : static_cast<double>(fr.detected) /
                                     static_cast<double>(fr.tested);
        result.families[fi] = std::move(fr);
    });
    double sum = 0.0;
    for (const FamilyResult& fr : result.families) sum += fr.dr;
    result.mean_dr = sum / static_cast<double>(result.families.size());
    return result;
}

// ---------------------------------------------------------------------------
// Obfuscation sweep
// ---------------------------------------------------------------------------

/// The pre-trained classifiers a sweep compares.
struct SweepClassifiers {
    RandomForest forest;
    FeatureOptions fopts;
    MappingTable mapping;
    std::vector<NgramModel> ngrams;

    std::vector<std::string> names() const {
        std::vector<std::string> out{"qdfg"};
        for (const NgramModel& m : ngrams) out.push_back("ngram" + std::to_string(m.n));
        return out;
    }
};

/// Classify one trace with the graph classifier: the trace is flagged when
/// any of its process nodes votes malicious.
inline bool trace_flagged(const TraceLog& log, const MappingTable& mapping,
                          const RandomForest& forest, const FeatureOptions& fopts) {
    const Qdfg g = build_graph(interpret_log(log, mapping));
    for (const FeatureVector& fv : extract_all(g, Label::Unknown, {}, fopts)) {
        const std::vector<double> v(fv.values.begin(), fv.values.end());
        if (classify(forest, v).label == Label::Malicious) return true;
    }
    return false;
}

struct SweepRow {
    std::size_t config_id = 0;
    double reorder_prob = 0.0;
    std::size_t reorder_window = 2;
    double inject_prob = 0.0;
    std::size_t inject_max = 0;
    double mean_levenshtein = 0.0;
    std::vector<double> dr; // aligned with SweepClassifiers::names()
};

struct SweepResult {
    std::vector<std::string> classifier_names;
    std::vector<SweepRow> rows;
};

/// Train the full classifier lineup on one corpus: the graph-feature forest
/// plus one n-gram baseline per requested n. Every model gets its own seed
/// substream; oversampling is applied to each training set.
inline SweepClassifiers train_sweep_classifiers(const std::vector<TraceLog>& corpus,
                                                const std::vector<std::size_t>& ngram_ns,
                                                std::size_t top_k, const CvOptions& opt,
                                                const MappingTable& mapping,
                                                const FeatureOptions& fopts = {}) {
    SweepClassifiers cls;
    cls.fopts = fopts;
    cls.mapping = mapping;
    Rng rng(opt.seed, 0x5c1aULL);
    {
        std::vector<LabeledSample> samples =
            to_labeled(extract_dataset(corpus, mapping, fopts, opt.jobs));
        Rng sub = rng.fork(0);
        if (opt.smote_ratio > 0.0)
            samples = smote(samples, opt.smote_ratio, opt.cfg.smote_k, sub.fork(0));
        ClassifierConfig cfg = opt.cfg;
        cfg.seed = sub.fork(1).next_u64();
        cls.forest = train_forest(std::move(samples), cfg, opt.jobs);
    }
    std::vector<std::pair<std::vector<std::string>, Label>> seqs;
    seqs.reserve(corpus.size());
    for (const TraceLog& log : corpus) seqs.emplace_back(call_names(log), log.label);
    cls.ngrams.resize(ngram_ns.size());
    parallel_for(ngram_ns.size(), opt.jobs, [&](std::size_t i) {
        ClassifierConfig cfg = opt.cfg;
        cfg.smote_ratio = opt.smote_ratio;
        cfg.seed = rng.fork(1 + i).next_u64();
        cls.ngrams[i] = train_ngram(seqs, ngram_ns[i], top_k, cfg);
    });
    return cls;
}

/// Reorder-only sweep: probability rises from 0 to 1 over `steps` configs at
/// a fixed swap window.
inline std::vector<ObfuscationConfig> pure_reorder_grid(std::size_t steps = 11,
                                                        std::size_t window = 4,
                                                        std::uint64_t seed = 0) {
    if (steps < 2) throw ConfigError("reorder grid needs at least 2 steps");
    std::vector<ObfuscationConfig> grid(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        grid[i].reorder_prob = static_cast<double>(i) / static_cast<double>(steps - 1);
        grid[i].reorder_window = window;
        grid[i].seed = seed;
    }
    return grid;
}

/// Injection-only sweep: probability rises from 1/steps to 1 over `steps`
/// configs with the stock bogus pool.
inline std::vector<ObfuscationConfig> injection_grid(std::size_t steps = 20,
                                                     std::size_t inject_max = 2,
                                                     std::uint64_t seed = 0) {
    if (steps < 1) throw ConfigError("injection grid needs at least 1 step");
    std::vector<ObfuscationConfig> grid(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        grid[i].inject_prob = static_cast<double>(i + 1) / static_cast<double>(steps);
        grid[i].inject_max = inject_max;
        grid[i].bogus_pool = default_bogus_pool();
        grid[i].seed = seed;
    }
    return grid;
}

/// For every grid config: obfuscate each malicious trace (per-trace seed
/// substream), measure the mean edit distance to the original call
/// sequences, and record each classifier's detection rate on the obfuscated
/// set.
inline SweepResult obfuscation_sweep(const std::vector<TraceLog>& malicious_traces,
                                     const std::vector<ObfuscationConfig>& grid,
                                     const SweepClassifiers& cls, unsigned jobs = 1) {
    if (malicious_traces.empty()) throw DomainError("sweep needs at least one trace");
    for (const TraceLog& log : malicious_traces)
        if (log.label != Label::Malicious)
            throw DomainError("sweep traces must be malicious (got '" + log.sample_id + "')");
    SweepResult result;
    result.classifier_names = cls.names();
    result.rows.resize(grid.size());
    parallel_for(grid.size(), jobs, [&](std::size_t ci) {
        const ObfuscationConfig& base = grid[ci];
        base.validate();
        SweepRow row;
        row.config_id = ci;
        row.reorder_prob = base.reorder_prob;
        row.reorder_window = base.reorder_window;
        row.inject_prob = base.inject_prob;
        row.inject_max = base.inject_max;
        std::uint64_t lev_sum = 0;
        std::size_t flagged_qdfg = 0;
        std::vector<std::size_t> flagged_ngram(cls.ngrams.size(), 0);
        Rng cfg_rng(base.seed, 0x0bf5ULL + ci);
        for (const TraceLog& orig : malicious_traces) {
            ObfuscationConfig cfg = base;
            cfg.seed = cfg_rng.next_u64();
            const TraceLog obf = obfuscate(orig, cfg);
            lev_sum += levenshtein(call_names(orig), call_names(obf));
            if (trace_flagged(obf, cls.mapping, cls.forest, cls.fopts)) ++flagged_qdfg;
            const std::vector<std::string> calls = call_names(obf);
            for (std::size_t ni = 0; ni < cls.ngrams.size(); ++ni)
                if (classify(cls.ngrams[ni], calls).label == Label::Malicious)
                    ++flagged_ngram[ni];
        }
        const auto n = static_cast<double>(malicious_traces.size());
        row.mean_levenshtein = static_cast<double>(lev_sum) / n;
        row.dr.push_back(static_cast<double>(flagged_qdfg) / n);
        for (std::size_t ni = 0; ni < cls.ngrams.size(); ++ni)
            row.dr.push_back(static_cast<double>(flagged_ngram[ni]) / n);
        result.rows[ci] = std::move(row);
    });
    return result;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingProfile {
    double build_ms = 0.0;
    double local_ms = 0.0;
    double global_ms = 0.0;
    double classify_ms = 0.0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t process_nodes = 0;

    double total_ms() const { return build_ms + local_ms + global_ms + classify_ms; }
};

/// Wall-clock cost of the four pipeline stages on one trace: graph
/// construction, local features (distribution and proportion metrics over
/// each process node's reachability graph), global features (shortest-path
/// closeness and betweenness), and forest voting.
inline TimingProfile timing_profile(const TraceLog& log, const MappingTable& mapping,
                                    const RandomForest& forest,
                                    const FeatureOptions& fopts = {}) {
    using clock = std::chrono::steady_clock;
    const auto ms_between = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    TimingProfile prof;

    const auto t0 = clock::now();
    const Qdfg g = build_graph(interpret_log(log, mapping));
    const auto t1 = clock::now();
    prof.build_ms = ms_between(t0, t1);
    prof.nodes = g.node_count();
    prof.edges = g.edge_count();

    std::vector<EntityRef> procs;
    for (const auto& [ref, entry] : g.nodes())
        if (ref.kind == EntityType::Process) procs.push_back(ref);
    prof.process_nodes = procs.size();

    std::vector<Qdfg> rgs;
    rgs.reserve(procs.size());
    std::vector<FeatureVector> vectors(procs.size());

    const auto t2 = clock::now();
    for (std::size_t i = 0; i < procs.size(); ++i) {
        rgs.push_back(g.reachability_graph(procs[i]));
        const Qdfg& rg = rgs.back();
        FeatureVector& fv = vectors[i];
        fv.node = procs[i];
        fv.values[0] = entropy(rg, procs[i], fopts.distribution_attr);
        fv.values[1] = variance(rg, procs[i], fopts.distribution_attr);
        fv.values[2] = flow_proportion(rg, procs[i], EntityType::Process);
        fv.values[3] = flow_proportion(rg, procs[i], EntityType::Registry);
        fv.values[4] = flow_proportion(rg, procs[i], EntityType::File);
        fv.values[5] = flow_proportion(rg, procs[i], EntityType::Socket);
    }
    const auto t3 = clock::now();
    prof.local_ms = ms_between(t2, t3);

    for (std::size_t i = 0; i < procs.size(); ++i) {
        GraphIndex idx(rgs[i], fopts.path_weight);
        const std::size_t pi = idx.index_of.at(procs[i]);
        vectors[i].values[6] = closeness(idx, pi);
        vectors[i].values[7] = betweenness_all(idx)[pi];
    }
    const auto t4 = clock::now();
    prof.global_ms = ms_between(t3, t4);

    std::size_t flagged = 0;
    for (const FeatureVector& fv : vectors) {
        const std::vector<double> v(fv.values.begin(), fv.values.end());
        if (classify(forest, v).label == Label::Malicious) ++flagged;
    }
    (void)flagged;
    const auto t5 = clock::now();
    prof.classify_ms = ms_between(t4, t5);
    return prof;
}

} // namespace qdfg
