// Command-line frontend for the QDFG toolkit.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qdfg/qdfg.hpp"

namespace fs = std::filesystem;
using namespace qdfg;

namespace {

// ---------------------------------------------------------------------------
// I/O helpers
// ---------------------------------------------------------------------------

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return doc;
}

void write_json_file(const std::string& path, const json& doc) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    os << doc.dump(2) << "\n";
}

TraceLog load_trace_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    try {
        return parse_trace_log(is);
    } catch (const ParseError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Expand a mix of files and directories into a sorted file list. A
/// directory contributes its *.jsonl entries in name order.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const std::string& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> dir_files;
            for (const auto& entry : fs::directory_iterator(in))
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                    dir_files.push_back(entry.path().string());
            std::sort(dir_files.begin(), dir_files.end());
            if (dir_files.empty())
                throw ConfigError("directory '" + in + "' holds no .jsonl traces");
            for (std::string& f : dir_files) out.push_back(std::move(f));
        } else {
            out.push_back(in);
        }
    }
    if (out.empty()) throw ConfigError("no input files");
    return out;
}

std::vector<TraceLog> load_corpus(const std::vector<std::string>& inputs, unsigned jobs) {
    const std::vector<std::string> files = expand_inputs(inputs);
    std::vector<TraceLog> logs(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) { logs[i] = load_trace_file(files[i]); });
    return logs;
}

MappingTable load_mapping(const std::string& path) {
    return path.empty() ? MappingTable::builtin() : MappingTable::from_json(load_json_file(path));
}

/// One classified unit: either a full trace or a pre-built graph document.
struct LoadedSample {
    std::string sample_id;
    Label label = Label::Unknown;
    std::string family;
    Qdfg graph;
};

bool is_graph_doc(const json& doc) {
    return doc.is_object() && doc.value("format", "") == "qdfg.graph";
}

LoadedSample sample_from_graph_doc(const json& doc, const std::string& path) {
    if (doc.value("version", 0) != 1)
        throw ConfigError(path + ": unsupported graph document version");
    LoadedSample s;
    s.sample_id = doc.value("sample_id", "");
    if (doc.contains("label") && doc["label"].is_string())
        s.label = label_from_name(doc["label"].get<std::string>());
    if (doc.contains("family") && doc["family"].is_string())
        s.family = doc["family"].get<std::string>();
    s.graph = graph_from_json(doc.at("graph"));
    return s;
}

/// Load either a graph document (single JSON object tagged qdfg.graph) or a
/// trace log (JSON lines), building the graph in the latter case.
LoadedSample load_graph_or_trace(const std::string& path, const MappingTable& mapping) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (is_graph_doc(doc)) return sample_from_graph_doc(doc, path);
    std::istringstream ts(text);
    TraceLog log;
    try {
        log = parse_trace_log(ts);
    } catch (const ParseError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return LoadedSample{log.sample_id, log.label, log.family,
                        build_graph(interpret_log(log, mapping))};
}

json run_manifest(const std::string& subcommand, const std::vector<std::string>& inputs,
                  const std::string& output, std::uint64_t seed, unsigned jobs,
                  json config = json::object()) {
    return json{{"subcommand", subcommand}, {"inputs", inputs}, {"output", output},
                {"seed", seed},             {"jobs", jobs},     {"config", std::move(config)}};
}

/// CSV results cannot embed their manifest; it goes in a sibling file.
void write_sibling_manifest(const std::string& csv_path, const json& manifest) {
    if (csv_path.empty() || csv_path == "-") return;
    write_json_file(csv_path + ".manifest.json", manifest);
}

/// Write CSV text to a file or stdout.
void emit_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    os << text;
}

DistributionAttr parse_distribution(const std::string& s) {
    if (s == "size") return DistributionAttr::Size;
    if (s == "count") return DistributionAttr::Count;
    throw ConfigError("unknown distribution attribute '" + s + "' (size|count)");
}

EdgeWeight parse_path_weight(const std::string& s) {
    if (s == "size") return EdgeWeight::Size;
    if (s == "inverse") return EdgeWeight::InverseSize;
    throw ConfigError("unknown path weight '" + s + "' (size|inverse)");
}

json metrics_json(const QualityMetrics& q) {
    return json{{"dr", q.dr},
                {"fpr", q.fpr},
                {"precision", q.precision},
                {"f_measure", q.f_measure},
                {"dr_sigma", q.dr_sigma},
                {"fpr_sigma", q.fpr_sigma},
                {"precision_sigma", q.precision_sigma},
                {"f_sigma", q.f_sigma}};
}

json counts_json(const ConfusionCounts& c) {
    return json{{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
}

json run_json(const RunMetrics& r) {
    json j = counts_json(r.counts);
    j["dr"] = r.dr;
    j["fpr"] = r.fpr;
    j["precision"] = r.precision;
    j["f_measure"] = r.f_measure;
    return j;
}

json cv_result_json(const CvResult& res) {
    json runs = json::array();
    for (const RunMetrics& r : res.runs) runs.push_back(run_json(r));
    return json{{"summary", metrics_json(res.summary)},
                {"runs", std::move(runs)},
                {"total", counts_json(res.total)}};
}

std::string cv_runs_csv(const CvResult& res) {
    std::ostringstream os;
    csv::write_row(os, {"repeat", "tp", "tn", "fp", "fn", "dr", "fpr", "precision",
                        "f_measure"});
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const RunMetrics& r = res.runs[i];
        csv::write_row(os, {std::to_string(i), std::to_string(r.counts.tp),
                            std::to_string(r.counts.tn), std::to_string(r.counts.fp),
                            std::to_string(r.counts.fn), format_double(r.dr),
                            format_double(r.fpr), format_double(r.precision),
                            format_double(r.f_measure)});
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct FeatureFlags {
    std::string distribution = "size";
    std::string path_weight = "size";

    FeatureOptions to_options(unsigned jobs) const {
        FeatureOptions f;
        f.distribution_attr = parse_distribution(distribution);
        f.path_weight = parse_path_weight(path_weight);
        f.jobs = jobs;
        return f;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--distribution", distribution,
                        "Edge attribute for entropy/variance: size|count");
        cmd->add_option("--path-weight", path_weight,
                        "Edge cost for shortest paths: size|inverse");
    }
};

struct EvalFlags {
    std::vector<std::string> inputs;
    std::string out;
    std::string csv_out;
    std::string mapping_path;
    std::string config_path;
    std::size_t k = 10;
    std::size_t repeats = 10;
    double smote_ratio = 1.0;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    FeatureFlags features;

    void attach(CLI::App* cmd, bool with_folds = true) {
        cmd->add_option("inputs", inputs, "Trace files or corpus directories")->required();
        cmd->add_option("-o,--out", out, "JSON summary path (default: stdout)");
        cmd->add_option("--csv", csv_out, "Per-run CSV path");
        cmd->add_option("--mapping", mapping_path, "Call-mapping table JSON");
        cmd->add_option("--config", config_path, "Classifier config JSON");
        if (with_folds) {
            cmd->add_option("--k", k, "Folds per repetition");
            cmd->add_option("--repeats", repeats, "CV repetitions");
        }
        cmd->add_option("--smote-ratio", smote_ratio,
                        "Minority/majority balance target (0 disables oversampling)");
        cmd->add_option("--seed", seed, "Root RNG seed");
        cmd->add_option("--jobs", jobs, "Worker cap (results are jobs-independent)");
        features.attach(cmd);
    }

    CvOptions to_cv_options() const {
        CvOptions opt;
        opt.k = k;
        opt.repeats = repeats;
        opt.smote_ratio = smote_ratio;
        opt.cfg = config_path.empty() ? ClassifierConfig{}
                                      : ClassifierConfig::from_json(load_json_file(config_path));
        opt.seed = seed;
        opt.jobs = jobs;
        return opt;
    }

    json manifest(const std::string& subcommand, const CvOptions& opt) const {
        json cfg = opt.cfg.to_json();
        cfg["k"] = opt.k;
        cfg["repeats"] = opt.repeats;
        cfg["smote_ratio"] = opt.smote_ratio;
        cfg["mapping"] = mapping_path;
        cfg["distribution"] = features.distribution;
        cfg["path_weight"] = features.path_weight;
        return run_manifest(subcommand, inputs, out, seed, jobs, std::move(cfg));
    }
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct BuildGraphCmd {
    std::string input, out, mapping_path, dot_path;

    void run() const {
        const TraceLog log = load_trace_file(input);
        const MappingTable table = load_mapping(mapping_path);
        const Qdfg g = build_graph(interpret_log(log, table));
        json doc{{"format", "qdfg.graph"},
                 {"version", 1},
                 {"sample_id", log.sample_id},
                 {"label", log.label == Label::Unknown
                               ? json()
                               : json(std::string(label_name(log.label)))},
                 {"family", log.family.empty() ? json() : json(log.family)},
                 {"graph", graph_to_json(g)},
                 {"manifest", run_manifest("build-graph", {input}, out, 0, 1,
                                           json{{"mapping", mapping_path}})}};
        write_json_file(out, doc);
        if (!dot_path.empty()) {
            std::ofstream os(dot_path);
            if (!os) throw ConfigError("cannot write '" + dot_path + "'");
            write_dot(os, g);
        }
    }
};

struct ExtractFeaturesCmd {
    std::vector<std::string> inputs;
    std::string out, mapping_path;
    unsigned jobs = 1;
    FeatureFlags features;

    void run() const {
        const MappingTable table = load_mapping(mapping_path);
        const FeatureOptions fopts = features.to_options(jobs);
        const std::vector<std::string> files = expand_inputs(inputs);
        std::vector<GraphSample> graphs(files.size());
        parallel_for(files.size(), jobs, [&](std::size_t i) {
            LoadedSample s = load_graph_or_trace(files[i], table);
            graphs[i] = GraphSample{std::move(s.sample_id), s.label, std::move(s.family),
                                    std::move(s.graph)};
        });
        const Dataset rows = extract_dataset(graphs, fopts, jobs);
        std::ostringstream os;
        write_feature_csv(os, rows);
        emit_text(out, os.str());
        write_sibling_manifest(
            out, run_manifest("extract-features", inputs, out, 0, jobs,
                              json{{"mapping", mapping_path},
                                   {"distribution", features.distribution},
                                   {"path_weight", features.path_weight}}));
    }
};

struct TrainCmd {
    std::vector<std::string> inputs;
    std::string out, config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned jobs = 1;
    std::size_t ngram_n = 0;
    std::size_t top_k = 500;

    void run() const {
        ClassifierConfig cfg = config_path.empty()
                                   ? ClassifierConfig{}
                                   : ClassifierConfig::from_json(load_json_file(config_path));
        if (seed_given) cfg.seed = seed;
        json model;
        if (ngram_n == 0) {
            Dataset rows;
            for (const std::string& path : expand_csv_inputs()) {
                std::ifstream is(path);
                if (!is) throw ConfigError("cannot open '" + path + "'");
                for (SampleRow& r : read_feature_csv(is)) {
                    if (r.fv.label == Label::Unknown)
                        throw ConfigError(path + ": row for sample '" + r.sample_id +
                                          "' lacks a label; cannot train on it");
                    rows.push_back(std::move(r));
                }
            }
            std::vector<LabeledSample> samples = to_labeled(rows);
            if (cfg.smote_ratio > 0.0)
                samples = smote(samples, cfg.smote_ratio, cfg.smote_k,
                                Rng(cfg.seed, 0x536d6f7465ULL));
            model = forest_to_json(train_forest(std::move(samples), cfg, jobs));
        } else {
            const std::vector<TraceLog> corpus = load_corpus(inputs, jobs);
            std::vector<std::pair<std::vector<std::string>, Label>> seqs;
            for (const TraceLog& log : corpus) {
                if (log.label == Label::Unknown)
                    throw ConfigError("trace '" + log.sample_id +
                                      "' lacks a label; cannot train on it");
                seqs.emplace_back(call_names(log), log.label);
            }
            model = ngram_to_json(train_ngram(seqs, ngram_n, top_k, cfg, jobs));
        }
        json cfg_json = cfg.to_json();
        if (ngram_n != 0) {
            cfg_json["ngram_n"] = ngram_n;
            cfg_json["top_k"] = top_k;
        }
        model["manifest"] =
            run_manifest("train", inputs, out, cfg.seed, jobs, std::move(cfg_json));
        write_json_file(out, model);
    }

    std::vector<std::string> expand_csv_inputs() const {
        // Feature CSVs are plain files; directories are not scanned for them.
        if (inputs.empty()) throw ConfigError("no input files");
        return inputs;
    }
};

struct ClassifyCmd {
    std::string model_path;
    std::vector<std::string> inputs;
    std::string out, mapping_path;
    bool pretty = false;

    void run() const {
        const json mdoc = load_json_file(model_path);
        const std::string format = mdoc.value("format", "");
        const MappingTable table = load_mapping(mapping_path);
        std::ostringstream os;
        std::size_t flagged = 0, total = 0;
        if (format == "qdfg.forest") {
            const RandomForest forest = forest_from_json(mdoc);
            for (const std::string& path : expand_inputs(inputs)) {
                const LoadedSample s = load_graph_or_trace(path, table);
                for (const FeatureVector& fv : extract_all(s.graph)) {
                    const std::vector<double> v(fv.values.begin(), fv.values.end());
                    const Verdict verdict = classify(forest, v);
                    ++total;
                    if (verdict.label == Label::Malicious) ++flagged;
                    emit_verdict(os, s.sample_id, fv.node.display(), verdict);
                }
            }
        } else if (format == "qdfg.ngram") {
            const NgramModel model = ngram_from_json(mdoc);
            for (const std::string& path : expand_inputs(inputs)) {
                const TraceLog log = load_trace_file(path);
                const Verdict verdict = classify(model, call_names(log));
                ++total;
                if (verdict.label == Label::Malicious) ++flagged;
                emit_verdict(os, log.sample_id, std::string(), verdict);
            }
        } else {
            throw ConfigError(model_path + ": unknown model format '" + format + "'");
        }
        if (pretty)
            os << "-- " << flagged << " of " << total << " units flagged malicious\n";
        emit_text(out, os.str());
    }

    void emit_verdict(std::ostream& os, const std::string& sample_id, const std::string& node,
                      const Verdict& v) const {
        if (pretty) {
            os << sample_id;
            if (!node.empty()) os << "  " << node;
            os << "  " << label_name(v.label) << "  score=" << format_double(v.score) << "\n";
            return;
        }
        json line{{"sample_id", sample_id},
                  {"node", node.empty() ? json() : json(node)},
                  {"label", std::string(label_name(v.label))},
                  {"score", v.score}};
        os << line.dump() << "\n";
    }
};

struct SynthCmd {
    std::string families_path, out;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool dump_families = false;

    void run() const {
        if (dump_families) {
            write_json_file(out, families_to_json(default_families()));
            return;
        }
        const std::vector<FamilySpec> fams =
            families_path.empty() ? default_families()
                                  : families_from_json(load_json_file(families_path));
        if (out.empty()) throw ConfigError("synth needs an output directory (-o)");
        const std::vector<TraceLog> corpus = generate_corpus(fams, count, seed, jobs);
        fs::create_directories(out);
        json index = json::array();
        for (const TraceLog& log : corpus) {
            const fs::path path = fs::path(out) / (log.sample_id + ".jsonl");
            std::ofstream os(path);
            if (!os) throw ConfigError("cannot write '" + path.string() + "'");
            write_trace_log(os, log);
            index.push_back(json{{"sample_id", log.sample_id},
                                 {"label", std::string(label_name(log.label))},
                                 {"family", log.family},
                                 {"events", log.events.size()}});
        }
        json manifest = run_manifest("synth", {families_path}, out, seed, jobs,
                                     json{{"count", count}});
        manifest["samples"] = std::move(index);
        write_json_file((fs::path(out) / "manifest.json").string(), manifest);
    }
};

struct ObfuscateCmd {
    std::string input, out, config_path;
    double reorder_prob = -1.0;
    std::int64_t reorder_window = -1;
    double inject_prob = -1.0;
    std::int64_t inject_max = -1;
    std::uint64_t seed = 0;
    bool seed_given = false;

    void run() const {
        ObfuscationConfig cfg;
        if (!config_path.empty()) cfg = ObfuscationConfig::from_json(load_json_file(config_path));
        if (reorder_prob >= 0.0) cfg.reorder_prob = reorder_prob;
        if (reorder_window >= 0) cfg.reorder_window = static_cast<std::size_t>(reorder_window);
        if (inject_prob >= 0.0) cfg.inject_prob = inject_prob;
        if (inject_max >= 0) cfg.inject_max = static_cast<std::size_t>(inject_max);
        if (cfg.inject_prob > 0.0 && cfg.bogus_pool.empty())
            cfg.bogus_pool = default_bogus_pool();
        if (seed_given) cfg.seed = seed;
        cfg.validate();
        const json manifest =
            run_manifest("obfuscate", {input}, out, cfg.seed, 1, cfg.to_json());
        if (fs::is_directory(input)) {
            if (out.empty()) throw ConfigError("directory input needs an output directory (-o)");
            fs::create_directories(out);
            const std::vector<std::string> files = expand_inputs({input});
            Rng rng(cfg.seed, 0x0bf0ULL);
            for (const std::string& f : files) {
                ObfuscationConfig per = cfg;
                per.seed = rng.next_u64();
                const TraceLog obf = obfuscate(load_trace_file(f), per);
                const fs::path path = fs::path(out) / fs::path(f).filename();
                std::ofstream os(path);
                if (!os) throw ConfigError("cannot write '" + path.string() + "'");
                write_trace_log(os, obf);
            }
            write_json_file((fs::path(out) / "manifest.json").string(), manifest);
            return;
        }
        const TraceLog obf = obfuscate(load_trace_file(input), cfg);
        std::ostringstream os;
        write_trace_log(os, obf);
        emit_text(out, os.str());
        write_sibling_manifest(out, manifest);
    }
};

// --------------------------- evaluate subcommands ---------------------------

void run_eval_cv(const EvalFlags& flags) {
    const CvOptions opt = flags.to_cv_options();
    const MappingTable table = load_mapping(flags.mapping_path);
    const FeatureOptions fopts = flags.features.to_options(flags.jobs);
    const std::vector<TraceLog> corpus = load_corpus(flags.inputs, flags.jobs);
    const Dataset rows = extract_dataset(corpus, table, fopts, flags.jobs);
    const CvResult res = cross_validate(to_labeled(rows), opt);
    json doc = cv_result_json(res);
    doc["format"] = "qdfg.eval.cv";
    doc["manifest"] = flags.manifest("evaluate cv", opt);
    write_json_file(flags.out, doc);
    if (!flags.csv_out.empty()) {
        emit_text(flags.csv_out, cv_runs_csv(res));
        write_sibling_manifest(flags.csv_out, doc["manifest"]);
    }
}

void run_eval_ablation(const EvalFlags& flags, const std::string& mode_name) {
    const AblationMode mode = ablation_from_name(mode_name);
    const CvOptions opt = flags.to_cv_options();
    const MappingTable table = load_mapping(flags.mapping_path);
    const FeatureOptions fopts = flags.features.to_options(flags.jobs);
    const std::vector<TraceLog> corpus = load_corpus(flags.inputs, flags.jobs);
    const std::vector<GraphSample> graphs = build_graph_samples(corpus, table, flags.jobs);
    const AblationReport report = quantity_ablation(graphs, mode, opt, fopts);
    json doc{{"format", "qdfg.eval.ablation"},
             {"mode", std::string(ablation_name(mode))},
             {"real", cv_result_json(report.real)},
             {"ablated", cv_result_json(report.ablated)},
             {"fpr_ratio", report.fpr_ratio},
             {"fn_ratio", report.fn_ratio},
             {"dr_p_value", report.dr_test.p},
             {"fpr_p_value", report.fpr_test.p}};
    json manifest = flags.manifest("evaluate ablation", opt);
    manifest["config"]["mode"] = mode_name;
    doc["manifest"] = manifest;
    write_json_file(flags.out, doc);
    if (!flags.csv_out.empty()) {
        std::ostringstream os;
        csv::write_row(os, {"arm", "repeat", "tp", "tn", "fp", "fn", "dr", "fpr",
                            "precision", "f_measure"});
        const auto rows_for = [&os](const std::string& arm, const CvResult& res) {
            for (std::size_t i = 0; i < res.runs.size(); ++i) {
                const RunMetrics& r = res.runs[i];
                csv::write_row(os, {arm, std::to_string(i), std::to_string(r.counts.tp),
                                    std::to_string(r.counts.tn), std::to_string(r.counts.fp),
                                    std::to_string(r.counts.fn), format_double(r.dr),
                                    format_double(r.fpr), format_double(r.precision),
                                    format_double(r.f_measure)});
            }
        };
        rows_for("real", report.real);
        rows_for(std::string(ablation_name(mode)), report.ablated);
        emit_text(flags.csv_out, os.str());
        write_sibling_manifest(flags.csv_out, manifest);
    }
}

void run_eval_families(const EvalFlags& flags) {
    const CvOptions opt = flags.to_cv_options();
    const MappingTable table = load_mapping(flags.mapping_path);
    const FeatureOptions fopts = flags.features.to_options(flags.jobs);
    const std::vector<TraceLog> corpus = load_corpus(flags.inputs, flags.jobs);
    const Dataset rows = extract_dataset(corpus, table, fopts, flags.jobs);
    const LofoResult res = leave_one_family_out(rows, opt);
    json fam = json::array();
    for (const FamilyResult& f : res.families)
        fam.push_back(json{{"family", f.family},
                           {"tested", f.tested},
                           {"detected", f.detected},
                           {"dr", f.dr}});
    json doc{{"format", "qdfg.eval.families"},
             {"families", std::move(fam)},
             {"mean_dr", res.mean_dr},
             {"manifest", flags.manifest("evaluate families", opt)}};
    write_json_file(flags.out, doc);
    if (!flags.csv_out.empty()) {
        std::ostringstream os;
        csv::write_row(os, {"family", "tested", "detected", "dr"});
        for (const FamilyResult& f : res.families)
            csv::write_row(os, {f.family, std::to_string(f.tested),
                                std::to_string(f.detected), format_double(f.dr)});
        emit_text(flags.csv_out, os.str());
        write_sibling_manifest(flags.csv_out, doc["manifest"]);
    }
}

struct SweepFlags {
    std::string grid_path;
    std::string grid_kind = "both"; // reorder|injection|both
    std::size_t reorder_steps = 11;
    std::size_t reorder_window = 4;
    std::size_t inject_steps = 20;
    std::size_t inject_max = 2;
    std::string ngram_list = "2,3,4,5";
    std::size_t top_k = 500;
};

std::vector<std::size_t> parse_ngram_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const unsigned long v = std::stoul(item, &pos);
        if (pos != item.size() || v == 0)
            throw ConfigError("bad n-gram width '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("no n-gram widths given");
    return out;
}

void run_eval_sweep(const EvalFlags& flags, const SweepFlags& sw) {
    const CvOptions opt = flags.to_cv_options();
    const MappingTable table = load_mapping(flags.mapping_path);
    const FeatureOptions fopts = flags.features.to_options(flags.jobs);
    const std::vector<TraceLog> corpus = load_corpus(flags.inputs, flags.jobs);
    const std::vector<std::size_t> ns = parse_ngram_list(sw.ngram_list);
    const SweepClassifiers cls =
        train_sweep_classifiers(corpus, ns, sw.top_k, opt, table, fopts);
    std::vector<TraceLog> malicious;
    for (const TraceLog& log : corpus)
        if (log.label == Label::Malicious) malicious.push_back(log);
    std::vector<ObfuscationConfig> grid;
    if (!sw.grid_path.empty()) {
        for (const json& j : load_json_file(sw.grid_path))
            grid.push_back(ObfuscationConfig::from_json(j));
    } else {
        if (sw.grid_kind == "reorder" || sw.grid_kind == "both")
            for (ObfuscationConfig& c :
                 pure_reorder_grid(sw.reorder_steps, sw.reorder_window, flags.seed))
                grid.push_back(std::move(c));
        if (sw.grid_kind == "injection" || sw.grid_kind == "both")
            for (ObfuscationConfig& c :
                 injection_grid(sw.inject_steps, sw.inject_max, flags.seed))
                grid.push_back(std::move(c));
        if (grid.empty())
            throw ConfigError("unknown grid kind '" + sw.grid_kind +
                              "' (reorder|injection|both)");
    }
    const SweepResult res = obfuscation_sweep(malicious, grid, cls, flags.jobs);
    json rows = json::array();
    for (const SweepRow& r : res.rows) {
        json row{{"config_id", r.config_id},
                 {"reorder_prob", r.reorder_prob},
                 {"reorder_window", r.reorder_window},
                 {"inject_prob", r.inject_prob},
                 {"inject_max", r.inject_max},
                 {"mean_levenshtein", r.mean_levenshtein}};
        for (std::size_t i = 0; i < res.classifier_names.size(); ++i)
            row["dr_" + res.classifier_names[i]] = r.dr[i];
        rows.push_back(std::move(row));
    }
    json manifest = flags.manifest("evaluate obfuscation-sweep", opt);
    manifest["config"]["grid"] = sw.grid_path;
    manifest["config"]["grid_kind"] = sw.grid_kind;
    manifest["config"]["ngrams"] = sw.ngram_list;
    manifest["config"]["top_k"] = sw.top_k;
    json doc{{"format", "qdfg.eval.sweep"},
             {"classifiers", res.classifier_names},
             {"rows", std::move(rows)},
             {"manifest", manifest}};
    write_json_file(flags.out, doc);
    if (!flags.csv_out.empty()) {
        std::ostringstream os;
        std::vector<std::string> header{"config_id",  "reorder_prob", "reorder_window",
                                        "inject_prob", "inject_max",  "mean_levenshtein"};
        for (const std::string& name : res.classifier_names) header.push_back("dr_" + name);
        csv::write_row(os, header);
        for (const SweepRow& r : res.rows) {
            std::vector<std::string> fields{
                std::to_string(r.config_id),      format_double(r.reorder_prob),
                std::to_string(r.reorder_window), format_double(r.inject_prob),
                std::to_string(r.inject_max),     format_double(r.mean_levenshtein)};
            for (double d : r.dr) fields.push_back(format_double(d));
            csv::write_row(os, fields);
        }
        emit_text(flags.csv_out, os.str());
        write_sibling_manifest(flags.csv_out, manifest);
    }
}

void run_eval_timing(const EvalFlags& flags, const std::string& model_path) {
    const CvOptions opt = flags.to_cv_options();
    const MappingTable table = load_mapping(flags.mapping_path);
    const FeatureOptions fopts = flags.features.to_options(flags.jobs);
    const std::vector<TraceLog> corpus = load_corpus(flags.inputs, flags.jobs);
    RandomForest forest;
    if (!model_path.empty()) {
        forest = forest_from_json(load_json_file(model_path));
    } else {
        std::vector<LabeledSample> samples =
            to_labeled(extract_dataset(corpus, table, fopts, flags.jobs));
        Rng rng(opt.seed, 0x71e0ULL);
        if (opt.smote_ratio > 0.0)
            samples = smote(samples, opt.smote_ratio, opt.cfg.smote_k, rng.fork(0));
        ClassifierConfig cfg = opt.cfg;
        cfg.seed = rng.fork(1).next_u64();
        forest = train_forest(std::move(samples), cfg, flags.jobs);
    }
    json rows = json::array();
    std::ostringstream os;
    csv::write_row(os, {"sample_id", "nodes", "edges", "process_nodes", "build_ms",
                        "local_ms", "global_ms", "classify_ms", "total_ms"});
    for (const TraceLog& log : corpus) {
        const TimingProfile prof = timing_profile(log, table, forest, fopts);
        rows.push_back(json{{"sample_id", log.sample_id},
                            {"nodes", prof.nodes},
                            {"edges", prof.edges},
                            {"process_nodes", prof.process_nodes},
                            {"build_ms", prof.build_ms},
                            {"local_ms", prof.local_ms},
                            {"global_ms", prof.global_ms},
                            {"classify_ms", prof.classify_ms},
                            {"total_ms", prof.total_ms()}});
        csv::write_row(os, {log.sample_id, std::to_string(prof.nodes),
                            std::to_string(prof.edges), std::to_string(prof.process_nodes),
                            format_double(prof.build_ms), format_double(prof.local_ms),
                            format_double(prof.global_ms), format_double(prof.classify_ms),
                            format_double(prof.total_ms())});
    }
    json manifest = flags.manifest("evaluate timing", opt);
    manifest["config"]["model"] = model_path;
    json doc{{"format", "qdfg.eval.timing"}, {"rows", std::move(rows)},
             {"manifest", manifest}};
    write_json_file(flags.out, doc);
    if (!flags.csv_out.empty()) {
        emit_text(flags.csv_out, os.str());
        write_sibling_manifest(flags.csv_out, manifest);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantitative data-flow graph malware-analysis toolkit"};
    app.require_subcommand(1);

    BuildGraphCmd build_graph_cmd;
    auto* bg = app.add_subcommand("build-graph",
                                  "Build a data-flow graph from one trace log");
    bg->add_option("input", build_graph_cmd.input, "Trace log (JSON lines)")->required();
    bg->add_option("-o,--out", build_graph_cmd.out, "Graph JSON path (default: stdout)");
    bg->add_option("--mapping", build_graph_cmd.mapping_path, "Call-mapping table JSON");
    bg->add_option("--dot", build_graph_cmd.dot_path, "Also write a DOT rendering here");
    bg->callback([&] { build_graph_cmd.run(); });

    ExtractFeaturesCmd extract_cmd;
    auto* ef = app.add_subcommand("extract-features",
                                  "Compute per-process feature rows from graphs or traces");
    ef->add_option("inputs", extract_cmd.inputs, "Graph JSON / trace files / directories")
        ->required();
    ef->add_option("-o,--out", extract_cmd.out, "Feature CSV path (default: stdout)");
    ef->add_option("--mapping", extract_cmd.mapping_path, "Call-mapping table JSON");
    ef->add_option("--jobs", extract_cmd.jobs, "Worker cap");
    extract_cmd.features.attach(ef);
    ef->callback([&] { extract_cmd.run(); });

    TrainCmd train_cmd;
    auto* tr = app.add_subcommand("train", "Train a classifier model");
    tr->add_option("inputs", train_cmd.inputs,
                   "Feature CSVs (default mode) or trace files/dirs (--ngram)")
        ->required();
    tr->add_option("-o,--out", train_cmd.out, "Model JSON path (default: stdout)");
    tr->add_option("--config", train_cmd.config_path, "Classifier config JSON");
    auto* tr_seed = tr->add_option("--seed", train_cmd.seed, "Root RNG seed");
    tr->add_option("--jobs", train_cmd.jobs, "Worker cap");
    tr->add_option("--ngram", train_cmd.ngram_n,
                   "Train the call-sequence baseline with this gram width");
    tr->add_option("--top-k", train_cmd.top_k, "Vocabulary cap for --ngram");
    tr->callback([&] {
        train_cmd.seed_given = tr_seed->count() > 0;
        train_cmd.run();
    });

    ClassifyCmd classify_cmd;
    auto* cl = app.add_subcommand("classify", "Classify traces or graphs with a model");
    cl->add_option("model", classify_cmd.model_path, "Model JSON path")->required();
    cl->add_option("inputs", classify_cmd.inputs, "Graph JSON / trace files / directories")
        ->required();
    cl->add_option("-o,--out", classify_cmd.out, "Verdict path (default: stdout)");
    cl->add_option("--mapping", classify_cmd.mapping_path, "Call-mapping table JSON");
    cl->add_flag("--pretty", classify_cmd.pretty, "Human summary instead of JSON lines");
    cl->callback([&] { classify_cmd.run(); });

    SynthCmd synth_cmd;
    auto* sy = app.add_subcommand("synth", "Generate a labeled synthetic trace corpus");
    sy->add_option("--families", synth_cmd.families_path,
                   "Family spec JSON (default: built-in families)");
    sy->add_option("--count", synth_cmd.count,
                   "Traces per family (0 = family defaults)");
    sy->add_option("--seed", synth_cmd.seed, "Root RNG seed");
    sy->add_option("--jobs", synth_cmd.jobs, "Worker cap");
    sy->add_option("-o,--out", synth_cmd.out, "Output directory");
    sy->add_flag("--dump-families", synth_cmd.dump_families,
                 "Write the built-in family spec JSON and exit");
    sy->callback([&] { synth_cmd.run(); });

    ObfuscateCmd obf_cmd;
    auto* ob = app.add_subcommand("obfuscate", "Apply behavioral obfuscation to traces");
    ob->add_option("input", obf_cmd.input, "Trace file or directory")->required();
    ob->add_option("-o,--out", obf_cmd.out, "Output path (default: stdout)");
    ob->add_option("--config", obf_cmd.config_path, "Obfuscation config JSON");
    ob->add_option("--reorder-prob", obf_cmd.reorder_prob, "Per-position swap probability");
    ob->add_option("--reorder-window", obf_cmd.reorder_window, "Max forward swap distance");
    ob->add_option("--inject-prob", obf_cmd.inject_prob, "Per-event injection probability");
    ob->add_option("--inject-max", obf_cmd.inject_max, "Max insertions per site");
    auto* ob_seed = ob->add_option("--seed", obf_cmd.seed, "Root RNG seed");
    ob->callback([&] {
        obf_cmd.seed_given = ob_seed->count() > 0;
        obf_cmd.run();
    });

    auto* ev = app.add_subcommand("evaluate", "Run an evaluation protocol");
    ev->require_subcommand(1);

    EvalFlags cv_flags;
    auto* ev_cv = ev->add_subcommand("cv", "Repeated stratified cross-validation");
    cv_flags.attach(ev_cv);
    ev_cv->callback([&] { run_eval_cv(cv_flags); });

    EvalFlags abl_flags;
    std::string abl_mode = "random";
    auto* ev_abl = ev->add_subcommand("ablation", "Quantity-ablation comparison");
    abl_flags.attach(ev_abl);
    ev_abl->add_option("--mode", abl_mode, "real|fixed_one|random");
    ev_abl->callback([&] { run_eval_ablation(abl_flags, abl_mode); });

    EvalFlags fam_flags;
    auto* ev_fam = ev->add_subcommand("families", "Leave-one-family-out generalization");
    fam_flags.attach(ev_fam, /*with_folds=*/false);
    ev_fam->callback([&] { run_eval_families(fam_flags); });

    EvalFlags sweep_flags;
    SweepFlags sweep_extra;
    auto* ev_sw = ev->add_subcommand("obfuscation-sweep",
                                     "Detection rates under rising obfuscation");
    sweep_flags.attach(ev_sw, /*with_folds=*/false);
    ev_sw->add_option("--grid", sweep_extra.grid_path, "Obfuscation grid JSON (array)");
    ev_sw->add_option("--grid-kind", sweep_extra.grid_kind,
                      "Built-in grid: reorder|injection|both");
    ev_sw->add_option("--reorder-steps", sweep_extra.reorder_steps, "Reorder grid size");
    ev_sw->add_option("--reorder-window", sweep_extra.reorder_window, "Reorder swap window");
    ev_sw->add_option("--inject-steps", sweep_extra.inject_steps, "Injection grid size");
    ev_sw->add_option("--inject-max", sweep_extra.inject_max, "Max insertions per site");
    ev_sw->add_option("--ngrams", sweep_extra.ngram_list,
                      "Comma-separated gram widths for the baselines");
    ev_sw->add_option("--top-k", sweep_extra.top_k, "Vocabulary cap per baseline");
    ev_sw->callback([&] { run_eval_sweep(sweep_flags, sweep_extra); });

    EvalFlags timing_flags;
    std::string timing_model;
    auto* ev_tm = ev->add_subcommand("timing", "Per-stage pipeline timing");
    timing_flags.attach(ev_tm, /*with_folds=*/false);
    ev_tm->add_option("--model", timing_model,
                      "Forest model JSON (default: train on the corpus)");
    ev_tm->callback([&] { run_eval_timing(timing_flags, timing_model); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
