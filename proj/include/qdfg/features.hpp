#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "qdfg/csv.hpp"
#include "qdfg/graph.hpp"
#include "qdfg/parallel.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

inline constexpr std::size_t kFeatureDim = 8;

/// Which edge attribute feeds the outgoing-edge distribution (entropy and
/// variance).
enum class DistributionAttr { Size, Count };

/// Knobs for feature computation. Defaults follow the standard definitions:
/// byte totals for distributions and for path cost. The inverse path weight
/// treats large flows as short distances instead of long ones; flow
/// proportions always use byte totals.
struct FeatureOptions {
    DistributionAttr distribution_attr = DistributionAttr::Size;
    EdgeWeight path_weight = EdgeWeight::Size;
    unsigned jobs = 1;
};

/// One process node's feature row: (entropy, variance, proportion to P, to
/// R, to F, to S, closeness, betweenness).
struct FeatureVector {
    EntityRef node;
    std::array<double, kFeatureDim> values{};
    Label label = Label::Unknown;
    std::string family;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

namespace detail {

inline std::vector<double> out_weights(const Qdfg& g, const EntityRef& n, DistributionAttr attr) {
    std::vector<double> w;
    for (const auto& [dst, e] : g.out_map(n))
        w.push_back(static_cast<double>(attr == DistributionAttr::Count ? e.count : e.size));
    return w;
}

} // namespace detail

/// Normalized entropy of the node's outgoing-edge weight distribution:
/// -sum(s_i * ln s_i) / ln k over the normalized weights. Defined as 0 for
/// fewer than two outgoing edges, and exactly 1 for a uniform distribution.
inline double entropy(const Qdfg& g, const EntityRef& n,
                      DistributionAttr attr = DistributionAttr::Size) {
    std::vector<double> w = detail::out_weights(g, n, attr);
    std::size_t k = w.size();
    if (k <= 1) return 0.0;
    double total = 0.0;
    bool uniform = true;
    for (double x : w) {
        total += x;
        if (x != w.front()) uniform = false;
    }
    if (uniform) return 1.0;
    double h = 0.0;
    for (double x : w) {
        double s = x / total;
        if (s > 0.0) h -= s * std::log(s);
    }
    double ne = h / std::log(static_cast<double>(k));
    return std::min(1.0, std::max(0.0, ne));
}

/// Population variance of the node's outgoing-edge weights (mean squared
/// deviation); 0 for fewer than two outgoing edges.
inline double variance(const Qdfg& g, const EntityRef& n,
                       DistributionAttr attr = DistributionAttr::Size) {
    std::vector<double> w = detail::out_weights(g, n, attr);
    std::size_t k = w.size();
    if (k <= 1) return 0.0;
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= static_cast<double>(k);
    double acc = 0.0;
    for (double x : w) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(k);
}

/// Share of the node's outgoing bytes that flow to destinations of type t;
/// 0 for a node with no outgoing edges.
inline double flow_proportion(const Qdfg& g, const EntityRef& n, EntityType t) {
    double to_t = 0.0, total = 0.0;
    for (const auto& [dst, e] : g.out_map(n)) {
        double s = static_cast<double>(e.size);
        total += s;
        if (dst.kind == t) to_t += s;
    }
    if (total == 0.0) return 0.0;
    return to_t / total;
}

/// Closeness of node index `source` over a prepared index: (|N|-1) divided
/// by the sum of shortest-path costs to every other node, where unreachable
/// targets count as 1 + (total edge cost of the graph). 0 for a single-node
/// graph.
inline double closeness(const GraphIndex& idx, std::size_t source) {
    std::size_t n = idx.size();
    if (n <= 1) return 0.0;
    std::vector<double> dist = idx.dijkstra(source);
    double d_max = 1.0 + idx.total_cost;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == source) continue;
        sum += std::isinf(dist[i]) ? d_max : dist[i];
    }
    return static_cast<double>(n - 1) / sum;
}

inline double closeness(const Qdfg& g, const EntityRef& n, EdgeWeight w = EdgeWeight::Size) {
    if (!g.has_node(n)) throw DomainError("no such node: " + n.display());
    GraphIndex idx(g, w);
    return closeness(idx, idx.index_of.at(n));
}

/// Betweenness of every node: for each ordered pair (s, t) with a path, the
/// fraction of least-cost s->t paths that pass through the node, summed over
/// all pairs excluding the node itself. Weighted pair-dependency
/// accumulation over per-source shortest-path DAGs.
inline std::vector<double> betweenness_all(const GraphIndex& idx) {
    std::size_t n = idx.size();
    std::vector<double> bc(n, 0.0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n), sigma(n), delta(n);
    std::vector<std::vector<std::size_t>> pred(n);
    std::vector<char> settled(n);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(settled.begin(), settled.end(), 0);
        for (auto& p : pred) p.clear();
        order.clear();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        pq.emplace(0.0, s);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (settled[u]) continue;
            settled[u] = 1;
            order.push_back(u);
            for (auto [v, c] : idx.adj[u]) {
                double nd = d + c;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    pred[v].assign(1, u);
                    pq.emplace(nd, v);
                } else if (nd == dist[v]) {
                    sigma[v] += sigma[u];
                    pred[v].push_back(u);
                }
            }
        }
        for (std::size_t i = order.size(); i-- > 0;) {
            std::size_t w = order[i];
            for (std::size_t v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    return bc;
}

inline double betweenness(const Qdfg& g, const EntityRef& n, EdgeWeight w = EdgeWeight::Size) {
    if (!g.has_node(n)) throw DomainError("no such node: " + n.display());
    GraphIndex idx(g, w);
    return betweenness_all(idx)[idx.index_of.at(n)];
}

/// All 8 features of process node p, evaluated inside p's own reachability
/// graph.
inline FeatureVector extract_features(const Qdfg& g, const EntityRef& p,
                                      Label label = Label::Unknown, std::string family = {},
                                      const FeatureOptions& opts = {}) {
    Qdfg rg = g.reachability_graph(p);
    GraphIndex idx(rg, opts.path_weight);
    std::size_t pi = idx.index_of.at(p);
    FeatureVector fv;
    fv.node = p;
    fv.label = label;
    fv.family = std::move(family);
    fv.values[0] = entropy(rg, p, opts.distribution_attr);
    fv.values[1] = variance(rg, p, opts.distribution_attr);
    fv.values[2] = flow_proportion(rg, p, EntityType::Process);
    fv.values[3] = flow_proportion(rg, p, EntityType::Registry);
    fv.values[4] = flow_proportion(rg, p, EntityType::File);
    fv.values[5] = flow_proportion(rg, p, EntityType::Socket);
    fv.values[6] = closeness(idx, pi);
    fv.values[7] = betweenness_all(idx)[pi];
    return fv;
}

/// Features of every process node of g, in canonical node order.
inline std::vector<FeatureVector> extract_all(const Qdfg& g, Label label = Label::Unknown,
                                              const std::string& family = {},
                                              const FeatureOptions& opts = {}) {
    std::vector<EntityRef> procs;
    for (const auto& [ref, entry] : g.nodes())
        if (ref.kind == EntityType::Process) procs.push_back(ref);
    std::vector<FeatureVector> out(procs.size());
    parallel_for(procs.size(), opts.jobs, [&](std::size_t i) {
        out[i] = extract_features(g, procs[i], label, family, opts);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Feature matrix CSV: sample_id,node,phi1..phi8,label,family
// ---------------------------------------------------------------------------

/// One row of the feature matrix: a feature vector plus its sample of origin.
struct SampleRow {
    std::string sample_id;
    FeatureVector fv;

    friend bool operator==(const SampleRow&, const SampleRow&) = default;
};

using Dataset = std::vector<SampleRow>;

inline void write_feature_csv(std::ostream& os, const Dataset& rows) {
    std::vector<std::string> header{"sample_id", "node"};
    for (std::size_t i = 1; i <= kFeatureDim; ++i) header.push_back("phi" + std::to_string(i));
    header.push_back("label");
    header.push_back("family");
    csv::write_row(os, header);
    for (const SampleRow& r : rows) {
        std::vector<std::string> fields{r.sample_id, r.fv.node.display()};
        for (double v : r.fv.values) fields.push_back(format_double(v));
        fields.push_back(r.fv.label == Label::Unknown ? std::string()
                                                      : std::string(label_name(r.fv.label)));
        fields.push_back(r.fv.family);
        csv::write_row(os, fields);
    }
}

inline EntityRef parse_node_display(const std::string& s, std::size_t line_no) {
    if (s.size() < 3 || s[1] != ':')
        throw ParseError(line_no, "node must look like 'P:name', got '" + s + "'");
    auto t = type_from_letter(s[0]);
    if (!t) throw ParseError(line_no, "unknown node kind in '" + s + "'");
    return EntityRef{*t, s.substr(2)};
}

inline Dataset read_feature_csv(std::istream& is) {
    auto rows = csv::parse(is);
    if (rows.empty()) throw ParseError(0, "feature matrix is empty");
    const std::size_t want = 2 + kFeatureDim + 2;
    if (rows.front().size() != want || rows.front()[0] != "sample_id")
        throw ParseError(1, "unexpected feature matrix header");
    Dataset out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != want)
            throw ParseError(r + 1, "expected " + std::to_string(want) + " fields, got " +
                                        std::to_string(f.size()));
        SampleRow row;
        row.sample_id = f[0];
        row.fv.node = parse_node_display(f[1], r + 1);
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            try {
                row.fv.values[i] = std::stod(f[2 + i]);
            } catch (const std::exception&) {
                throw ParseError(r + 1, "bad number '" + f[2 + i] + "'");
            }
        }
        row.fv.label = f[2 + kFeatureDim].empty() ? Label::Unknown
                                                  : label_from_name(f[2 + kFeatureDim]);
        row.fv.family = f[2 + kFeatureDim + 1];
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace qdfg
