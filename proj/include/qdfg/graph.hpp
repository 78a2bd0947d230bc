#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/entity.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

/// Aggregated attributes of one edge: total bytes, the set of transfer
/// timestamps, the number of contributing events, and free-form extras.
struct EdgeAttrs {
    std::uint64_t size = 0;
    std::set<std::int64_t> time;
    std::uint64_t count = 0;
    std::map<std::string, std::string> extra;

    friend bool operator==(const EdgeAttrs&, const EdgeAttrs&) = default;
};

/// Quantitative data flow graph. Storage is ordered maps keyed by entity
/// identity, so iteration order — and therefore serialization — depends only
/// on graph content, never on event arrival order.
class Qdfg {
public:
    struct NodeEntry {
        std::map<EntityRef, EdgeAttrs> out;
        std::set<EntityRef> in;

        friend bool operator==(const NodeEntry&, const NodeEntry&) = default;
    };

    using NodeMap = std::map<EntityRef, NodeEntry>;

    /// Fold one flow into the graph: aggregate onto an existing edge or
    /// create the missing nodes and the new edge.
    void apply(const FlowEvent& ev) {
        NodeEntry& src_entry = nodes_[ev.src];
        nodes_[ev.dst].in.insert(ev.src);
        auto [it, created] = src_entry.out.try_emplace(ev.dst);
        EdgeAttrs& e = it->second;
        if (created) ++edge_count_;
        e.size += ev.size;
        e.time.insert(ev.t);
        e.count += 1;
        for (const auto& [k, v] : ev.extra) e.extra[k] = v;
    }

    bool has_node(const EntityRef& n) const { return nodes_.count(n) != 0; }

    bool has_edge(const EntityRef& a, const EntityRef& b) const {
        auto it = nodes_.find(a);
        return it != nodes_.end() && it->second.out.count(b) != 0;
    }

    const EdgeAttrs& edge(const EntityRef& a, const EntityRef& b) const {
        auto it = nodes_.find(a);
        if (it == nodes_.end()) throw DomainError("no such node: " + a.display());
        auto jt = it->second.out.find(b);
        if (jt == it->second.out.end())
            throw DomainError("no such edge: " + a.display() + " -> " + b.display());
        return jt->second;
    }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    const NodeMap& nodes() const { return nodes_; }

    /// Immediate predecessors of n.
    const std::set<EntityRef>& pre(const EntityRef& n) const { return entry(n).in; }

    std::vector<std::pair<EntityRef, EntityRef>> in_edges(const EntityRef& n) const {
        std::vector<std::pair<EntityRef, EntityRef>> out;
        for (const EntityRef& p : entry(n).in) out.emplace_back(p, n);
        return out;
    }

    std::vector<std::pair<EntityRef, EntityRef>> out_edges(const EntityRef& n) const {
        std::vector<std::pair<EntityRef, EntityRef>> out;
        for (const auto& [dst, attrs] : entry(n).out) out.emplace_back(n, dst);
        return out;
    }

    const std::map<EntityRef, EdgeAttrs>& out_map(const EntityRef& n) const {
        return entry(n).out;
    }

    /// Subgraph induced by the forward closure of p: everything p can reach
    /// along directed paths, with all attributes copied unchanged.
    Qdfg reachability_graph(const EntityRef& p) const {
        entry(p); // existence check
        if (p.kind != EntityType::Process)
            throw DomainError("reachability graph requires a process node, got " + p.display());
        std::set<EntityRef> closure;
        std::vector<EntityRef> frontier{p};
        closure.insert(p);
        while (!frontier.empty()) {
            EntityRef cur = std::move(frontier.back());
            frontier.pop_back();
            for (const auto& [dst, attrs] : nodes_.at(cur).out) {
                if (closure.insert(dst).second) frontier.push_back(dst);
            }
        }
        Qdfg sub;
        for (const EntityRef& n : closure) {
            NodeEntry& se = sub.nodes_[n];
            for (const auto& [dst, attrs] : nodes_.at(n).out) {
                se.out.emplace(dst, attrs);
                sub.nodes_[dst].in.insert(n);
                ++sub.edge_count_;
            }
        }
        return sub;
    }

    /// Replace every edge's size with fn(src, dst, attrs). Used by quantity
    /// experiments; all other attributes stay untouched.
    template <class F>
    void rewrite_sizes(F fn) {
        for (auto& [ref, entry] : nodes_) {
            for (auto& [dst, attrs] : entry.out) {
                const std::uint64_t s = fn(ref, dst, const_cast<const EdgeAttrs&>(attrs));
                if (s == 0) throw DomainError("edge size must stay >= 1");
                attrs.size = s;
            }
        }
    }

    /// Largest edge size in the graph (0 for an edgeless graph).
    std::uint64_t max_edge_size() const {
        std::uint64_t m = 0;
        for (const auto& [ref, entry] : nodes_)
            for (const auto& [dst, attrs] : entry.out) m = std::max(m, attrs.size);
        return m;
    }

    friend bool operator==(const Qdfg&, const Qdfg&) = default;

private:
    const NodeEntry& entry(const EntityRef& n) const {
        auto it = nodes_.find(n);
        if (it == nodes_.end()) throw DomainError("no such node: " + n.display());
        return it->second;
    }

    NodeMap nodes_;
    std::size_t edge_count_ = 0;
};

/// Functional form of the graph update.
inline Qdfg update(Qdfg g, const FlowEvent& ev) {
    g.apply(ev);
    return g;
}

inline Qdfg build_graph(const std::vector<FlowEvent>& events) {
    Qdfg g;
    for (const FlowEvent& ev : events) g.apply(ev);
    return g;
}

/// How edge attributes become path costs / flow weights.
enum class EdgeWeight {
    Size,       // ψ(e) = total bytes (default: bigger flows are more distant)
    InverseSize // ψ(e) = 1 / total bytes (bigger flows are closer)
};

inline double edge_cost(const EdgeAttrs& e, EdgeWeight w) {
    double s = static_cast<double>(e.size);
    return w == EdgeWeight::InverseSize ? 1.0 / s : s;
}

/// Dense snapshot of a Qdfg for path algorithms. Node indices follow the
/// graph's canonical node order, so results are independent of how the graph
/// was assembled.
struct GraphIndex {
    std::vector<EntityRef> refs;
    std::map<EntityRef, std::size_t> index_of;
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    double total_cost = 0.0;

    GraphIndex() = default;

    explicit GraphIndex(const Qdfg& g, EdgeWeight w = EdgeWeight::Size) {
        refs.reserve(g.node_count());
        for (const auto& [ref, entry] : g.nodes()) {
            index_of.emplace(ref, refs.size());
            refs.push_back(ref);
        }
        adj.resize(refs.size());
        std::size_t i = 0;
        for (const auto& [ref, entry] : g.nodes()) {
            for (const auto& [dst, attrs] : entry.out) {
                double c = edge_cost(attrs, w);
                adj[i].emplace_back(index_of.at(dst), c);
                total_cost += c;
            }
            ++i;
        }
    }

    std::size_t size() const { return refs.size(); }

    /// Single-source shortest path costs (Dijkstra; all costs positive).
    /// Unreached nodes hold infinity.
    std::vector<double> dijkstra(std::size_t source) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(refs.size(), inf);
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[source] = 0.0;
        pq.emplace(0.0, source);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            for (auto [v, c] : adj[u]) {
                double nd = d + c;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }
        return dist;
    }
};

/// Least total cost over directed paths a -> b; empty when unreachable.
inline std::optional<double> shortest_distance(const Qdfg& g, const EntityRef& a,
                                               const EntityRef& b,
                                               EdgeWeight w = EdgeWeight::Size) {
    if (!g.has_node(a)) throw DomainError("no such node: " + a.display());
    if (!g.has_node(b)) throw DomainError("no such node: " + b.display());
    GraphIndex idx(g, w);
    std::vector<double> dist = idx.dijkstra(idx.index_of.at(a));
    double d = dist[idx.index_of.at(b)];
    if (d == std::numeric_limits<double>::infinity()) return std::nullopt;
    return d;
}

/// Deterministic JSON form: nodes sorted by identity, edges sorted by
/// (source, destination) index. Equal graphs serialize to equal bytes.
inline json graph_to_json(const Qdfg& g) {
    json nodes = json::array();
    std::map<EntityRef, std::size_t> idx;
    for (const auto& [ref, entry] : g.nodes()) {
        idx.emplace(ref, nodes.size());
        nodes.push_back({{"kind", std::string(1, type_letter(ref.kind))}, {"name", ref.name}});
    }
    json edges = json::array();
    for (const auto& [ref, entry] : g.nodes()) {
        for (const auto& [dst, attrs] : entry.out) {
            json e{{"src", idx.at(ref)},
                   {"dst", idx.at(dst)},
                   {"size", attrs.size},
                   {"count", attrs.count},
                   {"time", json(attrs.time)}};
            if (!attrs.extra.empty()) e["extra"] = attrs.extra;
            edges.push_back(std::move(e));
        }
    }
    return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline Qdfg graph_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
        throw ParseError(0, "graph document needs 'nodes' and 'edges' arrays");
    std::vector<EntityRef> refs;
    for (const json& n : doc["nodes"]) {
        std::string kind = n.at("kind").get<std::string>();
        auto t = kind.size() == 1 ? type_from_letter(kind[0]) : std::nullopt;
        if (!t) throw ParseError(0, "unknown node kind '" + kind + "'");
        refs.push_back(EntityRef{*t, n.at("name").get<std::string>()});
    }
    Qdfg g;
    for (const json& e : doc["edges"]) {
        std::size_t si = e.at("src").get<std::size_t>();
        std::size_t di = e.at("dst").get<std::size_t>();
        if (si >= refs.size() || di >= refs.size())
            throw ParseError(0, "edge endpoint index out of range");
        std::uint64_t size = e.at("size").get<std::uint64_t>();
        std::uint64_t count = e.at("count").get<std::uint64_t>();
        std::vector<std::int64_t> times = e.at("time").get<std::vector<std::int64_t>>();
        std::map<std::string, std::string> extra;
        if (e.contains("extra")) extra = e["extra"].get<std::map<std::string, std::string>>();
        if (size == 0 || count == 0 || times.empty())
            throw ParseError(0, "edge attributes must be positive and time non-empty");
        if (size < count || times.size() > count)
            throw ParseError(0, "inconsistent edge attributes (size < count or excess times)");
        // Re-aggregate: first event carries the remainder so totals match.
        std::uint64_t first = size - (count - 1);
        for (std::uint64_t k = 0; k < count; ++k) {
            std::int64_t t = times[std::min<std::size_t>(k, times.size() - 1)];
            g.apply(FlowEvent(refs[si], refs[di], k == 0 ? first : 1, t,
                              k == 0 ? extra : std::map<std::string, std::string>{}));
        }
    }
    return g;
}

/// Graphviz form; edge pen width scales with the edge's share of the
/// largest transfer in the graph.
inline void write_dot(std::ostream& os, const Qdfg& g) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    };
    const char* shape_of[] = {"ellipse", "box", "diamond", "hexagon", "house"};
    std::uint64_t max_size = 1;
    for (const auto& [ref, entry] : g.nodes())
        for (const auto& [dst, attrs] : entry.out) max_size = std::max(max_size, attrs.size);
    os << "digraph qdfg {\n";
    for (const auto& [ref, entry] : g.nodes()) {
        os << "  " << quote(ref.display())
           << " [shape=" << shape_of[static_cast<int>(ref.kind)] << "];\n";
    }
    for (const auto& [ref, entry] : g.nodes()) {
        for (const auto& [dst, attrs] : entry.out) {
            double rel = static_cast<double>(attrs.size) / static_cast<double>(max_size);
            double penwidth = 0.5 + 4.5 * rel;
            os << "  " << quote(ref.display()) << " -> " << quote(dst.display())
               << " [penwidth=" << format_double(penwidth) << ", label=\"" << attrs.size
               << "\"];\n";
        }
    }
    os << "}\n";
}

} // namespace qdfg
