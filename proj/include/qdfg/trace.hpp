#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/entity.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

/// One monitored call exactly as recorded: timestamp, calling process
/// instance, call name, and the raw argument map.
struct RawEvent {
    std::int64_t ts = 0;
    std::int64_t pid = 0;
    std::string process_name;
    std::string api;
    json args = json::object();

    friend bool operator==(const RawEvent& a, const RawEvent& b) {
        return a.ts == b.ts && a.pid == b.pid && a.process_name == b.process_name &&
               a.api == b.api && a.args == b.args;
    }
};

/// A quantified transfer between two distinct entities.
struct FlowEvent {
    EntityRef src;
    EntityRef dst;
    std::uint64_t size = 0;
    std::int64_t t = 0;
    std::map<std::string, std::string> extra;

    FlowEvent(EntityRef src_, EntityRef dst_, std::uint64_t size_, std::int64_t t_,
              std::map<std::string, std::string> extra_ = {})
        : src(std::move(src_)), dst(std::move(dst_)), size(size_), t(t_),
          extra(std::move(extra_)) {
        if (size == 0) throw DomainError("flow event size must be >= 1");
        if (src == dst) throw DomainError("flow event src and dst must differ: " + src.display());
    }

    friend bool operator==(const FlowEvent&, const FlowEvent&) = default;
};

/// A parsed trace: sample metadata plus the ordered call list.
struct TraceLog {
    std::string sample_id;
    Label label = Label::Unknown;
    std::string family; // empty when not applicable
    std::vector<RawEvent> events;
};

namespace detail {

inline std::int64_t require_int(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    if (!it->is_number_integer())
        throw ParseError(line, std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
}

inline std::string require_str(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    if (!it->is_string())
        throw ParseError(line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

} // namespace detail

/// Parse one line-delimited JSON trace. The first line is the sample header
/// ({"sample_id", "label", "family"}); every following line is one call
/// record ({"ts", "pid", "process", "api", "args"}). A first line without a
/// sample_id key is read as a call record for a sample with unknown metadata.
/// Events arriving out of timestamp order are stably re-sorted with a warning.
inline TraceLog parse_trace_log(std::istream& is) {
    TraceLog log;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    bool monotone = true;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded()) throw ParseError(line_no, "malformed JSON");
        if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
        if (!saw_header && log.events.empty() && obj.contains("sample_id")) {
            saw_header = true;
            log.sample_id = detail::require_str(obj, "sample_id", line_no);
            if (obj.contains("label"))
                log.label = label_from_name(detail::require_str(obj, "label", line_no));
            if (obj.contains("family") && obj["family"].is_string())
                log.family = obj["family"].get<std::string>();
            continue;
        }
        RawEvent ev;
        ev.ts = detail::require_int(obj, "ts", line_no);
        if (ev.ts < 0) throw ParseError(line_no, "field 'ts' must be non-negative");
        ev.pid = detail::require_int(obj, "pid", line_no);
        ev.process_name = detail::require_str(obj, "process", line_no);
        ev.api = detail::require_str(obj, "api", line_no);
        if (ev.api.empty()) throw ParseError(line_no, "field 'api' must be non-empty");
        if (auto it = obj.find("args"); it != obj.end()) {
            if (!it->is_object()) throw ParseError(line_no, "field 'args' must be an object");
            ev.args = *it;
        }
        if (!log.events.empty() && ev.ts < log.events.back().ts) monotone = false;
        log.events.push_back(std::move(ev));
    }
    if (!monotone) {
        log_warn("trace '" + log.sample_id + "': timestamps out of order; applying stable sort");
        std::stable_sort(log.events.begin(), log.events.end(),
                         [](const RawEvent& a, const RawEvent& b) { return a.ts < b.ts; });
    }
    return log;
}

inline void write_trace_log(std::ostream& os, const TraceLog& log) {
    json header{{"sample_id", log.sample_id}, {"label", std::string(label_name(log.label))}};
    header["family"] = log.family.empty() ? json(nullptr) : json(log.family);
    os << header.dump() << '\n';
    for (const RawEvent& ev : log.events) {
        json rec{{"ts", ev.ts},
                 {"pid", ev.pid},
                 {"process", ev.process_name},
                 {"api", ev.api},
                 {"args", ev.args}};
        os << rec.dump() << '\n';
    }
}

/// Where each endpoint of a mapped call comes from.
///
///   caller          the process issuing the call (process + pid fields)
///   file            args["path"]
///   socket          args["addr"]         (ip:port text)
///   registry        args["key"]
///   url             args["url"]
///   target_process  args["target_name"] + args["target_pid"]
enum class EndpointRole { Caller, FileArg, SocketArg, RegistryArg, UrlArg, TargetProcess };

inline std::string_view role_name(EndpointRole r) {
    switch (r) {
    case EndpointRole::Caller: return "caller";
    case EndpointRole::FileArg: return "file";
    case EndpointRole::SocketArg: return "socket";
    case EndpointRole::RegistryArg: return "registry";
    case EndpointRole::UrlArg: return "url";
    case EndpointRole::TargetProcess: return "target_process";
    }
    return "?";
}

inline EndpointRole role_from_name(std::string_view s) {
    if (s == "caller") return EndpointRole::Caller;
    if (s == "file") return EndpointRole::FileArg;
    if (s == "socket") return EndpointRole::SocketArg;
    if (s == "registry") return EndpointRole::RegistryArg;
    if (s == "url") return EndpointRole::UrlArg;
    if (s == "target_process") return EndpointRole::TargetProcess;
    throw ConfigError("unknown endpoint role '" + std::string(s) + "'");
}

/// Declarative rule: which endpoints a call connects and which argument
/// holds the byte count.
struct CallMapping {
    EndpointRole src = EndpointRole::Caller;
    EndpointRole dst = EndpointRole::Caller;
    std::string size_arg;

    friend bool operator==(const CallMapping&, const CallMapping&) = default;
};

/// Table of call-name → flow rule. Calls absent from the table have no
/// data-flow semantics and interpret to nothing.
class MappingTable {
public:
    MappingTable() = default;
    explicit MappingTable(std::map<std::string, CallMapping> rules) : rules_(std::move(rules)) {}

    /// The built-in rules covering the core monitored calls.
    static MappingTable builtin() {
        using R = EndpointRole;
        std::map<std::string, CallMapping> m;
        m["ReadFile"] = {R::FileArg, R::Caller, "ToReadBytes"};
        m["WriteFile"] = {R::Caller, R::FileArg, "ToWriteBytes"};
        m["recv"] = {R::SocketArg, R::Caller, "ReceivedBytes"};
        m["send"] = {R::Caller, R::SocketArg, "SentBytes"};
        m["RegQueryValue"] = {R::RegistryArg, R::Caller, "ValueBytes"};
        m["RegSetValue"] = {R::Caller, R::RegistryArg, "ValueBytes"};
        m["CreateProcess"] = {R::Caller, R::TargetProcess, "ImageSize"};
        m["ReadProcessMemory"] = {R::TargetProcess, R::Caller, "ToReadBytes"};
        m["WriteProcessMemory"] = {R::Caller, R::TargetProcess, "ToWriteBytes"};
        m["UrlDownloadToFile"] = {R::UrlArg, R::Caller, "DownloadedBytes"};
        return MappingTable(std::move(m));
    }

    const std::map<std::string, CallMapping>& rules() const { return rules_; }

    const CallMapping* find(const std::string& api) const {
        auto it = rules_.find(api);
        return it == rules_.end() ? nullptr : &it->second;
    }

    json to_json() const {
        json out = json::object();
        for (const auto& [api, rule] : rules_) {
            out[api] = {{"src", std::string(role_name(rule.src))},
                        {"dst", std::string(role_name(rule.dst))},
                        {"size_arg", rule.size_arg}};
        }
        return out;
    }

    static MappingTable from_json(const json& doc) {
        if (!doc.is_object()) throw ConfigError("mapping table must be a JSON object");
        std::map<std::string, CallMapping> m;
        for (const auto& [api, rule] : doc.items()) {
            if (!rule.is_object() || !rule.contains("src") || !rule.contains("dst") ||
                !rule.contains("size_arg"))
                throw ConfigError("mapping rule for '" + api +
                                  "' needs src, dst, and size_arg fields");
            CallMapping cm;
            cm.src = role_from_name(rule["src"].get<std::string>());
            cm.dst = role_from_name(rule["dst"].get<std::string>());
            cm.size_arg = rule["size_arg"].get<std::string>();
            if (cm.src == cm.dst && cm.src != EndpointRole::TargetProcess &&
                cm.src != EndpointRole::Caller)
                throw ConfigError("mapping rule for '" + api + "' connects a role to itself");
            m[api] = std::move(cm);
        }
        return MappingTable(std::move(m));
    }

private:
    std::map<std::string, CallMapping> rules_;
};

namespace detail {

inline std::string arg_text(const json& args, const char* key, const std::string& api) {
    auto it = args.find(key);
    if (it == args.end())
        throw InterpretError(api + ": missing argument '" + std::string(key) + "'");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    throw InterpretError(api + ": argument '" + std::string(key) + "' must be text");
}

inline EntityRef resolve_endpoint(EndpointRole role, const RawEvent& ev) {
    switch (role) {
    case EndpointRole::Caller:
        return process_ref(ev.process_name, ev.pid);
    case EndpointRole::FileArg:
        return EntityRef{EntityType::File, arg_text(ev.args, "path", ev.api)};
    case EndpointRole::SocketArg:
        return EntityRef{EntityType::Socket, arg_text(ev.args, "addr", ev.api)};
    case EndpointRole::RegistryArg:
        return EntityRef{EntityType::Registry, arg_text(ev.args, "key", ev.api)};
    case EndpointRole::UrlArg:
        return EntityRef{EntityType::Url, arg_text(ev.args, "url", ev.api)};
    case EndpointRole::TargetProcess: {
        std::string name = arg_text(ev.args, "target_name", ev.api);
        auto it = ev.args.find("target_pid");
        if (it == ev.args.end() || !it->is_number_integer())
            throw InterpretError(ev.api + ": missing integer argument 'target_pid'");
        return process_ref(name, it->get<std::int64_t>());
    }
    }
    throw InterpretError(ev.api + ": unreachable endpoint role");
}

} // namespace detail

/// Map one raw call to its flow, if it has one. Unmapped calls and
/// zero-byte transfers yield nothing; a mapped call whose size argument is
/// absent or negative is an interpretation error. A call whose two endpoints
/// resolve to the same entity (e.g. a process reading its own memory) moves
/// no data between distinct entities and yields nothing.
inline std::optional<FlowEvent> interpret_event(const RawEvent& ev, const MappingTable& table) {
    const CallMapping* rule = table.find(ev.api);
    if (!rule) return std::nullopt;
    auto size_it = ev.args.find(rule->size_arg);
    if (size_it == ev.args.end())
        throw InterpretError(ev.api + ": missing size argument '" + rule->size_arg + "'");
    if (!size_it->is_number_integer())
        throw InterpretError(ev.api + ": size argument '" + rule->size_arg +
                             "' must be an integer");
    std::int64_t raw_size = size_it->get<std::int64_t>();
    if (raw_size < 0)
        throw InterpretError(ev.api + ": size argument '" + rule->size_arg + "' is negative");
    if (raw_size == 0) return std::nullopt;
    EntityRef src = detail::resolve_endpoint(rule->src, ev);
    EntityRef dst = detail::resolve_endpoint(rule->dst, ev);
    if (src == dst) return std::nullopt;
    return FlowEvent(std::move(src), std::move(dst), static_cast<std::uint64_t>(raw_size), ev.ts);
}

/// Interpret every call of a log in order, keeping only real flows.
inline std::vector<FlowEvent> interpret_log(const TraceLog& log, const MappingTable& table) {
    std::vector<FlowEvent> flows;
    flows.reserve(log.events.size());
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        try {
            if (auto fe = interpret_event(log.events[i], table)) flows.push_back(std::move(*fe));
        } catch (const InterpretError& e) {
            throw InterpretError("event " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return flows;
}

} // namespace qdfg
