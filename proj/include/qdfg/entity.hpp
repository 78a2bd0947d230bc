#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "qdfg/util.hpp"

namespace qdfg {

/// Kinds of system entities a graph node can represent.
enum class EntityType { Process, File, Socket, Url, Registry };

inline char type_letter(EntityType t) {
    switch (t) {
    case EntityType::Process: return 'P';
    case EntityType::File: return 'F';
    case EntityType::Socket: return 'S';
    case EntityType::Url: return 'U';
    case EntityType::Registry: return 'R';
    }
    return '?';
}

inline std::optional<EntityType> type_from_letter(char c) {
    switch (c) {
    case 'P': return EntityType::Process;
    case 'F': return EntityType::File;
    case 'S': return EntityType::Socket;
    case 'U': return EntityType::Url;
    case 'R': return EntityType::Registry;
    default: return std::nullopt;
    }
}

/// Identity of a graph node: the (kind, name) pair.
///
/// Two references with the same kind and name denote the same node. Process
/// names carry the instance id ("chrome.exe#412") so a re-used image yields
/// distinct nodes.
struct EntityRef {
    EntityType kind{};
    std::string name;

    friend auto operator<=>(const EntityRef&, const EntityRef&) = default;

    /// Display form, e.g. "P:chrome.exe#412".
    std::string display() const { return std::string(1, type_letter(kind)) + ":" + name; }
};

inline EntityRef process_ref(std::string_view image, std::int64_t pid) {
    return EntityRef{EntityType::Process, std::string(image) + "#" + std::to_string(pid)};
}

/// Ground-truth class of a sample or a feature vector.
enum class Label { Benign, Malicious, Unknown };

inline std::string_view label_name(Label l) {
    switch (l) {
    case Label::Benign: return "benign";
    case Label::Malicious: return "malicious";
    case Label::Unknown: return "unknown";
    }
    return "unknown";
}

inline Label label_from_name(std::string_view s) {
    if (s == "benign") return Label::Benign;
    if (s == "malicious") return Label::Malicious;
    if (s == "unknown" || s.empty()) return Label::Unknown;
    throw Error("unknown label '" + std::string(s) + "'");
}

} // namespace qdfg
