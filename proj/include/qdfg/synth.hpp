#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/parallel.hpp"
#include "qdfg/rng.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

/// Behavior building blocks a synthetic family mixes.
enum class MotifKind {
    SelfReplication,     // uniform fan-out copies of the own image to files
    EncryptionSweep,     // strict read/encrypt/write alternation over documents
    PayloadDownload,     // recv -> drop payload file -> spawn it -> it beacons
    Exfiltration,        // read documents, push them to drop endpoints
    RegistryPersistence, // blob writes into autorun keys plus a dropper copy
    ProcessInjection,    // spawn a host process and write code into it
    OfficeMix,           // mixed document/registry/sync I/O (benign)
    ArchiveSweep,        // batch read-then-write backup runs (benign)
};

inline std::string_view motif_name(MotifKind k) {
    switch (k) {
    case MotifKind::SelfReplication: return "self_replication";
    case MotifKind::EncryptionSweep: return "encryption_sweep";
    case MotifKind::PayloadDownload: return "payload_download";
    case MotifKind::Exfiltration: return "exfiltration";
    case MotifKind::RegistryPersistence: return "registry_persistence";
    case MotifKind::ProcessInjection: return "process_injection";
    case MotifKind::OfficeMix: return "office_mix";
    case MotifKind::ArchiveSweep: return "archive_sweep";
    }
    return "?";
}

inline MotifKind motif_from_name(std::string_view s) {
    if (s == "self_replication") return MotifKind::SelfReplication;
    if (s == "encryption_sweep") return MotifKind::EncryptionSweep;
    if (s == "payload_download") return MotifKind::PayloadDownload;
    if (s == "exfiltration") return MotifKind::Exfiltration;
    if (s == "registry_persistence") return MotifKind::RegistryPersistence;
    if (s == "process_injection") return MotifKind::ProcessInjection;
    if (s == "office_mix") return MotifKind::OfficeMix;
    if (s == "archive_sweep") return MotifKind::ArchiveSweep;
    throw ConfigError("unknown motif kind '" + std::string(s) + "'");
}

/// One weighted motif: its activation weight, the log-normal parameters of
/// its characteristic byte size, and how many core operations one activation
/// performs.
struct MotifSpec {
    MotifKind kind = MotifKind::OfficeMix;
    double weight = 1.0;
    double size_mu = 9.0;
    double size_sigma = 0.5;
    std::size_t burst_lo = 6;
    std::size_t burst_hi = 14;

    json to_json() const {
        return json{{"kind", std::string(motif_name(kind))}, {"weight", weight},
                    {"size_mu", size_mu},                    {"size_sigma", size_sigma},
                    {"burst", json::array({burst_lo, burst_hi})}};
    }

    static MotifSpec from_json(const json& j) {
        MotifSpec m;
        m.kind = motif_from_name(j.at("kind").get<std::string>());
        if (j.contains("weight")) m.weight = j["weight"].get<double>();
        if (j.contains("size_mu")) m.size_mu = j["size_mu"].get<double>();
        if (j.contains("size_sigma")) m.size_sigma = j["size_sigma"].get<double>();
        if (j.contains("burst")) {
            m.burst_lo = j["burst"].at(0).get<std::size_t>();
            m.burst_hi = j["burst"].at(1).get<std::size_t>();
        }
        return m;
    }
};

/// A labeled trace family: which process images it runs, how long its traces
/// are, and which motifs it mixes.
struct FamilySpec {
    std::string name;
    Label label = Label::Malicious;
    std::vector<std::string> processes;
    std::size_t events_lo = 60;
    std::size_t events_hi = 140;
    std::size_t default_count = 100;
    std::vector<MotifSpec> motifs;

    void validate() const {
        if (name.empty()) throw ConfigError("family needs a name");
        if (label == Label::Unknown) throw ConfigError("family label must be a class label");
        if (processes.empty()) throw ConfigError("family needs process names");
        if (motifs.empty()) throw ConfigError("family needs motifs");
        if (events_lo == 0 || events_hi < events_lo)
            throw ConfigError("family event range invalid");
        double wsum = 0.0;
        for (const MotifSpec& m : motifs) {
            if (m.weight < 0.0) throw ConfigError("motif weight must be non-negative");
            if (m.size_mu <= 0.0 || m.size_sigma <= 0.0)
                throw ConfigError("motif size parameters must be positive");
            if (m.burst_lo == 0 || m.burst_hi < m.burst_lo)
                throw ConfigError("motif burst range invalid");
            wsum += m.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-9)
            throw ConfigError("motif weights of family '" + name + "' must sum to 1, got " +
                              format_double(wsum));
    }

    json to_json() const {
        json ms = json::array();
        for (const MotifSpec& m : motifs) ms.push_back(m.to_json());
        return json{{"name", name},
                    {"label", std::string(label_name(label))},
                    {"processes", processes},
                    {"events", json::array({events_lo, events_hi})},
                    {"count", default_count},
                    {"motifs", std::move(ms)}};
    }

    static FamilySpec from_json(const json& j) {
        FamilySpec f;
        f.name = j.at("name").get<std::string>();
        f.label = label_from_name(j.at("label").get<std::string>());
        f.processes = j.at("processes").get<std::vector<std::string>>();
        if (j.contains("events")) {
            f.events_lo = j["events"].at(0).get<std::size_t>();
            f.events_hi = j["events"].at(1).get<std::size_t>();
        }
        if (j.contains("count")) f.default_count = j["count"].get<std::size_t>();
        for (const json& m : j.at("motifs")) f.motifs.push_back(MotifSpec::from_json(m));
        f.validate();
        return f;
    }
};

inline std::vector<FamilySpec> families_from_json(const json& doc) {
    std::vector<FamilySpec> out;
    for (const json& j : doc.at("families")) out.push_back(FamilySpec::from_json(j));
    if (out.empty()) throw ConfigError("family file lists no families");
    return out;
}

inline json families_to_json(const std::vector<FamilySpec>& families) {
    json arr = json::array();
    for (const FamilySpec& f : families) arr.push_back(f.to_json());
    return json{{"families", std::move(arr)}};
}

namespace detail {

struct SynthProc {
    std::string name;
    std::int64_t pid = 0;
};

/// Appends raw events to a log under construction, advancing a shared clock
/// and handing out fresh names.
class TraceBuilder {
public:
    TraceBuilder(TraceLog& log, Rng& rng) : log_(log), rng_(rng), ts_(rng.uniform_int(1000, 9000)) {}

    std::uint64_t fresh() { return ++uniq_; }

    std::int64_t bytes(const MotifSpec& m) {
        const double v = rng_.lognormal(m.size_mu, m.size_sigma);
        return std::max<std::int64_t>(1, std::llround(v));
    }

    void add(const SynthProc& p, std::string api, json args) {
        RawEvent ev;
        ev.ts = next_ts();
        ev.pid = p.pid;
        ev.process_name = p.name;
        ev.api = std::move(api);
        ev.args = std::move(args);
        log_.events.push_back(std::move(ev));
    }

    void read(const SynthProc& p, const std::string& path, std::int64_t n) {
        add(p, "ReadFile", json{{"path", path}, {"ToReadBytes", n}});
    }
    void write(const SynthProc& p, const std::string& path, std::int64_t n) {
        add(p, "WriteFile", json{{"path", path}, {"ToWriteBytes", n}});
    }
    void send_to(const SynthProc& p, const std::string& addr, std::int64_t n) {
        add(p, "send", json{{"addr", addr}, {"SentBytes", n}});
    }
    void recv_from(const SynthProc& p, const std::string& addr, std::int64_t n) {
        add(p, "recv", json{{"addr", addr}, {"ReceivedBytes", n}});
    }
    void reg_query(const SynthProc& p, const std::string& key, std::int64_t n) {
        add(p, "RegQueryValue", json{{"key", key}, {"ValueBytes", n}});
    }
    void reg_set(const SynthProc& p, const std::string& key, std::int64_t n) {
        add(p, "RegSetValue", json{{"key", key}, {"ValueBytes", n}});
    }
    void spawn(const SynthProc& parent, const SynthProc& child, std::int64_t image_size) {
        add(parent, "CreateProcess",
            json{{"target_name", child.name}, {"target_pid", child.pid},
                 {"ImageSize", image_size}});
    }
    void write_memory(const SynthProc& p, const SynthProc& target, std::int64_t n) {
        add(p, "WriteProcessMemory",
            json{{"target_name", target.name}, {"target_pid", target.pid},
                 {"ToWriteBytes", n}});
    }

    /// Timer/status noise keeping call-name marginals comparable across
    /// families.
    void maybe_noise(const SynthProc& p, double prob = 0.25) {
        if (!rng_.bernoulli(prob)) return;
        switch (rng_.below(3)) {
        case 0: add(p, "GetTickCount", json::object()); break;
        case 1: add(p, "Sleep", json{{"Milliseconds", rng_.uniform_int(1, 30)}}); break;
        default: add(p, "GetSystemTime", json::object()); break;
        }
    }

    Rng& rng() { return rng_; }

private:
    std::int64_t next_ts() {
        ts_ += rng_.uniform_int(1, 40);
        return ts_;
    }

    TraceLog& log_;
    Rng& rng_;
    std::int64_t ts_ = 0;
    std::uint64_t uniq_ = 0;
};

struct LogState {
    SynthProc main;
    std::vector<SynthProc> office_procs; // benign only
    SynthProc archive_proc;              // benign only
    std::map<MotifKind, std::int64_t> base_size;
    std::uint64_t doc_user = 0;
};

inline std::string doc_path(LogState& st, TraceBuilder& tb) {
    return "C:/Users/u" + std::to_string(st.doc_user) + "/Documents/doc" +
           std::to_string(tb.fresh()) + ".docx";
}

inline void emit_self_replication(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    auto [it, created] = st.base_size.try_emplace(MotifKind::SelfReplication, 0);
    if (created) {
        it->second = tb.bytes(m);
        tb.read(st.main, "C:/ProgramData/" + st.main.name, it->second);
    }
    const std::int64_t s = it->second;
    const auto b = static_cast<std::size_t>(
        tb.rng().uniform_int(static_cast<std::int64_t>(m.burst_lo),
                             static_cast<std::int64_t>(m.burst_hi)));
    for (std::size_t j = 0; j < b; ++j) {
        tb.write(st.main, "C:/Windows/Temp/copy" + std::to_string(tb.fresh()) + ".exe", s);
        tb.maybe_noise(st.main);
    }
    // Re-register the launch point after every copy burst: half the stub
    // body is staged inline in the Run value.
    tb.reg_set(st.main, "HKCU/Software/Microsoft/Windows/Run/" + st.main.name,
               std::max<std::int64_t>(1, s / 2));
}

inline void emit_encryption_sweep(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    if (st.base_size.try_emplace(MotifKind::EncryptionSweep, 1).second)
        tb.reg_query(st.main, "HKCU/Software/Sess/Cfg", 48);
    const auto b = static_cast<std::size_t>(
        tb.rng().uniform_int(static_cast<std::int64_t>(m.burst_lo),
                             static_cast<std::int64_t>(m.burst_hi)));
    for (std::size_t j = 0; j < b; ++j) {
        const std::int64_t s = tb.bytes(m);
        const std::string doc = doc_path(st, tb);
        tb.read(st.main, doc, s);
        tb.write(st.main, doc + ".lck", std::max<std::int64_t>(1, s + s / 50));
        // Per-document recovery key blob stashed under one registry value.
        tb.reg_set(st.main, "HKCU/Software/Sess/Recovery",
                   std::max<std::int64_t>(1, s / 16));
        tb.maybe_noise(st.main);
        if (tb.rng().bernoulli(0.10))
            tb.send_to(st.main, "185.66.41.9:443", tb.rng().uniform_int(80, 240));
        if (tb.rng().bernoulli(0.08))
            tb.recv_from(st.main, "185.66.41.9:443", tb.rng().uniform_int(60, 200));
    }
}

inline void emit_payload_download(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    const std::int64_t total = tb.bytes(m);
    const std::string src = "198.51.100." + std::to_string(rng.uniform_int(2, 9)) + ":443";
    const std::int64_t chunk = std::max<std::int64_t>(1, total / 3);
    tb.recv_from(st.main, src, chunk);
    tb.maybe_noise(st.main);
    tb.recv_from(st.main, src, chunk);
    tb.recv_from(st.main, src, std::max<std::int64_t>(1, total - 2 * chunk));
    const std::string payload = "C:/Users/Public/ld" + std::to_string(tb.fresh()) + ".exe";
    tb.write(st.main, payload, total);
    SynthProc child{"ld" + std::to_string(tb.fresh()) + ".exe",
                    static_cast<std::int64_t>(20000 + tb.fresh())};
    tb.spawn(st.main, child, total);
    // Each dropped payload gets its own autostart entry carrying loader
    // configuration alongside the path.
    tb.reg_set(st.main, "HKCU/Software/Microsoft/Windows/Run/" + child.name,
               std::max<std::int64_t>(1, total / 16));
    tb.send_to(st.main, src, rng.uniform_int(90, 300));
    const auto beacons = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    const std::string c2 = "203.0.113." + std::to_string(rng.uniform_int(10, 60)) + ":8080";
    for (std::size_t j = 0; j < beacons; ++j) {
        tb.send_to(child, c2, rng.uniform_int(100, 600));
        tb.maybe_noise(child);
        if (rng.bernoulli(0.3)) tb.recv_from(child, c2, rng.uniform_int(60, 300));
        if (rng.bernoulli(0.35))
            tb.write(child, "C:/Users/Public/st" + std::to_string(tb.fresh()) + ".dat",
                     rng.uniform_int(200, 1200));
    }
}

inline void emit_exfiltration(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    static constexpr const char* drops[] = {"192.0.2.15:8443", "192.0.2.16:8443",
                                            "192.0.2.31:9090", "192.0.2.44:8443"};
    const auto b = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    if (st.base_size.try_emplace(MotifKind::Exfiltration, 1).second)
        tb.reg_query(st.main, "HKCU/Software/Policy/Scope", 96);
    for (std::size_t j = 0; j < b; ++j) {
        const std::int64_t s = tb.bytes(m);
        tb.read(st.main, doc_path(st, tb), s);
        tb.send_to(st.main, drops[rng.below(4)], s);
        // A sliver of every harvested document lingers in the staging cache.
        tb.reg_set(st.main, "HKCU/Software/Policy/Cache",
                   std::max<std::int64_t>(1, s / 16));
        tb.maybe_noise(st.main);
    }
}

inline void emit_registry_persistence(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    const auto b = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    for (std::size_t j = 0; j < b; ++j) {
        tb.reg_set(st.main,
                   "HKCU/Software/Microsoft/Windows/Run/v" + std::to_string(tb.fresh()),
                   tb.bytes(m));
        tb.maybe_noise(st.main);
        if (rng.bernoulli(0.25))
            tb.reg_query(st.main, "HKLM/System/Setup/State", rng.uniform_int(32, 200));
    }
    if (rng.bernoulli(0.6))
        tb.write(st.main, "C:/ProgramData/upd" + std::to_string(tb.fresh()) + ".dll",
                 std::max<std::int64_t>(1, tb.bytes(m) / 4));
    if (rng.bernoulli(0.15))
        tb.send_to(st.main, "198.51.100.77:80", rng.uniform_int(80, 260));
}

inline void emit_process_injection(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    SynthProc host{"svchost.exe", static_cast<std::int64_t>(30000 + tb.fresh())};
    tb.spawn(st.main, host, rng.uniform_int(40'000, 70'000));
    const auto chunks = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    for (std::size_t j = 0; j < chunks; ++j) {
        const std::int64_t n = tb.bytes(m);
        tb.write_memory(st.main, host, n);
        // Shellcode chunks are mirrored into a COM-hijack value so the
        // implant survives the host process.
        tb.reg_set(st.main, "HKLM/Software/Classes/CLSID/" + st.main.name,
                   std::max<std::int64_t>(1, n / 16));
        tb.maybe_noise(st.main);
    }
    const std::string c2 = "203.0.113." + std::to_string(rng.uniform_int(70, 99)) + ":4444";
    const auto acts = static_cast<std::size_t>(rng.uniform_int(3, 7));
    for (std::size_t j = 0; j < acts; ++j) {
        tb.send_to(host, c2, rng.uniform_int(150, 900));
        if (rng.bernoulli(0.35))
            tb.write(host, "C:/Windows/Temp/h" + std::to_string(tb.fresh()) + ".log",
                     rng.uniform_int(100, 700));
        tb.maybe_noise(host);
    }
}

inline void emit_office_mix(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    const SynthProc& p = st.office_procs[static_cast<std::size_t>(
        rng.below(st.office_procs.size()))];
    const auto ops = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    for (std::size_t j = 0; j < ops; ++j) {
        const auto roll = rng.below(100);
        if (roll < 30) {
            tb.read(p, doc_path(st, tb), tb.bytes(m));
        } else if (roll < 58) {
            tb.write(p, doc_path(st, tb), tb.bytes(m));
        } else if (roll < 66) {
            tb.reg_query(p, "HKCU/Software/Office/Recent/f" + std::to_string(rng.below(6)),
                         rng.uniform_int(40, 400));
        } else if (roll < 72) {
            tb.reg_set(p, "HKCU/Software/Office/MRU/m" + std::to_string(rng.below(4)),
                       rng.uniform_int(40, 260));
        } else if (roll < 79) {
            tb.send_to(p, "104.16.32." + std::to_string(rng.uniform_int(2, 6)) + ":443",
                       rng.uniform_int(800, 9000));
        } else if (roll < 85) {
            tb.recv_from(p, "104.16.32." + std::to_string(rng.uniform_int(2, 6)) + ":443",
                         rng.uniform_int(1000, 15000));
        } else {
            tb.maybe_noise(p, 1.0);
        }
    }
    if (rng.bernoulli(0.06) && st.office_procs.size() >= 2)
        tb.spawn(st.office_procs.front(), st.office_procs[1],
                 rng.uniform_int(150'000, 400'000));
}

inline void emit_archive_sweep(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    Rng& rng = tb.rng();
    const SynthProc& p = st.archive_proc;
    const auto b = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(m.burst_lo),
                        static_cast<std::int64_t>(m.burst_hi)));
    std::vector<std::int64_t> sizes(b);
    std::vector<std::string> docs(b);
    for (std::size_t j = 0; j < b; ++j) {
        sizes[j] = tb.bytes(m);
        docs[j] = doc_path(st, tb);
        tb.read(p, docs[j], sizes[j]);
        tb.maybe_noise(p, 0.15);
    }
    std::int64_t swept = 0;
    for (std::size_t j = 0; j < b; ++j) {
        tb.write(p, "D:/backup/bk" + std::to_string(tb.fresh()) + ".bak", sizes[j]);
        swept += sizes[j];
        tb.maybe_noise(p, 0.15);
    }
    // Every sweep ends with an incremental off-site sync of what changed.
    tb.send_to(p, "104.16.80.2:443", std::max<std::int64_t>(1, swept / 4));
}

inline void emit_motif(TraceBuilder& tb, const MotifSpec& m, LogState& st) {
    switch (m.kind) {
    case MotifKind::SelfReplication: emit_self_replication(tb, m, st); break;
    case MotifKind::EncryptionSweep: emit_encryption_sweep(tb, m, st); break;
    case MotifKind::PayloadDownload: emit_payload_download(tb, m, st); break;
    case MotifKind::Exfiltration: emit_exfiltration(tb, m, st); break;
    case MotifKind::RegistryPersistence: emit_registry_persistence(tb, m, st); break;
    case MotifKind::ProcessInjection: emit_process_injection(tb, m, st); break;
    case MotifKind::OfficeMix: emit_office_mix(tb, m, st); break;
    case MotifKind::ArchiveSweep: emit_archive_sweep(tb, m, st); break;
    }
}

} // namespace detail

/// Generate `count` labeled traces for one family. Deterministic in
/// (spec, count, seed); each log draws from its own substream, so generation
/// can run in parallel without changing the corpus.
inline std::vector<TraceLog> generate(const FamilySpec& spec, std::size_t count,
                                      std::uint64_t seed, unsigned jobs = 1) {
    spec.validate();
    if (count == 0) throw ConfigError("count must be >= 1");
    std::vector<TraceLog> logs(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        Rng rng = Rng(seed, 0x53594eULL).fork(i);
        TraceLog log;
        log.sample_id = spec.name + "-" + std::to_string(i);
        log.label = spec.label;
        log.family = spec.name;
        detail::TraceBuilder tb(log, rng);
        detail::LogState st;
        st.doc_user = rng.uniform_int(1, 400);
        st.main = {spec.processes[static_cast<std::size_t>(rng.below(spec.processes.size()))],
                   rng.uniform_int(100, 9999)};
        if (spec.label == Label::Benign) {
            std::vector<std::string> pool = spec.processes;
            rng.shuffle(pool);
            const auto lo = std::min<std::size_t>(2, pool.size());
            const auto hi = std::min<std::size_t>(3, pool.size());
            const auto nprocs = static_cast<std::size_t>(rng.uniform_int(
                static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
            for (std::size_t p = 0; p < nprocs; ++p)
                st.office_procs.push_back({pool[p], rng.uniform_int(100, 9999)});
            st.archive_proc = st.office_procs.back();
            st.main = st.office_procs.front();
        }
        const auto target = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(spec.events_lo),
                            static_cast<std::int64_t>(spec.events_hi)));
        while (log.events.size() < target) {
            double roll = rng.uniform_real();
            const MotifSpec* pick = &spec.motifs.back();
            for (const MotifSpec& m : spec.motifs) {
                if (roll < m.weight) {
                    pick = &m;
                    break;
                }
                roll -= m.weight;
            }
            detail::emit_motif(tb, *pick, st);
        }
        logs[i] = std::move(log);
    });
    return logs;
}

/// Generate the whole corpus: every family at its default count (or a
/// uniform override), each family on its own seed substream.
inline std::vector<TraceLog> generate_corpus(const std::vector<FamilySpec>& families,
                                             std::size_t count_override, std::uint64_t seed,
                                             unsigned jobs = 1) {
    if (families.empty()) throw ConfigError("corpus needs at least one family");
    std::vector<TraceLog> out;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const std::size_t n =
            count_override > 0 ? count_override : families[fi].default_count;
        const std::uint64_t family_seed = Rng(seed, 0x464d4cULL).fork(fi).next_u64();
        std::vector<TraceLog> logs = generate(families[fi], n, family_seed, jobs);
        for (TraceLog& log : logs) out.push_back(std::move(log));
    }
    return out;
}

/// The stock corpus: six malicious families plus a benign workload family.
inline std::vector<FamilySpec> default_families() {
    auto motif = [](MotifKind k, double w, double mu, double sigma, std::size_t lo,
                    std::size_t hi) {
        MotifSpec m;
        m.kind = k;
        m.weight = w;
        m.size_mu = mu;
        m.size_sigma = sigma;
        m.burst_lo = lo;
        m.burst_hi = hi;
        return m;
    };
    std::vector<FamilySpec> out;

    FamilySpec replicant;
    replicant.name = "replicant";
    replicant.label = Label::Malicious;
    replicant.processes = {"rplsvc.exe", "mirun.exe"};
    replicant.events_lo = 60;
    replicant.events_hi = 130;
    replicant.default_count = 110;
    replicant.motifs = {motif(MotifKind::SelfReplication, 1.0, 9.4, 0.25, 8, 18)};
    out.push_back(std::move(replicant));

    FamilySpec cryptolock;
    cryptolock.name = "cryptolock";
    cryptolock.label = Label::Malicious;
    cryptolock.processes = {"crlk.exe", "udsk.exe"};
    cryptolock.events_lo = 80;
    cryptolock.events_hi = 160;
    cryptolock.default_count = 110;
    cryptolock.motifs = {motif(MotifKind::EncryptionSweep, 1.0, 11.3, 1.1, 10, 22)};
    out.push_back(std::move(cryptolock));

    FamilySpec netdrop;
    netdrop.name = "netdrop";
    netdrop.label = Label::Malicious;
    netdrop.processes = {"wupdsvc.exe", "bitshost.exe"};
    netdrop.events_lo = 50;
    netdrop.events_hi = 110;
    netdrop.default_count = 110;
    netdrop.motifs = {motif(MotifKind::PayloadDownload, 1.0, 12.2, 0.5, 6, 12)};
    out.push_back(std::move(netdrop));

    FamilySpec spybeam;
    spybeam.name = "spybeam";
    spybeam.label = Label::Malicious;
    spybeam.processes = {"spybm.exe", "kmon.exe"};
    spybeam.events_lo = 60;
    spybeam.events_hi = 120;
    spybeam.default_count = 110;
    spybeam.motifs = {motif(MotifKind::Exfiltration, 1.0, 10.6, 0.8, 8, 16)};
    out.push_back(std::move(spybeam));

    FamilySpec regforge;
    regforge.name = "regforge";
    regforge.label = Label::Malicious;
    regforge.processes = {"rgfrg.exe", "persistd.exe"};
    regforge.events_lo = 50;
    regforge.events_hi = 110;
    regforge.default_count = 110;
    regforge.motifs = {motif(MotifKind::RegistryPersistence, 1.0, 9.5, 0.8, 6, 14)};
    out.push_back(std::move(regforge));

    FamilySpec hollowman;
    hollowman.name = "hollowman";
    hollowman.label = Label::Malicious;
    hollowman.processes = {"hollwm.exe", "injsvc.exe"};
    hollowman.events_lo = 50;
    hollowman.events_hi = 110;
    hollowman.default_count = 110;
    hollowman.motifs = {motif(MotifKind::ProcessInjection, 1.0, 11.2, 0.6, 3, 6)};
    out.push_back(std::move(hollowman));

    FamilySpec workday;
    workday.name = "workday";
    workday.label = Label::Benign;
    workday.processes = {"winword.exe", "excel.exe", "outlook.exe",
                         "chrome.exe",  "explorer.exe", "onenote.exe"};
    workday.events_lo = 70;
    workday.events_hi = 150;
    workday.default_count = 340;
    workday.motifs = {motif(MotifKind::OfficeMix, 0.7, 9.3, 0.5, 10, 20),
                      motif(MotifKind::ArchiveSweep, 0.3, 9.2, 0.3, 8, 16)};
    out.push_back(std::move(workday));

    return out;
}

} // namespace qdfg
