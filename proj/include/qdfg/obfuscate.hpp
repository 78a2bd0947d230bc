#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qdfg/rng.hpp"
#include "qdfg/trace.hpp"
#include "qdfg/util.hpp"

namespace qdfg {

/// Knobs for the two trace transformations. reorder_prob is the per-position
/// swap chance, reorder_window the furthest distance an event may jump ahead.
/// inject_prob is the chance of inserting bogus calls after an event,
/// inject_max the most calls inserted at once.
struct ObfuscationConfig {
    double reorder_prob = 0.0;
    std::size_t reorder_window = 2;
    double inject_prob = 0.0;
    std::size_t inject_max = 0;
    std::vector<RawEvent> bogus_pool;
    std::uint64_t seed = 0;

    void validate() const {
        if (reorder_prob < 0.0 || reorder_prob > 1.0)
            throw ConfigError("reorder_prob must be in [0, 1]");
        if (inject_prob < 0.0 || inject_prob > 1.0)
            throw ConfigError("inject_prob must be in [0, 1]");
        if (reorder_window < 2) throw ConfigError("reorder_window must be >= 2");
        if (inject_prob > 0.0 && bogus_pool.empty())
            throw ConfigError("inject_prob > 0 requires a non-empty bogus pool");
        for (const RawEvent& ev : bogus_pool)
            if (ev.api.empty()) throw ConfigError("bogus pool event lacks an api name");
    }

    json to_json() const {
        json pool = json::array();
        for (const RawEvent& ev : bogus_pool)
            pool.push_back(json{{"api", ev.api}, {"args", ev.args}});
        return json{{"reorder_prob", reorder_prob}, {"reorder_window", reorder_window},
                    {"inject_prob", inject_prob},   {"inject_max", inject_max},
                    {"bogus_pool", std::move(pool)}, {"seed", seed}};
    }

    static ObfuscationConfig from_json(const json& j) {
        ObfuscationConfig c;
        if (j.contains("reorder_prob")) c.reorder_prob = j["reorder_prob"].get<double>();
        if (j.contains("reorder_window"))
            c.reorder_window = j["reorder_window"].get<std::size_t>();
        if (j.contains("inject_prob")) c.inject_prob = j["inject_prob"].get<double>();
        if (j.contains("inject_max")) c.inject_max = j["inject_max"].get<std::size_t>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("bogus_pool")) {
            for (const json& e : j["bogus_pool"]) {
                RawEvent ev;
                ev.api = e.at("api").get<std::string>();
                if (e.contains("args")) ev.args = e["args"];
                c.bogus_pool.push_back(std::move(ev));
            }
        }
        c.validate();
        return c;
    }
};

/// Default injection material: timer/no-flow noise plus small flows against
/// fresh temp files ("{n}" in a text argument becomes the injection number,
/// so every insertion touches a new file).
inline std::vector<RawEvent> default_bogus_pool() {
    auto make = [](std::string api, json args) {
        RawEvent ev;
        ev.api = std::move(api);
        ev.args = std::move(args);
        return ev;
    };
    return {
        make("GetTickCount", json::object()),
        make("Sleep", json{{"Milliseconds", 1}}),
        make("GetSystemTime", json::object()),
        make("WriteFile", json{{"path", "C:/Users/Public/tmp/noise{n}.tmp"}, {"ToWriteBytes", 512}}),
        make("ReadFile", json{{"path", "C:/Windows/System32/kernel32.dll"}, {"ToReadBytes", 256}}),
    };
}

/// Randomly push events forward: each position swaps, with probability
/// reorder_prob, with a uniformly chosen position at most reorder_window
/// ahead. After shuffling, events take over the timestamp of the slot they
/// landed in, so the log stays monotone and the perturbation is visible to
/// sequence-based classifiers. The event multiset — and therefore the graph
/// the log builds — is unchanged.
inline TraceLog reorder(const TraceLog& log, const ObfuscationConfig& cfg) {
    cfg.validate();
    TraceLog out = log;
    if (out.events.size() < 2 || cfg.reorder_prob == 0.0) return out;
    std::vector<std::int64_t> slots(out.events.size());
    for (std::size_t i = 0; i < out.events.size(); ++i) slots[i] = out.events[i].ts;
    Rng rng(cfg.seed, 0x7265ULL); // reorder stream
    for (std::size_t i = 0; i + 1 < out.events.size(); ++i) {
        if (!rng.bernoulli(cfg.reorder_prob)) continue;
        const std::size_t max_ahead = std::min(cfg.reorder_window, out.events.size() - 1 - i);
        const auto j = i + 1 + static_cast<std::size_t>(rng.below(max_ahead));
        std::swap(out.events[i], out.events[j]);
    }
    for (std::size_t i = 0; i < out.events.size(); ++i) out.events[i].ts = slots[i];
    return out;
}

/// Insert bogus calls: after each original event, with probability
/// inject_prob, add 1..inject_max pool picks with timestamps interpolated
/// toward the next event. Original events keep their order and timestamps.
inline TraceLog inject_bogus(const TraceLog& log, const ObfuscationConfig& cfg) {
    cfg.validate();
    TraceLog out = log;
    out.events.clear();
    if (cfg.inject_prob == 0.0 || cfg.inject_max == 0) {
        out.events = log.events;
        return out;
    }
    Rng rng(cfg.seed, 0x696eULL); // injection stream
    std::uint64_t injected = 0;
    auto instantiate = [&](const RawEvent& tmpl, const RawEvent& site, std::int64_t ts) {
        RawEvent ev = tmpl;
        ev.ts = ts;
        ev.pid = site.pid;
        ev.process_name = site.process_name;
        ++injected;
        for (auto& [key, val] : ev.args.items()) {
            if (!val.is_string()) continue;
            std::string s = val.get<std::string>();
            const std::string tag = "{n}";
            if (auto pos = s.find(tag); pos != std::string::npos) {
                s.replace(pos, tag.size(), std::to_string(injected));
                val = s;
            }
        }
        return ev;
    };
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const RawEvent& cur = log.events[i];
        out.events.push_back(cur);
        if (!rng.bernoulli(cfg.inject_prob)) continue;
        const auto m = static_cast<std::size_t>(
            rng.uniform_int(1, static_cast<std::int64_t>(cfg.inject_max)));
        const std::int64_t t0 = cur.ts;
        const std::int64_t t1 = i + 1 < log.events.size()
                                    ? log.events[i + 1].ts
                                    : cur.ts + static_cast<std::int64_t>(m) + 1;
        for (std::size_t k = 0; k < m; ++k) {
            const std::int64_t ts =
                t0 + (t1 - t0) * static_cast<std::int64_t>(k + 1) /
                         static_cast<std::int64_t>(m + 1);
            out.events.push_back(instantiate(rng.pick(cfg.bogus_pool), cur, ts));
        }
    }
    return out;
}

/// Reorder, then inject.
inline TraceLog obfuscate(const TraceLog& log, const ObfuscationConfig& cfg) {
    return inject_bogus(reorder(log, cfg), cfg);
}

/// Minimum insertions + deletions + substitutions turning token sequence a
/// into b (unit costs, two-row dynamic program).
inline std::uint64_t levenshtein(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::uint64_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::uint64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

} // namespace qdfg
