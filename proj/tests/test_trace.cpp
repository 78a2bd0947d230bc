// Trace parsing, serialization, and call-to-flow interpretation.

#include <sstream>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace qdfg;
using testutil::raw_event;

namespace {

TraceLog parse_text(const std::string& text) {
    std::istringstream is(text);
    return parse_trace_log(is);
}

} // namespace

TEST(TraceParse, HeaderAndEvents) {
    const TraceLog log = parse_text(
        R"({"sample_id":"s1","label":"malicious","family":"fam"})"
        "\n"
        R"({"ts":1,"pid":4,"process":"a.exe","api":"ReadFile","args":{"path":"f","ToReadBytes":10}})"
        "\n"
        R"({"ts":2,"pid":4,"process":"a.exe","api":"NoOp"})"
        "\n");
    EXPECT_EQ(log.sample_id, "s1");
    EXPECT_EQ(log.label, Label::Malicious);
    EXPECT_EQ(log.family, "fam");
    ASSERT_EQ(log.events.size(), 2u);
    EXPECT_EQ(log.events[0].api, "ReadFile");
    EXPECT_EQ(log.events[0].args.at("ToReadBytes").get<int>(), 10);
    EXPECT_EQ(log.events[1].args, json::object());
}

TEST(TraceParse, HeaderIsOptional) {
    const TraceLog log =
        parse_text(R"({"ts":1,"pid":4,"process":"a.exe","api":"X"})" "\n");
    EXPECT_EQ(log.sample_id, "");
    EXPECT_EQ(log.label, Label::Unknown);
    ASSERT_EQ(log.events.size(), 1u);
}

TEST(TraceParse, BlankLinesAndCrlf) {
    const TraceLog log = parse_text(
        "\n"
        "{\"sample_id\":\"s\"}\r\n"
        "\n"
        "{\"ts\":1,\"pid\":1,\"process\":\"p\",\"api\":\"A\"}\r\n");
    EXPECT_EQ(log.sample_id, "s");
    EXPECT_EQ(log.events.size(), 1u);
}

TEST(TraceParse, ErrorsCarryLineNumbers) {
    const auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream is(text);
        try {
            parse_trace_log(is);
        } catch (const ParseError& e) {
            return e.line;
        }
        return 0;
    };
    EXPECT_EQ(line_of("{\"sample_id\":\"s\"}\nnot json\n"), 2u);
    EXPECT_EQ(line_of("{\"sample_id\":\"s\"}\n\n[1,2]\n"), 3u);
    EXPECT_EQ(line_of("{\"ts\":-1,\"pid\":1,\"process\":\"p\",\"api\":\"A\"}\n"), 1u);
    EXPECT_EQ(line_of("{\"ts\":1,\"pid\":1,\"process\":\"p\",\"api\":\"\"}\n"), 1u);
    EXPECT_EQ(line_of("{\"ts\":1,\"pid\":1,\"process\":\"p\"}\n"), 1u);
    EXPECT_EQ(line_of("{\"ts\":1,\"pid\":1,\"process\":\"p\",\"api\":\"A\",\"args\":3}\n"), 1u);
    EXPECT_EQ(line_of("{\"ts\":\"x\",\"pid\":1,\"process\":\"p\",\"api\":\"A\"}\n"), 1u);
}

TEST(TraceParse, NonMonotoneTimestampsAreStableSorted) {
    const TraceLog log = parse_text(
        "{\"sample_id\":\"s\"}\n"
        "{\"ts\":5,\"pid\":1,\"process\":\"p\",\"api\":\"B\"}\n"
        "{\"ts\":1,\"pid\":1,\"process\":\"p\",\"api\":\"A\"}\n"
        "{\"ts\":5,\"pid\":1,\"process\":\"p\",\"api\":\"C\"}\n");
    ASSERT_EQ(log.events.size(), 3u);
    EXPECT_EQ(log.events[0].api, "A");
    EXPECT_EQ(log.events[1].api, "B"); // stable: B before C at equal ts
    EXPECT_EQ(log.events[2].api, "C");
}

TEST(TraceRoundTrip, WriteThenParse) {
    TraceLog log;
    log.sample_id = "rt";
    log.label = Label::Benign;
    log.family = "workload";
    log.events.push_back(raw_event(1, 10, "a.exe", "ReadFile",
                                   json{{"path", "f"}, {"ToReadBytes", 9}}));
    log.events.push_back(raw_event(2, 10, "a.exe", "send",
                                   json{{"addr", "1.2.3.4:80"}, {"SentBytes", 2}}));
    const TraceLog back = parse_text(testutil::serialize_trace(log));
    EXPECT_EQ(back.sample_id, log.sample_id);
    EXPECT_EQ(back.label, log.label);
    EXPECT_EQ(back.family, log.family);
    EXPECT_EQ(back.events, log.events);
}

TEST(TraceRoundTrip, EmptyFamilySerializesAsNull) {
    TraceLog log;
    log.sample_id = "x";
    const std::string text = testutil::serialize_trace(log);
    EXPECT_NE(text.find("\"family\":null"), std::string::npos);
    EXPECT_EQ(parse_text(text).family, "");
}

// ---------------------------------------------------------------------------
// Labels and roles
// ---------------------------------------------------------------------------

TEST(Labels, NamesRoundTrip) {
    EXPECT_EQ(label_from_name("benign"), Label::Benign);
    EXPECT_EQ(label_from_name("malicious"), Label::Malicious);
    EXPECT_EQ(label_from_name(""), Label::Unknown);
    EXPECT_EQ(label_from_name("unknown"), Label::Unknown);
    EXPECT_THROW(label_from_name("weird"), Error);
    EXPECT_EQ(label_from_name(std::string(label_name(Label::Malicious))), Label::Malicious);
}

TEST(Roles, NamesRoundTrip) {
    for (EndpointRole r : {EndpointRole::Caller, EndpointRole::FileArg, EndpointRole::SocketArg,
                           EndpointRole::RegistryArg, EndpointRole::UrlArg,
                           EndpointRole::TargetProcess})
        EXPECT_EQ(role_from_name(std::string(role_name(r))), r);
    EXPECT_THROW(role_from_name("nope"), Error);
}

// ---------------------------------------------------------------------------
// Mapping table and interpretation
// ---------------------------------------------------------------------------

TEST(Mapping, BuiltinJsonRoundTrip) {
    const MappingTable t = MappingTable::builtin();
    const MappingTable back = MappingTable::from_json(t.to_json());
    EXPECT_EQ(back.rules().size(), t.rules().size());
    for (const auto& [api, rule] : t.rules()) {
        const CallMapping* m = back.find(api);
        ASSERT_NE(m, nullptr) << api;
        EXPECT_EQ(*m, rule);
    }
}

TEST(Mapping, FromJsonValidation) {
    EXPECT_THROW(MappingTable::from_json(json::array()), ConfigError);
    EXPECT_THROW(MappingTable::from_json(json{{"X", json{{"src", "caller"}}}}), ConfigError);
    EXPECT_THROW(MappingTable::from_json(json{{"X", json{{"src", "file"},
                                                         {"dst", "file"},
                                                         {"size_arg", "N"}}}}),
                 ConfigError);
}

namespace {

std::optional<FlowEvent> interp(const RawEvent& ev) {
    return interpret_event(ev, MappingTable::builtin());
}

} // namespace

TEST(Interpret, ReadFileFlowsFileToCaller) {
    const auto f = interp(raw_event(3, 7, "a.exe", "ReadFile",
                                    json{{"path", "C:/f.txt"}, {"ToReadBytes", 64}}));
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->src, (EntityRef{EntityType::File, "C:/f.txt"}));
    EXPECT_EQ(f->dst, process_ref("a.exe", 7));
    EXPECT_EQ(f->size, 64u);
    EXPECT_EQ(f->t, 3);
}

TEST(Interpret, WriteFileFlowsCallerToFile) {
    const auto f = interp(raw_event(1, 7, "a.exe", "WriteFile",
                                    json{{"path", "o"}, {"ToWriteBytes", 5}}));
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->src, process_ref("a.exe", 7));
    EXPECT_EQ(f->dst, (EntityRef{EntityType::File, "o"}));
}

TEST(Interpret, AllBuiltinCallsResolve) {
    const std::vector<RawEvent> events{
        raw_event(1, 2, "p.exe", "ReadFile", json{{"path", "f"}, {"ToReadBytes", 1}}),
        raw_event(2, 2, "p.exe", "WriteFile", json{{"path", "f"}, {"ToWriteBytes", 2}}),
        raw_event(3, 2, "p.exe", "recv", json{{"addr", "a:1"}, {"ReceivedBytes", 3}}),
        raw_event(4, 2, "p.exe", "send", json{{"addr", "a:1"}, {"SentBytes", 4}}),
        raw_event(5, 2, "p.exe", "RegQueryValue", json{{"key", "HK/x"}, {"ValueBytes", 5}}),
        raw_event(6, 2, "p.exe", "RegSetValue", json{{"key", "HK/x"}, {"ValueBytes", 6}}),
        raw_event(7, 2, "p.exe", "CreateProcess",
                  json{{"target_name", "c.exe"}, {"target_pid", 9}, {"ImageSize", 7}}),
        raw_event(8, 2, "p.exe", "ReadProcessMemory",
                  json{{"target_name", "c.exe"}, {"target_pid", 9}, {"ToReadBytes", 8}}),
        raw_event(9, 2, "p.exe", "WriteProcessMemory",
                  json{{"target_name", "c.exe"}, {"target_pid", 9}, {"ToWriteBytes", 9}}),
        raw_event(10, 2, "p.exe", "UrlDownloadToFile",
                  json{{"url", "http://x"}, {"DownloadedBytes", 10}}),
    };
    TraceLog log;
    log.events = events;
    const std::vector<FlowEvent> flows = interpret_log(log, MappingTable::builtin());
    ASSERT_EQ(flows.size(), events.size());
    for (std::size_t i = 0; i < flows.size(); ++i)
        EXPECT_EQ(flows[i].size, i + 1) << "event " << i;
    // Spot-check endpoint kinds.
    EXPECT_EQ(flows[2].src.kind, EntityType::Socket);
    EXPECT_EQ(flows[4].src.kind, EntityType::Registry);
    EXPECT_EQ(flows[6].dst, process_ref("c.exe", 9));
    EXPECT_EQ(flows[9].src.kind, EntityType::Url);
}

TEST(Interpret, UnmappedCallIsSilentlySkipped) {
    EXPECT_FALSE(interp(raw_event(1, 2, "p.exe", "GetTickCount")).has_value());
}

TEST(Interpret, ZeroSizeFlowIsSkipped) {
    EXPECT_FALSE(interp(raw_event(1, 2, "p.exe", "ReadFile",
                                  json{{"path", "f"}, {"ToReadBytes", 0}}))
                     .has_value());
}

TEST(Interpret, SelfFlowIsSkipped) {
    // A process "creating" itself resolves src == dst; no flow, no error.
    EXPECT_FALSE(interp(raw_event(1, 2, "p.exe", "CreateProcess",
                                  json{{"target_name", "p.exe"}, {"target_pid", 2},
                                       {"ImageSize", 10}}))
                     .has_value());
}

TEST(Interpret, MissingOrBadSizeArgThrows) {
    EXPECT_THROW((void)interp(raw_event(1, 2, "p.exe", "ReadFile", json{{"path", "f"}})),
                 InterpretError);
    EXPECT_THROW((void)interp(raw_event(1, 2, "p.exe", "ReadFile",
                                        json{{"path", "f"}, {"ToReadBytes", "lots"}})),
                 InterpretError);
    EXPECT_THROW((void)interp(raw_event(1, 2, "p.exe", "ReadFile",
                                        json{{"path", "f"}, {"ToReadBytes", -4}})),
                 InterpretError);
}

TEST(Interpret, MissingEndpointArgThrows) {
    EXPECT_THROW((void)interp(raw_event(1, 2, "p.exe", "ReadFile", json{{"ToReadBytes", 4}})),
                 InterpretError);
}

TEST(Interpret, LogErrorsNameTheEvent) {
    TraceLog log;
    log.events.push_back(raw_event(1, 2, "p.exe", "ReadFile",
                                   json{{"path", "f"}, {"ToReadBytes", 1}}));
    log.events.push_back(raw_event(2, 2, "p.exe", "ReadFile", json{{"path", "f"}}));
    try {
        interpret_log(log, MappingTable::builtin());
        FAIL() << "expected InterpretError";
    } catch (const InterpretError& e) {
        EXPECT_NE(std::string(e.what()).find("event 2"), std::string::npos);
    }
}

TEST(Interpret, CustomMappingTable) {
    const MappingTable t = MappingTable::from_json(json{
        {"CopyBits", json{{"src", "caller"}, {"dst", "socket"}, {"size_arg", "N"}}}});
    const auto f = interpret_event(raw_event(1, 3, "z.exe", "CopyBits",
                                             json{{"addr", "h:1"}, {"N", 11}}),
                                   t);
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->dst, (EntityRef{EntityType::Socket, "h:1"}));
    EXPECT_EQ(f->size, 11u);
    // The builtin rules are not consulted.
    EXPECT_FALSE(interpret_event(raw_event(1, 3, "z.exe", "ReadFile",
                                           json{{"path", "f"}, {"ToReadBytes", 1}}),
                                 t)
                     .has_value());
}

TEST(Entities, DisplayAndProcessRef) {
    EXPECT_EQ(process_ref("chrome.exe", 412).display(), "P:chrome.exe#412");
    EXPECT_EQ((EntityRef{EntityType::Registry, "HK/k"}.display()), "R:HK/k");
    for (char c : std::string("PFSUR")) EXPECT_TRUE(type_from_letter(c).has_value());
    EXPECT_FALSE(type_from_letter('Z').has_value());
}
