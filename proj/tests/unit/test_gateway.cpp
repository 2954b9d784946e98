#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"
#include "conflictlens/gateway/gateway.hpp"
#include "harness.hpp"

using namespace conflictlens;
using namespace conflictlens::gateway;
using nlohmann::json;

namespace {

PromptTemplate echo_template() {
  PromptTemplate t;
  t.template_id = "echo_v1";
  t.system_text = "You answer in JSON.";
  t.user_text = "Say {{word}} about {{topic}}.";
  t.output_schema = json::parse(R"({"type":"object","required":["word"],"properties":{"word":{"type":"string"}}})");
  return t;
}

struct Rig {
  std::shared_ptr<MockProvider> mock;
  Gateway gw;
};

Rig rig(std::vector<ScriptedResponse> script, int budget = 2, OutboundFilter filter = {}) {
  auto mock = std::make_shared<MockProvider>(FixtureMap{{"echo_v1", std::move(script)}});
  return {mock, Gateway(TemplateRegistry({echo_template()}), mock, GatewayOptions{budget}, std::move(filter))};
}

const Bindings kBindings = {{"word", "hi"}, {"topic", "chores"}};

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::StorageError;
}

}  // namespace

TEST(Template, RendersAndListsPlaceholders) {
  const auto t = echo_template();
  EXPECT_EQ(t.placeholders(), (std::vector<std::string>{"topic", "word"}));
  const auto r = render(t, kBindings);
  EXPECT_EQ(r.user_text, "Say hi about chores.");
  EXPECT_EQ(r.system_text, "You answer in JSON.");
}

TEST(Template, MissingBindingThrows) {
  EXPECT_EQ(code_of([] { render(echo_template(), {{"word", "hi"}}); }), ErrorCode::MissingBinding);
}

TEST(Template, SubstitutedValuesAreNotRescanned) {
  const auto r = render(echo_template(), {{"word", "{{topic}}"}, {"topic", "x"}});
  EXPECT_EQ(r.user_text, "Say {{topic}} about x.");
}

TEST(Template, BundledRegistryHasEveryTemplate) {
  const auto reg = TemplateRegistry::load(std::filesystem::path(CONFLICTLENS_DATA_DIR) / "templates.json");
  for (const char* id : {"extract_transcript_v1", "estimate_rpcs_v1", "gen_dialogue_v1", "partner_turn_v1",
                         "rewrite_nvc_v1", "annotation_summary_v1"}) {
    EXPECT_TRUE(reg.contains(id)) << id;
  }
  EXPECT_EQ(code_of([&] { (void)reg.get("nope_v9"); }), ErrorCode::UnknownTemplate);
}

TEST(Gateway, ReturnsFirstValidReply) {
  auto r = rig({ScriptedResponse::ok({{"word", "hi"}})});
  EXPECT_EQ(r.gw.invoke("echo_v1", kBindings), (json{{"word", "hi"}}));
  EXPECT_EQ(r.mock->call_count("echo_v1"), 1u);
  ASSERT_EQ(r.gw.log().size(), 1u);
  EXPECT_EQ(r.gw.log().entries()[0].outcome, AttemptOutcome::ok);
}

TEST(Gateway, RetriesSchemaFailuresWithCorrection) {
  auto r = rig({ScriptedResponse::raw("not json"), ScriptedResponse::ok({{"other", 1}}),
                ScriptedResponse::raw("```json\n{\"word\":\"ok\"}\n```")});
  EXPECT_EQ(r.gw.invoke("echo_v1", kBindings), (json{{"word", "ok"}}));
  const auto reqs = r.mock->requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[0].attempt, 0);
  EXPECT_EQ(reqs[2].attempt, 2);
  EXPECT_EQ(reqs[0].user_text.find("rejected"), std::string::npos);
  EXPECT_NE(reqs[1].user_text.find("rejected"), std::string::npos);
  const auto log = r.gw.log().entries();
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].outcome, AttemptOutcome::schema_fail);
  EXPECT_EQ(log[1].outcome, AttemptOutcome::schema_fail);
  EXPECT_EQ(log[2].outcome, AttemptOutcome::ok);
}

TEST(Gateway, AttemptsNeverExceedOnePlusBudget) {
  for (int budget = 0; budget <= 4; ++budget) {
    auto r = rig({ScriptedResponse::raw("{}")}, budget);
    EXPECT_EQ(code_of([&] { r.gw.invoke("echo_v1", kBindings); }), ErrorCode::SchemaValidationFailed);
    EXPECT_EQ(r.mock->call_count("echo_v1"), static_cast<std::size_t>(budget + 1)) << budget;
    EXPECT_EQ(r.gw.log().size(), static_cast<std::size_t>(budget + 1));
  }
}

TEST(Gateway, TransportFailuresAreNotRetried) {
  auto r = rig({ScriptedResponse::transport_error(), ScriptedResponse::ok({{"word", "late"}})});
  EXPECT_EQ(code_of([&] { r.gw.invoke("echo_v1", kBindings); }), ErrorCode::TransportFailed);
  EXPECT_EQ(r.mock->call_count("echo_v1"), 1u);
  EXPECT_EQ(r.gw.log().entries()[0].outcome, AttemptOutcome::transport_fail);

  auto t = rig({ScriptedResponse::timeout()});
  EXPECT_EQ(code_of([&] { t.gw.invoke("echo_v1", kBindings); }), ErrorCode::Timeout);
  EXPECT_EQ(t.mock->call_count("echo_v1"), 1u);
}

TEST(Gateway, SchemaOverrideIsApplied) {
  auto r = rig({ScriptedResponse::ok({{"word", "toolong"}})}, 0);
  const json tight = {{"type", "object"}, {"properties", {{"word", {{"type", "string"}, {"maxLength", 3}}}}}};
  EXPECT_EQ(code_of([&] { r.gw.invoke("echo_v1", kBindings, std::optional<json>(tight)); }), ErrorCode::SchemaValidationFailed);
}

TEST(Gateway, FilterRewritesOutboundTextAndIsLogged) {
  auto r = rig({ScriptedResponse::ok({{"word", "hi"}})}, 2, [](std::string_view s) {
    std::string out(s);
    for (auto pos = out.find("chores"); pos != std::string::npos; pos = out.find("chores")) out.replace(pos, 6, "[X]");
    return out;
  });
  r.gw.invoke("echo_v1", kBindings);
  EXPECT_EQ(r.mock->requests()[0].user_text, "Say hi about [X].");
  const auto entry = r.gw.log().entries()[0];
  EXPECT_TRUE(entry.redaction_checked);
  EXPECT_EQ(entry.rendered_payload_hash, sha256_hex("You answer in JSON.\n\nSay hi about [X]."));
}

TEST(Gateway, LogSerializesAsJsonLines) {
  auto r = rig({ScriptedResponse::raw("x"), ScriptedResponse::ok({{"word", "a"}})});
  r.gw.invoke("echo_v1", kBindings);
  const auto lines = r.gw.log().to_jsonl();
  std::istringstream in(lines);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j.at("template_id"), "echo_v1");
    EXPECT_EQ(j.at("rendered_payload_hash").get<std::string>().size(), 64u);
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Gateway, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Gateway, ParseReplyToleratesFences) {
  EXPECT_EQ(parse_reply("  {\"a\":1} "), (json{{"a", 1}}));
  EXPECT_EQ(parse_reply("```json\n{\"a\":2}\n```"), (json{{"a", 2}}));
  EXPECT_FALSE(parse_reply("Sure! {\"a\":1}"));
}

TEST(MockProvider, RepeatsLastResponseAndRecordsRequests) {
  MockProvider mock({{"t", {ScriptedResponse::raw("1"), ScriptedResponse::raw("2")}}});
  ProviderRequest req;
  req.template_id = "t";
  EXPECT_EQ(mock.complete(req), "1");
  EXPECT_EQ(mock.complete(req), "2");
  EXPECT_EQ(mock.complete(req), "2");
  EXPECT_EQ(mock.call_count("t"), 3u);
  req.template_id = "missing";
  EXPECT_EQ(code_of([&] { mock.complete(req); }), ErrorCode::UnknownTemplate);
  mock.set_script("t", {ScriptedResponse::raw("3")});
  req.template_id = "t";
  EXPECT_EQ(mock.complete(req), "3");
}

TEST(MockProvider, FixtureDocumentRoundTrip) {
  const auto fixtures = harness::happy_fixtures();
  EXPECT_EQ(fixtures_to_json(fixtures_from_json(fixtures_to_json(fixtures))), fixtures_to_json(fixtures));
  const auto doc = json::parse(R"({"version":1,"fixtures":{"a":[{"kind":"timeout"},{"kind":"transport_error"},
      {"kind":"raw","text":"x"},{"kind":"ok","body":{"k":1}}]}})");
  const auto m = fixtures_from_json(doc);
  ASSERT_EQ(m.at("a").size(), 4u);
  EXPECT_EQ(m.at("a")[0].kind, ScriptedResponse::Kind::timeout);
  EXPECT_EQ(fixtures_to_json(m), doc);
  EXPECT_EQ(code_of([] { fixtures_from_json(json::parse(R"({"fixtures":{"a":[{"kind":"weird"}]}})")); }),
            ErrorCode::ConfigError);
}

TEST(RecordingProvider, CapturesOutcomesForReplay) {
  auto inner = std::make_shared<MockProvider>(
      FixtureMap{{"t", {ScriptedResponse::raw("{\"a\":1}"), ScriptedResponse::timeout()}}});
  RecordingProvider rec(inner);
  ProviderRequest req;
  req.template_id = "t";
  EXPECT_EQ(rec.complete(req), "{\"a\":1}");
  EXPECT_THROW(rec.complete(req), Error);
  const auto recorded = rec.recorded();
  ASSERT_EQ(recorded.at("t").size(), 2u);
  EXPECT_EQ(recorded.at("t")[1].kind, ScriptedResponse::Kind::timeout);
  MockProvider replay(recorded);
  EXPECT_EQ(json::parse(replay.complete(req)), (json{{"a", 1}}));
}

TEST(ProviderConfig, FileMustNotCarryTheKey) {
  harness::TempDir dir;
  const auto path = dir.path() / "provider.json";
  std::ofstream(path) << R"({"base_url":"https://example.invalid/v1","model_name":"m","api_key":"sk-123"})";
  EXPECT_EQ(code_of([&] { load_provider_config(path); }), ErrorCode::ConfigError);

  std::ofstream(path, std::ios::trunc) << R"({"base_url":"https://example.invalid/v1","model_name":"m","timeout_ms":500})";
  ::setenv("CONFLICTLENS_API_KEY", "from-env", 1);
  ::setenv("CONFLICTLENS_RETRY_BUDGET", "1", 1);
  const auto cfg = load_provider_config(path);
  ::unsetenv("CONFLICTLENS_API_KEY");
  ::unsetenv("CONFLICTLENS_RETRY_BUDGET");
  EXPECT_EQ(cfg.base_url, "https://example.invalid/v1");
  EXPECT_EQ(cfg.timeout_ms, 500);
  EXPECT_EQ(cfg.api_key, "from-env");
  EXPECT_EQ(cfg.retry_budget, 1);

  EXPECT_EQ(code_of([&] { load_provider_config(dir.path() / "missing.json"); }), ErrorCode::ConfigError);
}

TEST(HttpProvider, Base64) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
}

TEST(HttpProvider, NothingIsSentByTheOfflineSuite) { EXPECT_EQ(HttpProvider::requests_sent(), 0u); }

// ctest runs each discovered test in its own process, so the check above
// only sees itself. This one runs after every test in every process.
namespace {
class NoLiveProvider : public ::testing::Environment {
 public:
  void TearDown() override { EXPECT_EQ(HttpProvider::requests_sent(), 0u) << "a test reached a live provider"; }
};
[[maybe_unused]] auto* const kNoLiveProvider = ::testing::AddGlobalTestEnvironment(new NoLiveProvider);
}  // namespace
