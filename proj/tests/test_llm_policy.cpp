#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "support.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/llm_policy.hpp"

using namespace vsim;
using fixtures::error_of;

namespace {

// Chat-completions stub on an ephemeral port; `reply` decides each answer.
class StubEndpoint {
 public:
  explicit StubEndpoint(std::function<std::string(const json&)> reply, int delay_ms = 0) {
    server_.Post("/v1/chat/completions", [this, reply, delay_ms](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      json body = json::parse(req.body);
      last_request = body;
      if (req.has_header("Authorization")) last_auth = req.get_header_value("Authorization");
      if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply(body)}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubEndpoint() {
    server_.stop();
    thread_.join();
  }
  LlmEndpointConfig config() const {
    LlmEndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "stub";
    return c;
  }

  std::atomic<int> calls{0};
  json last_request;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

struct Turn {
  GeneratedRoom room;
  Observation obs;
  std::vector<Action> legal;
  PolicyMemory memory;

  Turn() {
    LevelConfig c;
    c.level = 1;
    c.seed = 7;
    room = generate(c);
    obs = observe(room.graph, "agent_1");
    legal = legal_actions(room.graph, "agent_1");
  }
  PolicyContext ctx(int tick = 0) { return PolicyContext{obs, room.goal, legal, tick}; }
};

}  // namespace

TEST(LlmPolicy, StubReplyBecomesAction) {
  StubEndpoint stub([](const json&) { return R"(Sure. {"type": "pick_up", "object": "key_1"} is my move.)"; });
  ::setenv("VSIM_LLM_API_KEY", "sekrit", 1);
  auto policy = llm_policy(stub.config());
  Turn t;
  Action a = policy->decide(t.ctx(), t.memory);
  ::unsetenv("VSIM_LLM_API_KEY");
  EXPECT_EQ(a, Action{act::PickUp{"key_1"}});
  EXPECT_EQ(stub.calls.load(), 1);
  EXPECT_EQ(stub.last_auth, "Bearer sekrit");
  EXPECT_EQ(stub.last_request.at("model"), "stub");
  const auto& msgs = stub.last_request.at("messages");
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].at("role"), "system");
  EXPECT_NE(msgs[1].at("content").get<std::string>().find(t.room.goal.description), std::string::npos);
  ASSERT_EQ(t.memory.transcript.size(), 1u);
}

TEST(LlmPolicy, ProseWithoutRetriesWaitsAndLogs) {
  StubEndpoint stub([](const json&) { return "I would look around the room first."; });
  LlmEndpointConfig cfg = stub.config();
  cfg.max_retries = 0;
  auto policy = llm_policy(cfg);
  Turn t;
  Action a = policy->decide(t.ctx(3), t.memory);
  EXPECT_EQ(a, Action{act::Wait{}});
  EXPECT_EQ(stub.calls.load(), 1);
  ASSERT_EQ(t.memory.log.size(), 1u);
  EXPECT_EQ(t.memory.log[0], "ParseFailure tick 3");
}

TEST(LlmPolicy, ParseFailureIsRetriedWithFeedback) {
  std::atomic<int> n{0};
  StubEndpoint stub([&](const json&) {
    return ++n == 1 ? std::string("hmm") : std::string(R"({"type": "read", "object": "note_1"})");
  });
  auto policy = llm_policy(stub.config());
  Turn t;
  EXPECT_EQ(policy->decide(t.ctx(), t.memory), Action{act::Read{"note_1"}});
  EXPECT_EQ(stub.calls.load(), 2);
  EXPECT_EQ(stub.last_request.at("messages").size(), 4u);
  EXPECT_TRUE(t.memory.log.empty());
}

TEST(LlmPolicy, TimeoutBecomesPolicyError) {
  StubEndpoint stub([](const json&) { return R"({"type": "wait"})"; }, 600);
  LlmEndpointConfig cfg = stub.config();
  cfg.timeout_seconds = 0.1;
  cfg.max_retries = 1;
  auto policy = llm_policy(cfg);
  Turn t;
  EXPECT_EQ(error_of([&] { policy->decide(t.ctx(), t.memory); }), ErrorCode::PolicyError);
  EXPECT_EQ(stub.calls.load(), 2);
}

TEST(LlmPolicy, TimeoutEndsEpisodeWithPolicyError) {
  StubEndpoint stub([](const json&) { return R"({"type": "wait"})"; }, 600);
  LlmEndpointConfig cfg = stub.config();
  cfg.timeout_seconds = 0.1;
  cfg.max_retries = 0;
  auto policy = llm_policy(cfg);
  Turn t;
  EpisodeConfig ec;
  ec.budget = 5;
  EpisodeResult r = run_episode(t.room.graph, t.room.goal, {{"agent_1", policy.get()}}, ec);
  EXPECT_EQ(r.trace.terminal, Terminal::policy_error);
}

TEST(LlmPolicy, TranscriptIsCapped) {
  auto policy = llm_policy(LlmEndpointConfig{}, "", [](const json&) { return std::string(R"({"type": "wait"})"); });
  Turn t;
  for (int tick = 0; tick < 12; ++tick) policy->decide(t.ctx(tick), t.memory);
  ASSERT_EQ(t.memory.transcript.size(), kTranscriptTurns);
  EXPECT_EQ(t.memory.transcript.front().at("tick"), 12 - static_cast<int>(kTranscriptTurns));
}

TEST(LlmPolicy, TemplateMatchesDocs) {
  std::ifstream in(std::string(VSIM_SOURCE_DIR) + "/docs/prompt_template.txt");
  ASSERT_TRUE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), default_prompt_template());
}

TEST(LlmPolicy, RenderSubstitutesKnownPlaceholders) {
  Turn t;
  std::string out = render_turn("tick={{tick}} goal={{goal}} keep={{mystery}}", t.ctx(4), t.memory);
  EXPECT_EQ(out, "tick=4 goal=" + t.room.goal.description + " keep={{mystery}}");
}

TEST(LlmPolicy, ParseActionReply) {
  EXPECT_EQ(parse_action_reply(R"(x {"type": "go_to", "room": "room_2"} y)"), Action{act::GoTo{"room_2"}});
  EXPECT_FALSE(parse_action_reply("no json").has_value());
  EXPECT_FALSE(parse_action_reply(R"({"type": "fly"})").has_value());
}

TEST(LlmConfig, Validation) {
  EXPECT_EQ(llm_config_from_json(json::object()).timeout_seconds, 60.0);
  EXPECT_EQ(error_of([] { llm_config_from_json({{"timeout_seconds", 0}}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of([] { llm_config_from_json({{"max_retries", -1}}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(error_of([] { llm_config_from_json({{"api_key", "x"}}); }), ErrorCode::SchemaError);
  LlmEndpointConfig c = llm_config_from_json({{"base_url", "http://h:1/v1"}, {"max_retries", 0}});
  EXPECT_EQ(llm_config_from_json(to_json(c)).base_url, "http://h:1/v1");
  EXPECT_FALSE(to_json(c).contains("api_key"));
}

TEST(LlmConfig, HttpsIsRejectedAtCallTime) {
  LlmEndpointConfig c;
  c.base_url = "https://example.invalid/v1";
  EXPECT_EQ(error_of([&] { http_transport(c)(json::object()); }), ErrorCode::EndpointError);
}
