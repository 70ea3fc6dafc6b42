#include "vsim/llm_policy.hpp"

#include <cstdlib>
#include <map>

#include "httplib.h"
#include "json_util.hpp"
#include "vsim/error.hpp"

namespace vsim {

using detail::check_keys;

LlmEndpointConfig llm_config_from_json(const json& doc) {
  check_keys(doc, "", {}, {"base_url", "model", "api_key_env", "temperature", "max_tokens", "timeout_seconds",
                           "max_retries"});
  LlmEndpointConfig c;
  if (auto v = detail::opt_string(doc, "base_url", "")) c.base_url = *v;
  if (auto v = detail::opt_string(doc, "model", "")) c.model = *v;
  if (auto v = detail::opt_string(doc, "api_key_env", "")) c.api_key_env = *v;
  auto number = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc.at(key).is_number()) throw schema_error(std::string("/") + key, "expected number");
    out = doc.at(key).get<double>();
  };
  number("temperature", c.temperature);
  number("timeout_seconds", c.timeout_seconds);
  if (doc.contains("max_tokens")) c.max_tokens = detail::get_int(doc, "max_tokens", "");
  if (doc.contains("max_retries")) c.max_retries = detail::get_int(doc, "max_retries", "");
  if (!(c.timeout_seconds > 0)) throw Error(ErrorCode::InvalidConfig, "timeout_seconds must be > 0", "/timeout_seconds");
  if (c.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0", "/max_retries");
  if (c.max_tokens <= 0) throw Error(ErrorCode::InvalidConfig, "max_tokens must be > 0", "/max_tokens");
  return c;
}

json to_json(const LlmEndpointConfig& c) {
  return {{"base_url", c.base_url},       {"model", c.model},
          {"api_key_env", c.api_key_env}, {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},   {"timeout_seconds", c.timeout_seconds},
          {"max_retries", c.max_retries}};
}

ChatTransport http_transport(const LlmEndpointConfig& config) {
  return [config](const json& request) -> std::string {
    const std::string& url = config.base_url;
    if (url.rfind("http://", 0) != 0) {
      throw Error(ErrorCode::EndpointError, "only http:// endpoints are supported: " + url);
    }
    const auto slash = url.find('/', 7);
    const std::string origin = url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client cli(origin);
    const auto usec = static_cast<long>(config.timeout_seconds * 1e6);
    cli.set_connection_timeout(usec / 1000000, usec % 1000000);
    cli.set_read_timeout(usec / 1000000, usec % 1000000);
    cli.set_write_timeout(usec / 1000000, usec % 1000000);
    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = cli.Post(prefix + "/chat/completions", headers, request.dump(), "application/json");
    if (!res) throw Error(ErrorCode::EndpointError, "request failed: " + httplib::to_string(res.error()));
    if (res->status / 100 != 2) {
      throw Error(ErrorCode::EndpointError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      json body = json::parse(res->body);
      return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::EndpointError, std::string("malformed completion: ") + e.what());
    }
  };
}

std::string system_prompt() {
  return "You control one agent in a text-only household simulator. Each turn you get your observation, your "
         "goal, the result of your last action and the list of legal actions. Reply with exactly one action as a "
         "JSON object, for example {\"type\": \"open\", \"object\": \"box_1\"}. Action types: go_to(room), "
         "open(object), close(object), pick_up(object), place(object, relation inside|on_top, target), "
         "unlock(object, key or code), lock(object), read(object), toggle(object), arrange(objects, target), "
         "wait. Objects inside closed containers are not visible until the container is opened.";
}

std::string default_prompt_template() {
  return "Tick {{tick}}.\n"
         "Goal: {{goal}}\n"
         "Goal conditions: {{conditions}}\n"
         "Observation: {{observation}}\n"
         "Last action: {{last}}\n"
         "Recent turns:\n"
         "{{transcript}}\n"
         "Legal actions: {{legal}}\n"
         "Reply with exactly one action from the legal list as a JSON object.\n";
}

std::string render_turn(const std::string& tmpl, const PolicyContext& ctx, const PolicyMemory& memory) {
  json conditions = json::array();
  for (const auto& p : ctx.goal.conjuncts) conditions.push_back(to_json(p));
  json legal = json::array();
  for (const auto& a : ctx.legal) legal.push_back(to_json(a));
  std::string last = "none";
  if (memory.last_action && memory.last_outcome) {
    last = to_json(*memory.last_action).dump() + " -> " + to_json(*memory.last_outcome).dump();
  }
  std::string transcript;
  for (const auto& t : memory.transcript) transcript += t.dump() + "\n";
  if (transcript.empty()) transcript = "none\n";
  transcript.pop_back();

  const std::map<std::string, std::string> values = {
      {"tick", std::to_string(ctx.tick)},
      {"goal", ctx.goal.description.empty() ? "see conditions" : ctx.goal.description},
      {"conditions", conditions.dump()},
      {"observation", to_json(ctx.obs).dump()},
      {"last", last},
      {"legal", legal.dump()},
      {"transcript", transcript},
  };
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) break;
    out += tmpl.substr(pos, open - pos);
    auto it = values.find(tmpl.substr(open + 2, close - open - 2));
    out += it != values.end() ? it->second : tmpl.substr(open, close + 2 - open);
    pos = close + 2;
  }
  return out + tmpl.substr(pos);
}

std::optional<Action> parse_action_reply(const std::string& reply) {
  for (std::size_t start = reply.find('{'); start != std::string::npos; start = reply.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
      const char c = reply[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        try {
          return action_from_json(json::parse(reply.substr(start, i - start + 1)));
        } catch (const std::exception&) {
          break;
        }
      }
    }
  }
  return std::nullopt;
}

namespace {

class LlmPolicy : public Policy {
 public:
  LlmPolicy(LlmEndpointConfig config, std::string tmpl, ChatTransport transport)
      : config_(std::move(config)),
        template_(tmpl.empty() ? default_prompt_template() : std::move(tmpl)),
        transport_(transport ? std::move(transport) : http_transport(config_)) {}

  std::string name() const override { return "llm:" + config_.model; }

  Action decide(const PolicyContext& ctx, PolicyMemory& m) override {
    if (!m.transcript.empty() && m.last_outcome) m.transcript.back()["outcome"] = to_json(*m.last_outcome);
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", system_prompt()}});
    messages.push_back({{"role", "user"}, {"content", render_turn(template_, ctx, m)}});
    int endpoint_failures = 0;
    int parse_failures = 0;
    while (true) {
      std::string reply;
      try {
        reply = transport_(request(messages));
      } catch (const Error& e) {
        if (++endpoint_failures > config_.max_retries) throw Error(ErrorCode::PolicyError, e.message());
        continue;
      }
      if (auto action = parse_action_reply(reply)) {
        remember(m, {{"tick", ctx.tick}, {"action", to_json(*action)}});
        return *action;
      }
      if (++parse_failures > config_.max_retries) break;
      messages.push_back({{"role", "assistant"}, {"content", reply}});
      messages.push_back({{"role", "user"},
                          {"content", "That reply had no valid action JSON. Reply with exactly one action object."}});
    }
    m.log.push_back("ParseFailure tick " + std::to_string(ctx.tick));
    remember(m, {{"tick", ctx.tick}, {"action", to_json(Action{act::Wait{}})}, {"parse_failure", true}});
    return act::Wait{};
  }

 private:
  json request(const json& messages) const {
    return {{"model", config_.model},
            {"messages", messages},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_tokens}};
  }

  static void remember(PolicyMemory& m, json turn) {
    m.transcript.push_back(std::move(turn));
    if (m.transcript.size() > kTranscriptTurns) {
      m.transcript.erase(m.transcript.begin(), m.transcript.end() - kTranscriptTurns);
    }
  }

  LlmEndpointConfig config_;
  std::string template_;
  ChatTransport transport_;
};

}  // namespace

std::unique_ptr<Policy> llm_policy(LlmEndpointConfig config, std::string prompt_template, ChatTransport transport) {
  return std::make_unique<LlmPolicy>(std::move(config), std::move(prompt_template), std::move(transport));
}

}  // namespace vsim
