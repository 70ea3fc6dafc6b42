#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "vsim/harness.hpp"

namespace vsim {

// OpenAI-compatible chat endpoint. The bearer token is read from the
// environment variable named by api_key_env at call time; it is never stored.
struct LlmEndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";  // http only
  std::string model = "local-model";
  std::string api_key_env = "VSIM_LLM_API_KEY";
  double temperature = 0.0;
  int max_tokens = 256;
  double timeout_seconds = 60.0;  // > 0
  int max_retries = 2;            // >= 0; applies to endpoint failures and unparseable replies
};

// Turns of recent history rendered into each prompt.
inline constexpr std::size_t kTranscriptTurns = 8;

LlmEndpointConfig llm_config_from_json(const json& doc);
json to_json(const LlmEndpointConfig& c);

// Sends a chat request body and returns the assistant text. Throws
// EndpointError on transport or HTTP failures.
using ChatTransport = std::function<std::string(const json& request)>;

ChatTransport http_transport(const LlmEndpointConfig& config);

// The system message sent before every turn.
std::string system_prompt();
// Default user-message template. Placeholders: {{tick}}, {{goal}},
// {{conditions}}, {{observation}}, {{last}}, {{legal}}, {{transcript}}.
// Mirrors docs/prompt_template.txt.
std::string default_prompt_template();
// Substitutes the placeholders in `tmpl`. Unknown placeholders are left as is.
std::string render_turn(const std::string& tmpl, const PolicyContext& ctx, const PolicyMemory& memory);

// First balanced {...} in `reply` that parses as a wire action.
std::optional<Action> parse_action_reply(const std::string& reply);

// Unparseable replies are retried with the error fed back; when retries run
// out the policy waits and logs "ParseFailure tick N". Endpoint errors are
// retried too and then surface as PolicyError. An empty template means the
// default one.
std::unique_ptr<Policy> llm_policy(LlmEndpointConfig config, std::string prompt_template = {},
                                   ChatTransport transport = nullptr);

}  // namespace vsim
