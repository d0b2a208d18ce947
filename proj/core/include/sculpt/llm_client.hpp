#pragma once

#include <functional>
#include <string>

#include "sculpt/planner.hpp"

namespace sculpt {

struct LLMConfig {
  std::string endpoint;             // e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key_env = "SCULPT_LLM_API_KEY";
  double temperature = 0.2;
  int retries = 3;                  // parse-failure retries after the first call
  int timeout_seconds = 30;
};

// Sends one chat request (already serialized as a request body) and returns
// the raw response body. Throws TransportError on network-level failure.
// Tests inject mock transports; production uses http_chat_transport.
using ChatTransport = std::function<std::string(const std::string& request_body)>;

ChatTransport http_chat_transport(const LLMConfig& config);

// One chat round: formats an OpenAI-style chat completion request, sends it,
// and extracts the assistant message content.
std::string chat_completion(const LLMConfig& config, const ChatTransport& transport,
                            const std::string& user_message);

// Planner proposers backed by a chat endpoint. Each proposer renders the grid
// as text, requests a strict-JSON reply and retries on parse failure; after
// exhaustion it degrades to an empty proposal (logged in the audit record).
ProposerSuite llm_backend(const LLMConfig& config, const ChatTransport& transport);

// Strict-JSON cell list parsing, shared by the proposers. Accepts replies
// with surrounding prose as long as a JSON object with `key` can be located.
// Throws InvalidArgument when no well-formed object is present.
std::vector<CellIndex> parse_cell_list(const std::string& reply,
                                       const std::string& key);

// Extracts the first balanced JSON object from free text.
std::string extract_json_object(const std::string& text);

}  // namespace sculpt
