#include "sculpt/llm_client.hpp"

#include <cstdlib>
#include <optional>
#include <sstream>

#include <json.hpp>
#include <httplib.h>

#include "sculpt/errors.hpp"

namespace sculpt {

ChatTransport http_chat_transport(const LLMConfig& config) {
  return [config](const std::string& request_body) -> std::string {
    // split endpoint into host and path
    std::string url = config.endpoint;
    std::string scheme_host, path = "/";
    auto scheme_end = url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) {
      scheme_host = url;
    } else {
      scheme_host = url.substr(0, path_start);
      path = url.substr(path_start);
    }

    httplib::Client client(scheme_host);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_connection_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(path, headers, request_body, "application/json");
    if (!res)
      throw TransportError("chat endpoint unreachable: " + config.endpoint +
                           " (" + httplib::to_string(res.error()) + ")");
    if (res->status < 200 || res->status >= 300)
      throw TransportError("chat endpoint returned HTTP " +
                           std::to_string(res->status));
    return res->body;
  };
}

std::string chat_completion(const LLMConfig& config, const ChatTransport& transport,
                            const std::string& user_message) {
  nlohmann::ordered_json req;
  req["model"] = config.model;
  req["temperature"] = config.temperature;
  req["messages"] = {{{"role", "user"}, {"content", user_message}}};

  std::string body = transport(req.dump());
  try {
    auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed chat response: ") + e.what());
  }
}

std::string extract_json_object(const std::string& text) {
  auto start = text.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') {
          ++i;
        } else if (c == '"') {
          in_string = false;
        }
      } else if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return text.substr(start, i - start + 1);
      }
    }
    start = text.find('{', start + 1);
  }
  throw InvalidArgument("no JSON object found in reply");
}

std::vector<CellIndex> parse_cell_list(const std::string& reply,
                                       const std::string& key) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(extract_json_object(reply));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON reply: ") + e.what());
  }
  if (!j.contains(key) || !j[key].is_array())
    throw InvalidArgument("reply missing array field '" + key + "'");
  std::vector<CellIndex> out;
  for (const auto& item : j[key]) {
    if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || !item[2].is_number_integer())
      throw InvalidArgument("cell entries must be integer triples");
    out.push_back({item[0].get<int>(), item[1].get<int>(), item[2].get<int>()});
  }
  return out;
}

namespace {

// Calls the endpoint, retrying on parse failures. Transport errors propagate
// (the caller decides whether the episode dies); parse exhaustion degrades to
// nullopt.
template <typename Parser>
auto query_with_retry(const LLMConfig& config, const ChatTransport& transport,
                      const std::string& message, Parser parse,
                      std::string* raw_out)
    -> std::optional<decltype(parse(std::string{}))> {
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    std::string content = chat_completion(config, transport, message);
    if (raw_out) *raw_out = content;
    try {
      return parse(content);
    } catch (const InvalidArgument&) {
      // malformed reply; retry
    }
  }
  return std::nullopt;
}

std::string grid_prompt_header(const ShapePrompt& prompt,
                               const OccupancyGrid& grid) {
  std::ostringstream msg;
  msg << "You are placing 1.5cm clay segments on a " << grid.dims()[0] << "x"
      << grid.dims()[1] << "x" << grid.dims()[2]
      << " grid to sculpt the shape described by the prompt.\n"
      << "Prompt: " << prompt.text << "\n"
      << "Current grid occupancy, bottom layer first (rows are y descending, "
         "columns x ascending):\n"
      << grid.to_text();
  return msg.str();
}

}  // namespace

ProposerSuite llm_backend(const LLMConfig& config, const ChatTransport& transport) {
  ProposerSuite suite;

  suite.planner = [config, transport](const ShapePrompt& prompt,
                                      const OccupancyGrid& grid,
                                      AuditRecord& rec) -> std::vector<CellIndex> {
    std::string msg =
        grid_prompt_header(prompt, grid) +
        "\nReply with strict JSON only: {\"add\": [[i,j,k], ...]} listing up "
        "to 3 empty cells to fill next.";
    auto cells = query_with_retry(
        config, transport, msg,
        [](const std::string& s) { return parse_cell_list(s, "add"); },
        &rec.raw_reply);
    if (!cells) {
      rec.rejections.push_back("parse retries exhausted; empty proposal");
      return {};
    }
    return *cells;
  };

  suite.remover = [config, transport](const ShapePrompt& prompt,
                                      const OccupancyGrid& grid,
                                      AuditRecord& rec) -> std::vector<CellIndex> {
    std::string msg =
        grid_prompt_header(prompt, grid) +
        "\nReply with strict JSON only: {\"remove\": [[i,j,k], ...]} listing "
        "up to 3 occupied cells that do not belong to the shape.";
    auto cells = query_with_retry(
        config, transport, msg,
        [](const std::string& s) { return parse_cell_list(s, "remove"); },
        &rec.raw_reply);
    if (!cells) {
      rec.rejections.push_back("parse retries exhausted; empty proposal");
      return {};
    }
    return *cells;
  };

  suite.terminator = [config, transport](const ShapePrompt& prompt,
                                         const OccupancyGrid& grid) -> bool {
    std::string msg =
        grid_prompt_header(prompt, grid) +
        "\nDoes the grid already match the prompt? Reply with strict JSON "
        "only: {\"done\": true} or {\"done\": false}.";
    auto done = query_with_retry(
        config, transport, msg,
        [](const std::string& s) {
          auto j = nlohmann::json::parse(extract_json_object(s));
          if (!j.contains("done") || !j["done"].is_boolean())
            throw InvalidArgument("reply missing boolean 'done'");
          return j["done"].get<bool>();
        },
        nullptr);
    return done.value_or(false);
  };

  suite.assist = [config, transport](const ShapePrompt& prompt) -> bool {
    std::string msg =
        "Prompt: " + prompt.text +
        "\nCan you plan this shape on a 5x5x5 grid without a 3D shape prior? "
        "Reply with strict JSON only: {\"confident\": true|false}.";
    auto confident = query_with_retry(
        config, transport, msg,
        [](const std::string& s) {
          auto j = nlohmann::json::parse(extract_json_object(s));
          if (!j.contains("confident") || !j["confident"].is_boolean())
            throw InvalidArgument("reply missing boolean 'confident'");
          return j["confident"].get<bool>();
        },
        nullptr);
    return confident.value_or(true);
  };

  suite.shape_gen = [config, transport](const ShapePrompt& prompt) -> OccupancyGrid {
    std::string msg =
        "Prompt: " + prompt.text +
        "\nGive an initial occupancy for a 5x5x5 grid approximating this "
        "shape. Reply with strict JSON only: {\"cells\": [[i,j,k], ...]}.";
    auto cells = query_with_retry(
        config, transport, msg,
        [](const std::string& s) { return parse_cell_list(s, "cells"); },
        nullptr);
    OccupancyGrid grid;
    if (cells)
      for (const auto& c : *cells)
        if (grid.in_range(c)) grid.set(c, true);
    return grid;
  };

  return suite;
}

}  // namespace sculpt
