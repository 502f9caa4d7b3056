#include "safegen/backend.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "safegen/errors.hpp"
#include "util.hpp"

namespace safegen {

using nlohmann::json;

ReplayBackend::ReplayBackend(std::vector<std::string> script)
    : script_(std::move(script)) {}

ReplayBackend ReplayBackend::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("replay directory " + dir.string() + " does not exist");
  }
  std::vector<std::string> script;
  for (std::size_t i = 0;; ++i) {
    const auto file = dir / detail::format("%03zu.txt", i);
    if (!std::filesystem::exists(file)) break;
    script.push_back(detail::read_text_file(file));
  }
  if (script.empty()) {
    throw ConfigError("replay directory " + dir.string() + " has no 000.txt");
  }
  return ReplayBackend(std::move(script));
}

std::string ReplayBackend::generate(std::string_view prompt) {
  if (next_ >= script_.size()) {
    throw BackendExhausted("replay script exhausted after " +
                           std::to_string(script_.size()) + " responses");
  }
  prompts_.emplace_back(prompt);
  return script_[next_++];
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

std::string HttpBackend::request_body(std::string_view prompt) const {
  json body{{"model", config_.model},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
            {"temperature", config_.temperature},
            {"max_tokens", config_.max_tokens}};
  return body.dump();
}

std::string HttpBackend::parse_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("completion response is not JSON: ") + e.what());
  }
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw TransportError("completion response has no choices");
  }
  const json& choice = doc["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw TransportError("completion response has no message content");
  }
  return choice["message"]["content"].get<std::string>();
}

std::string HttpBackend::generate(std::string_view prompt) {
  httplib::Client client(config_.endpoint);
  if (!client.is_valid()) {
    throw TransportError("unusable endpoint '" + config_.endpoint + "'");
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string body = request_body(prompt);

  std::string last_error;
  bool last_was_timeout = false;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(config_.path, headers, body, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                         (res.error() == httplib::Error::Read && elapsed >= config_.timeout);
      continue;
    }
    last_was_timeout = false;
    if (res->status == 429 || res->status >= 500) {
      last_error = "server returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("server returned HTTP " + std::to_string(res->status) +
                           ": " + res->body.substr(0, 200));
    }
    return parse_response(res->body);
  }
  const std::string summary = last_error + " after " +
                              std::to_string(config_.retries + 1) + " attempt(s)";
  if (last_was_timeout) throw DeadlineExceeded(summary);
  throw TransportError(summary);
}

std::string generate(GenerationBackend& backend, std::string_view prompt) {
  if (prompt.empty()) throw InvariantError("cannot generate from an empty prompt");
  return backend.generate(prompt);
}

}  // namespace safegen
