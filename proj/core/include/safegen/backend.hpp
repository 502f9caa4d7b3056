#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace safegen {

/// A blocking text generator. Implementations may be moved between threads
/// but are not required to support concurrent calls.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  /// Full response text for `prompt`. Throws TransportError,
  /// BackendExhausted or DeadlineExceeded.
  virtual std::string generate(std::string_view prompt) = 0;
};

/// Replays scripted responses in call order.
class ReplayBackend final : public GenerationBackend {
 public:
  explicit ReplayBackend(std::vector<std::string> script);

  /// Loads 000.txt, 001.txt, ... from `dir` until the first gap.
  static ReplayBackend from_directory(const std::filesystem::path& dir);

  std::string generate(std::string_view prompt) override;

  std::size_t calls() const noexcept { return next_; }
  std::size_t size() const noexcept { return script_.size(); }
  /// Prompts received so far, in call order.
  const std::vector<std::string>& prompts() const noexcept { return prompts_; }

 private:
  std::vector<std::string> script_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
};

struct HttpBackendConfig {
  std::string endpoint = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "SAFEGEN_API_KEY";
  std::string model = "qwen2.5-coder-7b-instruct";
  double temperature = 0.2;
  int max_tokens = 2048;
  std::chrono::milliseconds timeout{120000};  // per attempt
  int retries = 3;                            // extra attempts after the first
  std::chrono::milliseconds backoff{500};     // doubled after each retry
};

/// OpenAI-compatible chat-completion client.
class HttpBackend final : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string generate(std::string_view prompt) override;

  const HttpBackendConfig& config() const noexcept { return config_; }

  /// Request body sent for `prompt`; exposed for wire-format tests.
  std::string request_body(std::string_view prompt) const;

  /// First choice's message content. Throws TransportError on malformed bodies.
  static std::string parse_response(std::string_view body);

 private:
  HttpBackendConfig config_;
};

/// Validates the prompt, then forwards to the backend.
std::string generate(GenerationBackend& backend, std::string_view prompt);

}  // namespace safegen
