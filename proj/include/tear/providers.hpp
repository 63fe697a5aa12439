#pragma once

#include <chrono>
#include <string>

#include "tear/gateway.hpp"

namespace tear {

struct HttpProviderConfig {
  std::string name;
  // e.g. "https://api.openai.com/v1"; the adapter appends its endpoint path.
  std::string base_url;
  // Name of the environment variable holding the credential. Empty = no auth header.
  std::string credential_env;
  std::chrono::seconds timeout{120};
};

// POST {base_url}/chat/completions with a single user message.
class OpenAICompatibleProvider : public Provider {
 public:
  explicit OpenAICompatibleProvider(HttpProviderConfig config);
  std::string name() const override { return config_.name; }
  std::string send(const std::string& model, const std::string& prompt, const Decoding& decoding) override;

 private:
  HttpProviderConfig config_;
};

// POST {base_url}/messages (Anthropic Messages API).
class AnthropicProvider : public Provider {
 public:
  explicit AnthropicProvider(HttpProviderConfig config);
  std::string name() const override { return config_.name; }
  std::string send(const std::string& model, const std::string& prompt, const Decoding& decoding) override;

 private:
  HttpProviderConfig config_;
};

// 401/403 -> AuthError; 408/429/5xx -> TransientProviderError; other non-2xx -> ProviderError.
[[noreturn]] void throw_for_status(int status, const std::string& provider, const std::string& body);

}  // namespace tear
