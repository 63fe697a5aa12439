#include "tear/providers.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "tear/util.hpp"

namespace tear {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // "" or "/prefix"
};

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("base_url needs a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  SplitUrl out;
  out.origin = url.substr(0, slash);
  if (slash != std::string::npos) out.path = url.substr(slash);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string credential(const HttpProviderConfig& config) {
  if (config.credential_env.empty()) return {};
  const char* v = std::getenv(config.credential_env.c_str());
  if (!v || !*v) throw AuthError(config.name + ": environment variable " + config.credential_env + " is not set");
  return v;
}

std::string post_json(const HttpProviderConfig& config, const std::string& endpoint, const json& body,
                      const httplib::Headers& headers) {
  const SplitUrl url = split_url(config.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(15));
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  auto res = client.Post(url.path + endpoint, headers, body.dump(), "application/json");
  if (!res) throw TransientProviderError(config.name + ": request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw_for_status(res->status, config.name, res->body);
  return res->body;
}

json parse_body(const std::string& provider, const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception&) {
    throw ProviderError(provider + ": response is not JSON");
  }
}

}  // namespace

void throw_for_status(int status, const std::string& provider, const std::string& body) {
  // Bodies can echo request content; keep the message short.
  std::string detail = body.substr(0, 200);
  const std::string msg = provider + ": HTTP " + std::to_string(status) + ": " + detail;
  if (status == 401 || status == 403) throw AuthError(msg);
  if (status == 408 || status == 429 || status >= 500) throw TransientProviderError(msg);
  throw ProviderError(msg);
}

OpenAICompatibleProvider::OpenAICompatibleProvider(HttpProviderConfig config) : config_(std::move(config)) {}

std::string OpenAICompatibleProvider::send(const std::string& model, const std::string& prompt,
                                           const Decoding& decoding) {
  httplib::Headers headers;
  if (auto key = credential(config_); !key.empty()) headers.emplace("Authorization", "Bearer " + key);
  json body = {{"model", model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", decoding.temperature},
               {"max_tokens", decoding.max_tokens}};
  json j = parse_body(config_.name, post_json(config_, "/chat/completions", body, headers));
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError(config_.name + ": unexpected response shape");
  }
}

AnthropicProvider::AnthropicProvider(HttpProviderConfig config) : config_(std::move(config)) {}

std::string AnthropicProvider::send(const std::string& model, const std::string& prompt, const Decoding& decoding) {
  httplib::Headers headers{{"anthropic-version", "2023-06-01"}};
  if (auto key = credential(config_); !key.empty()) headers.emplace("x-api-key", key);
  json body = {{"model", model},
               {"max_tokens", decoding.max_tokens},
               {"temperature", decoding.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  json j = parse_body(config_.name, post_json(config_, "/messages", body, headers));
  try {
    std::string text;
    for (const auto& block : j.at("content"))
      if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
    return text;
  } catch (const json::exception&) {
    throw ProviderError(config_.name + ": unexpected response shape");
  }
}

std::unique_ptr<Gateway> Gateway::from_config(const std::filesystem::path& path, std::shared_ptr<ResponseCache> cache) {
  json cfg;
  try {
    cfg = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("bad gateway config " + path.string() + ": " + e.what());
  }
  auto gw = std::make_unique<Gateway>(GatewayMode::live, std::move(cache));
  try {
    for (const auto& [name, p] : cfg.at("providers").items()) {
      HttpProviderConfig hc;
      hc.name = name;
      hc.base_url = p.at("base_url").get<std::string>();
      hc.credential_env = p.value("credential_env", "");
      hc.timeout = std::chrono::seconds(p.value("timeout_s", 120));
      const std::string kind = p.value("kind", "openai");
      std::shared_ptr<Provider> provider;
      if (kind == "openai") provider = std::make_shared<OpenAICompatibleProvider>(hc);
      else if (kind == "anthropic") provider = std::make_shared<AnthropicProvider>(hc);
      else throw ConfigError("unknown provider kind '" + kind + "'");
      gw->add_provider(name, provider, p.value("requests_per_minute", 0.0));
    }
    if (cfg.contains("models"))
      for (const auto& [model, provider] : cfg["models"].items()) gw->route_model(model, provider.get<std::string>());
    if (cfg.contains("default_provider")) gw->set_default_provider(cfg["default_provider"].get<std::string>());
    if (cfg.contains("retry")) {
      const auto& r = cfg["retry"];
      RetryPolicy policy;
      policy.max_attempts = r.value("max_attempts", policy.max_attempts);
      policy.initial_backoff = std::chrono::milliseconds(r.value("initial_backoff_ms", 500));
      policy.factor = r.value("factor", policy.factor);
      policy.max_backoff = std::chrono::milliseconds(r.value("max_backoff_ms", 8000));
      gw->set_retry_policy(policy);
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad gateway config " + path.string() + ": " + e.what());
  }
  return gw;
}

}  // namespace tear
