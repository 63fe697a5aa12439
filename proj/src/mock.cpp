#include "tear/mock.hpp"

#include <thread>

#include <json.hpp>

#include "tear/util.hpp"

namespace tear {

using nlohmann::json;

MockProvider::MockProvider(Handler handler) : handler_(std::move(handler)) {}

std::shared_ptr<MockProvider> MockProvider::from_digest_map(std::map<std::string, std::string> by_digest) {
  return std::make_shared<MockProvider>([m = std::move(by_digest)](const std::string&, const std::string& prompt) {
    auto it = m.find(sha256_hex(prompt));
    if (it == m.end()) throw ProviderError("mock: no scripted response for prompt digest " + sha256_hex(prompt));
    return it->second;
  });
}

void MockProvider::set_delay(std::function<std::chrono::milliseconds(const std::string&)> delay) {
  delay_ = std::move(delay);
}

void MockProvider::fail_permanently_if(std::function<bool(const std::string&)> pred) { permanent_ = std::move(pred); }

void MockProvider::fail_transiently(int times) { transient_left_ = times; }

std::string MockProvider::send(const std::string& model, const std::string& prompt, const Decoding&) {
  ++calls_;
  const std::size_t now = ++in_flight_;
  std::size_t seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  struct Leave {
    std::atomic<std::size_t>& n;
    ~Leave() { --n; }
  } leave{in_flight_};

  if (delay_) std::this_thread::sleep_for(delay_(prompt));
  if (permanent_ && permanent_(prompt)) throw ProviderError("mock: permanent failure");
  if (transient_left_.fetch_sub(1) > 0) throw TransientProviderError("mock: transient failure");
  return handler_(model, prompt);
}

// ---------------------------------------------------------------- prompt inspection

namespace {

constexpr std::string_view kRefineMarker = "I'm not satisfied with this target, because some defects exist:";

std::string between(const std::string& s, std::size_t from, std::size_t to) {
  if (from == std::string::npos || to == std::string::npos || to < from) return {};
  return trim(std::string_view(s).substr(from, to - from));
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

PromptInfo inspect_prompt(const std::string& prompt) {
  PromptInfo info;
  if (auto marker = prompt.find(kRefineMarker); marker != std::string::npos) {
    info.role = PromptRole::refine;
    auto t = prompt.rfind("\nTarget: ", marker);
    auto s = t == std::string::npos ? std::string::npos : prompt.rfind("\nSource: ", t);
    if (t != std::string::npos) info.translation = between(prompt, t + 9, marker);
    if (s != std::string::npos) info.source = between(prompt, s + 9, t);
    return info;
  }
  if (auto bad = prompt.find("\nBad translation: "); bad != std::string::npos) {
    info.role = PromptRole::contrastive;
    auto s = prompt.rfind("\nSource: ", bad);
    if (s != std::string::npos) info.source = between(prompt, s + 9, bad);
    info.translation = between(prompt, bad + 18, prompt.find('\n', bad + 18));
    return info;
  }
  if (prompt.find("\nSuggestions:") != std::string::npos && prompt.find("Final translation:") != std::string::npos) {
    info.role = PromptRole::scot;
    auto s = prompt.find("\nSource: ");
    auto t = prompt.find("\nTranslation: ");
    if (s != std::string::npos) info.source = between(prompt, s + 9, prompt.find('\n', s + 9));
    if (t != std::string::npos) info.translation = between(prompt, t + 14, prompt.find('\n', t + 14));
    return info;
  }
  std::string body = trim(prompt);
  if (ends_with(body, "MQM annotations:")) {
    info.role = PromptRole::estimate;
    const std::size_t end = body.size() - std::string_view("MQM annotations:").size();
    auto t = body.rfind(" translation: ", end);
    if (t != std::string::npos) {
      info.translation = between(body, t + 14, end);
      auto line_start = body.rfind('\n', t);
      auto s = body.rfind(" source: ", line_start);
      if (s != std::string::npos) info.source = between(body, s + 9, line_start);
    }
    return info;
  }
  if (ends_with(body, "Target:")) {
    info.role = PromptRole::translate;
    const std::size_t end = body.size() - 7;
    auto s = body.rfind("Source: ", end);
    if (s != std::string::npos) info.source = between(body, s + 8, end);
    return info;
  }
  return info;
}

// ---------------------------------------------------------------- scripted mock

namespace {

std::map<std::string, std::string> read_map(const json& j, const char* field) {
  std::map<std::string, std::string> out;
  if (j.contains(field))
    for (const auto& [k, v] : j.at(field).items()) out[k] = v.get<std::string>();
  return out;
}

}  // namespace

ScriptedMock ScriptedMock::parse(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
    ScriptedMock m;
    m.translations = read_map(j, "translations");
    m.estimates = read_map(j, "estimates");
    m.refinements = read_map(j, "refinements");
    m.rewrites = read_map(j, "rewrites");
    if (j.contains("default_estimate")) m.default_estimate = j["default_estimate"].get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad mock script: ") + e.what());
  }
}

ScriptedMock ScriptedMock::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string ScriptedMock::to_json() const {
  json j = {{"translations", translations},
            {"estimates", estimates},
            {"refinements", refinements},
            {"rewrites", rewrites},
            {"default_estimate", default_estimate}};
  return j.dump(2) + "\n";
}

std::string ScriptedMock::respond(const std::string& prompt) const {
  const PromptInfo info = inspect_prompt(prompt);
  auto lookup = [](const std::map<std::string, std::string>& m, const std::string& k) -> std::optional<std::string> {
    auto it = m.find(k);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  switch (info.role) {
    case PromptRole::translate:
      if (auto t = lookup(translations, info.source)) return *t;
      throw ProviderError("mock script has no translation for source '" + info.source + "'");
    case PromptRole::estimate:
      return lookup(estimates, info.translation).value_or(default_estimate);
    case PromptRole::refine:
      return lookup(refinements, info.translation).value_or(info.translation);
    case PromptRole::scot: {
      std::string rewrite = lookup(rewrites, info.translation).value_or(info.translation);
      return "Suggestions:\n1. none\nFinal translation: " + rewrite;
    }
    case PromptRole::contrastive:
      return lookup(rewrites, info.translation).value_or(info.translation);
    case PromptRole::unknown: break;
  }
  throw ProviderError("mock script cannot classify prompt");
}

std::shared_ptr<MockProvider> ScriptedMock::provider() const {
  return std::make_shared<MockProvider>(
      [script = *this](const std::string&, const std::string& prompt) { return script.respond(prompt); });
}

}  // namespace tear
