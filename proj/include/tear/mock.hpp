#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "tear/gateway.hpp"

namespace tear {

// Deterministic in-process provider for tests and offline runs.
class MockProvider : public Provider {
 public:
  using Handler = std::function<std::string(const std::string& model, const std::string& prompt)>;

  explicit MockProvider(Handler handler);
  // Answers prompts by sha256_hex(prompt); unknown digests raise ProviderError.
  static std::shared_ptr<MockProvider> from_digest_map(std::map<std::string, std::string> by_digest);

  std::string name() const override { return "mock"; }
  std::string send(const std::string& model, const std::string& prompt, const Decoding& decoding) override;

  // Optional per-call delay, e.g. randomized to shuffle completion order.
  void set_delay(std::function<std::chrono::milliseconds(const std::string& prompt)> delay);
  // Prompts matching `pred` always fail with ProviderError.
  void fail_permanently_if(std::function<bool(const std::string& prompt)> pred);
  // The first `times` calls fail with TransientProviderError.
  void fail_transiently(int times);

  std::size_t calls() const { return calls_.load(); }
  std::size_t max_in_flight() const { return max_in_flight_.load(); }

 private:
  Handler handler_;
  std::function<std::chrono::milliseconds(const std::string&)> delay_;
  std::function<bool(const std::string&)> permanent_;
  std::atomic<int> transient_left_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> max_in_flight_{0};
};

// What a prompt asks for, recovered from the fixed template wording.
enum class PromptRole { translate, estimate, refine, scot, contrastive, unknown };

struct PromptInfo {
  PromptRole role = PromptRole::unknown;
  std::string source;       // the test source
  std::string translation;  // the draft under estimation/refinement, if any
};

PromptInfo inspect_prompt(const std::string& prompt);

// Scripted responses keyed by text rather than by digest, so one script
// covers every template variant. JSON layout:
//   {"translations": {source: text}, "estimates": {draft: text},
//    "refinements": {draft: text}, "rewrites": {draft: text},
//    "default_estimate": text}
// Missing refinement/rewrite entries echo the draft; a missing translation
// is an error.
class ScriptedMock {
 public:
  std::map<std::string, std::string> translations;
  std::map<std::string, std::string> estimates;
  std::map<std::string, std::string> refinements;
  std::map<std::string, std::string> rewrites;
  std::string default_estimate = "critical: no-error\nmajor: no-error\nminor: no-error";

  static ScriptedMock parse(std::string_view json_text);
  static ScriptedMock load(const std::filesystem::path& path);
  std::string to_json() const;

  std::string respond(const std::string& prompt) const;
  std::shared_ptr<MockProvider> provider() const;
};

}  // namespace tear
