#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tear/core.hpp"
#include "tear/errors.hpp"

namespace tear {

struct CompletionRequest {
  std::string model;
  std::string prompt;
  Decoding decoding;
  // Free-form tag for the call log ("translate", "estimate", "refine", ...).
  // Not part of the cache key.
  std::string purpose;
};

// sha256 over a length-prefixed encoding of (model, prompt, temperature, max_tokens).
std::string cache_key(const CompletionRequest& request);

enum class Provenance { live, cache, replay, mock };
std::string to_string(Provenance p);

struct CompletionResponse {
  std::string text;
  Provenance provenance = Provenance::live;
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;
  std::string key;
};

// Raised by providers for failures worth retrying (429, 5xx, network).
class TransientProviderError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Narrow adapter interface: send one prompt, get the text back.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  virtual std::string send(const std::string& model, const std::string& prompt, const Decoding& decoding) = 0;
};

struct CacheRecord {
  std::string key;
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 0;
  std::string response;
  std::string timestamp;
};

// Key -> response map, optionally backed by an append-only JSONL file.
// Concurrent readers, serialized writers.
class ResponseCache {
 public:
  ResponseCache() = default;
  // Loads existing records from `file` and appends new ones to it.
  explicit ResponseCache(std::filesystem::path file);

  std::optional<std::string> get(const std::string& key) const;
  // Returns false (and changes nothing) when the key is already present.
  bool put(CacheRecord record);
  std::size_t size() const;
  std::vector<CacheRecord> records() const;  // sorted by key

  // Writes all records sorted by key; returns the count.
  std::size_t export_to(const std::filesystem::path& path) const;
  // Merges records from `path`. Any key present here with a different
  // response raises CacheConflict and nothing is merged. Returns the number
  // of new keys.
  std::size_t import_from(const std::filesystem::path& path);

  static std::vector<CacheRecord> read_records(const std::filesystem::path& path);

 private:
  void append_line(const CacheRecord& record);

  mutable std::shared_mutex mu_;
  std::map<std::string, CacheRecord> records_;
  std::optional<std::filesystem::path> file_;
  std::mutex file_mu_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double factor = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds backoff_for(int failed_attempts) const;
};

// Shared token bucket. requests_per_minute <= 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute, double burst = 1.0);
  void acquire();

 private:
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

enum class GatewayMode { live, mock, replay };
std::string to_string(GatewayMode mode);
GatewayMode parse_gateway_mode(std::string_view name);

struct CallLogEntry {
  std::string key;
  std::string model;
  std::string purpose;
  Provenance provenance = Provenance::live;
  bool ok = false;
};

struct BatchItem {
  std::optional<CompletionResponse> response;
  std::exception_ptr error;
  std::string error_message;

  bool ok() const { return response.has_value(); }
};

class Gateway {
 public:
  Gateway(GatewayMode mode, std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>());

  GatewayMode mode() const { return mode_; }
  ResponseCache& cache() { return *cache_; }

  void add_provider(const std::string& name, std::shared_ptr<Provider> provider, double requests_per_minute = 0);
  void route_model(const std::string& model, const std::string& provider_name);
  void set_default_provider(const std::string& provider_name);
  // Answers every request in mock mode.
  void set_mock(std::shared_ptr<Provider> mock);
  // Read-only fixtures consulted after the cache in replay mode.
  void set_replay_store(std::shared_ptr<const ResponseCache> store);
  void set_retry_policy(RetryPolicy policy) { retry_ = policy; }
  // Replaces the real sleep between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

  CompletionResponse complete(const CompletionRequest& request);
  // Output order equals input order; errors are reported per item.
  std::vector<BatchItem> complete_batch(const std::vector<CompletionRequest>& requests, std::size_t parallelism);

  std::vector<CallLogEntry> call_log() const;
  std::size_t count_calls(std::string_view purpose) const;
  void clear_call_log();

  // Builds a live gateway from a JSON config file (see README).
  static std::unique_ptr<Gateway> from_config(const std::filesystem::path& path,
                                              std::shared_ptr<ResponseCache> cache);

 private:
  struct Route {
    std::shared_ptr<Provider> provider;
    std::shared_ptr<RateLimiter> limiter;
  };
  Route resolve(const std::string& model) const;
  std::string call_with_retries(const Route& route, const CompletionRequest& request, int& attempts);
  void log(CallLogEntry entry);

  GatewayMode mode_;
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<const ResponseCache> replay_store_;
  std::map<std::string, Route> providers_;
  std::map<std::string, std::string> model_routes_;
  std::string default_provider_;
  std::shared_ptr<Provider> mock_;
  RetryPolicy retry_;
  std::function<void(std::chrono::milliseconds)> sleeper_;

  mutable std::mutex log_mu_;
  std::vector<CallLogEntry> log_;
};

}  // namespace tear
