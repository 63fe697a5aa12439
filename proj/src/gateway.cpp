#include "tear/gateway.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "tear/util.hpp"

namespace tear {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json record_to_json(const CacheRecord& r) {
  return json{{"key", r.key},
              {"request",
               {{"model", r.model}, {"prompt", r.prompt}, {"temperature", r.temperature}, {"max_tokens", r.max_tokens}}},
              {"response", r.response},
              {"timestamp", r.timestamp}};
}

CacheRecord record_from_json(const json& j) {
  CacheRecord r;
  r.key = j.at("key").get<std::string>();
  const auto& req = j.at("request");
  r.model = req.at("model").get<std::string>();
  r.prompt = req.at("prompt").get<std::string>();
  r.temperature = req.at("temperature").get<double>();
  r.max_tokens = req.at("max_tokens").get<int>();
  r.response = j.at("response").get<std::string>();
  r.timestamp = j.value("timestamp", "");
  return r;
}

}  // namespace

std::string cache_key(const CompletionRequest& request) {
  const std::string temperature = format_double(request.decoding.temperature);
  const std::string max_tokens = std::to_string(request.decoding.max_tokens);
  return sha256_hex(canonical_encode({"tear-cache-v1", request.model, request.prompt, temperature, max_tokens}));
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::live: return "live";
    case Provenance::cache: return "cache";
    case Provenance::replay: return "replay";
    case Provenance::mock: return "mock";
  }
  return "live";
}

std::string to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::live: return "live";
    case GatewayMode::mock: return "mock";
    case GatewayMode::replay: return "replay";
  }
  return "live";
}

GatewayMode parse_gateway_mode(std::string_view name) {
  if (name == "live") return GatewayMode::live;
  if (name == "mock") return GatewayMode::mock;
  if (name == "replay") return GatewayMode::replay;
  throw ConfigError("unknown gateway mode '" + std::string(name) + "' (live, mock, replay)");
}

// ---------------------------------------------------------------- cache

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
  if (std::filesystem::exists(*file_)) {
    for (auto& r : read_records(*file_)) {
      auto key = r.key;
      records_.emplace(std::move(key), std::move(r));
    }
  }
}

std::vector<CacheRecord> ResponseCache::read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open cache file " + path.string());
  std::vector<CacheRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(n, "bad cache record in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second.response;
}

bool ResponseCache::put(CacheRecord record) {
  if (record.timestamp.empty()) record.timestamp = utc_timestamp();
  {
    std::unique_lock lock(mu_);
    if (records_.count(record.key)) return false;
    records_.emplace(record.key, record);
  }
  append_line(record);
  return true;
}

void ResponseCache::append_line(const CacheRecord& record) {
  if (!file_) return;
  std::lock_guard lock(file_mu_);
  std::ofstream out(*file_, std::ios::binary | std::ios::app);
  if (!out) throw FormatError(0, "cannot append to cache file " + file_->string());
  out << record_to_json(record).dump() << '\n';
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

std::vector<CacheRecord> ResponseCache::records() const {
  std::shared_lock lock(mu_);
  std::vector<CacheRecord> out;
  out.reserve(records_.size());
  for (const auto& [k, r] : records_) out.push_back(r);
  return out;
}

std::size_t ResponseCache::export_to(const std::filesystem::path& path) const {
  std::string data;
  const auto all = records();
  for (const auto& r : all) data += record_to_json(r).dump() + "\n";
  write_file_atomic(path, data);
  return all.size();
}

std::size_t ResponseCache::import_from(const std::filesystem::path& path) {
  auto incoming = read_records(path);
  std::vector<CacheRecord> fresh;
  std::vector<std::string> conflicts;
  {
    std::unique_lock lock(mu_);
    std::map<std::string, const CacheRecord*> seen;
    for (const auto& r : incoming) {
      if (r.key.empty()) throw FormatError(0, "cache record without key in " + path.string());
      auto it = records_.find(r.key);
      if (it != records_.end()) {
        if (it->second.response != r.response) conflicts.push_back(r.key);
        continue;
      }
      auto [pos, inserted] = seen.emplace(r.key, &r);
      if (!inserted) {
        if (pos->second->response != r.response) conflicts.push_back(r.key);
        continue;
      }
      fresh.push_back(r);
    }
    if (!conflicts.empty()) {
      std::sort(conflicts.begin(), conflicts.end());
      conflicts.erase(std::unique(conflicts.begin(), conflicts.end()), conflicts.end());
      throw CacheConflict(conflicts);
    }
    for (const auto& r : fresh) records_.emplace(r.key, r);
  }
  for (const auto& r : fresh) append_line(r);
  return fresh.size();
}

// ---------------------------------------------------------------- retry / rate limit

std::chrono::milliseconds RetryPolicy::backoff_for(int failed_attempts) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (int i = 1; i < failed_attempts; ++i) ms *= factor;
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rate_per_sec_ <= 0) return;
  std::unique_lock lock(mu_);
  while (true) {
    auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_per_sec_;
    // Sleeping with the lock held keeps waiters in FIFO-ish order.
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(GatewayMode mode, std::shared_ptr<ResponseCache> cache)
    : mode_(mode),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Gateway::add_provider(const std::string& name, std::shared_ptr<Provider> provider, double requests_per_minute) {
  providers_[name] = Route{std::move(provider), std::make_shared<RateLimiter>(requests_per_minute)};
  if (default_provider_.empty()) default_provider_ = name;
}

void Gateway::route_model(const std::string& model, const std::string& provider_name) {
  model_routes_[model] = provider_name;
}

void Gateway::set_default_provider(const std::string& provider_name) { default_provider_ = provider_name; }

void Gateway::set_mock(std::shared_ptr<Provider> mock) { mock_ = std::move(mock); }

void Gateway::set_replay_store(std::shared_ptr<const ResponseCache> store) { replay_store_ = std::move(store); }

Gateway::Route Gateway::resolve(const std::string& model) const {
  std::string name = default_provider_;
  if (auto it = model_routes_.find(model); it != model_routes_.end()) name = it->second;
  auto it = providers_.find(name);
  if (it == providers_.end()) throw ConfigError("no provider configured for model '" + model + "'");
  return it->second;
}

std::string Gateway::call_with_retries(const Route& route, const CompletionRequest& request, int& attempts) {
  const int budget = std::max(1, retry_.max_attempts);
  std::string last_error;
  for (attempts = 1; attempts <= budget; ++attempts) {
    if (route.limiter) route.limiter->acquire();
    try {
      return route.provider->send(request.model, request.prompt, request.decoding);
    } catch (const TransientProviderError& e) {
      last_error = e.what();
      if (attempts < budget) sleeper_(retry_.backoff_for(attempts));
    }
  }
  attempts = budget;
  throw ProviderError("gave up after " + std::to_string(budget) + " attempts: " + last_error);
}

void Gateway::log(CallLogEntry entry) {
  std::lock_guard lock(log_mu_);
  log_.push_back(std::move(entry));
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  if (request.decoding.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (request.decoding.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  CompletionResponse resp;
  resp.key = cache_key(request);
  CallLogEntry entry{resp.key, request.model, request.purpose, Provenance::cache, false};
  auto finish = [&](Provenance p) {
    resp.provenance = p;
    resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    entry.provenance = p;
    entry.ok = true;
    log(entry);
    return resp;
  };

  if (auto hit = cache_->get(resp.key)) {
    resp.text = std::move(*hit);
    return finish(Provenance::cache);
  }

  try {
    switch (mode_) {
      case GatewayMode::replay: {
        entry.provenance = Provenance::replay;
        std::optional<std::string> fixture;
        if (replay_store_) fixture = replay_store_->get(resp.key);
        if (!fixture) throw ReplayMiss("no cached response for key " + resp.key + " (model " + request.model + ")");
        resp.text = std::move(*fixture);
        return finish(Provenance::replay);
      }
      case GatewayMode::mock: {
        entry.provenance = Provenance::mock;
        if (!mock_) throw ConfigError("mock mode without a mock provider");
        resp.text = mock_->send(request.model, request.prompt, request.decoding);
        resp.attempt_count = 1;
        cache_->put({resp.key, request.model, request.prompt, request.decoding.temperature,
                     request.decoding.max_tokens, resp.text, ""});
        return finish(Provenance::mock);
      }
      case GatewayMode::live: {
        entry.provenance = Provenance::live;
        Route route = resolve(request.model);
        resp.text = call_with_retries(route, request, resp.attempt_count);
        cache_->put({resp.key, request.model, request.prompt, request.decoding.temperature,
                     request.decoding.max_tokens, resp.text, ""});
        return finish(Provenance::live);
      }
    }
  } catch (...) {
    log(entry);
    throw;
  }
  throw ConfigError("unreachable gateway mode");
}

std::vector<BatchItem> Gateway::complete_batch(const std::vector<CompletionRequest>& requests,
                                               std::size_t parallelism) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::vector<BatchItem> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        out[i].response = complete(requests[i]);
      } catch (const std::exception& e) {
        out[i].error = std::current_exception();
        out[i].error_message = e.what();
      }
    }
  };
  const std::size_t n = std::min(parallelism, std::max<std::size_t>(1, requests.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

std::vector<CallLogEntry> Gateway::call_log() const {
  std::lock_guard lock(log_mu_);
  return log_;
}

std::size_t Gateway::count_calls(std::string_view purpose) const {
  std::lock_guard lock(log_mu_);
  return static_cast<std::size_t>(
      std::count_if(log_.begin(), log_.end(), [&](const CallLogEntry& e) { return e.purpose == purpose; }));
}

void Gateway::clear_call_log() {
  std::lock_guard lock(log_mu_);
  log_.clear();
}

}  // namespace tear
