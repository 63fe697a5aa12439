#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace tear {

enum class NeuralMetric { comet22, cometkiwi, bleurt20 };
std::string to_string(NeuralMetric m);
NeuralMetric parse_neural_metric(std::string_view s);
// cometkiwi is reference-free; the other two need a reference.
bool needs_reference(NeuralMetric m);

inline constexpr int kBridgeProtocolVersion = 1;

struct ScoreItem {
  std::optional<std::string> source;
  std::string candidate;
  std::optional<std::string> reference;
};

// Line transport to a scorer process. handshake() returns the first record;
// exchange() sends request lines and returns exactly as many response lines,
// in whatever order they arrive.
class ScorerTransport {
 public:
  virtual ~ScorerTransport() = default;
  virtual std::string handshake() = 0;
  virtual std::vector<std::string> exchange(const std::vector<std::string>& request_lines) = 0;
};

// Runs a scorer as a child process speaking the protocol over stdin/stdout.
class SubprocessTransport : public ScorerTransport {
 public:
  explicit SubprocessTransport(std::vector<std::string> argv);
  ~SubprocessTransport() override;
  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  std::string handshake() override;
  std::vector<std::string> exchange(const std::vector<std::string>& request_lines) override;

 private:
  std::optional<std::string> read_line();
  void start();

  std::vector<std::string> argv_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<std::string> handshake_;
};

// In-process transport around a request handler (JSON line in, JSON line
// out). Responses come back in reverse order to exercise client reordering.
class FunctionTransport : public ScorerTransport {
 public:
  using Handler = std::function<std::string(const std::string& request_line)>;
  FunctionTransport(std::string handshake_line, Handler handler);

  std::string handshake() override { return handshake_; }
  std::vector<std::string> exchange(const std::vector<std::string>& request_lines) override;

 private:
  std::string handshake_;
  Handler handler_;
};

// Deterministic stub scorer: `table` maps sha256(candidate) to a score;
// everything else gets `constant`. Missing references for comet22/bleurt20
// and malformed lines produce error records.
struct StubScorer {
  double constant = 0.5;
  std::map<std::string, double> table;
  std::vector<NeuralMetric> metrics = {NeuralMetric::comet22, NeuralMetric::cometkiwi, NeuralMetric::bleurt20};

  std::string handshake_line() const;
  std::string handle(const std::string& request_line) const;
  std::shared_ptr<FunctionTransport> transport() const;
};

struct BridgeHandshake {
  int protocol_version = 0;
  std::vector<std::string> metrics_available;
  std::string raw;
};

class ScorerBridge {
 public:
  explicit ScorerBridge(std::shared_ptr<ScorerTransport> transport);

  const BridgeHandshake& handshake();
  // One score per item, in item order, on the metric's native scale.
  // ProtocolError before any request when an item lacks a required field;
  // ProtocolError naming the record for error responses or id mismatches.
  std::vector<double> score(NeuralMetric metric, const std::vector<ScoreItem>& items);

  std::size_t requests_sent() const { return requests_sent_; }
  std::size_t cache_hits() const { return cache_hits_; }

 private:
  std::shared_ptr<ScorerTransport> transport_;
  std::optional<BridgeHandshake> handshake_;
  std::map<std::string, double> cache_;
  std::size_t next_id_ = 0;
  std::size_t requests_sent_ = 0;
  std::size_t cache_hits_ = 0;
  std::mutex mu_;
};

}  // namespace tear
