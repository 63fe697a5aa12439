#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tear {

// Coarse error class; the CLI maps it onto its exit code.
enum class ErrorClass { usage, data, provider };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message, ErrorClass cls)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)), class_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return class_; }

 private:
  std::string kind_;
  ErrorClass class_;
};

#define TEAR_DEFINE_ERROR(Name, Class)                                      \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& message) : Error(#Name, message, Class) {} \
  };

TEAR_DEFINE_ERROR(ConfigError, ErrorClass::usage)
TEAR_DEFINE_ERROR(ValidationError, ErrorClass::data)
TEAR_DEFINE_ERROR(PlaceholderError, ErrorClass::data)
TEAR_DEFINE_ERROR(MissingExemplars, ErrorClass::data)
TEAR_DEFINE_ERROR(InsufficientPool, ErrorClass::data)
TEAR_DEFINE_ERROR(ExemplarLeakage, ErrorClass::data)
TEAR_DEFINE_ERROR(TemplateError, ErrorClass::data)

TEAR_DEFINE_ERROR(ProviderError, ErrorClass::provider)
TEAR_DEFINE_ERROR(AuthError, ErrorClass::provider)
TEAR_DEFINE_ERROR(ReplayMiss, ErrorClass::provider)
TEAR_DEFINE_ERROR(BridgeUnavailable, ErrorClass::provider)
TEAR_DEFINE_ERROR(ProtocolError, ErrorClass::provider)

TEAR_DEFINE_ERROR(WeightError, ErrorClass::usage)
TEAR_DEFINE_ERROR(SampleTooLarge, ErrorClass::usage)
TEAR_DEFINE_ERROR(VersionError, ErrorClass::data)
TEAR_DEFINE_ERROR(CorruptArchive, ErrorClass::data)
TEAR_DEFINE_ERROR(MissingInputs, ErrorClass::data)

TEAR_DEFINE_ERROR(LengthMismatch, ErrorClass::data)
TEAR_DEFINE_ERROR(EmptyCorpus, ErrorClass::data)
TEAR_DEFINE_ERROR(TooFewSystems, ErrorClass::data)
TEAR_DEFINE_ERROR(DegenerateInput, ErrorClass::data)
TEAR_DEFINE_ERROR(EntityMismatch, ErrorClass::data)
TEAR_DEFINE_ERROR(AlignmentError, ErrorClass::data)
TEAR_DEFINE_ERROR(UnknownPair, ErrorClass::data)

TEAR_DEFINE_ERROR(SegmentMismatch, ErrorClass::data)
TEAR_DEFINE_ERROR(UnknownSession, ErrorClass::data)
TEAR_DEFINE_ERROR(UnknownTask, ErrorClass::data)
TEAR_DEFINE_ERROR(UnknownAnnotator, ErrorClass::data)
TEAR_DEFINE_ERROR(DuplicateJudgment, ErrorClass::data)

#undef TEAR_DEFINE_ERROR

// Carries a 1-based line (or row) number.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& message)
      : Error("FormatError", "line " + std::to_string(line) + ": " + message, ErrorClass::data),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Carries the byte offset of the first invalid UTF-8 byte.
class EncodingError : public Error {
 public:
  EncodingError(std::size_t offset, const std::string& message)
      : Error("EncodingError", message + " (first bad byte at offset " + std::to_string(offset) + ")",
              ErrorClass::data),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class CacheConflict : public Error {
 public:
  explicit CacheConflict(std::vector<std::string> keys)
      : Error("CacheConflict", describe(keys), ErrorClass::data), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  static std::string describe(const std::vector<std::string>& keys) {
    std::string out = std::to_string(keys.size()) + " conflicting key(s):";
    for (const auto& k : keys) out += " " + k;
    return out;
  }
  std::vector<std::string> keys_;
};

}  // namespace tear
