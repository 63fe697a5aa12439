#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace tear {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Length-prefixed concatenation of fields; a stable byte encoding for digests.
std::string canonical_encode(const std::vector<std::string_view>& fields);

// Portable seeded RNG: mt19937_64 output is fully specified, and index
// drawing avoids std::uniform_int_distribution, which differs across
// standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Seed derived from a base seed and a string salt (e.g. an annotator id).
std::uint64_t derive_seed(std::int64_t seed, std::string_view salt);

// k distinct indices drawn from [0, n), returned ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

// Offset of the first byte that is not valid UTF-8, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Write via temp file + rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

std::vector<std::string> split(std::string_view text, char sep);
std::string to_lower_ascii(std::string_view text);

// Fixed two-decimal rendering, with an explicit sign when requested.
std::string format_fixed(double value, int decimals = 2, bool with_sign = false);

}  // namespace tear
