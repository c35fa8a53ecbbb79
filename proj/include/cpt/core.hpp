#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpt {

// ---------------------------------------------------------------------------
// Error classes. Every failure in the library is reported by throwing one of
// these; the CLI maps them to a nonzero exit code plus a stderr diagnostic.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInput : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct AbsentLabel : Error {
  using Error::Error;
};
struct CorruptionError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EmptyStream : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

inline constexpr int kDefaultHashBits = 18;
inline constexpr int kMinHashBits = 10;
inline constexpr int kMaxHashBits = 30;

// Maps a feature token to a bucket in [0, 2^hash_bits). Accepts any width in
// [1, 32]; SparseVector itself only admits [kMinHashBits, kMaxHashBits].
std::uint32_t hash_feature(std::string_view token, int hash_bits);

struct Feature {
  std::uint32_t index;
  double value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Hashed sparse observation in canonical form: strictly increasing indices,
// finite nonzero values.
class SparseVector {
 public:
  SparseVector() = default;

  std::span<const Feature> entries() const { return entries_; }
  int hash_bits() const { return hash_bits_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double squared_norm() const;
  double dot(std::span<const double> dense) const;

  // Exact byte image of the vector; used as a lookup key by the table baseline.
  std::string key_bytes() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  friend SparseVector canonicalize(std::vector<Feature> entries, int hash_bits);

  std::vector<Feature> entries_;
  int hash_bits_ = kDefaultHashBits;
};

// Sorts by index, sums duplicates, drops zeros. Throws InvalidInput on a
// non-finite value or an index outside the hash range.
SparseVector canonicalize(std::vector<Feature> entries, int hash_bits = kDefaultHashBits);

// Clipped to [0, 1] at construction; NaN maps to 0.
class Probability {
 public:
  constexpr Probability() = default;
  constexpr explicit Probability(double v) : value_(v >= 0.0 ? (v <= 1.0 ? v : 1.0) : 0.0) {}
  constexpr double value() const { return value_; }

 private:
  double value_ = 0.0;
};

struct Example {
  SparseVector x;
  std::string y;
};

// Dense ids for opaque label tokens, assigned in order of first sight.
class LabelDictionary {
 public:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::optional<std::uint32_t> find(std::string_view token) const;
  std::uint32_t intern(std::string_view token);
  const std::string& token(std::uint32_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace cpt
