#include "cpt/core.hpp"

#include <algorithm>
#include <cmath>

#include "cpt/serialize.hpp"

namespace cpt {

namespace {

// FNV-1a followed by the splitmix64 finalizer so the high bits, which are
// the ones kept, depend on every input byte.
std::uint64_t mix_hash(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

}  // namespace

std::uint32_t hash_feature(std::string_view token, int hash_bits) {
  if (hash_bits < 1 || hash_bits > 32) throw DomainError("hash_bits must be in [1, 32]");
  return static_cast<std::uint32_t>(mix_hash(token) >> (64 - hash_bits));
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& f : entries_) s += f.value * f.value;
  return s;
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (const auto& f : entries_) s += dense[f.index] * f.value;
  return s;
}

std::string SparseVector::key_bytes() const {
  BinaryWriter w;
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& f : entries_) {
    w.u32(f.index);
    w.f64(f.value);
  }
  return w.take();
}

SparseVector canonicalize(std::vector<Feature> entries, int hash_bits) {
  if (hash_bits < kMinHashBits || hash_bits > kMaxHashBits)
    throw DomainError("hash_bits must be in [" + std::to_string(kMinHashBits) + ", " +
                      std::to_string(kMaxHashBits) + "]");
  const std::uint64_t limit = std::uint64_t{1} << hash_bits;
  for (const auto& f : entries) {
    if (!std::isfinite(f.value)) throw InvalidInput("non-finite feature value");
    if (f.index >= limit) throw InvalidInput("feature index outside hash range");
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Feature& a, const Feature& b) { return a.index < b.index; });

  SparseVector out;
  out.hash_bits_ = hash_bits;
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    double sum = 0.0;
    for (; j < entries.size() && entries[j].index == entries[i].index; ++j) sum += entries[j].value;
    if (!std::isfinite(sum)) throw InvalidInput("feature value overflow");
    if (sum != 0.0) out.entries_.push_back({entries[i].index, sum});
    i = j;
  }
  return out;
}

std::optional<std::uint32_t> LabelDictionary::find(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t LabelDictionary::intern(std::string_view token) {
  if (auto id = find(token)) return *id;
  auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

}  // namespace cpt
