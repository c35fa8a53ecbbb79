#pragma once

#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cpt/core.hpp"

namespace cpt::testing {

// Hashed bag of tokens, each with weight 1.
inline SparseVector bag(std::initializer_list<std::string> tokens, int bits = kDefaultHashBits) {
  std::vector<Feature> f;
  for (const auto& t : tokens) f.push_back({hash_feature(t, bits), 1.0});
  return canonicalize(std::move(f), bits);
}

inline SparseVector raw_vector(std::initializer_list<std::pair<std::uint32_t, double>> entries,
                               int bits = kDefaultHashBits) {
  std::vector<Feature> f;
  for (const auto& [i, v] : entries) f.push_back({i, v});
  return canonicalize(std::move(f), bits);
}

inline SparseVector random_vector(std::mt19937_64& rng, std::size_t max_entries, int bits = 12) {
  std::uniform_int_distribution<std::uint32_t> idx(0, (1u << bits) - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(0, max_entries);
  std::vector<Feature> f(len(rng));
  for (auto& e : f) e = {idx(rng), val(rng)};
  return canonicalize(std::move(f), bits);
}

inline std::vector<std::string> label_names(std::size_t n, const std::string& prefix = "l") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace cpt::testing
