#pragma once

#include <cstdint>
#include <unordered_map>

#include "cpt/core.hpp"

namespace cpt {

class BinaryWriter;
class BinaryReader;

struct RegressorConfig {
  double learning_rate = 0.1;
  int hash_bits = kDefaultHashBits;
};

// Linear model over hashed features trained by SGD on squared loss. The
// weight table is conceptually dense over 2^hash_bits buckets but only
// touched buckets are materialised.
//
// The gradient step uses the unclipped score, so with eta*(|x|^2 + 1) < 1 a
// single update contracts |raw(x) - target| by exactly 1 - eta*(|x|^2 + 1).
class LinearRegressor {
 public:
  explicit LinearRegressor(RegressorConfig config = {});

  double raw(const SparseVector& x) const;
  Probability predict(const SparseVector& x) const { return Probability(raw(x)); }
  void update(const SparseVector& x, double target);

  double weight(std::uint32_t index) const;
  void set_weight(std::uint32_t index, double value);
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }

  double learning_rate() const { return learning_rate_; }
  int hash_bits() const { return hash_bits_; }
  std::uint64_t update_count() const { return update_count_; }
  std::size_t touched() const { return weights_.size(); }

  void write(BinaryWriter& out) const;
  static LinearRegressor read(BinaryReader& in);

  // Bitwise equality of the model state.
  bool same_state(const LinearRegressor& other) const;

 private:
  void check_input(const SparseVector& x) const;

  std::unordered_map<std::uint32_t, double> weights_;
  double bias_ = 0.0;
  double learning_rate_;
  int hash_bits_;
  std::uint64_t update_count_ = 0;
};

}  // namespace cpt
