#include "cpt/regressor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "cpt/serialize.hpp"

namespace cpt {

LinearRegressor::LinearRegressor(RegressorConfig config)
    : learning_rate_(config.learning_rate), hash_bits_(config.hash_bits) {
  if (!(learning_rate_ > 0.0) || !std::isfinite(learning_rate_))
    throw DomainError("learning rate must be a positive finite number");
  if (hash_bits_ < kMinHashBits || hash_bits_ > kMaxHashBits) throw DomainError("hash_bits out of range");
}

void LinearRegressor::check_input(const SparseVector& x) const {
  if (x.hash_bits() > hash_bits_) throw InvalidInput("observation hashed wider than the weight table");
}

double LinearRegressor::raw(const SparseVector& x) const {
  double s = bias_;
  for (const auto& f : x.entries()) {
    auto it = weights_.find(f.index);
    if (it != weights_.end()) s += it->second * f.value;
  }
  return s;
}

void LinearRegressor::update(const SparseVector& x, double target) {
  if (!(target >= 0.0 && target <= 1.0)) throw DomainError("regression target must lie in [0, 1]");
  check_input(x);
  const double step = learning_rate_ * (target - raw(x));
  for (const auto& f : x.entries()) weights_[f.index] += step * f.value;
  bias_ += step;
  ++update_count_;
}

double LinearRegressor::weight(std::uint32_t index) const {
  auto it = weights_.find(index);
  return it == weights_.end() ? 0.0 : it->second;
}

void LinearRegressor::set_weight(std::uint32_t index, double value) {
  if (index >= (std::uint64_t{1} << hash_bits_)) throw InvalidInput("weight index outside hash range");
  if (value == 0.0)
    weights_.erase(index);
  else
    weights_[index] = value;
}

void LinearRegressor::write(BinaryWriter& out) const {
  std::vector<std::pair<std::uint32_t, double>> nz;
  nz.reserve(weights_.size());
  for (const auto& [i, w] : weights_)
    if (w != 0.0) nz.emplace_back(i, w);
  std::sort(nz.begin(), nz.end());

  out.u32(static_cast<std::uint32_t>(hash_bits_));
  out.f64(learning_rate_);
  out.u64(update_count_);
  out.f64(bias_);
  out.u32(static_cast<std::uint32_t>(nz.size()));
  for (const auto& [i, w] : nz) {
    out.u32(i);
    out.f64(w);
  }
}

LinearRegressor LinearRegressor::read(BinaryReader& in) {
  RegressorConfig cfg;
  cfg.hash_bits = static_cast<int>(in.u32());
  cfg.learning_rate = in.f64();
  if (cfg.hash_bits < kMinHashBits || cfg.hash_bits > kMaxHashBits || !(cfg.learning_rate > 0.0))
    throw CorruptionError("bad regressor header");
  LinearRegressor r(cfg);
  r.update_count_ = in.u64();
  r.bias_ = in.f64();
  auto n = in.u32();
  in.expect_at_least(std::size_t{n} * 12);
  r.weights_.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k) {
    auto idx = in.u32();
    auto w = in.f64();
    if (idx >= (std::uint64_t{1} << cfg.hash_bits)) throw CorruptionError("weight index outside hash range");
    r.weights_[idx] = w;
  }
  return r;
}

bool LinearRegressor::same_state(const LinearRegressor& other) const {
  auto bits = [](double d) { return std::bit_cast<std::uint64_t>(d); };
  if (bits(bias_) != bits(other.bias_) || bits(learning_rate_) != bits(other.learning_rate_) ||
      hash_bits_ != other.hash_bits_ || update_count_ != other.update_count_)
    return false;
  auto nonzero = [](const auto& m) {
    return std::count_if(m.begin(), m.end(), [](const auto& kv) { return kv.second != 0.0; });
  };
  if (nonzero(weights_) != nonzero(other.weights_)) return false;
  for (const auto& [i, w] : weights_) {
    if (w == 0.0) continue;
    if (bits(w) != bits(other.weight(i))) return false;
  }
  return true;
}

}  // namespace cpt
