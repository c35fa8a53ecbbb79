#include "cpt/kway.hpp"

#include <bit>

#include "cpt/serialize.hpp"

namespace cpt {

namespace {

constexpr std::size_t kMaxLeafCapacity = std::size_t{1} << 24;

std::size_t depth_for(std::size_t n, std::size_t k) {
  if (k < 2 || !std::has_single_bit(k)) throw DomainError("k must be a power of two >= 2");
  std::size_t d = 1;
  std::size_t cap = k;
  while (cap < n) {
    cap *= k;
    ++d;
    if (cap > kMaxLeafCapacity) throw DomainError("k-way tree too large");
  }
  return d;
}

std::size_t pow_int(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) {
    if (r > kMaxLeafCapacity / base) throw DomainError("k-way tree too large");
    r *= base;
  }
  return r;
}

}  // namespace

KWayTree::KWayTree(std::size_t k, std::size_t depth, RegressorConfig cfg, kernels::Exec exec)
    : k_(k), depth_(depth), capacity_(0), code_(CodeMatrix::hadamard(1)), cfg_(cfg), exec_(exec) {
  if (k < 2 || !std::has_single_bit(k)) throw DomainError("k must be a power of two >= 2");
  code_ = CodeMatrix::hadamard(std::countr_zero(k));
  capacity_ = pow_int(k, depth_);
  const std::size_t nodes = (capacity_ - 1) / (k - 1);
  rows_.assign(nodes * (k - 1), LinearRegressor(cfg));
}

KWayTree::KWayTree(std::span<const std::string> labels, std::size_t k, RegressorConfig cfg, kernels::Exec exec)
    : KWayTree(k, depth_for(labels.size(), k), cfg, exec) {
  for (const auto& l : labels) {
    if (l.empty() || labels_.find(l)) throw InvalidInput("labels must be distinct and nonempty");
    labels_.intern(l);
  }
}

std::vector<KWayTree::Step> KWayTree::path(std::size_t slot) const {
  if (slot >= capacity_) throw InvalidInput("slot outside tree");
  std::vector<Step> out;
  out.reserve(depth_);
  std::size_t level_offset = 0;  // (k^d - 1) / (k - 1)
  std::size_t level_width = 1;   // k^d
  std::size_t within = 0;        // sum_{m<d} digit_m k^m
  std::size_t rest = slot;
  for (std::size_t d = 0; d < depth_; ++d) {
    const std::size_t digit = rest % k_;
    rest /= k_;
    out.push_back({level_offset + within, digit});
    within += digit * level_width;
    level_offset += level_width;
    level_width *= k_;
  }
  return out;
}

std::optional<std::size_t> KWayTree::slot_of(std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) return std::nullopt;
  return *id;
}

std::span<LinearRegressor> KWayTree::node_regressors(std::size_t node) {
  return std::span<LinearRegressor>(rows_).subspan(node * (k_ - 1), k_ - 1);
}

std::span<const LinearRegressor> KWayTree::node_regressors(std::size_t node) const {
  return std::span<const LinearRegressor>(rows_).subspan(node * (k_ - 1), k_ - 1);
}

double KWayTree::child_probability(std::size_t node, std::size_t child, const SparseVector& x) const {
  std::vector<double> scores(k_ - 1);
  kernels::predict_all(node_regressors(node), x, scores, exec_);
  return Probability(pecoc_decode(code_, column_of_child(child), scores)).value();
}

Probability KWayTree::predict(const SparseVector& x, std::string_view label) const {
  auto slot = slot_of(label);
  if (!slot) return Probability(0.0);
  double q = 1.0;
  for (const Step& s : path(*slot)) q *= child_probability(s.node, s.child, x);
  return Probability(q);
}

bool KWayTree::train(const SparseVector& x, std::string_view label) {
  auto slot = slot_of(label);
  if (!slot) {
    if (labels_.size() >= capacity_ || label.empty()) return false;
    slot = labels_.intern(label);
  }
  std::vector<double> targets(k_ - 1);
  for (const Step& s : path(*slot)) {
    const std::size_t col = column_of_child(s.child);
    for (std::size_t i = 0; i + 1 < k_; ++i) targets[i] = code_.bit(i + 1, col) ? 1.0 : 0.0;
    kernels::update_all(node_regressors(s.node), x, targets, exec_);
    updates_ += k_ - 1;
  }
  return true;
}

void KWayTree::write_structure(BinaryWriter& out) const {
  out.u32(static_cast<std::uint32_t>(k_));
  out.u32(static_cast<std::uint32_t>(depth_));
  out.u32(static_cast<std::uint32_t>(cfg_.hash_bits));
  out.f64(cfg_.learning_rate);
  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& t : labels_.tokens()) out.str(t);
}

void KWayTree::write_weights(BinaryWriter& out) const {
  out.u64(updates_);
  for (const auto& r : rows_) r.write(out);
}

KWayTree KWayTree::read(BinaryReader& structure, BinaryReader& weights) {
  const std::size_t k = structure.u32();
  const std::size_t depth = structure.u32();
  RegressorConfig cfg;
  cfg.hash_bits = static_cast<int>(structure.u32());
  cfg.learning_rate = structure.f64();
  const auto n = structure.u32();
  if (k < 2 || !std::has_single_bit(k) || depth < 1 || depth > 24) throw CorruptionError("bad k-way header");
  structure.expect_at_least(std::size_t{n} * 4);
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < n; ++i) labels.push_back(structure.str());
  KWayTree t(k, depth, cfg, kernels::Exec::kParallel);
  if (n > t.capacity_) throw CorruptionError("k-way depth does not match its labels");
  for (const auto& l : labels) {
    if (l.empty() || t.labels_.find(l)) throw CorruptionError("bad label table");
    t.labels_.intern(l);
  }
  t.updates_ = weights.u64();
  for (auto& r : t.rows_) r = LinearRegressor::read(weights);
  return t;
}

std::optional<std::size_t> exact_log(std::size_t n, std::size_t k) {
  if (k < 2 || n < 1) return std::nullopt;
  std::size_t d = 0;
  while (n > 1) {
    if (n % k != 0) return std::nullopt;
    n /= k;
    ++d;
  }
  return d;
}

double regret_curve(std::size_t n, std::size_t k) {
  if (k < 2 || !std::has_single_bit(k)) throw DomainError("k must be a power of two >= 2");
  if (k > n) throw DomainError("k must not exceed n");
  auto d = exact_log(n, k);
  if (!d) throw DomainError("n must be a power of k");
  const double depth = static_cast<double>(*d);
  const double ratio = static_cast<double>(k - 1) / static_cast<double>(k);
  return 4.0 * depth * depth * ratio * ratio;
}

}  // namespace cpt
