#include "cpt/baselines.hpp"

#include <algorithm>

#include "cpt/serialize.hpp"

namespace cpt {

Probability OneAgainstAll::score(const SparseVector& x, std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) return Probability(0.0);
  return regs_[*id].predict(x);
}

void OneAgainstAll::learn(const Example& ex) {
  if (ex.y.empty()) throw InvalidInput("empty label");
  const auto id = labels_.intern(ex.y);
  if (id == regs_.size()) regs_.emplace_back(cfg_);
  kernels::update_one_hot(regs_, ex.x, id, exec_);
  updates_ += regs_.size();
}

void OneAgainstAll::write_structure(BinaryWriter& out) const {
  out.u32(static_cast<std::uint32_t>(cfg_.hash_bits));
  out.f64(cfg_.learning_rate);
  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& t : labels_.tokens()) out.str(t);
}

void OneAgainstAll::write_weights(BinaryWriter& out) const {
  out.u64(updates_);
  for (const auto& r : regs_) r.write(out);
}

OneAgainstAll OneAgainstAll::read(BinaryReader& structure, BinaryReader& weights) {
  RegressorConfig cfg;
  cfg.hash_bits = static_cast<int>(structure.u32());
  cfg.learning_rate = structure.f64();
  OneAgainstAll m(cfg);
  const auto n = structure.u32();
  structure.expect_at_least(std::size_t{n} * 4);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto t = structure.str();
    if (t.empty() || m.labels_.find(t)) throw CorruptionError("bad label table");
    m.labels_.intern(t);
  }
  m.updates_ = weights.u64();
  m.regs_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) m.regs_.push_back(LinearRegressor::read(weights));
  return m;
}

Probability TableBaseline::score(const SparseVector& x, std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) return Probability(0.0);
  auto it = contexts_.find(x.key_bytes());
  if (it == contexts_.end()) return Probability(0.0);
  auto jt = it->second.by_label.find(*id);
  if (jt == it->second.by_label.end()) return Probability(0.0);
  return Probability(static_cast<double>(jt->second) / static_cast<double>(it->second.total));
}

void TableBaseline::learn(const Example& ex) {
  if (ex.y.empty()) throw InvalidInput("empty label");
  auto& ctx = contexts_[ex.x.key_bytes()];
  ++ctx.total;
  ++ctx.by_label[labels_.intern(ex.y)];
}

std::uint64_t TableBaseline::count(const SparseVector& x, std::string_view label) const {
  auto id = labels_.find(label);
  auto it = contexts_.find(x.key_bytes());
  if (!id || it == contexts_.end()) return 0;
  auto jt = it->second.by_label.find(*id);
  return jt == it->second.by_label.end() ? 0 : jt->second;
}

std::uint64_t TableBaseline::total(const SparseVector& x) const {
  auto it = contexts_.find(x.key_bytes());
  return it == contexts_.end() ? 0 : it->second.total;
}

void TableBaseline::write_structure(BinaryWriter& out) const {
  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& t : labels_.tokens()) out.str(t);

  std::vector<const std::string*> keys;
  keys.reserve(contexts_.size());
  for (const auto& kv : contexts_) keys.push_back(&kv.first);
  std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });
  out.u64(keys.size());
  for (const auto* k : keys) {
    const Context& c = contexts_.at(*k);
    out.str(*k);
    out.u64(c.total);
    std::vector<std::pair<std::uint32_t, std::uint64_t>> rows(c.by_label.begin(), c.by_label.end());
    std::sort(rows.begin(), rows.end());
    out.u32(static_cast<std::uint32_t>(rows.size()));
    for (const auto& [label, n] : rows) {
      out.u32(label);
      out.u64(n);
    }
  }
}

void TableBaseline::write_weights(BinaryWriter&) const {}

TableBaseline TableBaseline::read(BinaryReader& structure, BinaryReader&) {
  TableBaseline t;
  const auto n = structure.u32();
  structure.expect_at_least(std::size_t{n} * 4);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto tok = structure.str();
    if (tok.empty() || t.labels_.find(tok)) throw CorruptionError("bad label table");
    t.labels_.intern(tok);
  }
  const auto contexts = structure.u64();
  structure.expect_at_least(contexts * 16);
  for (std::uint64_t i = 0; i < contexts; ++i) {
    auto key = structure.str();
    Context c;
    c.total = structure.u64();
    const auto rows = structure.u32();
    structure.expect_at_least(std::size_t{rows} * 12);
    std::uint64_t sum = 0;
    for (std::uint32_t r = 0; r < rows; ++r) {
      const auto label = structure.u32();
      const auto count = structure.u64();
      if (label >= n) throw CorruptionError("table label out of range");
      c.by_label[label] = count;
      sum += count;
    }
    if (sum != c.total) throw CorruptionError("table totals inconsistent");
    t.contexts_.emplace(std::move(key), std::move(c));
  }
  return t;
}

}  // namespace cpt
