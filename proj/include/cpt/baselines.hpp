#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpt/estimator.hpp"
#include "cpt/kernels.hpp"
#include "cpt/regressor.hpp"

namespace cpt {

class BinaryReader;

// One regressor per label trained on membership indicators. Every learn()
// touches every known label, so the per-example cost grows with the label
// count.
class OneAgainstAll final : public Estimator {
 public:
  explicit OneAgainstAll(RegressorConfig cfg, kernels::Exec exec = kernels::Exec::kParallel)
      : cfg_(cfg), exec_(exec) {}

  std::string_view kind() const override { return "oaa"; }
  Probability score(const SparseVector& x, std::string_view label) const override;
  void learn(const Example& example) override;
  std::uint64_t regressor_updates() const override { return updates_; }
  std::size_t label_count() const override { return labels_.size(); }
  void write_structure(BinaryWriter& out) const override;
  void write_weights(BinaryWriter& out) const override;
  static OneAgainstAll read(BinaryReader& structure, BinaryReader& weights);

  std::span<const LinearRegressor> regressors() const { return regs_; }

 private:
  RegressorConfig cfg_;
  kernels::Exec exec_;
  LabelDictionary labels_;
  std::vector<LinearRegressor> regs_;
  std::uint64_t updates_ = 0;
};

// Empirical conditional frequencies keyed on the exact byte image of x.
// Unseen (x, y) pairs score 0.
class TableBaseline final : public Estimator {
 public:
  std::string_view kind() const override { return "table"; }
  Probability score(const SparseVector& x, std::string_view label) const override;
  void learn(const Example& example) override;
  std::uint64_t regressor_updates() const override { return 0; }
  std::size_t label_count() const override { return labels_.size(); }
  void write_structure(BinaryWriter& out) const override;
  void write_weights(BinaryWriter& out) const override;
  static TableBaseline read(BinaryReader& structure, BinaryReader& weights);

  std::uint64_t count(const SparseVector& x, std::string_view label) const;
  std::uint64_t total(const SparseVector& x) const;

 private:
  struct Context {
    std::uint64_t total = 0;
    std::unordered_map<std::uint32_t, std::uint64_t> by_label;
  };
  LabelDictionary labels_;
  std::unordered_map<std::string, Context> contexts_;
};

}  // namespace cpt
