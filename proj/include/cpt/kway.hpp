#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpt/estimator.hpp"
#include "cpt/kernels.hpp"
#include "cpt/pecoc.hpp"

namespace cpt {

class BinaryReader;

// Conditional-PECOC tree: a complete k-ary tree (k a power of two) whose
// every internal node runs a size-k Hadamard code with k-1 regressors to
// estimate which child the label lies under. k = 2 is a binary conditional
// probability tree; k >= n is flat PECOC.
//
// Labels take leaf slots in arrival order. Slot s descends to child
// (s / k^d) mod k at depth d, so consecutive labels are dealt round-robin
// across the root's children. Slots past the label count are padding.
class KWayTree final : public Estimator {
 public:
  struct Step {
    std::size_t node;
    std::size_t child;
  };

  KWayTree(std::span<const std::string> labels, std::size_t k, RegressorConfig cfg,
           kernels::Exec exec = kernels::Exec::kParallel);

  std::string_view kind() const override { return "kway"; }
  Probability score(const SparseVector& x, std::string_view label) const override { return predict(x, label); }
  void learn(const Example& example) override { train(example.x, example.y); }
  std::uint64_t regressor_updates() const override { return updates_; }
  std::size_t label_count() const override { return labels_.size(); }
  void write_structure(BinaryWriter& out) const override;
  void write_weights(BinaryWriter& out) const override;
  static KWayTree read(BinaryReader& structure, BinaryReader& weights);

  // Returns false when the label is new and no padding slot is left.
  bool train(const SparseVector& x, std::string_view label);
  // Product over the path of each node's clipped child estimate; 0 for an
  // unknown label.
  Probability predict(const SparseVector& x, std::string_view label) const;

  std::vector<Step> path(std::size_t slot) const;
  std::optional<std::size_t> slot_of(std::string_view label) const;

  // Clipped estimate that the label continues to `child` given it reached
  // `node`.
  double child_probability(std::size_t node, std::size_t child, const SparseVector& x) const;

  // Code column that represents child c. Columns are assigned in reverse so
  // that for k = 2 the node regressor estimates the right-branch probability.
  std::size_t column_of_child(std::size_t child) const { return k_ - 1 - child; }

  std::size_t arity() const { return k_; }
  std::size_t depth() const { return depth_; }
  std::size_t leaf_capacity() const { return capacity_; }
  std::size_t node_count() const { return rows_.size() / (k_ - 1); }
  std::size_t regressors_per_example() const { return (k_ - 1) * depth_; }
  const CodeMatrix& code() const { return code_; }
  std::span<LinearRegressor> node_regressors(std::size_t node);
  std::span<const LinearRegressor> node_regressors(std::size_t node) const;

 private:
  KWayTree(std::size_t k, std::size_t depth, RegressorConfig cfg, kernels::Exec exec);

  std::size_t k_;
  std::size_t depth_;
  std::size_t capacity_;
  CodeMatrix code_;
  std::vector<LinearRegressor> rows_;  // node-major, k-1 per node
  LabelDictionary labels_;             // dense id == slot
  RegressorConfig cfg_;
  kernels::Exec exec_;
  std::uint64_t updates_ = 0;
};

// log_k n when n is an exact power of k, otherwise nullopt.
std::optional<std::size_t> exact_log(std::size_t n, std::size_t k);

// Regret multiplier 4 (log_k n)^2 ((k-1)/k)^2 of the k-way construction.
// Requires k a power of two, 2 <= k <= n, n a power of k.
double regret_curve(std::size_t n, std::size_t k);

}  // namespace cpt
