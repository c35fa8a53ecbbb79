#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpt/core.hpp"
#include "cpt/estimator.hpp"
#include "cpt/regressor.hpp"

namespace cpt {

class BinaryReader;

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class Direction : std::uint8_t { kLeft = 0, kRight = 1 };

struct PathStep {
  NodeId node;
  Direction direction;

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

enum class InsertionPolicy : std::uint8_t {
  kOnline = 0,  // route new labels by the insertion objective
  kRandom = 1,  // route new labels by fair coin flips
};

struct TreeOptions {
  InsertionPolicy policy = InsertionPolicy::kOnline;
  double alpha = 0.9;
  std::uint64_t seed = 0;
  RegressorConfig regressor;
};

struct TreeNode {
  explicit TreeNode(RegressorConfig cfg) : regressor(cfg) {}

  LinearRegressor regressor;
  NodeId parent = kNoNode;
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  std::uint32_t left_count = 0;
  std::uint32_t right_count = 0;
  std::uint32_t label = LabelDictionary::kNone;  // leaves only

  bool is_leaf() const { return left == kNoNode; }
};

struct DepthStats {
  struct NodeCounts {
    NodeId node;
    std::uint32_t left;
    std::uint32_t right;
  };

  std::size_t leaves = 0;
  std::size_t max_depth = 0;
  std::uint64_t total_leaf_depth = 0;
  std::uint64_t disagreement_count = 0;
  std::vector<NodeCounts> per_node;        // internal nodes, preorder
  std::vector<std::size_t> depth_histogram;  // leaves per depth
};

// Binary tree whose leaves are labels. Each internal node's regressor
// estimates the probability that the label lies in its right subtree; a
// label's probability is the product of branch estimates along its path.
//
// Training is sequential. score() and the other const members are safe to
// call concurrently while no thread is training.
class CondProbTree final : public Estimator {
 public:
  using NodeScorer = std::function<double(NodeId)>;

  explicit CondProbTree(TreeOptions options = {});

  // Fixed balanced tree over the given labels. Labels are split by position
  // parity at each level (position bit d picks the branch at depth d), which
  // is the binary case of the k-way round-robin layout.
  static CondProbTree balanced(std::span<const std::string> labels, TreeOptions options = {});

  // Estimator
  std::string_view kind() const override { return "cpt"; }
  Probability score(const SparseVector& x, std::string_view label) const override {
    return predict(x, label);
  }
  void learn(const Example& example) override { train_online(example.x, example.y); }
  std::uint64_t regressor_updates() const override { return updates_; }
  std::size_t label_count() const override { return labels_.size(); }
  void write_structure(BinaryWriter& out) const override;
  void write_weights(BinaryWriter& out) const override;
  static CondProbTree read(BinaryReader& structure, BinaryReader& weights);

  // Internal nodes from the root toward the label's leaf, each with the
  // branch taken. Throws AbsentLabel for an unknown label.
  std::vector<PathStep> path_to(std::string_view label) const;
  std::vector<PathStep> path_to_id(std::uint32_t label) const;

  // Product of branch probabilities; 0 for a label the tree has never seen.
  Probability predict(const SparseVector& x, std::string_view label) const;

  // Path product with the node regressors replaced by right_prob(node).
  template <class RightProb>
  double path_product(std::uint32_t label, RightProb&& right_prob) const {
    double q = 1.0;
    for (const PathStep& s : path_to_id(label)) {
      const double f = Probability(right_prob(s.node)).value();
      q *= s.direction == Direction::kRight ? f : 1.0 - f;
    }
    return q;
  }

  // Trains every node on the label's path toward its branch and the leaf
  // regressor toward 0. Throws AbsentLabel for an unknown label.
  void train_known(const SparseVector& x, std::string_view label);

  // Adds a leaf for a new label. With a scorer, routing decisions read the
  // scorer's value instead of the node regressor (the regressors are still
  // trained); this lets tests drive arbitrary prediction sequences.
  void insert_label(const SparseVector& x, std::string_view label);
  void insert_label(const SparseVector& x, std::string_view label, const NodeScorer& scorer);

  // train_known for a seen label, insert_label otherwise. With a frozen
  // structure, unseen labels are skipped.
  void train_online(const SparseVector& x, std::string_view label);

  void freeze_structure(bool frozen) { frozen_ = frozen; }
  bool structure_frozen() const { return frozen_; }

  // Exact recount by traversal. Throws CorruptionError when stored subtree
  // counts disagree with the recount.
  DepthStats depth_stats() const;

  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  TreeNode& mutable_node(NodeId id) { return nodes_.at(id); }
  NodeId leaf_of(std::uint32_t label) const { return leaf_of_.at(label); }
  std::vector<std::uint32_t> labels_under(NodeId id) const;
  const LabelDictionary& labels() const { return labels_; }
  const TreeOptions& options() const { return options_; }
  std::uint64_t disagreement_count() const { return disagreements_; }

 private:
  NodeId new_node();
  bool route_right(NodeId id, double p);

  TreeOptions options_;
  std::vector<TreeNode> nodes_;
  std::vector<NodeId> leaf_of_;
  LabelDictionary labels_;
  NodeId root_ = kNoNode;
  std::mt19937_64 rng_;
  std::uint64_t disagreements_ = 0;
  std::uint64_t updates_ = 0;
  bool frozen_ = false;
};

}  // namespace cpt
