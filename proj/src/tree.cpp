#include "cpt/tree.hpp"

#include <algorithm>
#include <sstream>

#include "cpt/serialize.hpp"
#include "cpt/tree_bounds.hpp"

namespace cpt {

CondProbTree::CondProbTree(TreeOptions options) : options_(options), rng_(options.seed) {
  if (!(options_.alpha > 0.0 && options_.alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  LinearRegressor probe(options_.regressor);  // validates the regressor config
  (void)probe;
}

NodeId CondProbTree::new_node() {
  nodes_.emplace_back(options_.regressor);
  return static_cast<NodeId>(nodes_.size() - 1);
}

CondProbTree CondProbTree::balanced(std::span<const std::string> labels, TreeOptions options) {
  CondProbTree tree(options);
  if (labels.empty()) return tree;

  std::vector<std::uint32_t> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) {
    if (tree.labels_.find(l)) throw InvalidInput("duplicate label in fixed tree: " + l);
    ids.push_back(tree.labels_.intern(l));
  }
  tree.leaf_of_.assign(ids.size(), kNoNode);

  // Explicit stack of (node, member labels) to avoid recursion.
  struct Pending {
    NodeId node;
    std::vector<std::uint32_t> members;
  };
  tree.root_ = tree.new_node();
  std::vector<Pending> stack;
  stack.push_back({tree.root_, std::move(ids)});
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    if (p.members.size() == 1) {
      tree.nodes_[p.node].label = p.members[0];
      tree.leaf_of_[p.members[0]] = p.node;
      continue;
    }
    std::vector<std::uint32_t> even, odd;
    for (std::size_t i = 0; i < p.members.size(); ++i) (i % 2 == 0 ? even : odd).push_back(p.members[i]);
    const NodeId l = tree.new_node();
    const NodeId r = tree.new_node();
    auto& n = tree.nodes_[p.node];
    n.left = l;
    n.right = r;
    n.left_count = static_cast<std::uint32_t>(even.size());
    n.right_count = static_cast<std::uint32_t>(odd.size());
    tree.nodes_[l].parent = p.node;
    tree.nodes_[r].parent = p.node;
    stack.push_back({r, std::move(odd)});
    stack.push_back({l, std::move(even)});
  }
  return tree;
}

std::vector<PathStep> CondProbTree::path_to_id(std::uint32_t label) const {
  if (label >= leaf_of_.size()) throw AbsentLabel("label id not in tree");
  std::vector<PathStep> path;
  NodeId child = leaf_of_[label];
  for (NodeId p = nodes_[child].parent; p != kNoNode; child = p, p = nodes_[p].parent)
    path.push_back({p, nodes_[p].right == child ? Direction::kRight : Direction::kLeft});
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<PathStep> CondProbTree::path_to(std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) throw AbsentLabel("label not in tree: " + std::string(label));
  return path_to_id(*id);
}

Probability CondProbTree::predict(const SparseVector& x, std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) return Probability(0.0);
  return Probability(
      path_product(*id, [&](NodeId n) { return nodes_[n].regressor.predict(x).value(); }));
}

void CondProbTree::train_known(const SparseVector& x, std::string_view label) {
  auto id = labels_.find(label);
  if (!id) throw AbsentLabel("label not in tree: " + std::string(label));
  for (const PathStep& s : path_to_id(*id)) {
    nodes_[s.node].regressor.update(x, s.direction == Direction::kRight ? 1.0 : 0.0);
    ++updates_;
  }
  nodes_[leaf_of_[*id]].regressor.update(x, 0.0);
  ++updates_;
}

bool CondProbTree::route_right(NodeId id, double p) {
  const TreeNode& n = nodes_[id];
  bool right;
  if (options_.policy == InsertionPolicy::kRandom)
    right = (rng_() >> 63) != 0;
  else
    right = insertion_objective(p, n.left_count, n.right_count, options_.alpha) > 0.0;
  const bool prefers_right = p > 0.5;
  if (right != prefers_right) ++disagreements_;
  return right;
}

void CondProbTree::insert_label(const SparseVector& x, std::string_view label) {
  insert_label(x, label, NodeScorer{});
}

void CondProbTree::insert_label(const SparseVector& x, std::string_view label, const NodeScorer& scorer) {
  if (labels_.find(label)) throw InvalidInput("label already in tree: " + std::string(label));
  if (label.empty()) throw InvalidInput("empty label");

  if (root_ == kNoNode) {
    const std::uint32_t id = labels_.intern(label);
    root_ = new_node();
    nodes_[root_].label = id;
    leaf_of_.push_back(root_);
    nodes_[root_].regressor.update(x, 0.0);
    ++updates_;
    return;
  }

  NodeId i = root_;
  while (!nodes_[i].is_leaf()) {
    const double p = scorer ? scorer(i) : nodes_[i].regressor.predict(x).value();
    const bool right = route_right(i, p);
    TreeNode& n = nodes_[i];
    n.regressor.update(x, right ? 1.0 : 0.0);
    ++updates_;
    if (right) {
      ++n.right_count;
      i = n.right;
    } else {
      ++n.left_count;
      i = n.left;
    }
  }

  // Leaf i holds label y'. It becomes internal: the left child inherits a
  // copy of i (label and regressor), the right child is the new label.
  const std::uint32_t id = labels_.intern(label);
  const NodeId l = new_node();
  const NodeId r = new_node();
  {
    TreeNode& left = nodes_[l];
    left.regressor = nodes_[i].regressor;
    left.label = nodes_[i].label;
    left.parent = i;
  }
  {
    TreeNode& right = nodes_[r];
    right.label = id;
    right.parent = i;
    right.regressor.update(x, 0.0);
    ++updates_;
  }
  leaf_of_[nodes_[l].label] = l;
  leaf_of_.push_back(r);

  TreeNode& split = nodes_[i];
  split.label = LabelDictionary::kNone;
  split.left = l;
  split.right = r;
  split.left_count = 1;
  split.right_count = 1;
  split.regressor.update(x, 1.0);
  ++updates_;
}

void CondProbTree::train_online(const SparseVector& x, std::string_view label) {
  if (labels_.find(label))
    train_known(x, label);
  else if (!frozen_)
    insert_label(x, label);
}

std::vector<std::uint32_t> CondProbTree::labels_under(NodeId id) const {
  std::vector<std::uint32_t> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (nodes_[n].is_leaf()) {
      out.push_back(nodes_[n].label);
    } else {
      stack.push_back(nodes_[n].right);
      stack.push_back(nodes_[n].left);
    }
  }
  return out;
}

DepthStats CondProbTree::depth_stats() const {
  DepthStats st;
  st.disagreement_count = disagreements_;
  if (root_ == kNoNode) return st;

  // Postorder leaf counts, then a preorder pass for depths.
  std::vector<std::uint32_t> leaves(nodes_.size(), 0);
  struct Frame {
    NodeId node;
    std::size_t depth;
    bool expanded;
  };
  std::vector<Frame> stack{{root_, 0, false}};
  std::vector<NodeId> preorder;
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[f.node];
    if (n.is_leaf()) {
      leaves[f.node] = 1;
      ++st.leaves;
      st.max_depth = std::max(st.max_depth, f.depth);
      st.total_leaf_depth += f.depth;
      if (st.depth_histogram.size() <= f.depth) st.depth_histogram.resize(f.depth + 1, 0);
      ++st.depth_histogram[f.depth];
      continue;
    }
    if (f.expanded) {
      leaves[f.node] = leaves[n.left] + leaves[n.right];
      if (leaves[n.left] != n.left_count || leaves[n.right] != n.right_count)
        throw CorruptionError("stored subtree counts disagree with recount at node " + std::to_string(f.node));
      continue;
    }
    preorder.push_back(f.node);
    stack.push_back({f.node, f.depth, true});
    stack.push_back({n.right, f.depth + 1, false});
    stack.push_back({n.left, f.depth + 1, false});
  }
  if (st.leaves != labels_.size()) throw CorruptionError("leaf count differs from label count");
  st.per_node.reserve(preorder.size());
  for (NodeId id : preorder) st.per_node.push_back({id, nodes_[id].left_count, nodes_[id].right_count});
  return st;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kLeafRecord = 0;
constexpr std::uint8_t kInternalRecord = 1;

std::vector<NodeId> preorder_of(const std::vector<TreeNode>& nodes, NodeId root) {
  std::vector<NodeId> order;
  if (root == kNoNode) return order;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    order.push_back(n);
    if (!nodes[n].is_leaf()) {
      stack.push_back(nodes[n].right);
      stack.push_back(nodes[n].left);
    }
  }
  return order;
}

}  // namespace

void CondProbTree::write_structure(BinaryWriter& out) const {
  out.u8(static_cast<std::uint8_t>(options_.policy));
  out.f64(options_.alpha);
  out.u64(options_.seed);
  out.u32(static_cast<std::uint32_t>(options_.regressor.hash_bits));
  out.f64(options_.regressor.learning_rate);
  std::ostringstream rng_state;
  rng_state << rng_;
  out.str(rng_state.str());
  out.u64(disagreements_);
  out.u8(frozen_ ? 1 : 0);

  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& t : labels_.tokens()) out.str(t);

  const auto order = preorder_of(nodes_, root_);
  out.u32(static_cast<std::uint32_t>(nodes_.size()));
  out.u32(root_);
  for (NodeId id : order) {
    const TreeNode& n = nodes_[id];
    out.u32(id);
    out.u8(n.is_leaf() ? kLeafRecord : kInternalRecord);
    out.u32(n.left);
    out.u32(n.right);
    out.u32(n.left_count);
    out.u32(n.right_count);
    out.u32(n.label);
  }
}

void CondProbTree::write_weights(BinaryWriter& out) const {
  out.u64(updates_);
  for (NodeId id : preorder_of(nodes_, root_)) nodes_[id].regressor.write(out);
}

CondProbTree CondProbTree::read(BinaryReader& structure, BinaryReader& weights) {
  TreeOptions opt;
  const auto policy = structure.u8();
  if (policy > 1) throw CorruptionError("unknown insertion policy");
  opt.policy = static_cast<InsertionPolicy>(policy);
  opt.alpha = structure.f64();
  opt.seed = structure.u64();
  opt.regressor.hash_bits = static_cast<int>(structure.u32());
  opt.regressor.learning_rate = structure.f64();
  CondProbTree tree(opt);
  {
    std::istringstream rng_state(structure.str());
    rng_state >> tree.rng_;
    if (!rng_state) throw CorruptionError("bad rng state");
  }
  tree.disagreements_ = structure.u64();
  tree.frozen_ = structure.u8() != 0;

  const auto label_count = structure.u32();
  structure.expect_at_least(std::size_t{label_count} * 4);
  for (std::uint32_t i = 0; i < label_count; ++i) {
    auto t = structure.str();
    if (t.empty() || tree.labels_.find(t)) throw CorruptionError("bad label table");
    tree.labels_.intern(t);
  }

  const auto node_count = structure.u32();
  structure.expect_at_least(std::size_t{node_count} * 25);
  tree.root_ = structure.u32();
  if ((node_count == 0) != (tree.root_ == kNoNode) || (node_count != 0 && tree.root_ >= node_count))
    throw CorruptionError("bad root id");
  if (node_count != 0 && node_count != 2 * std::size_t{label_count} - 1)
    throw CorruptionError("node count does not match label count");
  for (std::uint32_t i = 0; i < node_count; ++i) tree.new_node();
  tree.leaf_of_.assign(label_count, kNoNode);

  std::vector<bool> seen(node_count, false);
  std::vector<NodeId> order;
  order.reserve(node_count);
  for (std::uint32_t k = 0; k < node_count; ++k) {
    const NodeId id = structure.u32();
    if (id >= node_count || seen[id]) throw CorruptionError("bad node id");
    seen[id] = true;
    order.push_back(id);
    TreeNode& n = tree.nodes_[id];
    const auto kind = structure.u8();
    n.left = structure.u32();
    n.right = structure.u32();
    n.left_count = structure.u32();
    n.right_count = structure.u32();
    n.label = structure.u32();
    if (kind == kLeafRecord) {
      if (n.left != kNoNode || n.right != kNoNode || n.label >= label_count || tree.leaf_of_[n.label] != kNoNode)
        throw CorruptionError("bad leaf record");
      tree.leaf_of_[n.label] = id;
    } else if (kind == kInternalRecord) {
      if (n.left >= node_count || n.right >= node_count || n.left == n.right ||
          n.label != LabelDictionary::kNone)
        throw CorruptionError("bad internal record");
    } else {
      throw CorruptionError("bad node kind");
    }
  }
  for (NodeId id : order) {
    const TreeNode& n = tree.nodes_[id];
    if (n.is_leaf()) continue;
    if (tree.nodes_[n.left].parent != kNoNode || tree.nodes_[n.right].parent != kNoNode || n.left == tree.root_ ||
        n.right == tree.root_)
      throw CorruptionError("node has two parents");
    tree.nodes_[n.left].parent = id;
    tree.nodes_[n.right].parent = id;
  }
  if (order != preorder_of(tree.nodes_, tree.root_)) throw CorruptionError("records are not in preorder");

  tree.updates_ = weights.u64();
  for (NodeId id : order) tree.nodes_[id].regressor = LinearRegressor::read(weights);
  tree.depth_stats();  // count cross-check
  return tree;
}

}  // namespace cpt
