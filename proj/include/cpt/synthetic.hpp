#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpt/estimator.hpp"
#include "cpt/kernels.hpp"
#include "cpt/tree.hpp"

namespace cpt {

// Generator parameters. Labels are partitioned into clusters; context c
// belongs to cluster c mod clusters and puts its mass on `support` labels of
// that cluster (Zipf-weighted by label_skew), plus an optional `spill`
// fraction on labels outside the cluster. Context frequencies are
// Zipf-weighted by context_skew over a random permutation.
struct SyntheticSpec {
  std::size_t contexts = 64;
  std::size_t labels = 16;
  std::size_t clusters = 4;
  std::size_t support = 4;
  double label_skew = 1.0;
  double context_skew = 1.0;
  double spill = 0.0;
  int hash_bits = 18;
  std::uint64_t seed = 1;
};

struct LabelMass {
  std::uint32_t label;
  double p;
};

// A finite joint distribution over (context, label) with known conditionals,
// so loss and regret expectations are exact sums. Each context's
// observation is the one-hot "ctx=<c>" feature plus its cluster feature
// "grp=<g>".
class SyntheticTask {
 public:
  static SyntheticTask generate(const SyntheticSpec& spec);
  // Dense table form: weights[c] and conditional[c][y]. Observations carry
  // only the context feature.
  static SyntheticTask from_table(std::vector<double> weights, const std::vector<std::vector<double>>& conditional,
                                  int hash_bits = kDefaultHashBits);

  std::size_t context_count() const { return weights_.size(); }
  std::size_t label_count() const { return label_tokens_.size(); }
  double weight(std::size_t c) const { return weights_[c]; }
  std::span<const LabelMass> conditional(std::size_t c) const { return conditional_[c]; }
  double probability(std::size_t c, std::uint32_t label) const;
  const SparseVector& features(std::size_t c) const { return features_[c]; }
  std::span<const std::string> feature_tokens(std::size_t c) const { return feature_tokens_[c]; }
  std::uint32_t context_feature(std::size_t c) const { return context_feature_[c]; }
  std::size_t cluster_of(std::size_t c) const { return cluster_[c]; }
  const std::string& label_token(std::uint32_t label) const { return label_tokens_[label]; }
  std::span<const std::string> label_tokens() const { return label_tokens_; }
  int hash_bits() const { return hash_bits_; }

  // Context index whose observation equals x, or nullopt.
  std::optional<std::size_t> context_of(const SparseVector& x) const;

  // i.i.d. examples; an optional filter restricts (and renormalises) the
  // contexts that can be drawn.
  std::vector<Example> sample(std::size_t m, std::uint64_t seed,
                              const std::function<bool(std::size_t)>& context_filter = {}) const;
  // The same draws rendered in the text example format.
  std::vector<std::string> sample_lines(std::size_t m, std::uint64_t seed,
                                        const std::function<bool(std::size_t)>& context_filter = {}) const;

  // E[(1 - P(y|x))^2]: the progressive loss of a predictor that scores the
  // true conditional.
  double oracle_loss() const;

 private:
  std::vector<std::size_t> draw_contexts(std::size_t m, std::uint64_t seed,
                                         const std::function<bool(std::size_t)>& filter,
                                         std::vector<std::uint32_t>& labels) const;
  void index_observations();

  std::vector<double> weights_;
  std::vector<std::vector<LabelMass>> conditional_;
  std::vector<SparseVector> features_;
  std::vector<std::vector<std::string>> feature_tokens_;
  std::vector<std::uint32_t> context_feature_;
  std::vector<std::size_t> cluster_;
  std::vector<std::string> label_tokens_;
  std::unordered_map<std::string, std::size_t> by_key_;
  int hash_bits_ = kDefaultHashBits;
};

// Scores the task's true conditional; learn() is a no-op.
class OracleEstimator final : public Estimator {
 public:
  explicit OracleEstimator(const SyntheticTask& task);

  std::string_view kind() const override { return "oracle"; }
  Probability score(const SparseVector& x, std::string_view label) const override;
  void learn(const Example&) override {}
  std::uint64_t regressor_updates() const override { return 0; }
  std::size_t label_count() const override { return task_->label_count(); }
  void write_structure(BinaryWriter&) const override;
  void write_weights(BinaryWriter&) const override {}

 private:
  const SyntheticTask* task_;
  LabelDictionary labels_;
};

// E_{(x,y)~P} (P(y|x) - Q(y|x))^2 by exact enumeration.
double true_regret(const Estimator& estimator, const SyntheticTask& task,
                   kernels::Exec exec = kernels::Exec::kParallel);

struct NodeRegret {
  NodeId node;
  double mass;    // probability that a draw reaches the node
  double regret;  // E over the node's induced distribution of (f - P(right|x))^2; 0 when mass is 0
};

// Per internal node (preorder) regret of right_prob(node, context) against
// the node's induced binary problem.
std::vector<NodeRegret> node_regret(const CondProbTree& tree, const SyntheticTask& task,
                                    const std::function<double(NodeId, std::size_t)>& right_prob);
// Same, using the tree's own node regressors.
std::vector<NodeRegret> node_regret(const CondProbTree& tree, const SyntheticTask& task);

// True P(right | x_c, node reached) for every internal node and context;
// indexed [node][context], with 0.5 where the node is unreachable. Labels of
// the tree absent from the task carry no mass.
std::vector<std::vector<double>> true_node_conditionals(const CondProbTree& tree, const SyntheticTask& task);

// Overwrites every internal node regressor so that f_i(x_c) equals the true
// branch conditional for each context. Requires the task's context features
// to hash to distinct buckets.
void seed_oracle(CondProbTree& tree, const SyntheticTask& task);

}  // namespace cpt
