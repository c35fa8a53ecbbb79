#include "cpt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "cpt/serialize.hpp"

namespace cpt {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// Index into a nonnegative weight vector drawn proportionally.
std::size_t draw(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace

SyntheticTask SyntheticTask::generate(const SyntheticSpec& spec) {
  if (spec.contexts == 0 || spec.labels == 0 || spec.clusters == 0 || spec.support == 0)
    throw DomainError("synthetic task sizes must be positive");
  if (spec.clusters > spec.labels) throw DomainError("more clusters than labels");
  if (!(spec.spill >= 0.0 && spec.spill < 1.0)) throw DomainError("spill must lie in [0, 1)");

  std::mt19937_64 rng(spec.seed);
  SyntheticTask t;
  t.hash_bits_ = spec.hash_bits;
  for (std::size_t y = 0; y < spec.labels; ++y) t.label_tokens_.push_back("y" + std::to_string(y));

  std::vector<std::vector<std::uint32_t>> members(spec.clusters);
  for (std::size_t y = 0; y < spec.labels; ++y) members[y % spec.clusters].push_back(static_cast<std::uint32_t>(y));

  for (std::size_t c = 0; c < spec.contexts; ++c) {
    const std::size_t g = c % spec.clusters;
    t.cluster_.push_back(g);

    auto pool = members[g];
    shuffle(pool, rng);
    pool.resize(std::min(spec.support, pool.size()));
    std::vector<LabelMass> row;
    double z = 0.0;
    for (std::size_t r = 0; r < pool.size(); ++r) {
      const double w = 1.0 / std::pow(static_cast<double>(r + 1), spec.label_skew);
      row.push_back({pool[r], w});
      z += w;
    }
    const double own = spec.clusters > 1 ? 1.0 - spec.spill : 1.0;
    for (auto& lm : row) lm.p = own * lm.p / z;
    if (spec.clusters > 1 && spec.spill > 0.0) {
      // Two outside labels share the spill mass.
      for (int s = 0; s < 2; ++s) {
        std::uint32_t y;
        do {
          y = static_cast<std::uint32_t>(uniform_index(rng, spec.labels));
        } while (y % spec.clusters == g);
        auto it = std::find_if(row.begin(), row.end(), [&](const LabelMass& lm) { return lm.label == y; });
        if (it == row.end())
          row.push_back({y, spec.spill / 2.0});
        else
          it->p += spec.spill / 2.0;
      }
    }
    std::sort(row.begin(), row.end(), [](const LabelMass& a, const LabelMass& b) { return a.label < b.label; });
    t.conditional_.push_back(std::move(row));
    t.feature_tokens_.push_back({"ctx=" + std::to_string(c), "grp=" + std::to_string(g)});
  }

  std::vector<std::size_t> rank(spec.contexts);
  std::iota(rank.begin(), rank.end(), 0);
  shuffle(rank, rng);
  t.weights_.resize(spec.contexts);
  double z = 0.0;
  for (std::size_t c = 0; c < spec.contexts; ++c) {
    t.weights_[c] = 1.0 / std::pow(static_cast<double>(rank[c] + 1), spec.context_skew);
    z += t.weights_[c];
  }
  for (auto& w : t.weights_) w /= z;

  t.index_observations();
  return t;
}

SyntheticTask SyntheticTask::from_table(std::vector<double> weights,
                                        const std::vector<std::vector<double>>& conditional, int hash_bits) {
  if (weights.empty() || weights.size() != conditional.size()) throw DomainError("table shape mismatch");
  SyntheticTask t;
  t.hash_bits_ = hash_bits;
  const std::size_t n = conditional[0].size();
  for (std::size_t y = 0; y < n; ++y) t.label_tokens_.push_back("y" + std::to_string(y));
  const double wz = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& w : weights) w /= wz;
  t.weights_ = std::move(weights);
  for (std::size_t c = 0; c < conditional.size(); ++c) {
    if (conditional[c].size() != n) throw DomainError("ragged conditional table");
    std::vector<LabelMass> row;
    for (std::size_t y = 0; y < n; ++y)
      if (conditional[c][y] > 0.0) row.push_back({static_cast<std::uint32_t>(y), conditional[c][y]});
    t.conditional_.push_back(std::move(row));
    t.feature_tokens_.push_back({"ctx=" + std::to_string(c)});
    t.cluster_.push_back(0);
  }
  t.index_observations();
  return t;
}

void SyntheticTask::index_observations() {
  features_.clear();
  context_feature_.clear();
  by_key_.clear();
  for (std::size_t c = 0; c < conditional_.size(); ++c) {
    double sum = 0.0;
    for (const auto& lm : conditional_[c]) sum += lm.p;
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("conditional distribution does not sum to 1");
    std::vector<Feature> f;
    for (const auto& tok : feature_tokens_[c]) f.push_back({hash_feature(tok, hash_bits_), 1.0});
    context_feature_.push_back(f.front().index);
    features_.push_back(canonicalize(std::move(f), hash_bits_));
    by_key_.emplace(features_.back().key_bytes(), c);
  }
}

double SyntheticTask::probability(std::size_t c, std::uint32_t label) const {
  for (const auto& lm : conditional_[c])
    if (lm.label == label) return lm.p;
  return 0.0;
}

std::optional<std::size_t> SyntheticTask::context_of(const SparseVector& x) const {
  auto it = by_key_.find(x.key_bytes());
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> SyntheticTask::draw_contexts(std::size_t m, std::uint64_t seed,
                                                      const std::function<bool(std::size_t)>& filter,
                                                      std::vector<std::uint32_t>& labels) const {
  std::vector<std::size_t> allowed;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    if (filter && !filter(c)) continue;
    acc += weights_[c];
    allowed.push_back(c);
    cumulative.push_back(acc);
  }
  if (allowed.empty()) throw DomainError("context filter excludes every context");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  out.reserve(m);
  labels.clear();
  labels.reserve(m);
  std::vector<double> row_cum;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = allowed[draw(cumulative, uniform01(rng))];
    row_cum.clear();
    double s = 0.0;
    for (const auto& lm : conditional_[c]) row_cum.push_back(s += lm.p);
    labels.push_back(conditional_[c][draw(row_cum, uniform01(rng))].label);
    out.push_back(c);
  }
  return out;
}

std::vector<Example> SyntheticTask::sample(std::size_t m, std::uint64_t seed,
                                           const std::function<bool(std::size_t)>& filter) const {
  std::vector<std::uint32_t> labels;
  const auto contexts = draw_contexts(m, seed, filter, labels);
  std::vector<Example> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back({features_[contexts[i]], label_tokens_[labels[i]]});
  return out;
}

std::vector<std::string> SyntheticTask::sample_lines(std::size_t m, std::uint64_t seed,
                                                     const std::function<bool(std::size_t)>& filter) const {
  std::vector<std::uint32_t> labels;
  const auto contexts = draw_contexts(m, seed, filter, labels);
  std::vector<std::string> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::string line = label_tokens_[labels[i]] + " |";
    for (const auto& tok : feature_tokens_[contexts[i]]) line += " " + tok;
    out.push_back(std::move(line));
  }
  return out;
}

double SyntheticTask::oracle_loss() const {
  double total = 0.0;
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    double inner = 0.0;
    for (const auto& lm : conditional_[c]) inner += lm.p * (1.0 - lm.p) * (1.0 - lm.p);
    total += weights_[c] * inner;
  }
  return total;
}

OracleEstimator::OracleEstimator(const SyntheticTask& task) : task_(&task) {
  for (const auto& t : task.label_tokens()) labels_.intern(t);
}

Probability OracleEstimator::score(const SparseVector& x, std::string_view label) const {
  auto c = task_->context_of(x);
  auto y = labels_.find(label);
  if (!c || !y) return Probability(0.0);
  return Probability(task_->probability(*c, *y));
}

void OracleEstimator::write_structure(BinaryWriter&) const {
  throw ConfigError("the oracle estimator cannot be saved");
}

double true_regret(const Estimator& estimator, const SyntheticTask& task, kernels::Exec exec) {
  const auto per_context = kernels::map_indices(
      task.context_count(),
      [&](std::size_t c) {
        double inner = 0.0;
        for (const auto& lm : task.conditional(c)) {
          const double d = lm.p - estimator.score(task.features(c), task.label_token(lm.label)).value();
          inner += lm.p * d * d;
        }
        return task.weight(c) * inner;
      },
      exec);
  return kernels::ordered_sum(per_context);
}

namespace {

// Task label index for each tree label id (or kNone when the task lacks it).
std::vector<std::uint32_t> task_ids_for(const CondProbTree& tree, const SyntheticTask& task) {
  LabelDictionary task_labels;
  for (const auto& t : task.label_tokens()) task_labels.intern(t);
  std::vector<std::uint32_t> out(tree.labels().size(), LabelDictionary::kNone);
  for (std::uint32_t id = 0; id < tree.labels().size(); ++id)
    if (auto t = task_labels.find(tree.labels().token(id))) out[id] = *t;
  return out;
}

struct BranchMass {
  std::vector<double> reach;  // per context
  std::vector<double> right;  // per context
};

BranchMass branch_mass(const CondProbTree& tree, NodeId node, const SyntheticTask& task,
                       const std::vector<std::uint32_t>& task_ids) {
  std::vector<char> in_left(task.label_count(), 0), in_right(task.label_count(), 0);
  for (auto id : tree.labels_under(tree.node(node).left))
    if (task_ids[id] != LabelDictionary::kNone) in_left[task_ids[id]] = 1;
  for (auto id : tree.labels_under(tree.node(node).right))
    if (task_ids[id] != LabelDictionary::kNone) in_right[task_ids[id]] = 1;
  BranchMass bm;
  bm.reach.assign(task.context_count(), 0.0);
  bm.right.assign(task.context_count(), 0.0);
  for (std::size_t c = 0; c < task.context_count(); ++c) {
    for (const auto& lm : task.conditional(c)) {
      if (in_right[lm.label]) {
        bm.right[c] += lm.p;
        bm.reach[c] += lm.p;
      } else if (in_left[lm.label]) {
        bm.reach[c] += lm.p;
      }
    }
  }
  return bm;
}

std::vector<NodeId> internal_preorder(const CondProbTree& tree) {
  std::vector<NodeId> out;
  if (tree.root() == kNoNode) return out;
  for (const auto& nc : tree.depth_stats().per_node) out.push_back(nc.node);
  return out;
}

}  // namespace

std::vector<std::vector<double>> true_node_conditionals(const CondProbTree& tree, const SyntheticTask& task) {
  const auto ids = task_ids_for(tree, task);
  std::vector<std::vector<double>> out(tree.node_count());
  for (NodeId node : internal_preorder(tree)) {
    const auto bm = branch_mass(tree, node, task, ids);
    auto& row = out[node];
    row.assign(task.context_count(), 0.5);
    for (std::size_t c = 0; c < task.context_count(); ++c)
      if (bm.reach[c] > 0.0) row[c] = bm.right[c] / bm.reach[c];
  }
  return out;
}

std::vector<NodeRegret> node_regret(const CondProbTree& tree, const SyntheticTask& task,
                                    const std::function<double(NodeId, std::size_t)>& right_prob) {
  const auto ids = task_ids_for(tree, task);
  std::vector<NodeRegret> out;
  for (NodeId node : internal_preorder(tree)) {
    const auto bm = branch_mass(tree, node, task, ids);
    double mass = 0.0, weighted = 0.0;
    for (std::size_t c = 0; c < task.context_count(); ++c) {
      const double m = task.weight(c) * bm.reach[c];
      if (m <= 0.0) continue;
      const double d = Probability(right_prob(node, c)).value() - bm.right[c] / bm.reach[c];
      mass += m;
      weighted += m * d * d;
    }
    out.push_back({node, mass, mass > 0.0 ? weighted / mass : 0.0});
  }
  return out;
}

std::vector<NodeRegret> node_regret(const CondProbTree& tree, const SyntheticTask& task) {
  return node_regret(tree, task, [&](NodeId node, std::size_t c) {
    return tree.node(node).regressor.predict(task.features(c)).value();
  });
}

void seed_oracle(CondProbTree& tree, const SyntheticTask& task) {
  std::unordered_set<std::uint32_t> ctx_buckets;
  for (std::size_t c = 0; c < task.context_count(); ++c)
    if (!ctx_buckets.insert(task.context_feature(c)).second)
      throw InvalidInput("context features collide; use more hash bits");
  for (std::size_t c = 0; c < task.context_count(); ++c)
    if (task.features(c).size() != task.feature_tokens(c).size())
      throw InvalidInput("observation features collide; use more hash bits");
  for (std::size_t c = 0; c < task.context_count(); ++c)
    for (const auto& f : task.features(c).entries())
      if (f.index != task.context_feature(c) && ctx_buckets.count(f.index))
        throw InvalidInput("cluster feature collides with a context feature");

  const auto truth = true_node_conditionals(tree, task);
  for (NodeId node : internal_preorder(tree)) {
    LinearRegressor fresh(tree.options().regressor);
    for (std::size_t c = 0; c < task.context_count(); ++c) fresh.set_weight(task.context_feature(c), truth[node][c]);
    tree.mutable_node(node).regressor = std::move(fresh);
  }
}

}  // namespace cpt
