#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpt/core.hpp"
#include "cpt/estimator.hpp"
#include "cpt/kernels.hpp"
#include "cpt/regressor.hpp"

namespace cpt {

class BinaryReader;

inline constexpr int kMaxCodeOrder = 16;

// Binary Hadamard code of size 2^t. Row 0 is the all-ones (trivial) subset;
// every other row selects exactly half the columns, and any two distinct
// nontrivial rows agree on exactly half the columns.
//
// Entries are evaluated on demand: C(i, j) = 1 iff popcount(i & j) is even,
// the closed form of the block recursion C_2m = [C_m C_m; C_m 1-C_m].
class CodeMatrix {
 public:
  static CodeMatrix hadamard(int order);

  int order() const { return order_; }
  std::size_t size() const { return std::size_t{1} << order_; }
  bool bit(std::size_t row, std::size_t column) const;

  // Dense rows built directly by the block recursion, for inspection and
  // for cross-checking bit(). Limited to order <= 12.
  std::vector<std::vector<std::uint8_t>> rows() const;

 private:
  explicit CodeMatrix(int order) : order_(order) {}
  int order_;
};

// Decodes a label probability from nontrivial row scores (rows 1..size-1;
// the trivial row is the constant 1):
//   2 * mean_i [C(i,y) r_i + (1 - C(i,y)) (1 - r_i)] - 1.
// The result is unclipped and may leave [0, 1].
double pecoc_decode(const CodeMatrix& code, std::size_t column, std::span<const double> nontrivial_scores);

// Squared-loss bound for a flat code on n labels given row errors
// eps[0..n-1] (eps[0] must be 0, the trivial row):
//   4 ((n-1)/n)^2 * mean over the n-1 nontrivial rows of eps_i^2.
double flat_code_loss_bound(std::size_t n, std::span<const double> row_errors);

// Smallest code order whose size covers n labels (at least 1).
int code_order_for(std::size_t n);

// Flat probabilistic ECOC estimator: one regressor per nontrivial code row.
// Label slots are fixed up front by the constructor's label list and padded
// to a power of two; labels first seen later claim the free padding slots,
// and once those run out they are scored 0 and not trained.
class PecocModel final : public Estimator {
 public:
  PecocModel(std::span<const std::string> labels, RegressorConfig cfg,
             kernels::Exec exec = kernels::Exec::kParallel);

  std::string_view kind() const override { return "pecoc"; }
  Probability score(const SparseVector& x, std::string_view label) const override;
  void learn(const Example& example) override { train(example.x, example.y); }
  std::uint64_t regressor_updates() const override { return updates_; }
  std::size_t label_count() const override { return labels_.size(); }
  void write_structure(BinaryWriter& out) const override;
  void write_weights(BinaryWriter& out) const override;
  static PecocModel read(BinaryReader& structure, BinaryReader& weights);

  // Returns false when the label could not be given a slot.
  bool train(const SparseVector& x, std::string_view label);
  // Unclipped decode. Throws AbsentLabel for an unknown label.
  double raw(const SparseVector& x, std::string_view label) const;

  const CodeMatrix& code() const { return code_; }
  std::size_t padded_size() const { return code_.size(); }
  std::optional<std::size_t> column_of(std::string_view label) const;
  std::span<LinearRegressor> row_regressors() { return rows_; }
  std::span<const LinearRegressor> row_regressors() const { return rows_; }
  std::uint64_t dropped_examples() const { return dropped_; }

 private:
  CodeMatrix code_;
  std::vector<LinearRegressor> rows_;  // row i+1 of the code
  LabelDictionary labels_;             // dense id == column
  RegressorConfig cfg_;
  kernels::Exec exec_;
  std::uint64_t updates_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace cpt
