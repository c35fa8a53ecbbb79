#pragma once

#include <cstdint>
#include <string_view>

#include "cpt/core.hpp"

namespace cpt {

class BinaryWriter;

// Common face of every conditional probability estimator. score() is const
// and never mutates state; progressive validation calls it before learn() on
// the same sample.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual std::string_view kind() const = 0;
  virtual Probability score(const SparseVector& x, std::string_view label) const = 0;
  virtual void learn(const Example& example) = 0;

  // Total regressor updates performed since construction.
  virtual std::uint64_t regressor_updates() const = 0;
  virtual std::size_t label_count() const = 0;

  // Model persistence is split in two so that the label/layout part can be
  // compared independently of trained weights.
  virtual void write_structure(BinaryWriter& out) const = 0;
  virtual void write_weights(BinaryWriter& out) const = 0;
};

}  // namespace cpt
