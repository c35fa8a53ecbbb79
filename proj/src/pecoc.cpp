#include "cpt/pecoc.hpp"

#include <bit>

#include "cpt/serialize.hpp"

namespace cpt {

CodeMatrix CodeMatrix::hadamard(int order) {
  if (order < 1 || order > kMaxCodeOrder)
    throw DomainError("code order must lie in [1, " + std::to_string(kMaxCodeOrder) + "]");
  return CodeMatrix(order);
}

bool CodeMatrix::bit(std::size_t row, std::size_t column) const {
  return (std::popcount(row & column) & 1) == 0;
}

std::vector<std::vector<std::uint8_t>> CodeMatrix::rows() const {
  if (order_ > 12) throw DomainError("dense rows limited to order 12");
  std::vector<std::vector<std::uint8_t>> c{{1, 1}, {1, 0}};
  for (std::size_t m = 2; m < size(); m *= 2) {
    std::vector<std::vector<std::uint8_t>> next(2 * m, std::vector<std::uint8_t>(2 * m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        next[i][j] = c[i][j];
        next[i][j + m] = c[i][j];
        next[i + m][j] = c[i][j];
        next[i + m][j + m] = static_cast<std::uint8_t>(1 - c[i][j]);
      }
    }
    c = std::move(next);
  }
  return c;
}

double pecoc_decode(const CodeMatrix& code, std::size_t column, std::span<const double> scores) {
  const std::size_t n = code.size();
  if (scores.size() != n - 1) throw InvalidInput("need one score per nontrivial code row");
  if (column >= n) throw InvalidInput("column outside code");
  // The trivial row contributes exactly 1, so
  //   2/n * (1 + sum_{i>=1} a_i) - 1 = 2/n * sum_{i>=1} a_i - (n-2)/n,
  // which for n = 2 is the single row's agreement term with no rounding.
  double agree = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = scores[i - 1];
    agree += code.bit(i, column) ? r : 1.0 - r;
  }
  const double nd = static_cast<double>(n);
  return (2.0 / nd) * agree - (nd - 2.0) / nd;
}

double flat_code_loss_bound(std::size_t n, std::span<const double> row_errors) {
  if (n < 2) throw DomainError("need at least two labels");
  if (row_errors.size() != n) throw InvalidInput("need one error per code row");
  if (row_errors[0] != 0.0) throw DomainError("trivial row error must be zero");
  double sq = 0.0;
  for (std::size_t i = 1; i < n; ++i) sq += row_errors[i] * row_errors[i];
  const double nd = static_cast<double>(n);
  const double ratio = (nd - 1.0) / nd;
  return 4.0 * ratio * ratio * (sq / (nd - 1.0));
}

int code_order_for(std::size_t n) {
  int t = 1;
  while ((std::size_t{1} << t) < n) ++t;
  if (t > kMaxCodeOrder) throw DomainError("too many labels for a flat code");
  return t;
}

PecocModel::PecocModel(std::span<const std::string> labels, RegressorConfig cfg, kernels::Exec exec)
    : code_(CodeMatrix::hadamard(code_order_for(labels.size()))), cfg_(cfg), exec_(exec) {
  rows_.assign(code_.size() - 1, LinearRegressor(cfg));
  for (const auto& l : labels) {
    if (l.empty() || labels_.find(l)) throw InvalidInput("labels must be distinct and nonempty");
    labels_.intern(l);
  }
}

std::optional<std::size_t> PecocModel::column_of(std::string_view label) const {
  auto id = labels_.find(label);
  if (!id) return std::nullopt;
  return *id;
}

bool PecocModel::train(const SparseVector& x, std::string_view label) {
  auto col = column_of(label);
  if (!col) {
    if (labels_.size() >= code_.size() || label.empty()) {
      ++dropped_;
      return false;
    }
    col = labels_.intern(label);
  }
  std::vector<double> targets(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) targets[i] = code_.bit(i + 1, *col) ? 1.0 : 0.0;
  kernels::update_all(rows_, x, targets, exec_);
  updates_ += rows_.size();
  return true;
}

double PecocModel::raw(const SparseVector& x, std::string_view label) const {
  auto col = column_of(label);
  if (!col) throw AbsentLabel("label not in code: " + std::string(label));
  std::vector<double> scores(rows_.size());
  kernels::predict_all(rows_, x, scores, exec_);
  return pecoc_decode(code_, *col, scores);
}

Probability PecocModel::score(const SparseVector& x, std::string_view label) const {
  if (!column_of(label)) return Probability(0.0);
  return Probability(raw(x, label));
}

void PecocModel::write_structure(BinaryWriter& out) const {
  out.u32(static_cast<std::uint32_t>(code_.order()));
  out.u32(static_cast<std::uint32_t>(cfg_.hash_bits));
  out.f64(cfg_.learning_rate);
  out.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& t : labels_.tokens()) out.str(t);
}

void PecocModel::write_weights(BinaryWriter& out) const {
  out.u64(updates_);
  out.u64(dropped_);
  for (const auto& r : rows_) r.write(out);
}

PecocModel PecocModel::read(BinaryReader& structure, BinaryReader& weights) {
  const auto order = static_cast<int>(structure.u32());
  RegressorConfig cfg;
  cfg.hash_bits = static_cast<int>(structure.u32());
  cfg.learning_rate = structure.f64();
  const auto n = structure.u32();
  if (order < 1 || order > kMaxCodeOrder || n > (std::size_t{1} << order)) throw CorruptionError("bad code header");
  structure.expect_at_least(std::size_t{n} * 4);
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < n; ++i) labels.push_back(structure.str());
  PecocModel m(std::span<const std::string>(labels.data(), 0), cfg);
  m.code_ = CodeMatrix::hadamard(order);
  m.rows_.assign(m.code_.size() - 1, LinearRegressor(cfg));
  for (const auto& l : labels) {
    if (l.empty() || m.labels_.find(l)) throw CorruptionError("bad label table");
    m.labels_.intern(l);
  }
  m.updates_ = weights.u64();
  m.dropped_ = weights.u64();
  for (auto& r : m.rows_) r = LinearRegressor::read(weights);
  return m;
}

}  // namespace cpt
