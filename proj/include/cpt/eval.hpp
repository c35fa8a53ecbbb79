#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cpt/estimator.hpp"
#include "cpt/kernels.hpp"

namespace cpt {

inline constexpr double kDefaultDelta = 0.05;

struct EvalReport {
  std::string name;
  std::size_t examples = 0;
  double mean_sq_loss = 0.0;
  double ci_halfwidth = 0.0;
  double equivalent = 0.0;  // +inf when mean_sq_loss >= 1
  double updates_per_example = 0.0;
  double seconds = 0.0;
};

struct ValidationOptions {
  double delta = kDefaultDelta;
  bool learn = true;  // false gives the frozen "test loss" variant
};

// Scores each example before learning from it and averages (1 - score)^2.
// Throws EmptyStream on an empty stream.
EvalReport progressive_validate(std::span<const Example> stream, Estimator& estimator,
                                ValidationOptions options = {});

// Two-sided Hoeffding half-width for the mean of m losses in [0, 1].
double hoeffding_halfwidth(std::size_t m, double delta = kDefaultDelta);

// Size E of the uniform label distribution with the same squared loss:
// loss = (1 - 1/E)^2. Throws DomainError for loss >= 1.
double equivalent_labels(double loss);

struct GridPoint {
  double learning_rate;
  double alpha;
};

struct GridResult {
  std::size_t best = 0;
  std::vector<GridPoint> points;
  std::vector<EvalReport> reports;
};

using EstimatorFactory = std::function<std::unique_ptr<Estimator>(const GridPoint&)>;

std::vector<GridPoint> make_grid(std::span<const double> learning_rates, std::span<const double> alphas);

// Runs progressive validation for each grid point on a fresh estimator and
// picks the lowest loss; ties resolve to the earliest point. Grid points are
// independent and run in parallel under kParallel.
GridResult grid_search(std::span<const GridPoint> grid, const EstimatorFactory& factory,
                       std::span<const Example> stream, ValidationOptions options = {},
                       kernels::Exec exec = kernels::Exec::kParallel);

// Human-readable aligned table.
std::string format_table(std::span<const EvalReport> reports);
// Tab-separated rows: name, examples, loss, ci, equivalent, updates/example, seconds.
std::string format_rows(std::span<const EvalReport> reports, bool with_timing = true);

}  // namespace cpt
