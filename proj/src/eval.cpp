#include "cpt/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

namespace cpt {

EvalReport progressive_validate(std::span<const Example> stream, Estimator& estimator, ValidationOptions options) {
  if (stream.empty()) throw EmptyStream("no examples to evaluate");
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t updates_before = estimator.regressor_updates();

  double loss = 0.0;
  for (const Example& ex : stream) {
    const double miss = 1.0 - estimator.score(ex.x, ex.y).value();
    loss += miss * miss;
    if (options.learn) estimator.learn(ex);
  }

  EvalReport r;
  r.name = std::string(estimator.kind());
  r.examples = stream.size();
  r.mean_sq_loss = loss / static_cast<double>(stream.size());
  r.ci_halfwidth = hoeffding_halfwidth(stream.size(), options.delta);
  r.equivalent = r.mean_sq_loss < 1.0 ? equivalent_labels(r.mean_sq_loss) : std::numeric_limits<double>::infinity();
  r.updates_per_example =
      static_cast<double>(estimator.regressor_updates() - updates_before) / static_cast<double>(stream.size());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

double hoeffding_halfwidth(std::size_t m, double delta) {
  if (m == 0) throw DomainError("need at least one example");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

double equivalent_labels(double loss) {
  if (!(loss >= 0.0)) throw DomainError("loss must be nonnegative");
  if (loss >= 1.0) throw DomainError("loss >= 1 has no finite equivalent label count");
  return 1.0 / (1.0 - std::sqrt(loss));
}

std::vector<GridPoint> make_grid(std::span<const double> learning_rates, std::span<const double> alphas) {
  std::vector<GridPoint> grid;
  for (double eta : learning_rates)
    for (double a : alphas) grid.push_back({eta, a});
  return grid;
}

GridResult grid_search(std::span<const GridPoint> grid, const EstimatorFactory& factory,
                       std::span<const Example> stream, ValidationOptions options, kernels::Exec exec) {
  if (grid.empty()) throw ConfigError("empty parameter grid");
  GridResult out;
  out.points.assign(grid.begin(), grid.end());
  out.reports.resize(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());

  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic) if (exec == kernels::Exec::kParallel && grid.size() > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      auto est = factory(grid[i]);
      out.reports[i] = progressive_validate(stream, *est, options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 1; i < grid.size(); ++i)
    if (out.reports[i].mean_sq_loss < out.reports[out.best].mean_sq_loss) out.best = i;
  return out;
}

namespace {

std::string fmt4(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string format_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %10s %10s %10s %12s %10s %10s\n", "method", "examples", "sq_loss", "+/-",
                "equivalent", "upd/ex", "seconds");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-24s %10zu %10s %10s %12s %10s %10s\n", r.name.c_str(), r.examples,
                  fmt4(r.mean_sq_loss).c_str(), fmt4(r.ci_halfwidth).c_str(), fmt4(r.equivalent).c_str(),
                  fmt4(r.updates_per_example).c_str(), fmt4(r.seconds).c_str());
    out += line;
  }
  return out;
}

std::string format_rows(std::span<const EvalReport> reports, bool with_timing) {
  std::string out = "method\texamples\tloss\tci\tequivalent\tupdates_per_example\tseconds\n";
  for (const auto& r : reports) {
    out += r.name + "\t" + std::to_string(r.examples) + "\t" + fmt4(r.mean_sq_loss) + "\t" + fmt4(r.ci_halfwidth) +
           "\t" + fmt4(r.equivalent) + "\t" + fmt4(r.updates_per_example) + "\t" +
           fmt4(with_timing ? r.seconds : 0.0) + "\n";
  }
  return out;
}

}  // namespace cpt
