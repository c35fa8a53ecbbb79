#include "cpt/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpt::kernels {

namespace {

// Exceptions must not escape an OpenMP region, so inputs are validated
// before any parallel loop starts.
void check_width(std::span<const LinearRegressor> regs, const SparseVector& x) {
  for (const auto& r : regs)
    if (r.hash_bits() < x.hash_bits()) throw InvalidInput("observation hashed wider than the weight table");
}

}  // namespace

void predict_all(std::span<const LinearRegressor> regs, const SparseVector& x, std::span<double> out, Exec exec) {
  if (out.size() != regs.size()) throw InvalidInput("output width differs from regressor count");
  const auto n = static_cast<std::ptrdiff_t>(regs.size());
  if (exec == Exec::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = regs[i].predict(x).value();
    return;
  }
#pragma omp parallel for if (regs.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = regs[i].predict(x).value();
}

void update_all(std::span<LinearRegressor> regs, const SparseVector& x, std::span<const double> targets, Exec exec) {
  if (targets.size() != regs.size()) throw InvalidInput("one target per regressor required");
  check_width(regs, x);
  for (double t : targets)
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("regression target must lie in [0, 1]");
  const auto n = static_cast<std::ptrdiff_t>(regs.size());
  if (exec == Exec::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) regs[i].update(x, targets[i]);
    return;
  }
#pragma omp parallel for if (regs.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) regs[i].update(x, targets[i]);
}

void update_one_hot(std::span<LinearRegressor> regs, const SparseVector& x, std::size_t hot, Exec exec) {
  if (hot >= regs.size()) throw InvalidInput("hot index outside regressor bank");
  check_width(regs, x);
  const auto n = static_cast<std::ptrdiff_t>(regs.size());
  const auto h = static_cast<std::ptrdiff_t>(hot);
  if (exec == Exec::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) regs[i].update(x, i == h ? 1.0 : 0.0);
    return;
  }
#pragma omp parallel for if (regs.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) regs[i].update(x, i == h ? 1.0 : 0.0);
}

double ordered_sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cpt::kernels
