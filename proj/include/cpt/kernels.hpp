#pragma once

// Data-parallel inner loops. Each kernel has a serial reference path and an
// OpenMP path; both produce bit-identical results because every parallel
// iteration writes a disjoint slot and reductions are summed serially in
// index order afterwards.

#include <cstddef>
#include <span>
#include <vector>

#include "cpt/regressor.hpp"

namespace cpt::kernels {

enum class Exec { kSerial, kParallel };

// Loops shorter than this run serially even under kParallel.
inline constexpr std::size_t kParallelThreshold = 64;

// out[i] = regs[i].predict(x)
void predict_all(std::span<const LinearRegressor> regs, const SparseVector& x, std::span<double> out,
                 Exec exec = Exec::kParallel);

// regs[i].update(x, targets[i])
void update_all(std::span<LinearRegressor> regs, const SparseVector& x, std::span<const double> targets,
                Exec exec = Exec::kParallel);

// regs[i].update(x, i == hot ? 1 : 0)
void update_one_hot(std::span<LinearRegressor> regs, const SparseVector& x, std::size_t hot,
                    Exec exec = Exec::kParallel);

// Evaluates f(i) for i in [0, n) into a vector.
template <class F>
std::vector<double> map_indices(std::size_t n, F&& f, Exec exec = Exec::kParallel) {
  std::vector<double> out(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::kSerial) {
    for (std::ptrdiff_t i = 0; i < sn; ++i) out[i] = f(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic) if (n >= 2)
    for (std::ptrdiff_t i = 0; i < sn; ++i) out[i] = f(static_cast<std::size_t>(i));
  }
  return out;
}

// Left-to-right sum, the fixed reduction order shared by both paths.
double ordered_sum(std::span<const double> values);

int max_threads();

}  // namespace cpt::kernels
