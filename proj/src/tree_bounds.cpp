#include "cpt/tree_bounds.hpp"

#include <cassert>
#include <cmath>

#include "cpt/core.hpp"

namespace cpt {

double insertion_objective(double p, std::size_t left, std::size_t right, double alpha) {
  assert(left >= 1 && right >= 1);
  return (1.0 - alpha) * 2.0 * (p - 0.5) +
         alpha * std::log2(static_cast<double>(left) / static_cast<double>(right));
}

double kappa(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  return 1.0 / (1.0 + std::exp2(1.0 - 1.0 / alpha));
}

double depth_bound(std::size_t n, double k) {
  if (n < 2) throw DomainError("depth bound needs n >= 2");
  if (!(k >= 0.5 && k < 1.0)) throw DomainError("kappa must lie in [1/2, 1)");
  return std::log(static_cast<double>(n)) / std::log(1.0 / k) + 2.0;
}

double binary_entropy(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

double total_depth_bound(std::size_t n, double k) {
  if (n < 2) throw DomainError("total depth bound needs n >= 2");
  if (!(k >= 0.5 && k < 1.0)) throw DomainError("kappa must lie in [1/2, 1)");
  const double nd = static_cast<double>(n);
  return nd * std::log(nd) / binary_entropy(k);
}

}  // namespace cpt
