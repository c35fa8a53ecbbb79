#pragma once

#include <cstddef>

namespace cpt {

// Insertion objective: positive sends the new label right, otherwise left.
// p is the node regressor's prediction, left/right the leaf counts of the
// node's subtrees, alpha in (0, 1] the balance aggressiveness.
double insertion_objective(double p, std::size_t left, std::size_t right, double alpha);

// Asymptotic maximum fraction of leaves on either side of a node built with
// aggressiveness alpha: 1 / (1 + 2^(1 - 1/alpha)). Lies in [1/2, 1).
double kappa(double alpha);

// Maximum depth of an online-built tree on n labels: log n / log(1/kappa) + 2.
double depth_bound(std::size_t n, double kappa);

// Upper bound on the sum of leaf depths of an n-leaf tree whose nodes split
// no worse than kappa : 1 - kappa: n log n / H(kappa).
double total_depth_bound(std::size_t n, double kappa);

// Binary entropy in nats.
double binary_entropy(double q);

}  // namespace cpt
