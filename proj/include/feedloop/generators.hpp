#pragma once

#include "feedloop/distribution.hpp"

namespace feedloop {

// Label-imbalanced joint distribution where cells are weakly informative of
// labels. One label carries majority_prob mass; the rest split the remainder
// evenly. Each label's mass is spread (1 - cell_noise) over its home cells
// (cell % num_labels == label) and cell_noise uniformly over all cells, so
// with enough noise every cell's conditional tilts toward the majority.
// num_cells = 0 means one cell per label; otherwise it must be a positive
// multiple of num_labels.
DiscreteJointDistribution label_imbalance(Index num_labels, Index majority_label,
                                          double majority_prob, double cell_noise,
                                          Index num_cells = 0);

// phi(x, y) = 1{y == target_label}: the fraction of mass on one class.
BiasMetric class_fraction(Index num_cells, Index num_labels, Index target_label);

// Random distribution with i.i.d. uniform weights, normalized. Test plumbing.
DiscreteJointDistribution random_distribution(Index num_cells, Index num_labels,
                                              std::uint64_t seed);

}  // namespace feedloop
