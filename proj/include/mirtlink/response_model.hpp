#pragma once

// Item response functions, expected item scores and the test response
// function (TRF). All functions are pure; no logistic scaling constant is
// applied anywhere (plain logistic metric throughout).

#include <span>

#include "mirtlink/items.hpp"

namespace mirtlink {

struct QuadratureGrid;

// P(X=1 | θ) for a 3PL item; strictly increasing in a·θ, bounded in (c, 1).
double prob_dichotomous(const DichotomousItem& item, const ThetaVector& theta);

// Generalized partial credit category probabilities, length K, summing to 1.
// Category log-numerators are max-shifted before exponentiation.
std::vector<double> prob_polytomous(const PolytomousItem& item, const ThetaVector& theta);
void prob_polytomous_into(const PolytomousItem& item, const ThetaVector& theta,
                          std::span<double> out);

double expected_score(const Item& item, const ThetaVector& theta);

// Test response function: Σ_j E[X_j | θ] over the given items.
double trf(std::span<const Item> items, const ThetaVector& theta);

// TRF evaluated at every grid point. The parallel version writes one slot per
// point and is bitwise identical to the serial reference for any thread count.
std::vector<double> trf_over_grid(std::span<const Item> items, const QuadratureGrid& grid);
std::vector<double> trf_over_grid_serial(std::span<const Item> items,
                                         const QuadratureGrid& grid);

// log P(X=score | θ), numerically stable in the tails. score must lie in
// [0, K-1] for the item.
double log_prob_score(const Item& item, const ThetaVector& theta, int score);

namespace detail {
// Expected score from raw slope/param access without variant dispatch;
// used by the hot quadrature loops. theta is a pointer to `dim` doubles.
double expected_score_raw(const Item& item, const double* theta, int dim);

// log P(X=score | θ) without dimension re-checks; hot path for samplers.
// score must already be validated against the item's category count.
double log_prob_score_raw(const Item& item, const double* theta, int score);
}  // namespace detail

}  // namespace mirtlink
