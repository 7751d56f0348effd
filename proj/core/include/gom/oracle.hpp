#pragma once

// Ground truth for testing and synthesis: latent distributions with finitely
// many support points, their exact cell moments and conditional moments, and
// seeded sampling under local independence.

#include <cstdint>
#include <vector>

#include "gom/basis.hpp"
#include "gom/indexing.hpp"
#include "gom/tables.hpp"

namespace gom {

// Support points beta^(i) (length |L|, each measurement block a probability
// vector) with probabilities p_i.
template <typename T>
class DiscreteLatentModel {
 public:
  DiscreteLatentModel(Scheme scheme, std::vector<std::vector<T>> points, std::vector<T> weights,
                      double tol = 1e-12);

  const Scheme& scheme() const { return scheme_; }
  const std::vector<std::vector<T>>& points() const { return points_; }
  const std::vector<T>& weights() const { return weights_; }
  std::size_t support_size() const { return points_.size(); }

  // P(X_j = l | beta^(i)).
  const T& prob(std::size_t point, std::size_t j, int l) const { return points_[point][scheme_.row_index(j, l)]; }

 private:
  Scheme scheme_;
  std::vector<std::vector<T>> points_;
  std::vector<T> weights_;
};

template <typename T>
DiscreteLatentModel<double> to_double_model(const DiscreteLatentModel<T>& model);

// M_cell = sum_i p_i prod_{j observed} beta^(i)_{j, cell_j}, for all cells of
// order <= max_order.
template <typename T>
MomentTable<T> exact_ell_moments(const DiscreteLatentModel<T>& model, std::size_t max_order);

// Single-cell version of the above.
template <typename T>
T exact_ell_moment(const DiscreteLatentModel<T>& model, const CellIndex& cell);

// Coordinates of each support point in the basis (Lambda g = beta). Throws
// IdentificationError "model/basis mismatch" when a point is outside the span.
template <typename T>
std::vector<std::vector<T>> latent_coordinates(const DiscreteLatentModel<T>& model, const Basis<T>& basis,
                                               double tol = 1e-9);

// E(G^v | X = cell) evaluated directly from the conditional density over the
// discrete support.
template <typename T>
T exact_conditional_moment(const DiscreteLatentModel<T>& model, const Basis<T>& basis, const CellIndex& cell,
                           const PowerIndex& v, double tol = 1e-9);

// Draws a latent point by weight, then each measurement independently.
template <typename T>
Sample sample(const DiscreteLatentModel<T>& model, std::size_t n, std::uint64_t seed);

// K equally weighted support points with small-denominator rational entries,
// resampled until linearly independent and, when general_position is set,
// until the exact moment matrix certifies rank K under completion.
DiscreteLatentModel<Rational> random_model(const Scheme& scheme, std::size_t K, std::uint64_t seed,
                                           bool general_position, int max_attempts = 200);

}  // namespace gom
