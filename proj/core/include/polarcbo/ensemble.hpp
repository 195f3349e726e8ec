#ifndef POLARCBO_ENSEMBLE_HPP
#define POLARCBO_ENSEMBLE_HPP

#include "polarcbo/numeric.hpp"
#include "polarcbo/rng.hpp"

namespace polarcbo {

/// J particle positions in d dimensions; row i is particle i.
struct Ensemble {
  Matrix positions;  // J x d

  Ensemble() = default;
  explicit Ensemble(Matrix pos);

  int j_count() const { return static_cast<int>(positions.rows()); }
  int dim() const { return static_cast<int>(positions.cols()); }
  bool all_finite() const { return positions.allFinite(); }

  /// Coordinate-wise min/max over particles.
  RowVector lower_bound() const { return positions.colwise().minCoeff(); }
  RowVector upper_bound() const { return positions.colwise().maxCoeff(); }
};

/// Draws J particles uniformly from the axis-aligned box [lo, hi]^d.
Ensemble init_uniform(int j_count, int dim, double lo, double hi,
                      RngStream& rng);

}  // namespace polarcbo

#endif
