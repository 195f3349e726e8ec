#include "polarcbo/ensemble.hpp"

#include <stdexcept>

namespace polarcbo {

Ensemble::Ensemble(Matrix pos) : positions(std::move(pos)) {
  if (positions.rows() < 1 || positions.cols() < 1) {
    throw std::invalid_argument("Ensemble: J >= 1 and d >= 1 required");
  }
  if (!positions.allFinite()) {
    throw std::invalid_argument("Ensemble: non-finite position");
  }
}

Ensemble init_uniform(int j_count, int dim, double lo, double hi,
                      RngStream& rng) {
  if (j_count < 1 || dim < 1) {
    throw std::invalid_argument("init_uniform: J >= 1 and d >= 1 required");
  }
  if (!(lo < hi)) throw std::invalid_argument("init_uniform: need lo < hi");
  Matrix pos(j_count, dim);
  for (int i = 0; i < j_count; ++i) {
    for (int n = 0; n < dim; ++n) pos(i, n) = rng.uniform(lo, hi);
  }
  return Ensemble(std::move(pos));
}

}  // namespace polarcbo
