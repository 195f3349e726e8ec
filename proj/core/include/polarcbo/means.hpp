#ifndef POLARCBO_MEANS_HPP
#define POLARCBO_MEANS_HPP

#include <vector>

#include "polarcbo/ensemble.hpp"
#include "polarcbo/kernel.hpp"
#include "polarcbo/objectives.hpp"

namespace polarcbo {

/// Unnormalized log weights: entry (i, j) = log k(x_i, x_j) - beta V(x_j).
/// Row-wise softmax of this matrix gives the per-particle mean weights.
struct WeightMatrix {
  Matrix log_weights;  // J x J
};

struct MeansOptions {
  /// The J x J log-weight matrix is materialized only when J is at most
  /// this; larger ensembles are reduced row-streaming in O(J d) memory.
  int materialize_threshold = 4096;
};

WeightMatrix weight_matrix(const Ensemble& ensemble, const Kernel& kernel,
                           const Objective& objective, double beta);

/// Per-particle kernel-and-Gibbs-weighted means; row i is the localized
/// weighted mean seen by particle i. A particle whose weights all vanish
/// (bounded-confidence kernel with nothing in range, impossible for finite
/// V since the self weight survives) falls back to its own position.
Matrix polarized_means(const Ensemble& ensemble, const Kernel& kernel,
                       const Objective& objective, double beta,
                       const MeansOptions& opts = {});

/// Same weighted mean evaluated at arbitrary query points (one per row).
/// A query with no particle in kernel range has an empty average; that is
/// an error, not a fallback, since the query is not a particle.
Matrix polarized_means_at(const Ensemble& ensemble, const Kernel& kernel,
                          const Objective& objective, double beta,
                          const Matrix& queries);

/// Plain Gibbs-weighted mean over all particles (constant-kernel case).
RowVector standard_mean(const Ensemble& ensemble, const Objective& objective,
                        double beta);

/// Per-particle weighted covariances C_i = sum_j w_ij (y_j - m_i)(y_j - m_i)^T
/// with the same normalized weights as polarized_means. Symmetric PSD up
/// to roundoff; no eigenvalue clamping happens here.
std::vector<Matrix> polarized_covariances(const Ensemble& ensemble,
                                          const Kernel& kernel,
                                          const Objective& objective,
                                          double beta,
                                          const MeansOptions& opts = {});

struct MeansAndCovariances {
  Matrix means;               // J x d
  std::vector<Matrix> covs;   // J matrices of size d x d
};

/// Means and covariances from one pass over the weights (what the CBS
/// stepper consumes).
MeansAndCovariances polarized_means_and_covariances(
    const Ensemble& ensemble, const Kernel& kernel, const Objective& objective,
    double beta, const MeansOptions& opts = {});

/// Gibbs-weighted covariance of the whole ensemble around standard_mean.
Matrix standard_covariance(const Ensemble& ensemble, const Objective& objective,
                           double beta);

/// Gibbs log weights -beta V(x_j), shared by all of the above.
Vector gibbs_log_weights(const Ensemble& ensemble, const Objective& objective,
                         double beta);

}  // namespace polarcbo

#endif
