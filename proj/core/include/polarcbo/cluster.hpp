#ifndef POLARCBO_CLUSTER_HPP
#define POLARCBO_CLUSTER_HPP

#include "polarcbo/ensemble.hpp"
#include "polarcbo/kernel.hpp"
#include "polarcbo/means.hpp"
#include "polarcbo/objectives.hpp"
#include "polarcbo/rng.hpp"

namespace polarcbo {

/// Soft-assignment state of the cluster-based mean computation:
/// J_c cluster centers, a J x J_c row-stochastic membership matrix and the
/// discounting exponent alpha (alpha = +inf means hard argmax assignment).
struct ClusterState {
  Matrix centers;  // J_c x d
  Matrix probs;    // J x J_c, rows sum to 1
  double alpha = 0.0;

  int cluster_count() const { return static_cast<int>(centers.rows()); }
};

struct ClusterStepResult {
  ClusterState state;
  Matrix means;  // J x d, m_i = sum_j p_ij c_j
  /// Rows whose updated weights all vanished and therefore kept their
  /// previous membership (bounded-confidence kernel with no center in
  /// range). Zero for strictly positive kernels.
  int carried_prob_rows = 0;
  /// Centers whose total weight underflowed to zero and kept their
  /// previous position.
  int retained_centers = 0;
};

/// Gibbs-and-membership-weighted center update
/// c_j = sum_i x_i p_ij exp(-beta V(x_i)) / sum_i p_ij exp(-beta V(x_i)),
/// evaluated per column via log-sum-exp over log p_ij - beta V(x_i).
/// `log_probs` holds log p_ij. A column with no weight keeps its row from
/// `previous_centers` and increments *retained.
Matrix cluster_centers(const Matrix& log_probs, const Ensemble& ensemble,
                       const Objective& objective, double beta,
                       const Matrix& previous_centers, int* retained = nullptr);

/// Memberships drawn i.i.d. uniform and row-normalized, then centers
/// computed once from them. Consumes only `rng`.
ClusterState init_cluster(const Ensemble& ensemble, const Objective& objective,
                          double beta, int j_c, double alpha, RngStream& rng);

/// One pass of the coupled membership/center update, in the order:
/// (1) row maxima of the previous probs, (2) discount ratios
/// r_ij = (p_ij / p_i^max)^alpha, (3) pre-probs r_ij k(x_i, c_j) against the
/// previous centers, (4) row normalization, (5) center update with the new
/// probs, (6) per-particle means from new probs and new centers.
/// `inner_iterations` > 1 repeats (1)-(5) before emitting means,
/// approximating the fixed point of the coupled system; the default single
/// iteration is the baseline scheme.
ClusterStepResult cluster_step(const ClusterState& state,
                               const Ensemble& ensemble, const Kernel& kernel,
                               const Objective& objective, double beta,
                               int inner_iterations = 1);

}  // namespace polarcbo

#endif
