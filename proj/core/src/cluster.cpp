#include "polarcbo/cluster.hpp"

#include <cmath>
#include <stdexcept>

#include "polarcbo/log.hpp"

namespace polarcbo {

namespace {

void check_state(const ClusterState& state, const Ensemble& ensemble) {
  const int j_count = ensemble.j_count();
  if (state.probs.rows() != j_count ||
      state.probs.cols() != state.centers.rows() ||
      state.centers.cols() != ensemble.dim()) {
    throw std::invalid_argument("cluster_step: state/ensemble shape mismatch");
  }
  if (state.cluster_count() < 1 || state.cluster_count() > j_count) {
    throw std::invalid_argument("cluster_step: need 1 <= J_c <= J");
  }
  if (!(state.alpha >= 0.0)) {
    throw std::invalid_argument("cluster_step: alpha must be >= 0");
  }
}

// log r_ij = alpha (log p_ij - log p_i^max), with the alpha = inf convention
// that every argmax column gets log r = 0 and all others -inf. Computed in
// log domain so tiny ratios raised to large alpha do not underflow early.
double log_discount(double p, double p_max, double alpha) {
  if (alpha == 0.0) return 0.0;  // r = 1 even where p = 0
  if (std::isinf(alpha)) return p == p_max ? 0.0 : neg_inf;
  if (p == 0.0) return neg_inf;
  return alpha * (std::log(p) - std::log(p_max));
}

}  // namespace

Matrix cluster_centers(const Matrix& log_probs, const Ensemble& ensemble,
                       const Objective& objective, double beta,
                       const Matrix& previous_centers, int* retained) {
  const int j_c = static_cast<int>(log_probs.cols());
  const Vector gibbs = gibbs_log_weights(ensemble, objective, beta);
  Matrix centers(j_c, ensemble.dim());
  for (int j = 0; j < j_c; ++j) {
    const Vector logw = log_probs.col(j) + gibbs;
    const Vector w = softmax_weights(logw);
    if (w.sum() == 0.0) {
      if (previous_centers.rows() != j_c) {
        throw std::runtime_error(
            "cluster_centers: empty cluster and no previous center");
      }
      centers.row(j) = previous_centers.row(j);
      if (retained) ++(*retained);
      warn("cluster center " + std::to_string(j) +
           " has zero total weight; keeping previous position");
    } else {
      centers.row(j) = weighted_row_mean(w, ensemble.positions);
    }
  }
  return centers;
}

ClusterState init_cluster(const Ensemble& ensemble, const Objective& objective,
                          double beta, int j_c, double alpha, RngStream& rng) {
  const int j_count = ensemble.j_count();
  if (j_c < 1 || j_c > j_count) {
    throw std::invalid_argument("init_cluster: need 1 <= J_c <= J");
  }
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("init_cluster: alpha must be >= 0");
  }
  ClusterState state;
  state.alpha = alpha;
  state.probs.resize(j_count, j_c);
  for (int i = 0; i < j_count; ++i) {
    for (int j = 0; j < j_c; ++j) {
      state.probs(i, j) = 1.0 - rng.uniform01();  // (0, 1], rows never vanish
    }
    state.probs.row(i) /= state.probs.row(i).sum();
  }
  const Matrix log_probs = state.probs.array().log().matrix();
  state.centers =
      cluster_centers(log_probs, ensemble, objective, beta, Matrix());
  return state;
}

ClusterStepResult cluster_step(const ClusterState& state,
                               const Ensemble& ensemble, const Kernel& kernel,
                               const Objective& objective, double beta,
                               int inner_iterations) {
  check_state(state, ensemble);
  if (!(beta > 0.0)) throw std::invalid_argument("cluster_step: beta <= 0");
  if (inner_iterations < 1) {
    throw std::invalid_argument("cluster_step: inner_iterations >= 1");
  }

  const int j_count = ensemble.j_count();
  const int j_c = state.cluster_count();

  ClusterStepResult result;
  result.state.alpha = state.alpha;

  Matrix probs = state.probs;
  Matrix log_probs = probs.array().log().matrix();
  Matrix centers = state.centers;

  for (int pass = 0; pass < inner_iterations; ++pass) {
    Matrix new_log_probs(j_count, j_c);
    for (int i = 0; i < j_count; ++i) {
      const double p_max = probs.row(i).maxCoeff();
      if (!(p_max > 0.0)) {
        throw std::logic_error("cluster_step: probability row without mass");
      }
      Vector log_pre(j_c);
      for (int j = 0; j < j_c; ++j) {
        const double log_k = kernel_log_eval_sq(
            kernel, (ensemble.positions.row(i) - centers.row(j)).squaredNorm());
        log_pre[j] = log_discount(probs(i, j), p_max, state.alpha) + log_k;
      }
      const double norm = log_sum_exp(log_pre);
      if (norm == neg_inf) {
        // No center in kernel range: keep the previous membership row.
        new_log_probs.row(i) = log_probs.row(i);
        ++result.carried_prob_rows;
      } else {
        new_log_probs.row(i) = (log_pre.array() - norm).matrix().transpose();
      }
    }
    centers = cluster_centers(new_log_probs, ensemble, objective, beta,
                              centers, &result.retained_centers);
    log_probs = new_log_probs;
    probs = new_log_probs.array().exp().matrix();
  }

  result.state.probs = probs;
  result.state.centers = centers;
  result.means = probs * centers;
  return result;
}

}  // namespace polarcbo
