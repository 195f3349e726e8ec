#include "polarcbo/means.hpp"

#include <stdexcept>

namespace polarcbo {

namespace {

void require_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("means: beta must be > 0");
}

// Log kernel values of one anchor point against every particle.
Vector log_kernel_row(const Matrix& positions, const Kernel& kernel,
                      const RowVector& anchor) {
  const Eigen::Index j_count = positions.rows();
  Vector logk(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    logk[j] =
        kernel_log_eval_sq(kernel, (positions.row(j) - anchor).squaredNorm());
  }
  return logk;
}

Matrix build_log_weight_matrix(const Matrix& positions, const Kernel& kernel,
                               const Vector& gibbs) {
  const Eigen::Index j_count = positions.rows();
  Matrix logw(j_count, j_count);
  for (Eigen::Index i = 0; i < j_count; ++i) {
    logw.row(i) =
        (log_kernel_row(positions, kernel, positions.row(i)) + gibbs)
            .transpose();
  }
  return logw;
}

// Applies fn(i, logw_row_i) for every particle, materializing the J x J
// matrix only below the threshold. Both branches hand fn bit-identical rows.
template <typename RowFn>
void for_each_weight_row(const Ensemble& ensemble, const Kernel& kernel,
                         const Vector& gibbs, const MeansOptions& opts,
                         RowFn&& fn) {
  const int j_count = ensemble.j_count();
  if (j_count <= opts.materialize_threshold) {
    const Matrix logw =
        build_log_weight_matrix(ensemble.positions, kernel, gibbs);
    for (int i = 0; i < j_count; ++i) {
      fn(i, Vector(logw.row(i).transpose()));
    }
  } else {
    for (int i = 0; i < j_count; ++i) {
      fn(i, Vector(log_kernel_row(ensemble.positions, kernel,
                                  ensemble.positions.row(i)) +
                   gibbs));
    }
  }
}

}  // namespace

Vector gibbs_log_weights(const Ensemble& ensemble, const Objective& objective,
                         double beta) {
  if (objective.dim != ensemble.dim()) {
    throw std::invalid_argument("means: objective dimension mismatch");
  }
  const int j_count = ensemble.j_count();
  Vector g(j_count);
  for (int j = 0; j < j_count; ++j) {
    g[j] = -beta * objective.eval(ensemble.positions.row(j).transpose());
  }
  return g;
}

WeightMatrix weight_matrix(const Ensemble& ensemble, const Kernel& kernel,
                           const Objective& objective, double beta) {
  require_beta(beta);
  return WeightMatrix{build_log_weight_matrix(
      ensemble.positions, kernel, gibbs_log_weights(ensemble, objective, beta))};
}

Matrix polarized_means(const Ensemble& ensemble, const Kernel& kernel,
                       const Objective& objective, double beta,
                       const MeansOptions& opts) {
  require_beta(beta);
  const Vector gibbs = gibbs_log_weights(ensemble, objective, beta);
  Matrix means(ensemble.j_count(), ensemble.dim());
  for_each_weight_row(ensemble, kernel, gibbs, opts,
                      [&](int i, const Vector& logw) {
                        const Vector w = softmax_weights(logw);
                        if (w.sum() == 0.0) {
                          // no reachable neighbor; keep own position
                          means.row(i) = ensemble.positions.row(i);
                        } else {
                          means.row(i) = weighted_row_mean(w, ensemble.positions);
                        }
                      });
  return means;
}

Matrix polarized_means_at(const Ensemble& ensemble, const Kernel& kernel,
                          const Objective& objective, double beta,
                          const Matrix& queries) {
  require_beta(beta);
  if (queries.cols() != ensemble.dim()) {
    throw std::invalid_argument("polarized_means_at: query dimension mismatch");
  }
  const Vector gibbs = gibbs_log_weights(ensemble, objective, beta);
  Matrix means(queries.rows(), ensemble.dim());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const Vector logw =
        log_kernel_row(ensemble.positions, kernel, queries.row(q)) + gibbs;
    const Vector w = softmax_weights(logw);
    if (w.sum() == 0.0) {
      throw std::runtime_error(
          "polarized_means_at: no particle within kernel range of query " +
          std::to_string(q));
    }
    means.row(q) = weighted_row_mean(w, ensemble.positions);
  }
  return means;
}

RowVector standard_mean(const Ensemble& ensemble, const Objective& objective,
                        double beta) {
  require_beta(beta);
  const Vector w =
      softmax_weights(gibbs_log_weights(ensemble, objective, beta));
  return weighted_row_mean(w, ensemble.positions);
}

MeansAndCovariances polarized_means_and_covariances(const Ensemble& ensemble,
                                                    const Kernel& kernel,
                                                    const Objective& objective,
                                                    double beta,
                                                    const MeansOptions& opts) {
  require_beta(beta);
  const Vector gibbs = gibbs_log_weights(ensemble, objective, beta);
  const int j_count = ensemble.j_count();
  const int d = ensemble.dim();
  MeansAndCovariances out;
  out.means.resize(j_count, d);
  out.covs.resize(j_count);
  for_each_weight_row(
      ensemble, kernel, gibbs, opts, [&](int i, const Vector& logw) {
        const Vector w = softmax_weights(logw);
        if (w.sum() == 0.0) {
          out.means.row(i) = ensemble.positions.row(i);
          out.covs[i] = Matrix::Zero(d, d);
          return;
        }
        out.means.row(i) = weighted_row_mean(w, ensemble.positions);
        out.covs[i] = weighted_row_cov(w, ensemble.positions, out.means.row(i));
      });
  return out;
}

std::vector<Matrix> polarized_covariances(const Ensemble& ensemble,
                                          const Kernel& kernel,
                                          const Objective& objective,
                                          double beta,
                                          const MeansOptions& opts) {
  return polarized_means_and_covariances(ensemble, kernel, objective, beta,
                                         opts)
      .covs;
}

Matrix standard_covariance(const Ensemble& ensemble,
                           const Objective& objective, double beta) {
  require_beta(beta);
  const Vector w =
      softmax_weights(gibbs_log_weights(ensemble, objective, beta));
  const RowVector mean = weighted_row_mean(w, ensemble.positions);
  return weighted_row_cov(w, ensemble.positions, mean);
}

}  // namespace polarcbo
