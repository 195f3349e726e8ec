#ifndef POLARCBO_KERNEL_HPP
#define POLARCBO_KERNEL_HPP

#include <string>

#include "polarcbo/numeric.hpp"

namespace polarcbo {

enum class KernelVariant { Gaussian, Laplace, BoundedConfidence, Constant };

/// Localizing kernel k(x, y), evaluated in log domain so products with
/// Gibbs weights exp(-beta V) become sums. kappa = +inf makes Gaussian and
/// Laplace evaluate exactly like Constant (log k = 0), which is how plain
/// consensus dynamics are recovered as a parameter choice.
struct Kernel {
  KernelVariant variant = KernelVariant::Constant;
  double kappa = pos_inf;

  static Kernel gaussian(double kappa);
  static Kernel laplace(double kappa);
  static Kernel bounded_confidence(double kappa);
  static Kernel constant();
};

/// log k(x, y) in [-inf, 0]. Symmetric, log k(x, x) = 0 for every variant.
double kernel_log_eval(const Kernel& kernel, const Vector& x, const Vector& y);

/// Same, on precomputed squared Euclidean distance (hot path for row
/// evaluations where |x - y|^2 comes from a vectorized expression).
double kernel_log_eval_sq(const Kernel& kernel, double squared_distance);

std::string to_string(KernelVariant v);
KernelVariant kernel_variant_from_string(const std::string& name);

}  // namespace polarcbo

#endif
