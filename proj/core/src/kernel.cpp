#include "polarcbo/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace polarcbo {

namespace {

void require_positive_kappa(double kappa, const char* who) {
  if (std::isnan(kappa) || kappa <= 0.0) {
    throw std::invalid_argument(std::string(who) +
                                ": kappa must be positive (or +inf)");
  }
}

}  // namespace

Kernel Kernel::gaussian(double kappa) {
  require_positive_kappa(kappa, "Kernel::gaussian");
  return {KernelVariant::Gaussian, kappa};
}

Kernel Kernel::laplace(double kappa) {
  require_positive_kappa(kappa, "Kernel::laplace");
  return {KernelVariant::Laplace, kappa};
}

Kernel Kernel::bounded_confidence(double kappa) {
  require_positive_kappa(kappa, "Kernel::bounded_confidence");
  return {KernelVariant::BoundedConfidence, kappa};
}

Kernel Kernel::constant() { return {KernelVariant::Constant, pos_inf}; }

double kernel_log_eval_sq(const Kernel& kernel, double squared_distance) {
  switch (kernel.variant) {
    case KernelVariant::Constant:
      return 0.0;
    case KernelVariant::Gaussian:
      if (std::isinf(kernel.kappa)) return 0.0;
      return -squared_distance / (2.0 * kernel.kappa * kernel.kappa);
    case KernelVariant::Laplace:
      if (std::isinf(kernel.kappa)) return 0.0;
      return -std::sqrt(squared_distance) / kernel.kappa;
    case KernelVariant::BoundedConfidence:
      // Inclusive boundary: the indicator is 1 at |x - y| = kappa.
      return std::sqrt(squared_distance) <= kernel.kappa ? 0.0 : neg_inf;
  }
  throw std::logic_error("kernel_log_eval_sq: unknown variant");
}

double kernel_log_eval(const Kernel& kernel, const Vector& x,
                       const Vector& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel_log_eval: dimension mismatch");
  }
  return kernel_log_eval_sq(kernel, (x - y).squaredNorm());
}

std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::Gaussian: return "gaussian";
    case KernelVariant::Laplace: return "laplace";
    case KernelVariant::BoundedConfidence: return "bounded-confidence";
    case KernelVariant::Constant: return "constant";
  }
  return "unknown";
}

KernelVariant kernel_variant_from_string(const std::string& name) {
  if (name == "gaussian") return KernelVariant::Gaussian;
  if (name == "laplace") return KernelVariant::Laplace;
  if (name == "bounded-confidence") return KernelVariant::BoundedConfidence;
  if (name == "constant") return KernelVariant::Constant;
  throw std::invalid_argument("unknown kernel variant: " + name);
}

}  // namespace polarcbo
