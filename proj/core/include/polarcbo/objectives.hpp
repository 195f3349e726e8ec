#ifndef POLARCBO_OBJECTIVES_HPP
#define POLARCBO_OBJECTIVES_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polarcbo/numeric.hpp"

namespace polarcbo {

/// Quadratic structure V(x) = 1/2 (x - center)^T precision (x - center),
/// attached to objectives that have it so proximal solves can use the
/// linear optimality system instead of finite differences.
struct QuadraticForm {
  Vector center;
  Matrix precision;
};

/// Nonnegative scalar field V on R^d plus the metadata the experiment
/// harness needs: known global minimizers (empty for sampling targets),
/// mode centers (sampling targets only) and a natural domain box.
struct Objective {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> eval;
  std::vector<Vector> minimizers;
  std::vector<Vector> modes;  // sampling targets: mixture component centers
  double domain_lo = -5.0;
  double domain_hi = 5.0;
  std::optional<QuadraticForm> quadratic;

  double operator()(const Vector& x) const { return eval(x); }
};

Objective ackley(int dim);
Objective shifted_ackley(int dim, const Vector& shift);
Objective rastrigin(int dim);
Objective multimodal_rastrigin_2d();
Objective multimodal_ackley(int dim);
Objective gaussian_mixture_potential(const Vector& a, const Vector& b);
Objective quadratic(const Vector& m, const Matrix& precision);
Objective himmelblau();

/// Options consumed by the named benchmark registry.
struct ObjectiveParams {
  int dim = 2;
  std::optional<Vector> shift;     // shifted-ackley, default (3, 2) padded
  std::optional<Vector> center_a;  // gaussian-mixture, default (0, 2)
  std::optional<Vector> center_b;  // gaussian-mixture, default (0, -2)
};

/// Benchmark registry addressable by name from the CLI:
/// "ackley", "shifted-ackley", "rastrigin", "rastrigin3"
/// (= "multimodal-rastrigin"), "multimodal-ackley", "gaussian-mixture",
/// "himmelblau", "quadratic".
Objective make_objective(const std::string& name, const ObjectiveParams& params);

std::vector<std::string> objective_names();

}  // namespace polarcbo

#endif
