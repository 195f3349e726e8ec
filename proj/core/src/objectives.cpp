#include "polarcbo/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace polarcbo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kE = 2.7182818284590452353602874713527;

double ackley_value(const Vector& x) {
  const double d = static_cast<double>(x.size());
  const double norm = x.norm();
  double cos_sum = 0.0;
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    cos_sum += std::cos(kTwoPi * x[n]);
  }
  return -20.0 * std::exp(-0.2 / std::sqrt(d) * norm) -
         std::exp(cos_sum / d) + kE + 20.0;
}

double rastrigin_value(const Vector& x) {
  double sum = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    sum += x[n] * x[n] - 10.0 * std::cos(kTwoPi * x[n]);
  }
  return sum;
}

void require_dim(int dim) {
  if (dim < 1) throw std::invalid_argument("objective: dim >= 1 required");
}

Vector padded_shift(const Vector& shift, int dim) {
  Vector s = Vector::Zero(dim);
  for (Eigen::Index n = 0; n < std::min<Eigen::Index>(shift.size(), dim); ++n) {
    s[n] = shift[n];
  }
  return s;
}

}  // namespace

Objective ackley(int dim) {
  require_dim(dim);
  Objective obj;
  obj.name = "ackley";
  obj.dim = dim;
  obj.eval = ackley_value;
  obj.minimizers = {Vector::Zero(dim)};
  obj.domain_lo = -32.768;
  obj.domain_hi = 32.768;
  return obj;
}

Objective shifted_ackley(int dim, const Vector& shift) {
  require_dim(dim);
  if (shift.size() != dim) {
    throw std::invalid_argument("shifted_ackley: shift dimension mismatch");
  }
  Objective obj;
  obj.name = "shifted-ackley";
  obj.dim = dim;
  obj.eval = [shift](const Vector& x) { return ackley_value(x - shift); };
  obj.minimizers = {shift};
  obj.domain_lo = -32.768;
  obj.domain_hi = 32.768;
  return obj;
}

Objective rastrigin(int dim) {
  require_dim(dim);
  Objective obj;
  obj.name = "rastrigin";
  obj.dim = dim;
  obj.eval = rastrigin_value;
  obj.minimizers = {Vector::Zero(dim)};
  obj.domain_lo = -5.12;
  obj.domain_hi = 5.12;
  return obj;
}

Objective multimodal_rastrigin_2d() {
  Objective obj;
  obj.name = "multimodal-rastrigin";
  obj.dim = 2;
  Vector s1(2), s2(2);
  s1 << 3.0, 2.0;
  s2 << -1.0, -3.5;
  obj.eval = [s1, s2](const Vector& x) {
    return 0.125 * rastrigin_value(x) * rastrigin_value(x - s1) *
           rastrigin_value(x - s2);
  };
  obj.minimizers = {Vector::Zero(2), s1, s2};
  obj.domain_lo = -6.0;
  obj.domain_hi = 6.0;
  return obj;
}

Objective multimodal_ackley(int dim) {
  require_dim(dim);
  // 1-based coordinate index: even coordinates take the first branch.
  Vector z1(dim), z2(dim), z3(dim);
  for (int i = 1; i <= dim; ++i) {
    const bool even = (i % 2 == 0);
    z1[i - 1] = even ? -2.0 : 1.0;
    z2[i - 1] = even ? 2.0 : -1.0;
    z3[i - 1] = even ? -1.0 : -3.0;
  }
  Objective obj;
  obj.name = "multimodal-ackley";
  obj.dim = dim;
  obj.eval = [z1, z2, z3](const Vector& x) {
    return ackley_value(x - z1) * ackley_value(x - z2) * ackley_value(x - z3);
  };
  obj.minimizers = {z1, z2, z3};
  obj.domain_lo = -5.0;
  obj.domain_hi = 5.0;
  return obj;
}

Objective gaussian_mixture_potential(const Vector& a, const Vector& b) {
  if (a.size() != 2 || b.size() != 2) {
    throw std::invalid_argument("gaussian_mixture_potential: 2-d centers");
  }
  Objective obj;
  obj.name = "gaussian-mixture";
  obj.dim = 2;
  // V = -log of the two-component mixture, combined in log domain so V
  // stays finite far from both centers.
  obj.eval = [a, b](const Vector& x) {
    const double q1 =
        (x[0] - a[0]) * (x[0] - a[0]) + (x[1] - a[1]) * (x[1] - a[1]) / 0.2;
    const double q2 =
        (x[0] - b[0]) * (x[0] - b[0]) / 8.0 + (x[1] - b[1]) * (x[1] - b[1]) / 0.5;
    Vector terms(2);
    terms << -q1, std::log(0.5) - q2;
    return -log_sum_exp(terms);
  };
  obj.modes = {a, b};
  obj.domain_lo = -6.0;
  obj.domain_hi = 6.0;
  return obj;
}

Objective quadratic(const Vector& m, const Matrix& precision) {
  if (precision.rows() != m.size() || precision.cols() != m.size()) {
    throw std::invalid_argument("quadratic: precision shape mismatch");
  }
  if (!precision.isApprox(precision.transpose(), 1e-12)) {
    throw std::invalid_argument("quadratic: precision not symmetric");
  }
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("quadratic: precision not positive definite");
  }
  Objective obj;
  obj.name = "quadratic";
  obj.dim = static_cast<int>(m.size());
  obj.eval = [m, precision](const Vector& x) {
    const Vector r = x - m;
    return 0.5 * r.dot(precision * r);
  };
  obj.minimizers = {m};
  obj.modes = {m};
  obj.domain_lo = (m.minCoeff() - 5.0);
  obj.domain_hi = (m.maxCoeff() + 5.0);
  obj.quadratic = QuadraticForm{m, precision};
  return obj;
}

Objective himmelblau() {
  // Classical four-minimum benchmark, used for qualitative runs.
  Objective obj;
  obj.name = "himmelblau";
  obj.dim = 2;
  obj.eval = [](const Vector& x) {
    const double p = x[0] * x[0] + x[1] - 11.0;
    const double q = x[0] + x[1] * x[1] - 7.0;
    return p * p + q * q;
  };
  auto mk = [](double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
  };
  obj.minimizers = {mk(3.0, 2.0), mk(-2.805118086952745, 3.131312518250573),
                    mk(-3.779310253377747, -3.283185991286170),
                    mk(3.584428340330492, -1.848126526964404)};
  obj.domain_lo = -5.0;
  obj.domain_hi = 5.0;
  return obj;
}

Objective make_objective(const std::string& name,
                         const ObjectiveParams& params) {
  if (name == "ackley") return ackley(params.dim);
  if (name == "shifted-ackley") {
    Vector def(2);
    def << 3.0, 2.0;
    const Vector shift =
        params.shift ? *params.shift : padded_shift(def, params.dim);
    return shifted_ackley(params.dim, shift);
  }
  if (name == "rastrigin") return rastrigin(params.dim);
  if (name == "rastrigin3" || name == "multimodal-rastrigin") {
    return multimodal_rastrigin_2d();
  }
  if (name == "multimodal-ackley") return multimodal_ackley(params.dim);
  if (name == "gaussian-mixture") {
    Vector a(2), b(2);
    a << 0.0, 2.0;
    b << 0.0, -2.0;
    return gaussian_mixture_potential(params.center_a ? *params.center_a : a,
                                      params.center_b ? *params.center_b : b);
  }
  if (name == "himmelblau") return himmelblau();
  if (name == "quadratic") {
    return quadratic(Vector::Zero(params.dim),
                     Matrix::Identity(params.dim, params.dim));
  }
  throw std::invalid_argument("unknown objective: " + name);
}

std::vector<std::string> objective_names() {
  return {"ackley",       "shifted-ackley",    "rastrigin",
          "rastrigin3",   "multimodal-ackley", "gaussian-mixture",
          "himmelblau",   "quadratic"};
}

}  // namespace polarcbo
