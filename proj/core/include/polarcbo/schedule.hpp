#ifndef POLARCBO_SCHEDULE_HPP
#define POLARCBO_SCHEDULE_HPP

#include <stdexcept>
#include <string>

namespace polarcbo {

enum class NoiseVariant { Isotropic, Coordinatewise };

struct NoiseModel {
  NoiseVariant variant = NoiseVariant::Isotropic;
  double sigma = 0.0;

  NoiseModel() = default;
  NoiseModel(NoiseVariant v, double s) : variant(v), sigma(s) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("NoiseModel: sigma < 0");
  }
};

/// Multiplicative inverse-temperature schedule
/// beta(t+1) = min(factor * beta(t), beta_max); factor = 1 keeps beta fixed.
struct BetaSchedule {
  double beta0 = 1.0;
  double factor = 1.0;
  double beta_max = 1.0;

  BetaSchedule() = default;
  BetaSchedule(double b0, double f, double bmax)
      : beta0(b0), factor(f), beta_max(bmax) {
    if (!(beta0 > 0.0)) throw std::invalid_argument("BetaSchedule: beta0 <= 0");
    if (!(factor >= 1.0)) throw std::invalid_argument("BetaSchedule: factor < 1");
    if (!(beta_max > 0.0)) {
      throw std::invalid_argument("BetaSchedule: beta_max <= 0");
    }
  }

  static BetaSchedule fixed(double beta) { return {beta, 1.0, beta}; }

  double initial() const { return beta0 < beta_max ? beta0 : beta_max; }
  double advance(double beta) const {
    const double next = factor * beta;
    return next < beta_max ? next : beta_max;
  }
};

std::string to_string(NoiseVariant v);
NoiseVariant noise_variant_from_string(const std::string& name);

}  // namespace polarcbo

#endif
