#include "polarcbo/schedule.hpp"

namespace polarcbo {

std::string to_string(NoiseVariant v) {
  return v == NoiseVariant::Isotropic ? "isotropic" : "coordinatewise";
}

NoiseVariant noise_variant_from_string(const std::string& name) {
  if (name == "isotropic" || name == "iso") return NoiseVariant::Isotropic;
  if (name == "coordinatewise" || name == "coord") {
    return NoiseVariant::Coordinatewise;
  }
  throw std::invalid_argument("unknown noise variant: " + name);
}

}  // namespace polarcbo
