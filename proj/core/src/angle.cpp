#include "chameleon/angle.hpp"

#include <cmath>

#include "chameleon/error.hpp"

namespace chameleon {

double normalize_radians(double radians) {
  if (!std::isfinite(radians)) {
    throw DomainError("angle must be finite");
  }
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  // fmod of a tiny negative value plus 2pi can round up to exactly 2pi.
  if (r >= kTwoPi) {
    r = 0.0;
  }
  return r;
}

Angle::Angle(double radians) : value_(normalize_radians(radians)) {}

Angle Angle::degrees(double value) {
  if (!std::isfinite(value)) {
    throw DomainError("angle must be finite");
  }
  return Angle(value * kPi / 180.0);
}

double Angle::deg() const { return value_ * 180.0 / kPi; }

}  // namespace chameleon
