#pragma once

#include <numbers>

namespace chameleon {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A polarizer setting or hidden phase, always stored in [0, 2pi).
///
/// Every constructor normalizes; non-finite input throws DomainError.
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians);

  static Angle radians(double value) { return Angle(value); }
  static Angle degrees(double value);

  [[nodiscard]] constexpr double rad() const { return value_; }
  [[nodiscard]] double deg() const;

  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  double value_ = 0.0;
};

/// Remainder of `radians` into [0, 2pi).
double normalize_radians(double radians);

inline Angle operator+(Angle lhs, Angle rhs) { return Angle(lhs.rad() + rhs.rad()); }
inline Angle operator-(Angle lhs, Angle rhs) { return Angle(lhs.rad() - rhs.rad()); }

}  // namespace chameleon
