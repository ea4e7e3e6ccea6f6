#pragma once

#include <cstddef>
#include <numbers>

#include "chameleon/angle.hpp"

namespace chameleon {

enum class Station : int { One = 1, Two = 2 };

}  // namespace chameleon

/// The deterministic chameleon model: particle states (sigma, lambda), the
/// setting-dependent dynamics of each particle-apparatus pair, the local measures
/// and the closed-form / quadrature routes to its correlations.
namespace chameleon::dynamics {

inline constexpr double kSqrtTwoPi = 2.5066282746310002;  // sqrt(2 pi)

/// Hidden state of one particle: the source phase and the apparatus variable.
struct ParticlePhase {
  Angle sigma;
  double lambda = 0.0;
};

/// One measurement apparatus. Results never depend on `pointer_value`.
struct ApparatusConfig {
  Angle setting;
  double pointer_value = 1.0;
};

/// Jacobian factors T'_{1,a}(sigma) and T'_{2,b}(sigma) at one sigma.
struct WeightPair {
  double t1 = 0.0;
  double t2 = kSqrtTwoPi;
};

struct DynamicsOutput {
  Angle sigma;
  double pointer = 0.0;
};

/// sqrt(2pi)/4 * |cos(sigma - a)|.
double weight_t1(Angle sigma, Angle a);

/// Always sqrt(2pi).
constexpr double weight_t2() { return kSqrtTwoPi; }

WeightPair weights(Angle sigma, Angle a);

/// Maps (sigma, lambda) to (sigma, lambda / T'). Throws SingularDynamics at
/// station 1 when cos(sigma - setting) == 0.
DynamicsOutput apply_dynamics(const ParticlePhase& p, const ApparatusConfig& app, Station station);

/// Inverse of the lambda -> pointer map at fixed sigma: pointer * T'.
double invert_dynamics(Angle sigma, double pointer, const ApparatusConfig& app, Station station);

/// d lambda / d mu for mu = m(sigma, lambda), evaluated at mu = app.pointer_value.
double reduced_weight(Angle sigma, const ApparatusConfig& app, Station station);

/// +-1 valued observable. Station 2 carries the singlet sign flip; sgn(0) := +1.
int observable(Angle sigma, Angle setting, Station station);

/// Closed form of the model correlation: -cos(a - b).
double exact_correlation(Angle a, Angle b);

/// Composite midpoint rule for the reduced integral
///   (1/2pi) * int S1_a(s) S2_b(s) T'_1a(s) T'_2b(s) ds.
/// The grid is split at the jump points of the observables so each panel is smooth.
/// Requires grid_n >= 8.
double quadrature_correlation(const ApparatusConfig& app1, const ApparatusConfig& app2, std::size_t grid_n);
double quadrature_correlation(Angle a, Angle b, std::size_t grid_n);

/// Total mass of the joint measure after the lambda integrals are done analytically:
///   (1/2pi) * int T'_1a(s) T'_2b(s) ds. Requires grid_n >= 8.
double quadrature_total_mass(const ApparatusConfig& app1, const ApparatusConfig& app2, std::size_t grid_n);
double quadrature_total_mass(Angle a, Angle b, std::size_t grid_n);

/// int p_{j,x}(sigma, lambda) d lambda. Deliberately not 1.
double local_marginal_mass(Angle setting, Angle sigma, Station station);

}  // namespace chameleon::dynamics
