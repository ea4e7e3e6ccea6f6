#include "chameleon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chameleon/error.hpp"

namespace chameleon::dynamics {

namespace {

// Derivative of the linear map lambda -> lambda / T'.
double pointer_derivative(double t_prime) { return 1.0 / t_prime; }

double t_prime(Angle sigma, Angle setting, Station station) {
  return station == Station::One ? weight_t1(sigma, setting) : weight_t2();
}

void require_grid(std::size_t grid_n) {
  if (grid_n < 8) {
    throw DomainError("quadrature grid must have at least 8 cells");
  }
}

// Panels of [0, 2pi) delimited by the points where cos(s - x) changes sign.
std::vector<double> panel_edges(Angle a, Angle b) {
  std::vector<double> edges{0.0, kTwoPi};
  for (Angle x : {a, b}) {
    edges.push_back(normalize_radians(x.rad() + kPi / 2));
    edges.push_back(normalize_radians(x.rad() + 3 * kPi / 2));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Composite midpoint over the panels; cells are shared out in proportion to panel length.
template <typename Integrand>
double composite_midpoint(const std::vector<double>& edges, std::size_t grid_n, Integrand&& f) {
  const std::size_t panels = edges.size() - 1;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    std::size_t cells;
    if (p + 1 == panels) {
      cells = grid_n > used ? grid_n - used : 1;
    } else {
      cells = static_cast<std::size_t>(std::llround(static_cast<double>(grid_n) * (hi - lo) / kTwoPi));
    }
    cells = std::max<std::size_t>(cells, 1);
    used += cells;
    const double h = (hi - lo) / static_cast<double>(cells);
    double panel = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      panel += f(lo + (static_cast<double>(i) + 0.5) * h);
    }
    total += panel * h;
  }
  return total;
}

}  // namespace

double weight_t1(Angle sigma, Angle a) {
  return kSqrtTwoPi / 4.0 * std::abs(std::cos(sigma.rad() - a.rad()));
}

WeightPair weights(Angle sigma, Angle a) { return WeightPair{weight_t1(sigma, a), weight_t2()}; }

DynamicsOutput apply_dynamics(const ParticlePhase& p, const ApparatusConfig& app, Station station) {
  const double w = t_prime(p.sigma, app.setting, station);
  if (w == 0.0) {
    throw SingularDynamics("station-1 dynamics is singular where cos(sigma - a) = 0");
  }
  return DynamicsOutput{p.sigma, p.lambda / w};
}

double invert_dynamics(Angle sigma, double pointer, const ApparatusConfig& app, Station station) {
  return pointer * t_prime(sigma, app.setting, station);
}

double reduced_weight(Angle sigma, const ApparatusConfig& app, Station station) {
  // The map is linear in lambda, so m' does not depend on where it is evaluated;
  // app.pointer_value only fixes the point of evaluation.
  const double w = t_prime(sigma, app.setting, station);
  return 1.0 / pointer_derivative(w);
}

int observable(Angle sigma, Angle setting, Station station) {
  const int s = std::cos(sigma.rad() - setting.rad()) >= 0.0 ? 1 : -1;
  return station == Station::One ? s : -s;
}

double exact_correlation(Angle a, Angle b) { return -std::cos(a.rad() - b.rad()); }

double quadrature_correlation(const ApparatusConfig& app1, const ApparatusConfig& app2, std::size_t grid_n) {
  require_grid(grid_n);
  const auto integrand = [&](double s) {
    const Angle sigma(s);
    return observable(sigma, app1.setting, Station::One) * observable(sigma, app2.setting, Station::Two) *
           reduced_weight(sigma, app1, Station::One) * reduced_weight(sigma, app2, Station::Two);
  };
  return composite_midpoint(panel_edges(app1.setting, app2.setting), grid_n, integrand) / kTwoPi;
}

double quadrature_correlation(Angle a, Angle b, std::size_t grid_n) {
  return quadrature_correlation(ApparatusConfig{a}, ApparatusConfig{b}, grid_n);
}

double quadrature_total_mass(const ApparatusConfig& app1, const ApparatusConfig& app2, std::size_t grid_n) {
  require_grid(grid_n);
  const auto integrand = [&](double s) {
    const Angle sigma(s);
    return reduced_weight(sigma, app1, Station::One) * reduced_weight(sigma, app2, Station::Two);
  };
  return composite_midpoint(panel_edges(app1.setting, app2.setting), grid_n, integrand) / kTwoPi;
}

double quadrature_total_mass(Angle a, Angle b, std::size_t grid_n) {
  return quadrature_total_mass(ApparatusConfig{a}, ApparatusConfig{b}, grid_n);
}

double local_marginal_mass(Angle setting, Angle sigma, Station station) {
  // int delta(lambda / T' - m) d lambda = T' for any pointer value m in range.
  return t_prime(sigma, setting, station);
}

}  // namespace chameleon::dynamics
