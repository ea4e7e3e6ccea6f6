#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chameleon/angle.hpp"

/// Finite classical contextual models with normalized local factors, and the
/// checks showing they always satisfy the three-term Bell inequality.
namespace chameleon::contextual {

/// Probability vector over a finite hidden-state space together with, for each
/// setting x and side j, the effective observable f_{j,x} (entries in [-1, 1]).
/// Settings are addressed by index; `settings()` holds their angles.
class ContextualModel {
 public:
  /// Throws DomainError unless base_state is a probability vector and every
  /// f entry lies in [-1, 1] with matching sizes.
  ContextualModel(std::vector<double> base_state, std::vector<Angle> settings, std::vector<std::vector<double>> f1,
                  std::vector<std::vector<double>> f2);

  [[nodiscard]] std::size_t omega_size() const { return base_state_.size(); }
  [[nodiscard]] std::size_t n_settings() const { return settings_.size(); }
  [[nodiscard]] std::span<const double> base_state() const { return base_state_; }
  [[nodiscard]] std::span<const Angle> settings() const { return settings_; }
  [[nodiscard]] std::span<const double> f1(std::size_t setting) const;
  [[nodiscard]] std::span<const double> f2(std::size_t setting) const;

  /// Index of `angle` among the settings (within 1e-12 rad); throws UnknownSetting.
  [[nodiscard]] std::size_t setting_index(Angle angle) const;

 private:
  std::vector<double> base_state_;
  std::vector<Angle> settings_;
  std::vector<std::vector<double>> f1_;
  std::vector<std::vector<double>> f2_;
};

/// f_{1,c} = -f_{2,c} on the support of the base state, within `tolerance`.
struct SingletConstraint {
  double tolerance = 0.0;

  [[nodiscard]] bool satisfied_by(const ContextualModel& m) const;
};

inline constexpr double kBellTolerance = 1e-9;

/// sum_w psi(w) f_{1,a}(w) f_{2,b}(w). Throws UnknownSetting for bad indices.
double model_correlation(const ContextualModel& m, std::size_t a, std::size_t b);

/// Settings on the uniform grid 2pi k / n_settings; Dirichlet(1) base state;
/// f_{1,c} uniform on [-1, 1] and f_{2,c} := -f_{1,c}.
ContextualModel generate_singlet_model(std::size_t omega_size, std::size_t n_settings, std::uint64_t seed);

struct BellCheck {
  double quantity = 0.0;
  bool holds = true;
};

/// |corr(a,b) - corr(c,b)| - corr(a,c) and whether it is <= 1 + 1e-9.
/// Throws SingletViolated if the model breaks the singlet constraint.
BellCheck check_bell(const ContextualModel& m, std::size_t a, std::size_t b, std::size_t c);

/// max over setting triples of max(0, quantity - 1) plus max over setting pairs of
/// |corr(x, y) + cos(x - y)|. Requires at least 3 settings, all present in `m`.
double nearest_epr_gap(const ContextualModel& m, std::span<const Angle> settings);

/// True when corr(a,b), corr(c,b), corr(a,c) are all within `eps` of -cos of the
/// corresponding angle differences.
bool matches_epr_triple(const ContextualModel& m, Angle a, Angle b, Angle c, double eps);

struct BatchOptions {
  std::size_t models = 1000;
  std::size_t omega_min = 2;
  std::size_t omega_max = 64;
  std::size_t n_settings = 6;
  std::uint64_t seed = 0;
  /// Triple tested against the EPR values.
  Angle epr_a{0.0};
  Angle epr_b{2.0 * kPi / 3.0};
  Angle epr_c{kPi / 3.0};
  double epr_eps = 0.16;
};

struct BatchLine {
  std::uint64_t seed = 0;
  std::size_t omega_size = 0;
  std::size_t triple[3] = {0, 0, 0};
  double quantity = 0.0;
  bool holds = true;
};

struct BatchSummary {
  std::size_t models = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::size_t epr_matches = 0;
  /// False when the setting grid does not contain the EPR triple.
  bool epr_checked = true;
  double worst_quantity = 0.0;
  /// Worst line per model; one entry per model.
  std::vector<BatchLine> lines;

  [[nodiscard]] bool all_hold() const { return violations == 0; }
};

/// Seed of model i in a batch.
std::uint64_t batch_model_seed(std::uint64_t master, std::size_t i);

/// Generates `models` singlet models and checks every ordered triple of settings.
BatchSummary run_batch(const BatchOptions& opts);

}  // namespace chameleon::contextual
