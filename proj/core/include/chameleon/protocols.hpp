#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chameleon/angle.hpp"
#include "chameleon/dynamics.hpp"
#include "chameleon/rng.hpp"

namespace chameleon {

/// A station's reply. Empty means the particle was not inside the apparatus.
enum class Outcome : std::int8_t { Minus = -1, Empty = 0, Plus = 1 };

constexpr int outcome_value(Outcome o) { return static_cast<int>(o); }
constexpr Outcome outcome_from_sign(int s) { return s >= 0 ? Outcome::Plus : Outcome::Minus; }

struct TrialRecord {
  std::uint64_t index = 0;
  Angle sigma;
  Outcome outcome_1 = Outcome::Empty;
  Outcome outcome_2 = Outcome::Empty;
  bool coincidence = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

enum class SigmaMode { Deterministic, Random };
enum class ProtocolKind { Direct, Old };

struct ExperimentConfig {
  Angle a;
  Angle b;
  std::uint64_t n_grid = 1000;
  std::uint64_t n_total = 1'000'000;
  SigmaMode sigma_mode = SigmaMode::Deterministic;
  ProtocolKind protocol = ProtocolKind::Direct;
  std::uint64_t seed = 0;
  std::uint64_t k1 = 10;
  std::uint64_t k2 = 10;

  /// Throws ConfigError unless 1 <= n_grid <= n_total and k1, k2 >= 1.
  void validate() const;
};

/// Source phases with their repetition counts N(sigma_j); the trial order is
/// values[0] repeated repetitions[0] times, then values[1], ...
struct SigmaSequence {
  std::vector<Angle> values;
  std::vector<std::uint64_t> repetitions;

  [[nodiscard]] std::uint64_t total() const;
  /// One sigma per trial index.
  [[nodiscard]] std::vector<Angle> expand() const;
};

/// Deterministic mode: sigma_j = (2pi/N) j for j = 1..N, floor(n_total/N) repetitions
/// each plus one extra for the lowest (n_total mod N) indices.
/// Random mode: n_total draws from the "source" stream, one repetition each.
SigmaSequence generate_sigma_sequence(const ExperimentConfig& cfg);

/// Station-local reply in the direct protocol. Station 1 detects when
/// draw <= |cos(sigma - a)| / 4; station 2 always detects.
Outcome direct_trial(Angle sigma, Angle setting, Station station, double draw);

/// Acceptance probability of the direct protocol at one station.
double detection_probability(Angle sigma, Angle setting, Station station);

/// Runs the coincidence-conditioned protocol in-process. Records are ordered by
/// index and identical for every `workers` value (0 = hardware concurrency).
std::vector<TrialRecord> run_direct(const ExperimentConfig& cfg, unsigned workers = 0);

/// +-1 surrogate whose mean over a uniform draw is cos(sigma - a)/4 (station 1);
/// station 2 returns the plain observable.
int old_hat_observable(Angle sigma, Angle setting, Station station, double draw);

struct OldResult {
  double raw_mean = 0.0;
  double scaled_mean = 0.0;
};

/// Riemann-sum protocol: average over the sigma sequence of the product of the
/// K1- and K2-averages of the surrogate observables, then multiply by 2pi.
OldResult run_old(const ExperimentConfig& cfg, unsigned workers = 0);

}  // namespace chameleon
