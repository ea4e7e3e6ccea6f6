#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chameleon/angle.hpp"
#include "chameleon/protocols.hpp"

namespace chameleon::analysis {

/// Coincidence-conditioned correlation: sum of products over coincidences
/// divided by the number of coincidences.
struct CorrelationReport {
  double correlation = 0.0;
  std::uint64_t n_coincidences = 0;
  std::uint64_t n_trials = 0;
  double sum_products = 0.0;
  double std_error = 0.0;

  [[nodiscard]] double coincidence_fraction() const {
    return n_trials == 0 ? 0.0 : static_cast<double>(n_coincidences) / static_cast<double>(n_trials);
  }

  friend bool operator==(const CorrelationReport&, const CorrelationReport&) = default;
};

/// Throws NoCoincidences when no record is coincident.
CorrelationReport estimate_correlation(std::span<const TrialRecord> records);

/// Builds the report from already-aggregated counts. Throws NoCoincidences when
/// n_coincidences == 0.
CorrelationReport make_report(std::int64_t sum_products, std::uint64_t n_coincidences, std::uint64_t n_trials);

/// |e_ab - e_cb| - e_ac. Throws DomainError if any input lies outside [-1, 1].
double bell_quantity(double e_ab, double e_cb, double e_ac);

struct BellReport {
  Angle a, b, c;
  CorrelationReport ab, cb, ac;
  double e_ab = 0.0;
  double e_cb = 0.0;
  double e_ac = 0.0;
  double bell_quantity = 0.0;
  /// 1 / P(coincidence), with P pooled over the three sessions.
  double bound = 1.0;
  double pooled_coincidence_fraction = 0.0;
  /// sqrt of the summed squared standard errors of the three correlations.
  double propagated_std_error = 0.0;

  [[nodiscard]] bool violates_unconditioned_bound() const { return bell_quantity > 1.0; }
};

/// Three direct sessions for (a,b), (c,b), (a,c); each gets a seed derived from cfg.seed.
BellReport run_bell_experiment(Angle a, Angle b, Angle c, const ExperimentConfig& cfg, unsigned workers = 0);

/// Seeds used by run_bell_experiment for its three sessions, in (ab, cb, ac) order.
std::uint64_t bell_session_seed(std::uint64_t master, int pair);

enum class LossVerdict { ChameleonLike, InefficiencyLike, Inconclusive };

struct LossRunSummary {
  std::uint64_t runs = 0;
  std::vector<std::int64_t> counts;
  double mean = 0.0;
  /// Unbiased (n - 1) sample variance of the counts.
  double variance = 0.0;
  /// n p (1 - p) with p estimated as mean / n_per_run.
  double binomial_variance = 0.0;
  LossVerdict verdict = LossVerdict::Inconclusive;
};

inline constexpr double kInefficiencyRatioLow = 0.5;
inline constexpr double kInefficiencyRatioHigh = 2.0;

/// Repeated runs over an identical sigma sequence: zero variance means the loss
/// is deterministic (chameleon-like); binomial-sized variance means independent
/// per-photon loss. Throws DomainError with fewer than 2 runs.
LossRunSummary discriminate_loss(std::span<const std::int64_t> counts, std::int64_t n_per_run);

/// Detected counts when loss is a deterministic function of each photon's state:
/// the source replays the same sigma sequence and apparatus state every run.
std::vector<std::int64_t> synthesize_chameleon_loss(std::int64_t n_photons, double pass_fraction, std::uint64_t runs,
                                                    std::uint64_t seed);

/// Detected counts when every photon is independently kept with `pass_fraction`.
std::vector<std::int64_t> synthesize_inefficiency_loss(std::int64_t n_photons, double pass_fraction,
                                                       std::uint64_t runs, std::uint64_t seed);

enum class EmptyPolicy { MinusOne, Zero };

struct ConditioningComparison {
  double conditioned = 0.0;
  double unconditioned = 0.0;
  double coincidence_fraction = 0.0;
};

/// Conditioned estimator vs. the plain average over all trials with Empty mapped
/// per `policy`. Throws NoCoincidences for the conditioned branch.
ConditioningComparison conditioned_vs_unconditioned(std::span<const TrialRecord> records, EmptyPolicy policy);

}  // namespace chameleon::analysis
