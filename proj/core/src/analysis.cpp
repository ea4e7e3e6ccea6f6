#include "chameleon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chameleon/error.hpp"
#include "chameleon/rng.hpp"

namespace chameleon::analysis {

CorrelationReport make_report(std::int64_t sum_products, std::uint64_t n_coincidences, std::uint64_t n_trials) {
  if (n_coincidences == 0) {
    throw NoCoincidences("no coincident trials to condition on");
  }
  CorrelationReport r;
  r.n_coincidences = n_coincidences;
  r.n_trials = n_trials;
  r.sum_products = static_cast<double>(sum_products);
  r.correlation = r.sum_products / static_cast<double>(n_coincidences);
  r.std_error = std::sqrt(std::max(0.0, 1.0 - r.correlation * r.correlation) / static_cast<double>(n_coincidences));
  return r;
}

CorrelationReport estimate_correlation(std::span<const TrialRecord> records) {
  std::int64_t sum = 0;
  std::uint64_t coincidences = 0;
  for (const TrialRecord& r : records) {
    if (!r.coincidence) {
      continue;
    }
    ++coincidences;
    sum += outcome_value(r.outcome_1) * outcome_value(r.outcome_2);
  }
  return make_report(sum, coincidences, records.size());
}

double bell_quantity(double e_ab, double e_cb, double e_ac) {
  for (double e : {e_ab, e_cb, e_ac}) {
    if (!(e >= -1.0 && e <= 1.0)) {
      throw DomainError("correlations must lie in [-1, 1]");
    }
  }
  return std::abs(e_ab - e_cb) - e_ac;
}

std::uint64_t bell_session_seed(std::uint64_t master, int pair) {
  static constexpr const char* kLabels[] = {"bell/ab", "bell/cb", "bell/ac"};
  return rng::derive_seed(master, kLabels[pair]);
}

BellReport run_bell_experiment(Angle a, Angle b, Angle c, const ExperimentConfig& cfg, unsigned workers) {
  const auto session = [&](Angle x, Angle y, int pair) {
    ExperimentConfig sub = cfg;
    sub.protocol = ProtocolKind::Direct;
    sub.a = x;
    sub.b = y;
    sub.seed = bell_session_seed(cfg.seed, pair);
    sub.validate();
    return estimate_correlation(run_direct(sub, workers));
  };

  BellReport out;
  out.a = a;
  out.b = b;
  out.c = c;
  out.ab = session(a, b, 0);
  out.cb = session(c, b, 1);
  out.ac = session(a, c, 2);
  out.e_ab = out.ab.correlation;
  out.e_cb = out.cb.correlation;
  out.e_ac = out.ac.correlation;
  out.bell_quantity = bell_quantity(out.e_ab, out.e_cb, out.e_ac);

  const double coincidences = static_cast<double>(out.ab.n_coincidences + out.cb.n_coincidences + out.ac.n_coincidences);
  const double trials = static_cast<double>(out.ab.n_trials + out.cb.n_trials + out.ac.n_trials);
  out.pooled_coincidence_fraction = coincidences / trials;
  out.bound = 1.0 / out.pooled_coincidence_fraction;
  out.propagated_std_error = std::sqrt(out.ab.std_error * out.ab.std_error + out.cb.std_error * out.cb.std_error +
                                       out.ac.std_error * out.ac.std_error);
  return out;
}

LossRunSummary discriminate_loss(std::span<const std::int64_t> counts, std::int64_t n_per_run) {
  if (counts.size() < 2) {
    throw DomainError("loss discrimination needs at least two runs");
  }
  if (n_per_run <= 0) {
    throw DomainError("photons per run must be positive");
  }
  LossRunSummary s;
  s.runs = counts.size();
  s.counts.assign(counts.begin(), counts.end());

  const double n = static_cast<double>(counts.size());
  s.mean = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
  double ss = 0.0;
  for (std::int64_t c : counts) {
    const double d = static_cast<double>(c) - s.mean;
    ss += d * d;
  }
  s.variance = ss / (n - 1.0);
  const double p = s.mean / static_cast<double>(n_per_run);
  s.binomial_variance = static_cast<double>(n_per_run) * p * (1.0 - p);

  const bool all_equal = std::all_of(counts.begin(), counts.end(), [&](std::int64_t c) { return c == counts[0]; });
  if (all_equal) {
    s.verdict = LossVerdict::ChameleonLike;
  } else if (s.binomial_variance > 0.0 && s.variance >= kInefficiencyRatioLow * s.binomial_variance &&
             s.variance <= kInefficiencyRatioHigh * s.binomial_variance) {
    s.verdict = LossVerdict::InefficiencyLike;
  } else {
    s.verdict = LossVerdict::Inconclusive;
  }
  return s;
}

std::vector<std::int64_t> synthesize_chameleon_loss(std::int64_t n_photons, double pass_fraction, std::uint64_t runs,
                                                    std::uint64_t seed) {
  // The state of photon i (sigma_i, lambda_i) is fixed by the stationary source; the
  // detection rule lambda_i <= pass_fraction is deterministic in that state, so every
  // run sees exactly the same photons survive.
  const auto state = rng::CounterStream::derive(seed, "loss/chameleon");
  std::int64_t detected = 0;
  for (std::int64_t i = 0; i < n_photons; ++i) {
    if (state.uniform(static_cast<std::uint64_t>(i)) <= pass_fraction) {
      ++detected;
    }
  }
  return std::vector<std::int64_t>(runs, detected);
}

std::vector<std::int64_t> synthesize_inefficiency_loss(std::int64_t n_photons, double pass_fraction,
                                                       std::uint64_t runs, std::uint64_t seed) {
  const auto noise = rng::CounterStream::derive(seed, "loss/inefficiency");
  std::vector<std::int64_t> counts(runs, 0);
  for (std::uint64_t r = 0; r < runs; ++r) {
    for (std::int64_t i = 0; i < n_photons; ++i) {
      if (noise.uniform(r, static_cast<std::uint64_t>(i)) < pass_fraction) {
        ++counts[r];
      }
    }
  }
  return counts;
}

ConditioningComparison conditioned_vs_unconditioned(std::span<const TrialRecord> records, EmptyPolicy policy) {
  ConditioningComparison out;
  const CorrelationReport conditioned = estimate_correlation(records);
  out.conditioned = conditioned.correlation;
  out.coincidence_fraction = conditioned.coincidence_fraction();

  const auto numeric = [policy](Outcome o) {
    if (o == Outcome::Empty) {
      return policy == EmptyPolicy::Zero ? 0 : -1;
    }
    return outcome_value(o);
  };
  std::int64_t sum = 0;
  for (const TrialRecord& r : records) {
    sum += numeric(r.outcome_1) * numeric(r.outcome_2);
  }
  out.unconditioned = static_cast<double>(sum) / static_cast<double>(records.size());
  return out;
}

}  // namespace chameleon::analysis
