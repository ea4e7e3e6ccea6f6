#include "chameleon/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "chameleon/error.hpp"

namespace chameleon {

namespace {

unsigned resolve_workers(unsigned workers, std::uint64_t n) {
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  // Not worth a thread below ~64k trials.
  const std::uint64_t cap = std::max<std::uint64_t>(1, n / 65536);
  return static_cast<unsigned>(std::min<std::uint64_t>(workers, cap));
}

// Calls body(begin, end, chunk) on contiguous, index-ordered chunks of [0, n).
template <typename Body>
void for_chunks(std::uint64_t n, unsigned workers, Body&& body) {
  if (workers <= 1) {
    body(std::uint64_t{0}, n, 0u);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  const std::uint64_t step = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(n, w * step);
    const std::uint64_t end = std::min(n, begin + step);
    threads.emplace_back([&body, begin, end, w] { body(begin, end, w); });
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_grid < 1) {
    throw ConfigError("n_grid must be at least 1");
  }
  if (n_total < n_grid) {
    throw ConfigError("n_total must be at least n_grid");
  }
  if (k1 < 1 || k2 < 1) {
    throw ConfigError("k1 and k2 must be at least 1");
  }
}

std::uint64_t SigmaSequence::total() const {
  return std::accumulate(repetitions.begin(), repetitions.end(), std::uint64_t{0});
}

std::vector<Angle> SigmaSequence::expand() const {
  std::vector<Angle> out;
  out.reserve(total());
  for (std::size_t j = 0; j < values.size(); ++j) {
    out.insert(out.end(), repetitions[j], values[j]);
  }
  return out;
}

SigmaSequence generate_sigma_sequence(const ExperimentConfig& cfg) {
  SigmaSequence seq;
  if (cfg.sigma_mode == SigmaMode::Deterministic) {
    const std::uint64_t n = cfg.n_grid;
    const double step = kTwoPi / static_cast<double>(n);
    const std::uint64_t base = cfg.n_total / n;
    const std::uint64_t extra = cfg.n_total % n;
    seq.values.reserve(n);
    seq.repetitions.reserve(n);
    for (std::uint64_t j = 1; j <= n; ++j) {
      seq.values.emplace_back(step * static_cast<double>(j));
      seq.repetitions.push_back(base + (j <= extra ? 1 : 0));
    }
  } else {
    const auto source = rng::StreamSet::from_master(cfg.seed).source;
    seq.values.reserve(cfg.n_total);
    for (std::uint64_t i = 0; i < cfg.n_total; ++i) {
      seq.values.emplace_back(kTwoPi * source.uniform(i));
    }
    seq.repetitions.assign(cfg.n_total, 1);
  }
  return seq;
}

double detection_probability(Angle sigma, Angle setting, Station station) {
  if (station == Station::Two) {
    return 1.0;
  }
  return std::abs(std::cos(sigma.rad() - setting.rad())) / 4.0;
}

Outcome direct_trial(Angle sigma, Angle setting, Station station, double draw) {
  if (draw <= detection_probability(sigma, setting, station)) {
    return outcome_from_sign(dynamics::observable(sigma, setting, station));
  }
  return Outcome::Empty;
}

std::vector<TrialRecord> run_direct(const ExperimentConfig& cfg, unsigned workers) {
  if (cfg.n_total == 0) {
    return {};
  }
  cfg.validate();
  const auto streams = rng::StreamSet::from_master(cfg.seed);
  const std::vector<Angle> sigmas = generate_sigma_sequence(cfg).expand();

  std::vector<TrialRecord> records(sigmas.size());
  for_chunks(records.size(), resolve_workers(workers, records.size()),
             [&](std::uint64_t begin, std::uint64_t end, unsigned) {
               for (std::uint64_t i = begin; i < end; ++i) {
                 TrialRecord& r = records[i];
                 r.index = i;
                 r.sigma = sigmas[i];
                 r.outcome_1 = direct_trial(r.sigma, cfg.a, Station::One, streams.station1.uniform(i));
                 r.outcome_2 = direct_trial(r.sigma, cfg.b, Station::Two, streams.station2.uniform(i));
                 r.coincidence = r.outcome_1 != Outcome::Empty && r.outcome_2 != Outcome::Empty;
               }
             });
  return records;
}

int old_hat_observable(Angle sigma, Angle setting, Station station, double draw) {
  if (station == Station::Two) {
    return dynamics::observable(sigma, setting, Station::Two);
  }
  const double threshold = (1.0 + std::cos(sigma.rad() - setting.rad()) / 4.0) / 2.0;
  return draw <= threshold ? 1 : -1;
}

OldResult run_old(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  const auto streams = rng::StreamSet::from_master(cfg.seed);
  const std::vector<Angle> sigmas = generate_sigma_sequence(cfg).expand();
  const std::uint64_t n = sigmas.size();
  const unsigned used = resolve_workers(workers, n);

  // Integer accumulation keeps the result independent of the chunking.
  std::vector<std::int64_t> partial(used, 0);
  for_chunks(n, used, [&](std::uint64_t begin, std::uint64_t end, unsigned chunk) {
    std::int64_t acc = 0;
    for (std::uint64_t j = begin; j < end; ++j) {
      std::int64_t s1 = 0;
      for (std::uint64_t k = 0; k < cfg.k1; ++k) {
        s1 += old_hat_observable(sigmas[j], cfg.a, Station::One, streams.station1.uniform(j, k));
      }
      std::int64_t s2 = 0;
      for (std::uint64_t k = 0; k < cfg.k2; ++k) {
        s2 += old_hat_observable(sigmas[j], cfg.b, Station::Two, streams.station2.uniform(j, k));
      }
      acc += s1 * s2;
    }
    partial[chunk] = acc;
  });
  const std::int64_t total = std::accumulate(partial.begin(), partial.end(), std::int64_t{0});

  OldResult out;
  out.raw_mean = static_cast<double>(total) /
                 (static_cast<double>(cfg.k1) * static_cast<double>(cfg.k2) * static_cast<double>(n));
  out.scaled_mean = kTwoPi * out.raw_mean;
  return out;
}

}  // namespace chameleon
