#include "chameleon/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chameleon/error.hpp"
#include "chameleon/rng.hpp"

namespace chameleon::contextual {

namespace {

void check_entries(const std::vector<std::vector<double>>& f, std::size_t settings, std::size_t omega) {
  if (f.size() != settings) {
    throw DomainError("one observable per setting is required");
  }
  for (const auto& v : f) {
    if (v.size() != omega) {
      throw DomainError("observable size must match the state space");
    }
    for (double x : v) {
      if (!(x >= -1.0 && x <= 1.0)) {
        throw DomainError("effective observables must take values in [-1, 1]");
      }
    }
  }
}

}  // namespace

ContextualModel::ContextualModel(std::vector<double> base_state, std::vector<Angle> settings,
                                 std::vector<std::vector<double>> f1, std::vector<std::vector<double>> f2)
    : base_state_(std::move(base_state)), settings_(std::move(settings)), f1_(std::move(f1)), f2_(std::move(f2)) {
  if (base_state_.empty()) {
    throw DomainError("state space must be non-empty");
  }
  double total = 0.0;
  for (double p : base_state_) {
    if (!(p >= 0.0)) {
      throw DomainError("base state entries must be non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("base state must sum to 1");
  }
  check_entries(f1_, settings_.size(), base_state_.size());
  check_entries(f2_, settings_.size(), base_state_.size());
}

std::span<const double> ContextualModel::f1(std::size_t setting) const {
  if (setting >= f1_.size()) {
    throw UnknownSetting("setting index out of range");
  }
  return f1_[setting];
}

std::span<const double> ContextualModel::f2(std::size_t setting) const {
  if (setting >= f2_.size()) {
    throw UnknownSetting("setting index out of range");
  }
  return f2_[setting];
}

std::size_t ContextualModel::setting_index(Angle angle) const {
  for (std::size_t i = 0; i < settings_.size(); ++i) {
    const double d = std::abs(settings_[i].rad() - angle.rad());
    if (std::min(d, kTwoPi - d) <= 1e-12) {
      return i;
    }
  }
  throw UnknownSetting("angle is not one of the model's settings");
}

bool SingletConstraint::satisfied_by(const ContextualModel& m) const {
  const auto psi = m.base_state();
  for (std::size_t c = 0; c < m.n_settings(); ++c) {
    const auto f1 = m.f1(c);
    const auto f2 = m.f2(c);
    for (std::size_t w = 0; w < m.omega_size(); ++w) {
      if (psi[w] > 0.0 && std::abs(f1[w] + f2[w]) > tolerance) {
        return false;
      }
    }
  }
  return true;
}

double model_correlation(const ContextualModel& m, std::size_t a, std::size_t b) {
  const auto psi = m.base_state();
  const auto f1 = m.f1(a);
  const auto f2 = m.f2(b);
  double sum = 0.0;
  for (std::size_t w = 0; w < psi.size(); ++w) {
    sum += psi[w] * f1[w] * f2[w];
  }
  return sum;
}

ContextualModel generate_singlet_model(std::size_t omega_size, std::size_t n_settings, std::uint64_t seed) {
  if (omega_size < 2) {
    throw DomainError("omega_size must be at least 2");
  }
  if (n_settings < 3) {
    throw DomainError("at least 3 settings are required");
  }
  const auto state_stream = rng::CounterStream::derive(seed, "contextual/state");
  const auto f_stream = rng::CounterStream::derive(seed, "contextual/observables");

  // Dirichlet(1): normalized unit exponentials.
  std::vector<double> psi(omega_size);
  double total = 0.0;
  for (std::size_t w = 0; w < omega_size; ++w) {
    psi[w] = -std::log1p(-state_stream.uniform(w));
    total += psi[w];
  }
  for (double& p : psi) {
    p /= total;
  }

  std::vector<Angle> settings;
  std::vector<std::vector<double>> f1(n_settings, std::vector<double>(omega_size));
  std::vector<std::vector<double>> f2(n_settings, std::vector<double>(omega_size));
  for (std::size_t c = 0; c < n_settings; ++c) {
    settings.emplace_back(kTwoPi * static_cast<double>(c) / static_cast<double>(n_settings));
    for (std::size_t w = 0; w < omega_size; ++w) {
      f1[c][w] = 2.0 * f_stream.uniform(c, w) - 1.0;
      f2[c][w] = -f1[c][w];
    }
  }
  return ContextualModel(std::move(psi), std::move(settings), std::move(f1), std::move(f2));
}

BellCheck check_bell(const ContextualModel& m, std::size_t a, std::size_t b, std::size_t c) {
  if (!SingletConstraint{1e-12}.satisfied_by(m)) {
    throw SingletViolated("model does not satisfy f1 = -f2 on the support of its state");
  }
  BellCheck out;
  out.quantity = std::abs(model_correlation(m, a, b) - model_correlation(m, c, b)) - model_correlation(m, a, c);
  out.holds = out.quantity <= 1.0 + kBellTolerance;
  return out;
}

double nearest_epr_gap(const ContextualModel& m, std::span<const Angle> settings) {
  if (settings.size() < 3) {
    throw DomainError("nearest_epr_gap needs at least 3 settings");
  }
  std::vector<std::size_t> idx;
  for (Angle s : settings) {
    idx.push_back(m.setting_index(s));
  }
  double bell_excess = 0.0;
  double epr_distance = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const double target = -std::cos(settings[i].rad() - settings[j].rad());
      epr_distance = std::max(epr_distance, std::abs(model_correlation(m, idx[i], idx[j]) - target));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double q = std::abs(model_correlation(m, idx[i], idx[j]) - model_correlation(m, idx[k], idx[j])) -
                         model_correlation(m, idx[i], idx[k]);
        bell_excess = std::max(bell_excess, q - 1.0);
      }
    }
  }
  return bell_excess + epr_distance;
}

bool matches_epr_triple(const ContextualModel& m, Angle a, Angle b, Angle c, double eps) {
  const std::size_t ia = m.setting_index(a);
  const std::size_t ib = m.setting_index(b);
  const std::size_t ic = m.setting_index(c);
  const auto close = [eps](double got, Angle x, Angle y) {
    return std::abs(got + std::cos(x.rad() - y.rad())) <= eps;
  };
  return close(model_correlation(m, ia, ib), a, b) && close(model_correlation(m, ic, ib), c, b) &&
         close(model_correlation(m, ia, ic), a, c);
}

std::uint64_t batch_model_seed(std::uint64_t master, std::size_t i) {
  return rng::CounterStream::derive(master, "contextual/batch").bits(i);
}

BatchSummary run_batch(const BatchOptions& opts) {
  if (opts.models == 0) {
    throw ConfigError("model count must be positive");
  }
  if (opts.omega_min < 2 || opts.omega_max < opts.omega_min) {
    throw ConfigError("omega range must satisfy 2 <= omega_min <= omega_max");
  }
  if (opts.n_settings < 3) {
    throw ConfigError("at least 3 settings are required");
  }
  const auto sizes = rng::CounterStream::derive(opts.seed, "contextual/omega");
  const std::size_t span = opts.omega_max - opts.omega_min + 1;

  BatchSummary summary;
  summary.models = opts.models;
  summary.worst_quantity = -std::numeric_limits<double>::infinity();
  summary.lines.reserve(opts.models);
  for (std::size_t i = 0; i < opts.models; ++i) {
    const std::uint64_t seed = batch_model_seed(opts.seed, i);
    const std::size_t omega = opts.omega_min + static_cast<std::size_t>(sizes.bits(i) % span);
    const ContextualModel m = generate_singlet_model(omega, opts.n_settings, seed);

    BatchLine worst{seed, omega, {0, 0, 0}, -std::numeric_limits<double>::infinity(), true};
    for (std::size_t a = 0; a < opts.n_settings; ++a) {
      for (std::size_t b = 0; b < opts.n_settings; ++b) {
        for (std::size_t c = 0; c < opts.n_settings; ++c) {
          const BellCheck check = check_bell(m, a, b, c);
          ++summary.checks;
          if (!check.holds) {
            ++summary.violations;
          }
          if (check.quantity > worst.quantity) {
            worst.triple[0] = a;
            worst.triple[1] = b;
            worst.triple[2] = c;
            worst.quantity = check.quantity;
            worst.holds = check.holds;
          }
        }
      }
    }
    if (summary.epr_checked) {
      try {
        if (matches_epr_triple(m, opts.epr_a, opts.epr_b, opts.epr_c, opts.epr_eps)) {
          ++summary.epr_matches;
        }
      } catch (const UnknownSetting&) {
        // Grid does not contain the EPR triple.
        summary.epr_checked = false;
      }
    }
    summary.worst_quantity = std::max(summary.worst_quantity, worst.quantity);
    summary.lines.push_back(worst);
  }
  return summary;
}

}  // namespace chameleon::contextual
