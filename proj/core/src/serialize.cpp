#include "chameleon/serialize.hpp"

#include <fmt/format.h>

namespace chameleon {

std::string format_double(double value) { return fmt::format("{}", value); }

nlohmann::ordered_json to_json(const analysis::CorrelationReport& r) {
  nlohmann::ordered_json j;
  j["correlation"] = r.correlation;
  j["n_coincidences"] = r.n_coincidences;
  j["n_trials"] = r.n_trials;
  j["sum_products"] = r.sum_products;
  j["std_error"] = r.std_error;
  return j;
}

analysis::CorrelationReport report_from_json(const nlohmann::ordered_json& j) {
  analysis::CorrelationReport r;
  r.correlation = j.at("correlation").get<double>();
  r.n_coincidences = j.at("n_coincidences").get<std::uint64_t>();
  r.n_trials = j.at("n_trials").get<std::uint64_t>();
  r.sum_products = j.at("sum_products").get<double>();
  r.std_error = j.at("std_error").get<double>();
  return r;
}

nlohmann::ordered_json angle_json(Angle a) {
  nlohmann::ordered_json j;
  j["radians"] = a.rad();
  j["degrees"] = a.deg();
  return j;
}

nlohmann::ordered_json to_json(const analysis::BellReport& r) {
  nlohmann::ordered_json j;
  j["a"] = angle_json(r.a);
  j["b"] = angle_json(r.b);
  j["c"] = angle_json(r.c);
  j["e_ab"] = r.e_ab;
  j["e_cb"] = r.e_cb;
  j["e_ac"] = r.e_ac;
  j["bell_quantity"] = r.bell_quantity;
  j["bound"] = r.bound;
  j["pooled_coincidence_fraction"] = r.pooled_coincidence_fraction;
  j["propagated_std_error"] = r.propagated_std_error;
  j["sessions"] = {{"ab", to_json(r.ab)}, {"cb", to_json(r.cb)}, {"ac", to_json(r.ac)}};
  return j;
}

nlohmann::ordered_json to_json(const contextual::BatchLine& line) {
  nlohmann::ordered_json j;
  j["seed"] = line.seed;
  j["omega_size"] = line.omega_size;
  j["triple"] = {line.triple[0], line.triple[1], line.triple[2]};
  j["quantity"] = line.quantity;
  j["holds"] = line.holds;
  return j;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(); }

const char* to_string(analysis::LossVerdict v) {
  switch (v) {
    case analysis::LossVerdict::ChameleonLike:
      return "chameleon-like";
    case analysis::LossVerdict::InefficiencyLike:
      return "inefficiency-like";
    case analysis::LossVerdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace chameleon
