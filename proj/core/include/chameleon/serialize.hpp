#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "chameleon/analysis.hpp"
#include "chameleon/contextual.hpp"

namespace chameleon {

/// Shortest round-trip decimal form of a double, as used in every JSON output.
std::string format_double(double value);

/// {"correlation", "n_coincidences", "n_trials", "sum_products", "std_error"}.
nlohmann::ordered_json to_json(const analysis::CorrelationReport& r);
analysis::CorrelationReport report_from_json(const nlohmann::ordered_json& j);

/// {"a", "b", "c", "e_ab", "e_cb", "e_ac", "bell_quantity", "bound", ...}.
nlohmann::ordered_json to_json(const analysis::BellReport& r);

/// One NDJSON line of a contextual batch: seed, omega_size, triple, quantity, holds.
nlohmann::ordered_json to_json(const contextual::BatchLine& line);

/// {"radians", "degrees"}.
nlohmann::ordered_json angle_json(Angle a);

/// Compact serialization with fixed key order.
std::string dump(const nlohmann::ordered_json& j);

const char* to_string(analysis::LossVerdict v);

}  // namespace chameleon
