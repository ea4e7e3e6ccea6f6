#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "chameleon/analysis.hpp"
#include "chameleon/netsim/errors.hpp"
#include "chameleon/netsim/message.hpp"
#include "chameleon/netsim/transcript.hpp"
#include "chameleon/netsim/transport.hpp"
#include "chameleon/protocols.hpp"

namespace chameleon::netsim {

enum class RoleKind { Central, StationA, StationB };

/// A station knows its own setting and nothing else; Central knows neither.
struct Role {
  RoleKind kind = RoleKind::Central;
  std::optional<Angle> setting;
};

struct StationOptions {
  /// If set, a Config carrying any other setting makes the station hang up.
  std::optional<Angle> expected_setting;
  /// Fault injection: hang up after replying to this many trials.
  std::optional<std::uint64_t> fail_after_trials;
  /// Artificial latency before every reply.
  std::chrono::microseconds reply_delay{0};
};

/// Request/response loop of one measurement station. Returns after acknowledging
/// Done or when the link closes; hangs up on any malformed or unexpected frame.
void serve_station(Link& link, RoleKind role, const StationOptions& options = {});

enum class TransportKind { InProcess, Tcp };

struct SessionOptions {
  TransportKind transport = TransportKind::InProcess;
  /// Remote stations for Tcp; when absent, loopback stations run in this process.
  std::optional<Endpoint> station_a;
  std::optional<Endpoint> station_b;
  /// Options for stations started by the session itself.
  StationOptions station_a_options;
  StationOptions station_b_options;
  /// Maximum outstanding Trial messages per station.
  std::size_t window = 1024;
};

struct SessionResult {
  analysis::CorrelationReport report;
  Transcript transcript;
  std::vector<TrialRecord> records;
};

/// Central streams trials to both stations, matches replies by index and conditions
/// on coincidences. The report equals estimate_correlation(run_direct(cfg)).
/// Throws TransportError / ProtocolError carrying the partial transcript.
SessionResult run_session(const ExperimentConfig& cfg, const SessionOptions& options = {});

/// Settings announced in the Config frames of each link, read from the transcript.
bool verify_locality(const Transcript& transcript);

/// Same audit against known settings: no frame on C<->A encodes b, none on C<->B
/// encodes a, and every frame matches its kind's exact schema.
bool verify_locality(const Transcript& transcript, Angle a, Angle b);

/// Recomputes the report from captured Reply frames only.
analysis::CorrelationReport replay(const Transcript& transcript);

}  // namespace chameleon::netsim
