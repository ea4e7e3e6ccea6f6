#include "chameleon/netsim/session.hpp"

#include <map>
#include <thread>

#include <fmt/format.h>

#include "chameleon/error.hpp"
#include "chameleon/rng.hpp"
#include "chameleon/serialize.hpp"

namespace chameleon::netsim {

namespace {

constexpr std::int8_t kUnset = 2;

struct Peer {
  LinkId id;
  std::unique_ptr<Link> link;
};

void send(Peer& peer, Transcript& transcript, const Message& m) {
  std::string body = encode_body(m);
  transcript.record(peer.id, Direction::ToStation, body);
  peer.link->send(body);
}

Message receive(Peer& peer, Transcript& transcript) {
  auto body = peer.link->receive();
  if (!body) {
    throw TransportError(fmt::format("station {} closed the connection", to_string(peer.id)));
  }
  transcript.record(peer.id, Direction::ToCentral, *body);
  return decode_body(*body);
}

// Byte-level scan: does `token` appear in `body` as a complete JSON value?
bool contains_value_token(std::string_view body, std::string_view token) {
  std::size_t pos = 0;
  while ((pos = body.find(token, pos)) != std::string_view::npos) {
    const char before = pos == 0 ? ' ' : body[pos - 1];
    const std::size_t after_pos = pos + token.size();
    const char after = after_pos >= body.size() ? ' ' : body[after_pos];
    const bool left = before == ':' || before == ',' || before == '[' || before == ' ' || before == '"';
    const bool right = after == ',' || after == '}' || after == ']' || after == ' ' || after == '"';
    if (left && right) {
      return true;
    }
    ++pos;
  }
  return false;
}

// Blanks the values of the per-trial fields; sigma is drawn settings-blind and may
// coincide numerically with a setting on a deterministic grid.
std::string mask_trial_fields(std::string body) {
  for (std::string_view key : {std::string_view(R"("index":)"), std::string_view(R"("sigma":)")}) {
    const std::size_t k = body.find(key);
    if (k == std::string::npos) {
      continue;
    }
    const std::size_t start = k + key.size();
    std::size_t end = body.find_first_of(",}", start);
    if (end == std::string::npos) {
      end = body.size();
    }
    body.erase(start, end - start);
  }
  return body;
}

bool audit(const Transcript& transcript, std::optional<Angle> a, std::optional<Angle> b) {
  for (const Capture& c : transcript.entries()) {
    if (c.link == LinkId::Central) {
      if (c.direction != Direction::Emit) {
        return false;
      }
      continue;
    }
    Message m;
    try {
      m = decode_body(c.body);
    } catch (const Error&) {
      return false;
    }
    const bool downstream = c.direction == Direction::ToStation;
    const bool allowed =
        downstream ? (m.kind == MessageKind::Config || m.kind == MessageKind::Trial || m.kind == MessageKind::Done)
                   : (c.direction == Direction::ToCentral && (m.kind == MessageKind::Reply || m.kind == MessageKind::Done));
    if (!allowed) {
      return false;
    }
    const std::optional<Angle> own = c.link == LinkId::A ? a : b;
    const std::optional<Angle> foreign = c.link == LinkId::A ? b : a;
    if (m.kind == MessageKind::Config && own && m.setting != *own) {
      return false;
    }
    if (!foreign) {
      continue;
    }
    const std::string token = format_wire_angle(foreign->rad());
    if (own && format_wire_angle(own->rad()) == token) {
      continue;  // identical settings carry no information about each other
    }
    if (contains_value_token(mask_trial_fields(c.body), token)) {
      return false;
    }
  }
  return true;
}

}  // namespace

SessionResult run_session(const ExperimentConfig& cfg, const SessionOptions& options) {
  if (cfg.protocol != ProtocolKind::Direct) {
    throw ConfigError("network sessions run the direct protocol only");
  }
  cfg.validate();
  if (options.window == 0) {
    throw ConfigError("window must be positive");
  }

  // Declared before the links so the links close (and unblock the stations) first.
  std::vector<std::jthread> stations;
  Transcript transcript;
  Peer a{LinkId::A, nullptr};
  Peer b{LinkId::B, nullptr};

  const auto local_station = [&](RoleKind role, const StationOptions& station_options) -> std::unique_ptr<Link> {
    if (options.transport == TransportKind::InProcess) {
      auto [central_end, station_end] = make_in_process_link();
      stations.emplace_back([link = std::move(station_end), role, station_options]() mutable {
        serve_station(*link, role, station_options);
      });
      return std::move(central_end);
    }
    TcpListener listener(Endpoint{"127.0.0.1", 0});
    const Endpoint where = listener.local();
    stations.emplace_back([listener = std::move(listener), role, station_options]() mutable {
      try {
        auto link = listener.accept();
        serve_station(*link, role, station_options);
      } catch (const Error&) {
      }
    });
    return tcp_connect(where);
  };

  try {
    if (options.transport == TransportKind::Tcp && options.station_a) {
      a.link = tcp_connect(*options.station_a);
    } else {
      a.link = local_station(RoleKind::StationA, options.station_a_options);
    }
    if (options.transport == TransportKind::Tcp && options.station_b) {
      b.link = tcp_connect(*options.station_b);
    } else {
      b.link = local_station(RoleKind::StationB, options.station_b_options);
    }

    const auto streams = rng::StreamSet::from_master(cfg.seed);
    send(a, transcript, Message::config(cfg.a, streams.station1.key()));
    send(b, transcript, Message::config(cfg.b, streams.station2.key()));

    // Sigma generation never sees the settings.
    const std::vector<Angle> sigmas = generate_sigma_sequence(cfg).expand();
    const std::uint64_t n = sigmas.size();
    std::vector<std::int8_t> out_a(n, kUnset);
    std::vector<std::int8_t> out_b(n, kUnset);

    for (std::uint64_t begin = 0; begin < n; begin += options.window) {
      const std::uint64_t end = std::min<std::uint64_t>(n, begin + options.window);
      for (Peer* peer : {&a, &b}) {
        for (std::uint64_t i = begin; i < end; ++i) {
          send(*peer, transcript, Message::trial(i, sigmas[i]));
        }
      }
      for (auto [peer, outcomes] : {std::pair{&a, &out_a}, std::pair{&b, &out_b}}) {
        for (std::uint64_t k = begin; k < end; ++k) {
          const Message m = receive(*peer, transcript);
          if (m.kind != MessageKind::Reply) {
            throw ProtocolError(fmt::format("expected a reply from station {}", to_string(peer->id)));
          }
          if (m.index < begin || m.index >= end) {
            throw ProtocolError(fmt::format("reply for unknown trial {} from station {}", m.index, to_string(peer->id)));
          }
          std::int8_t& slot = (*outcomes)[m.index];
          if (slot != kUnset) {
            throw ProtocolError(fmt::format("duplicate reply for trial {} from station {}", m.index, to_string(peer->id)));
          }
          slot = static_cast<std::int8_t>(m.outcome);
        }
      }
    }

    for (Peer* peer : {&a, &b}) {
      send(*peer, transcript, Message::done());
    }
    for (Peer* peer : {&a, &b}) {
      if (receive(*peer, transcript).kind != MessageKind::Done) {
        throw ProtocolError(fmt::format("station {} did not acknowledge done", to_string(peer->id)));
      }
    }

    SessionResult result;
    result.records.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      TrialRecord& r = result.records[i];
      r.index = i;
      r.sigma = sigmas[i];
      r.outcome_1 = static_cast<Outcome>(out_a[i]);
      r.outcome_2 = static_cast<Outcome>(out_b[i]);
      r.coincidence = r.outcome_1 != Outcome::Empty && r.outcome_2 != Outcome::Empty;
    }
    result.report = analysis::estimate_correlation(result.records);
    transcript.record(LinkId::Central, Direction::Emit, encode_body(Message::result(to_json(result.report))));
    result.transcript = std::move(transcript);
    return result;
  } catch (const TransportError& e) {
    throw TransportError(e.what(), std::move(transcript));
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.what(), std::move(transcript));
  }
}

bool verify_locality(const Transcript& transcript) {
  std::optional<Angle> a;
  std::optional<Angle> b;
  for (const Capture& c : transcript.entries()) {
    if (c.link == LinkId::Central || c.direction != Direction::ToStation) {
      continue;
    }
    Message m;
    try {
      m = decode_body(c.body);
    } catch (const Error&) {
      return false;
    }
    if (m.kind != MessageKind::Config) {
      continue;
    }
    std::optional<Angle>& slot = c.link == LinkId::A ? a : b;
    if (slot && *slot != m.setting) {
      return false;
    }
    slot = m.setting;
  }
  return audit(transcript, a, b);
}

bool verify_locality(const Transcript& transcript, Angle a, Angle b) { return audit(transcript, a, b); }

analysis::CorrelationReport replay(const Transcript& transcript) {
  std::map<std::uint64_t, Outcome> replies_a;
  std::map<std::uint64_t, Outcome> replies_b;
  for (const Capture& c : transcript.entries()) {
    if (c.direction != Direction::ToCentral) {
      continue;
    }
    const Message m = decode_body(c.body);
    if (m.kind != MessageKind::Reply) {
      continue;
    }
    auto& replies = c.link == LinkId::A ? replies_a : replies_b;
    if (!replies.emplace(m.index, m.outcome).second) {
      throw ProtocolError(fmt::format("duplicate reply for trial {} on link {}", m.index, to_string(c.link)));
    }
  }

  std::int64_t sum = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t trials = 0;
  const auto pair_outcome = [](const auto& replies, std::uint64_t index, LinkId link) {
    const auto it = replies.find(index);
    if (it == replies.end()) {
      throw ProtocolError(fmt::format("trial {} has no reply on link {}", index, to_string(link)));
    }
    return it->second;
  };
  for (const auto& [index, o1] : replies_a) {
    const Outcome o2 = pair_outcome(replies_b, index, LinkId::B);
    ++trials;
    if (o1 != Outcome::Empty && o2 != Outcome::Empty) {
      ++coincidences;
      sum += outcome_value(o1) * outcome_value(o2);
    }
  }
  for (const auto& [index, o2] : replies_b) {
    pair_outcome(replies_a, index, LinkId::A);
  }
  return analysis::make_report(sum, coincidences, trials);
}

}  // namespace chameleon::netsim
