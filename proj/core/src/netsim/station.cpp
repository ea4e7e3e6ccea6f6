#include <thread>

#include "chameleon/error.hpp"
#include "chameleon/netsim/session.hpp"
#include "chameleon/rng.hpp"

namespace chameleon::netsim {

void serve_station(Link& link, RoleKind role, const StationOptions& options) {
  if (role == RoleKind::Central) {
    throw ConfigError("serve_station needs a station role");
  }
  const Station station = role == RoleKind::StationA ? Station::One : Station::Two;

  // The station's whole state: its own setting and its own random stream.
  std::optional<Angle> setting;
  rng::CounterStream stream;
  std::uint64_t replied = 0;

  try {
    while (auto body = link.receive()) {
      const Message m = decode_body(*body);
      switch (m.kind) {
        case MessageKind::Config:
          if (options.expected_setting && *options.expected_setting != m.setting) {
            link.close();
            return;
          }
          setting = m.setting;
          stream = rng::CounterStream(m.seed);
          break;
        case MessageKind::Trial: {
          if (!setting || (options.fail_after_trials && replied >= *options.fail_after_trials)) {
            link.close();
            return;
          }
          if (options.reply_delay.count() > 0) {
            std::this_thread::sleep_for(options.reply_delay);
          }
          const Outcome o = direct_trial(m.sigma, *setting, station, stream.uniform(m.index));
          link.send(encode_body(Message::reply(m.index, o)));
          ++replied;
          break;
        }
        case MessageKind::Done:
          link.send(encode_body(Message::done()));
          link.close();
          return;
        default:
          link.close();
          return;
      }
    }
  } catch (const Error&) {
    // Malformed input or a vanished peer: hang up, Central reports the failure.
  }
  link.close();
}

}  // namespace chameleon::netsim
