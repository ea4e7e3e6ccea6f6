#include "chameleon/netsim/transcript.hpp"

#include <nlohmann/json.hpp>

#include "chameleon/netsim/errors.hpp"

namespace chameleon::netsim {

const char* to_string(LinkId link) {
  switch (link) {
    case LinkId::A:
      return "A";
    case LinkId::B:
      return "B";
    case LinkId::Central:
      return "C";
  }
  return "C";
}

const char* to_string(Direction direction) {
  switch (direction) {
    case Direction::ToStation:
      return "to_station";
    case Direction::ToCentral:
      return "to_central";
    case Direction::Emit:
      return "emit";
  }
  return "emit";
}

void Transcript::record(LinkId link, Direction direction, std::string body) {
  entries_.push_back(Capture{link, direction, std::move(body)});
}

std::string Transcript::to_ndjson() const {
  std::string out;
  for (const Capture& c : entries_) {
    nlohmann::ordered_json line;
    line["link"] = to_string(c.link);
    line["direction"] = to_string(c.direction);
    line["frame"] = c.body;
    out += line.dump();
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_ndjson(std::string_view text) {
  Transcript t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string link = j.at("link").get<std::string>();
      const std::string dir = j.at("direction").get<std::string>();
      Capture c;
      if (link == "A") {
        c.link = LinkId::A;
      } else if (link == "B") {
        c.link = LinkId::B;
      } else if (link == "C") {
        c.link = LinkId::Central;
      } else {
        throw ProtocolError("unknown link '" + link + "'");
      }
      if (dir == "to_station") {
        c.direction = Direction::ToStation;
      } else if (dir == "to_central") {
        c.direction = Direction::ToCentral;
      } else if (dir == "emit") {
        c.direction = Direction::Emit;
      } else {
        throw ProtocolError("unknown direction '" + dir + "'");
      }
      c.body = j.at("frame").get<std::string>();
      t.entries_.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

}  // namespace chameleon::netsim
