#include "chameleon/netsim/message.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "chameleon/netsim/errors.hpp"

namespace chameleon::netsim {

namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& j, std::initializer_list<const char*> keys) {
  if (j.size() != keys.size()) {
    throw ProtocolError(fmt::format("unexpected field set in '{}' message", j.value("kind", "?")));
  }
  for (const char* k : keys) {
    if (!j.contains(k)) {
      throw ProtocolError(fmt::format("missing field '{}'", k));
    }
  }
}

std::uint64_t read_index(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ProtocolError(fmt::format("field '{}' must be an unsigned integer", key));
  }
  return v.get<std::uint64_t>();
}

Angle read_angle(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_number()) {
    throw ProtocolError(fmt::format("field '{}' must be a number", key));
  }
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < 0.0 || x >= kTwoPi) {
    throw ProtocolError(fmt::format("field '{}' is not an angle in [0, 2pi)", key));
  }
  return Angle(x);
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) {
    return false;
  }
  s.remove_prefix(prefix.size());
  return true;
}

bool consume_uint(std::string_view& s, std::uint64_t& value) {
  if (s.empty() || s[0] < '0' || s[0] > '9' || (s[0] == '0' && s.size() > 1 && s[1] >= '0' && s[1] <= '9')) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc()) {
    return false;
  }
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

bool consume_angle(std::string_view& s, Angle& value) {
  // JSON numbers never start with '+' or '.', which from_chars would not reject.
  if (s.empty() || !(s[0] == '-' || (s[0] >= '0' && s[0] <= '9'))) {
    return false;
  }
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || !std::isfinite(x) || x < 0.0 || x >= kTwoPi) {
    return false;
  }
  value = Angle(x);
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

// Exact canonical encodings of the per-trial messages, as produced by encode_body.
std::optional<Message> decode_canonical(std::string_view s) {
  Message m;
  if (consume(s, R"({"kind":"reply","index":)")) {
    if (!consume_uint(s, m.index) || !consume(s, R"(,"outcome":")")) {
      return std::nullopt;
    }
    if (consume(s, "+1")) {
      m.outcome = Outcome::Plus;
    } else if (consume(s, "-1")) {
      m.outcome = Outcome::Minus;
    } else if (consume(s, "empty")) {
      m.outcome = Outcome::Empty;
    } else {
      return std::nullopt;
    }
    if (s != R"("})") {
      return std::nullopt;
    }
    m.kind = MessageKind::Reply;
    return m;
  }
  if (consume(s, R"({"kind":"trial","index":)")) {
    if (!consume_uint(s, m.index) || !consume(s, R"(,"sigma":)") || !consume_angle(s, m.sigma) || s != "}") {
      return std::nullopt;
    }
    m.kind = MessageKind::Trial;
    return m;
  }
  return std::nullopt;
}

}  // namespace

Message Message::config(Angle setting, std::uint64_t seed) {
  Message m;
  m.kind = MessageKind::Config;
  m.setting = setting;
  m.seed = seed;
  return m;
}

Message Message::trial(std::uint64_t index, Angle sigma) {
  Message m;
  m.kind = MessageKind::Trial;
  m.index = index;
  m.sigma = sigma;
  return m;
}

Message Message::reply(std::uint64_t index, Outcome outcome) {
  Message m;
  m.kind = MessageKind::Reply;
  m.index = index;
  m.outcome = outcome;
  return m;
}

Message Message::done() { return Message{}; }

Message Message::result(nlohmann::ordered_json payload) {
  Message m;
  m.kind = MessageKind::Result;
  m.payload = std::move(payload);
  return m;
}

std::string format_wire_angle(double radians) { return fmt::format("{:.17g}", radians); }

const char* outcome_token(Outcome o) {
  switch (o) {
    case Outcome::Plus:
      return "+1";
    case Outcome::Minus:
      return "-1";
    case Outcome::Empty:
      return "empty";
  }
  return "empty";
}

std::string encode_body(const Message& m) {
  switch (m.kind) {
    case MessageKind::Config:
      return fmt::format(R"({{"kind":"config","setting":{},"seed":{}}})", format_wire_angle(m.setting.rad()), m.seed);
    case MessageKind::Trial:
      return fmt::format(R"({{"kind":"trial","index":{},"sigma":{}}})", m.index, format_wire_angle(m.sigma.rad()));
    case MessageKind::Reply:
      return fmt::format(R"({{"kind":"reply","index":{},"outcome":"{}"}})", m.index, outcome_token(m.outcome));
    case MessageKind::Done:
      return R"({"kind":"done"})";
    case MessageKind::Result:
      return fmt::format(R"({{"kind":"result","payload":{}}})", m.payload.dump());
  }
  return R"({"kind":"done"})";
}

Message decode_body(std::string_view body) {
  if (auto fast = decode_canonical(body)) {
    return *fast;
  }
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(fmt::format("frame is not valid JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ProtocolError("frame must be a JSON object with a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "config") {
    require_keys(j, {"kind", "setting", "seed"});
    return Message::config(read_angle(j, "setting"), read_index(j, "seed"));
  }
  if (kind == "trial") {
    require_keys(j, {"kind", "index", "sigma"});
    return Message::trial(read_index(j, "index"), read_angle(j, "sigma"));
  }
  if (kind == "reply") {
    require_keys(j, {"kind", "index", "outcome"});
    const Json& o = j["outcome"];
    if (!o.is_string()) {
      throw ProtocolError("reply outcome must be a string");
    }
    const std::string token = o.get<std::string>();
    Outcome outcome;
    if (token == "+1") {
      outcome = Outcome::Plus;
    } else if (token == "-1") {
      outcome = Outcome::Minus;
    } else if (token == "empty") {
      outcome = Outcome::Empty;
    } else {
      throw ProtocolError(fmt::format("unknown outcome '{}'", token));
    }
    return Message::reply(read_index(j, "index"), outcome);
  }
  if (kind == "done") {
    require_keys(j, {"kind"});
    return Message::done();
  }
  if (kind == "result") {
    require_keys(j, {"kind", "payload"});
    return Message::result(j["payload"]);
  }
  throw ProtocolError(fmt::format("unknown message kind '{}'", kind));
}

std::string encode_frame(std::string_view body) {
  if (body.size() > kMaxFrameBytes) {
    throw TransportError("frame body exceeds the maximum frame size");
  }
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(kFrameHeaderBytes + body.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(body);
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::size_t pos = 0;
  while (buffer_.size() - pos >= kFrameHeaderBytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + pos);
    const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
                            std::uint32_t{p[3]};
    if (n > kMaxFrameBytes) {
      throw TransportError(fmt::format("framing violation: announced length {} exceeds limit", n));
    }
    if (buffer_.size() - pos - kFrameHeaderBytes < n) {
      break;
    }
    ready_.emplace_back(buffer_.substr(pos + kFrameHeaderBytes, n));
    pos += kFrameHeaderBytes + n;
  }
  buffer_.erase(0, pos);
}

std::optional<std::string> FrameDecoder::next() {
  if (ready_.empty()) {
    return std::nullopt;
  }
  std::string out = std::move(ready_.front());
  ready_.pop_front();
  return out;
}

}  // namespace chameleon::netsim
