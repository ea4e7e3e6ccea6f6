#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "chameleon/angle.hpp"
#include "chameleon/protocols.hpp"

namespace chameleon::netsim {

enum class MessageKind { Config, Trial, Reply, Done, Result };

/// Protocol message. Only the fields of its kind are meaningful:
///   Config: setting, seed      (C -> station)
///   Trial:  index, sigma       (C -> station)
///   Reply:  index, outcome     (station -> C)
///   Done:   -                  (both ways)
///   Result: payload            (emitted by C)
struct Message {
  MessageKind kind = MessageKind::Done;
  std::uint64_t index = 0;
  Angle sigma;
  Outcome outcome = Outcome::Empty;
  Angle setting;
  std::uint64_t seed = 0;
  nlohmann::ordered_json payload;

  static Message config(Angle setting, std::uint64_t seed);
  static Message trial(std::uint64_t index, Angle sigma);
  static Message reply(std::uint64_t index, Outcome outcome);
  static Message done();
  static Message result(nlohmann::ordered_json payload);
};

/// Angles travel as decimals with 17 significant digits.
std::string format_wire_angle(double radians);

const char* outcome_token(Outcome o);  // "+1", "-1", "empty"

/// UTF-8 JSON object body with fixed key order.
std::string encode_body(const Message& m);

/// Strict decode: unknown kinds, missing or extra keys throw ProtocolError.
Message decode_body(std::string_view body);

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 20;

/// 4-byte big-endian length followed by the body.
std::string encode_frame(std::string_view body);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  /// Throws TransportError if a header announces more than kMaxFrameBytes.
  void feed(std::string_view bytes);
  std::optional<std::string> next();
  /// Bytes of an incomplete frame still buffered.
  [[nodiscard]] std::size_t pending() const { return buffer_.size(); }

 private:
  std::string buffer_;
  std::deque<std::string> ready_;
};

}  // namespace chameleon::netsim
