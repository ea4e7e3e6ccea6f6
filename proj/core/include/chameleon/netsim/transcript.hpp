#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chameleon::netsim {

/// C <-> A, C <-> B, and Central's own emitted records (the Result frame).
enum class LinkId { A, B, Central };

enum class Direction { ToStation, ToCentral, Emit };

/// One captured frame body (the JSON text, without the length prefix).
struct Capture {
  LinkId link = LinkId::A;
  Direction direction = Direction::ToStation;
  std::string body;

  friend bool operator==(const Capture&, const Capture&) = default;
};

class Transcript {
 public:
  void record(LinkId link, Direction direction, std::string body);

  [[nodiscard]] std::span<const Capture> entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  std::vector<Capture>& mutable_entries() { return entries_; }

  /// One JSON object per line: {"link":"A","direction":"to_station","frame":"..."}.
  [[nodiscard]] std::string to_ndjson() const;
  /// Throws ProtocolError on malformed lines.
  static Transcript from_ndjson(std::string_view text);

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<Capture> entries_;
};

const char* to_string(LinkId link);
const char* to_string(Direction direction);

}  // namespace chameleon::netsim
