#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace chameleon::netsim {

/// One end of a bidirectional, ordered, framed channel.
class Link {
 public:
  virtual ~Link() = default;
  /// Sends one frame body. Throws TransportError if the peer is gone.
  virtual void send(std::string_view body) = 0;
  /// Next frame body; nullopt once the peer closed. Throws TransportError on a
  /// framing violation.
  virtual std::optional<std::string> receive() = 0;
  /// Idempotent. Unblocks a pending receive() on both ends.
  virtual void close() = 0;
};

/// Two connected in-process ends. Frames are length-prefixed exactly as on TCP.
std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_in_process_link();

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws ConfigError.
  static Endpoint parse(std::string_view text);
  [[nodiscard]] std::string str() const;
};

/// Listening TCP socket (IPv4).
class TcpListener {
 public:
  explicit TcpListener(const Endpoint& where);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;

  /// Actual bound address (port resolved when 0 was requested).
  [[nodiscard]] Endpoint local() const;
  std::unique_ptr<Link> accept();

 private:
  int fd_ = -1;
};

/// Connects, retrying until `timeout` elapses. Throws TransportError.
std::unique_ptr<Link> tcp_connect(const Endpoint& where,
                                  std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

}  // namespace chameleon::netsim
