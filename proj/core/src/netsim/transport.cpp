#include "chameleon/netsim/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "blocking_queue.hpp"
#include "chameleon/error.hpp"
#include "chameleon/netsim/errors.hpp"
#include "chameleon/netsim/message.hpp"

namespace chameleon::netsim {

namespace {

using FrameQueue = detail::BlockingQueue<std::string>;

// Strips the length prefix from a frame that went through an in-process queue.
std::string unframe(std::string&& frame) {
  if (frame.size() < kFrameHeaderBytes) {
    throw TransportError("framing violation on in-process link");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(frame.data());
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
                          std::uint32_t{p[3]};
  if (n > kMaxFrameBytes || frame.size() != kFrameHeaderBytes + n) {
    throw TransportError("framing violation on in-process link");
  }
  frame.erase(0, kFrameHeaderBytes);
  return std::move(frame);
}

class InProcessLink final : public Link {
 public:
  InProcessLink(std::shared_ptr<FrameQueue> inbox, std::shared_ptr<FrameQueue> outbox)
      : inbox_(std::move(inbox)), outbox_(std::move(outbox)) {}
  ~InProcessLink() override { close(); }

  void send(std::string_view body) override {
    if (!outbox_->push(encode_frame(body))) {
      throw TransportError("in-process peer has closed the link");
    }
  }

  std::optional<std::string> receive() override {
    auto frame = inbox_->pop();
    if (!frame) {
      return std::nullopt;
    }
    return unframe(std::move(*frame));
  }

  void close() override {
    // Closing either end tears down both directions, like a socket shutdown.
    // Frames already queued stay readable.
    inbox_->close();
    outbox_->close();
  }

 private:
  std::shared_ptr<FrameQueue> inbox_;
  std::shared_ptr<FrameQueue> outbox_;
};

std::string errno_text() { return std::strerror(errno); }

sockaddr_in to_sockaddr(const Endpoint& where) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(where.port);
  if (::inet_pton(AF_INET, where.host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError(fmt::format("not an IPv4 address: '{}'", where.host));
  }
  return addr;
}

// Socket link; a reader thread drains the socket into a queue so a slow consumer
// never stalls the peer's writes.
class TcpLink final : public Link {
 public:
  explicit TcpLink(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    reader_ = std::thread([this] { read_loop(); });
  }

  ~TcpLink() override {
    close();
    if (reader_.joinable()) {
      reader_.join();
    }
    ::close(fd_);
  }

  void send(std::string_view body) override {
    const std::string frame = encode_frame(body);
    std::lock_guard lock(write_mutex_);
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw TransportError(fmt::format("send failed: {}", errno_text()));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> receive() override {
    auto body = inbox_.pop();
    if (!body) {
      std::lock_guard lock(error_mutex_);
      if (read_error_) {
        std::rethrow_exception(read_error_);
      }
    }
    return body;
  }

  void close() override {
    std::call_once(shutdown_once_, [this] { ::shutdown(fd_, SHUT_RDWR); });
  }

 private:
  void read_loop() {
    FrameDecoder decoder;
    char buf[64 * 1024];
    try {
      for (;;) {
        const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0 && errno == EINTR) {
          continue;
        }
        if (n <= 0) {
          if (decoder.pending() != 0) {
            throw TransportError("connection closed inside a frame");
          }
          break;
        }
        decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
        while (auto body = decoder.next()) {
          inbox_.push(std::move(*body));
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex_);
      read_error_ = std::current_exception();
    }
    inbox_.close();
  }

  int fd_;
  std::thread reader_;
  FrameQueue inbox_;
  std::mutex write_mutex_;
  std::mutex error_mutex_;
  std::exception_ptr read_error_;
  std::once_flag shutdown_once_;
};

}  // namespace

std::pair<std::unique_ptr<Link>, std::unique_ptr<Link>> make_in_process_link() {
  auto forward = std::make_shared<FrameQueue>();
  auto backward = std::make_shared<FrameQueue>();
  return {std::make_unique<InProcessLink>(backward, forward), std::make_unique<InProcessLink>(forward, backward)};
}

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError(fmt::format("expected host:port, got '{}'", text));
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  if (e.host == "localhost") {
    e.host = "127.0.0.1";
  }
  unsigned long port = 0;
  for (char ch : text.substr(colon + 1)) {
    if (ch < '0' || ch > '9') {
      throw ConfigError(fmt::format("invalid port in '{}'", text));
    }
    port = port * 10 + static_cast<unsigned long>(ch - '0');
    if (port > 65535) {
      throw ConfigError(fmt::format("port out of range in '{}'", text));
    }
  }
  e.port = static_cast<std::uint16_t>(port);
  to_sockaddr(e);
  return e;
}

std::string Endpoint::str() const { return fmt::format("{}:{}", host, port); }

TcpListener::TcpListener(const Endpoint& where) {
  const sockaddr_in addr = to_sockaddr(where);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) {
    throw TransportError(fmt::format("socket: {}", errno_text()));
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 4) != 0) {
    const std::string err = errno_text();
    ::close(fd_);
    fd_ = -1;
    throw TransportError(fmt::format("cannot listen on {}: {}", where.str(), err));
  }
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) {
      ::close(fd_);
    }
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Endpoint TcpListener::local() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  char host[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr.sin_addr, host, sizeof(host));
  return Endpoint{host, ntohs(addr.sin_port)};
}

std::unique_ptr<Link> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      return std::make_unique<TcpLink>(fd);
    }
    if (errno != EINTR) {
      throw TransportError(fmt::format("accept: {}", errno_text()));
    }
  }
}

std::unique_ptr<Link> tcp_connect(const Endpoint& where, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = to_sockaddr(where);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
      throw TransportError(fmt::format("socket: {}", errno_text()));
    }
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      return std::make_unique<TcpLink>(fd);
    }
    const std::string err = errno_text();
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TransportError(fmt::format("cannot connect to {}: {}", where.str(), err));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace chameleon::netsim
