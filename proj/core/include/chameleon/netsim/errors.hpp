#pragma once

#include <memory>
#include <string>

#include "chameleon/error.hpp"
#include "chameleon/netsim/transcript.hpp"

namespace chameleon::netsim {

/// Failure of a session; carries whatever was captured before the failure.
class SessionError : public Error {
 public:
  explicit SessionError(const std::string& what, Transcript partial = {})
      : Error(what), partial_(std::make_shared<Transcript>(std::move(partial))) {}

  [[nodiscard]] const Transcript& partial_transcript() const { return *partial_; }

 private:
  std::shared_ptr<Transcript> partial_;
};

/// Connection lost, refused, or a framing violation on the wire.
class TransportError : public SessionError {
 public:
  using SessionError::SessionError;
};

/// A well-framed message that breaks the protocol (unknown or duplicated reply index,
/// unexpected kind, bad schema).
class ProtocolError : public SessionError {
 public:
  using SessionError::SessionError;
};

}  // namespace chameleon::netsim
