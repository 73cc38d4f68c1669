#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ebd {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value is outside the operation's domain.
class InputDomainError : public Error {
 public:
  using Error::Error;
};

// An enumeration would exceed its configured state cap.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t cap)
      : Error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

// Backend data violated its contract (e.g. a non-finite reward).
class DataError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the object's current state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Remote backend could not be reached after all retries.
class BackendUnavailable : public Error {
 public:
  BackendUnavailable(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

// Remote backend answered with a 4xx status.
class RequestRejected : public Error {
 public:
  RequestRejected(int status, const std::string& server_message)
      : Error("request rejected (HTTP " + std::to_string(status) +
              "): " + server_message),
        status_(status),
        server_message_(server_message) {}
  int status() const noexcept { return status_; }
  const std::string& server_message() const noexcept { return server_message_; }

 private:
  int status_;
  std::string server_message_;
};

}  // namespace ebd
