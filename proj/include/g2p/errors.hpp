#pragma once

#include <stdexcept>
#include <string>

namespace g2p {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File missing or unreadable. The CLI maps this to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// Document parsed but does not conform to the schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A domain invariant is violated (out-of-range id, overlapping split, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration: unknown relation/attribute name, bad override, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Credential missing or rejected. Never retried; CLI maps to exit code 2.
class AuthError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure that survived the retry budget.
class GatewayError : public Error {
 public:
  using Error::Error;
};

// Response arrived but its body is not the expected chat-completion shape.
class MalformedResponseError : public Error {
 public:
  using Error::Error;
};

}  // namespace g2p
