#pragma once

#include <stdexcept>
#include <string>

namespace tttbench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Illegal move or malformed game state.
class InvalidMove : public Error {
 public:
  using Error::Error;
};

/// Bad user configuration or flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or inconsistent dataset / ledger / report contents.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

/// The endpoint rejected our credentials. Aborts a collection run.
class AuthError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

}  // namespace tttbench
