#ifndef MRSQ_COMMON_ERRORS_H_
#define MRSQ_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mrsq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or mismatched shapes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad value supplied to an operation (non-finite reward, out-of-range action).
class InputError : public Error {
 public:
  using Error::Error;
};

// An operation was called before its precondition held (empty replay, etc.).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during an update. The update is not applied.
class TrainingFault : public Error {
 public:
  using Error::Error;
};

// Environment reached a non-finite state.
class EnvironmentFault : public Error {
 public:
  using Error::Error;
};

class UnsupportedFeature : public Error {
 public:
  using Error::Error;
};

}  // namespace mrsq

#endif  // MRSQ_COMMON_ERRORS_H_
