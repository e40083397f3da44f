#pragma once

#include <stdexcept>
#include <string>

namespace loopsched {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A config file failed validation; message names the file and key.
struct ConfigError : Error {
  using Error::Error;
};

/// A spatial factor does not divide its loop dimension.
struct NonDivisibleUnrolling : Error {
  using Error::Error;
};

/// A single innermost iteration cannot fit the lowest serving level.
struct InfeasibleLowestLevel : Error {
  using Error::Error;
};

/// The ordering space exceeds the configured enumeration cap.
struct SpaceTooLarge : Error {
  using Error::Error;
};

/// The simulation iteration budget was exceeded.
struct BudgetExceeded : Error {
  using Error::Error;
};

/// Requested objective metric is reserved but not implemented.
struct UnsupportedMetric : Error {
  using Error::Error;
};

}  // namespace loopsched
