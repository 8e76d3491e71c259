#pragma once

#include <stdexcept>
#include <string>

namespace mmw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NotACycle : Error {
  using Error::Error;
};

// The cycle is not a boundary: no (n+1)-chain fills it.
struct EssentialCycle : Error {
  using Error::Error;
};

// Two fillings of equal mass; the minimal one is not unique.
struct FillingTie : Error {
  using Error::Error;
};

struct DegenerateLevel : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

struct RefinementBudget : Error {
  using Error::Error;
};

struct PreconditionFailed : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace mmw
