#pragma once

#include <stdexcept>
#include <string>

namespace amod {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// ConfigError -> 1, DataError -> 2, NumericError -> 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace amod
