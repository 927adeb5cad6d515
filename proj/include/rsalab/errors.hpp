#pragma once

#include <stdexcept>

namespace rsalab {

// A lazy cone exploration exceeded its hard radius cap. Surfacing the
// pathology beats silently truncating the cone and biasing the output.
struct ConeCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rsalab
