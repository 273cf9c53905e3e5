#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rnf {

// A negative finding about the tangential sites (valid run, exit status 2).
struct Diagnostic {
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

// Raised when the sampled parameters sit too close to a discriminant or a
// region boundary for the numerical branch bookkeeping to be trusted.
class RegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rnf
