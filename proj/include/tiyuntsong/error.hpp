#pragma once

#include <stdexcept>

namespace tiyuntsong {

/// Raised when an input file, configuration value or call argument violates
/// a documented precondition. The CLI maps it to exit code 1; every other
/// exception is treated as a runtime failure.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tiyuntsong
