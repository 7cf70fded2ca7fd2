#pragma once

#include <stdexcept>
#include <string>

namespace rmab {

/// Malformed input: bad matrices, invalid models, broken scenario files.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regenerative prefix (SB1) failed to hit its anchor within the cap.
class WatchdogAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmab
